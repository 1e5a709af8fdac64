// Copyright 2026 The vlprep Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Patch-grid arithmetic and grounding-coordinate normalization.
//
// A visual token is one patch. Budgets are hard caps, so every resize
// floors: a grid produced here never holds more tokens than requested.

#pragma once

#include <cstdint>

namespace vlprep {

inline constexpr int kDefaultPatchSize = 16;
inline constexpr int kGroundingScale = 1000;

struct PixelSize {
  int width = 1;
  int height = 1;

  friend bool operator==(const PixelSize&, const PixelSize&) = default;
};

struct PatchGrid {
  int cols = 1;
  int rows = 1;
  int patch_size = kDefaultPatchSize;

  std::int64_t tokens() const {
    return static_cast<std::int64_t>(cols) * rows;
  }

  friend bool operator==(const PatchGrid&, const PatchGrid&) = default;
};

/// Axis-aligned pixel rectangle, corners inclusive of the image border.
struct PixelBox {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;

  friend bool operator==(const PixelBox&, const PixelBox&) = default;
};

/// Box in the integer [0,1000] grounding space; (0,0) is the top-left corner.
struct BBox1000 {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;

  bool valid() const {
    return 0 <= x0 && x0 <= x1 && x1 <= kGroundingScale && 0 <= y0 &&
           y0 <= y1 && y1 <= kGroundingScale;
  }

  friend bool operator==(const BBox1000&, const BBox1000&) = default;
};

/// floor(width/patch) x floor(height/patch), each side clamped to >= 1.
PatchGrid native_grid(PixelSize size, int patch_size);

/// Largest aspect-preserving grid whose area is at most max_tokens.
/// Returns the native grid untouched when it already fits.
PatchGrid fit_grid(PixelSize size, int patch_size, std::int64_t max_tokens);

/// Scales both sides by sqrt(num/den) and floors. Sides never drop below 1;
/// when that clamp bites, the other side is cut so the area stays within
/// floor(tokens * num / den) (or 1).
PatchGrid shrink_grid(const PatchGrid& grid, std::int64_t num,
                      std::int64_t den);

/// Smallest shrunk version of `grid` holding at least min_tokens. A grid
/// already at or below min_tokens is returned as is.
PatchGrid floor_grid(const PatchGrid& grid, std::int64_t min_tokens);

/// ceil(cols/factor) x ceil(rows/factor).
PatchGrid downsample_grid(const PatchGrid& grid, int factor);

/// Post-encoder 2x spatial merge used for video frames.
inline PatchGrid merge_2x(const PatchGrid& grid) {
  return downsample_grid(grid, 2);
}

/// Maps pixel corners to round(1000 * coord / dim), half away from zero.
/// Throws ValidationError if the box is inverted or leaves the image.
BBox1000 normalize_bbox(const PixelBox& box, PixelSize size);

/// Inverse map, coord = round(norm * dim / 1000).
PixelBox denormalize_bbox(const BBox1000& box, PixelSize size);

/// floor(sqrt(value)) computed exactly.
std::uint64_t isqrt(unsigned __int128 value);

}  // namespace vlprep
