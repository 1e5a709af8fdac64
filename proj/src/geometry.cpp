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

#include "vlprep/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vlprep/error.hpp"

namespace vlprep {

namespace {

using u128 = unsigned __int128;

int scaled_side(int side, std::int64_t num, std::int64_t den) {
  // floor(side * sqrt(num/den)) == isqrt(floor(side^2 * num / den))
  const u128 sq = static_cast<u128>(side) * static_cast<u128>(side);
  const u128 target = sq * static_cast<u128>(num) / static_cast<u128>(den);
  return static_cast<int>(std::max<std::uint64_t>(1, isqrt(target)));
}

// round(value * scale / dim) for non-negative inputs, half away from zero.
int rescale_round(int value, int scale, int dim) {
  const std::int64_t n = 2LL * value * scale + dim;
  return static_cast<int>(n / (2LL * dim));
}

}  // namespace

std::uint64_t isqrt(u128 value) {
  if (value == 0) return 0;
  auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<long double>(value)));
  while (static_cast<u128>(r) * r > value) --r;
  while (static_cast<u128>(r + 1) * (r + 1) <= value) ++r;
  return r;
}

PatchGrid native_grid(PixelSize size, int patch_size) {
  if (patch_size < 1) throw ValidationError("patch_size must be >= 1");
  return PatchGrid{std::max(1, size.width / patch_size),
                   std::max(1, size.height / patch_size), patch_size};
}

PatchGrid shrink_grid(const PatchGrid& grid, std::int64_t num,
                      std::int64_t den) {
  if (den < 1 || num < 0) throw ValidationError("invalid shrink ratio");
  if (num >= den) return grid;
  PatchGrid out{scaled_side(grid.cols, num, den),
                scaled_side(grid.rows, num, den), grid.patch_size};
  const auto cap = std::max<std::int64_t>(
      1, static_cast<std::int64_t>(static_cast<u128>(grid.tokens()) * num / den));
  if (out.tokens() > cap) {
    // Only reachable through the 1-side clamp.
    if (out.rows == 1) out.cols = static_cast<int>(std::min<std::int64_t>(out.cols, cap));
    if (out.cols == 1) out.rows = static_cast<int>(std::min<std::int64_t>(out.rows, cap));
  }
  return out;
}

PatchGrid fit_grid(PixelSize size, int patch_size, std::int64_t max_tokens) {
  const PatchGrid native = native_grid(size, patch_size);
  if (max_tokens < 1) max_tokens = 1;
  if (native.tokens() <= max_tokens) return native;
  return shrink_grid(native, max_tokens, native.tokens());
}

PatchGrid floor_grid(const PatchGrid& grid, std::int64_t min_tokens) {
  const std::int64_t area = grid.tokens();
  if (area <= min_tokens) return grid;
  // shrink_grid(grid, m, area).tokens() is non-decreasing in m.
  std::int64_t lo = std::max<std::int64_t>(1, min_tokens);
  std::int64_t hi = area;
  while (lo < hi) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    if (shrink_grid(grid, mid, area).tokens() >= min_tokens) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return shrink_grid(grid, lo, area);
}

PatchGrid downsample_grid(const PatchGrid& grid, int factor) {
  if (factor < 1) throw ValidationError("downsample factor must be >= 1");
  return PatchGrid{(grid.cols + factor - 1) / factor,
                   (grid.rows + factor - 1) / factor, grid.patch_size};
}

BBox1000 normalize_bbox(const PixelBox& box, PixelSize size) {
  if (size.width < 1 || size.height < 1) {
    throw ValidationError("image size must be positive");
  }
  if (box.x0 < 0 || box.y0 < 0 || box.x0 > box.x1 || box.y0 > box.y1 ||
      box.x1 > size.width || box.y1 > size.height) {
    throw ValidationError("box (" + std::to_string(box.x0) + "," +
                          std::to_string(box.y0) + "," +
                          std::to_string(box.x1) + "," +
                          std::to_string(box.y1) + ") outside " +
                          std::to_string(size.width) + "x" +
                          std::to_string(size.height) + " image");
  }
  return BBox1000{rescale_round(box.x0, kGroundingScale, size.width),
                  rescale_round(box.y0, kGroundingScale, size.height),
                  rescale_round(box.x1, kGroundingScale, size.width),
                  rescale_round(box.y1, kGroundingScale, size.height)};
}

PixelBox denormalize_bbox(const BBox1000& box, PixelSize size) {
  if (!box.valid()) throw ValidationError("bbox outside [0,1000]");
  return PixelBox{rescale_round(box.x0, size.width, kGroundingScale),
                  rescale_round(box.y0, size.height, kGroundingScale),
                  rescale_round(box.x1, size.width, kGroundingScale),
                  rescale_round(box.y1, size.height, kGroundingScale)};
}

}  // namespace vlprep
