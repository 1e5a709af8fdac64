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

// Temporal-redundancy-aware token budgeting.
//
// A video's sampled frames are either key frames or intermediate frames,
// the latter natively ~1/ratio the tokens of a key frame. plan_budget fits
// the whole video into a global budget in three stages:
//
//   1. passthrough: native counts already fit.
//   2. synchronous downscaling: every frame scaled by the same
//      alpha = t_max / total, quantized down.
//   3. saturation: intermediates sit at the floor t_min and the remaining
//      budget is split evenly across key frames, each capped at its
//      stage-2 count.
//
// Token counts here are LLM-side, i.e. after the 2x post-encoder merge.

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "vlprep/frame_sampler.hpp"
#include "vlprep/geometry.hpp"

namespace vlprep {

inline constexpr std::int64_t kVisualTokenBudget = 10240;
inline constexpr std::int64_t kDefaultMinFrameTokens = 16;
inline constexpr double kDefaultKeyRatio = 16.0;

struct FramePlanInput {
  FrameClass cls = FrameClass::Key;
  std::int64_t native_tokens = 1;
  /// When present, native_tokens == grid->tokens() and quantization picks
  /// aspect-preserving grids. Without a grid, counts quantize by floor.
  std::optional<PatchGrid> grid;

  static FramePlanInput from_grid(FrameClass cls, const PatchGrid& grid) {
    return FramePlanInput{cls, grid.tokens(), grid};
  }
};

struct BudgetConfig {
  std::int64_t t_max = kVisualTokenBudget;
  std::int64_t t_min = kDefaultMinFrameTokens;
  double ratio = kDefaultKeyRatio;

  /// Checks t_max >= t_min >= 1, ratio >= 1 and, when max_frames is given,
  /// max_frames * t_min <= t_max.
  void validate(std::optional<int> max_frames = std::nullopt) const;
};

struct BudgetPlan {
  std::vector<std::int64_t> per_frame_tokens;
  /// Final grid per frame, for frames planned with a grid.
  std::vector<std::optional<PatchGrid>> grids;
  int stage = 1;
  double alpha = 1.0;

  std::int64_t total() const;
};

/// min(1, t_max / total_native).
double compute_alpha(std::int64_t total_native, std::int64_t t_max);

/// Throws ValidationError on an empty frame list or an infeasible config
/// (frames * t_min > t_max).
BudgetPlan plan_budget(std::span<const FramePlanInput> frames,
                       const BudgetConfig& cfg);

}  // namespace vlprep
