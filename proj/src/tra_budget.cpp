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

#include "vlprep/tra_budget.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "vlprep/error.hpp"

namespace vlprep {

namespace {

struct Quantized {
  std::int64_t tokens;
  std::optional<PatchGrid> grid;
};

// Largest achievable count <= native * num / den.
Quantized quantize_down(const FramePlanInput& f, std::int64_t num,
                        std::int64_t den) {
  if (f.grid) {
    const PatchGrid g = shrink_grid(*f.grid, num, den);
    return {g.tokens(), g};
  }
  if (num >= den) return {f.native_tokens, std::nullopt};
  const auto t = static_cast<std::int64_t>(
      static_cast<unsigned __int128>(f.native_tokens) * num / den);
  return {std::max<std::int64_t>(1, t), std::nullopt};
}

Quantized clamp_to_floor(const FramePlanInput& f, std::int64_t t_min) {
  if (f.grid) {
    const PatchGrid g = floor_grid(*f.grid, t_min);
    return {g.tokens(), g};
  }
  return {std::min(f.native_tokens, t_min), std::nullopt};
}

}  // namespace

void BudgetConfig::validate(std::optional<int> max_frames) const {
  if (t_min < 1) throw ValidationError("t_min must be >= 1");
  if (t_max < t_min) throw ValidationError("t_max must be >= t_min");
  if (!(ratio >= 1.0) || !std::isfinite(ratio)) {
    throw ValidationError("key ratio must be >= 1");
  }
  if (max_frames && static_cast<std::int64_t>(*max_frames) * t_min > t_max) {
    throw ValidationError(
        "infeasible budget: max_frames * t_min = " +
        std::to_string(static_cast<std::int64_t>(*max_frames) * t_min) +
        " exceeds t_max = " + std::to_string(t_max));
  }
}

std::int64_t BudgetPlan::total() const {
  return std::accumulate(per_frame_tokens.begin(), per_frame_tokens.end(),
                         std::int64_t{0});
}

double compute_alpha(std::int64_t total_native, std::int64_t t_max) {
  if (total_native < 1) throw ValidationError("total_native must be >= 1");
  return std::min(1.0, static_cast<double>(t_max) /
                           static_cast<double>(total_native));
}

BudgetPlan plan_budget(std::span<const FramePlanInput> frames,
                       const BudgetConfig& cfg) {
  if (frames.empty()) throw ValidationError("cannot plan an empty frame list");
  cfg.validate(static_cast<int>(std::min<std::size_t>(frames.size(), INT32_MAX)));

  std::int64_t total = 0;
  for (const auto& f : frames) {
    if (f.native_tokens < 1) throw ValidationError("frame with no tokens");
    if (f.grid && f.grid->tokens() != f.native_tokens) {
      throw ValidationError("frame grid disagrees with native token count");
    }
    total += f.native_tokens;
  }

  BudgetPlan plan;
  plan.per_frame_tokens.reserve(frames.size());
  plan.grids.reserve(frames.size());

  // Stage 1
  if (total <= cfg.t_max) {
    for (const auto& f : frames) {
      plan.per_frame_tokens.push_back(f.native_tokens);
      plan.grids.push_back(f.grid);
    }
    return plan;
  }

  // Stage 2. alpha = t_max / total exactly; the ratio is carried as a
  // fraction so the integer results are exact.
  plan.alpha = compute_alpha(total, cfg.t_max);
  bool floor_hit = false;
  for (const auto& f : frames) {
    const Quantized q = quantize_down(f, cfg.t_max, total);
    if (f.cls == FrameClass::Intermediate && q.tokens < cfg.t_min) {
      floor_hit = true;
    }
    plan.per_frame_tokens.push_back(q.tokens);
    plan.grids.push_back(q.grid);
  }
  if (!floor_hit) {
    plan.stage = 2;
    return plan;
  }

  // Stage 3
  plan.stage = 3;
  std::int64_t intermediate_total = 0;
  std::int64_t key_count = 0;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (frames[i].cls == FrameClass::Intermediate) {
      const Quantized q = clamp_to_floor(frames[i], cfg.t_min);
      plan.per_frame_tokens[i] = q.tokens;
      plan.grids[i] = q.grid;
      intermediate_total += q.tokens;
    } else {
      ++key_count;
    }
  }
  if (key_count == 0) return plan;

  const std::int64_t share = (cfg.t_max - intermediate_total) / key_count;
  if (share < 1) {
    throw ValidationError("budget exhausted by clamped intermediate frames");
  }
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto& f = frames[i];
    if (f.cls != FrameClass::Key) continue;
    // Keys never exceed their stage-2 count: grid quantization can clamp
    // intermediates below alpha * T_i, and handing that slack to the keys
    // would let a tighter budget grow a frame.
    const std::int64_t target = std::min(share, f.native_tokens);
    const Quantized q = quantize_down(f, target, f.native_tokens);
    if (q.tokens >= plan.per_frame_tokens[i]) continue;
    plan.per_frame_tokens[i] = q.tokens;
    plan.grids[i] = q.grid;
  }
  return plan;
}

}  // namespace vlprep
