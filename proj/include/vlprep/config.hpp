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

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "vlprep/curate.hpp"
#include "vlprep/frame_sampler.hpp"
#include "vlprep/sequence.hpp"
#include "vlprep/tra_budget.hpp"

namespace vlprep {

enum class SamplingMode { Tra, Codec };

/// Flat key=value pipeline settings. See configs/*.conf for annotated
/// examples; '#' starts a comment.
struct PipelineConfig {
  int patch_size = kDefaultPatchSize;
  std::int64_t t_max = kVisualTokenBudget;
  std::int64_t t_min = kDefaultMinFrameTokens;
  std::int64_t context_limit = kContextTokenLimit;
  std::int64_t visual_limit = kVisualTokenLimit;
  double fps = 1.0;
  int max_frames = 180;
  double key_threshold = 0.15;
  double ratio = kDefaultKeyRatio;
  std::uint64_t seed = 0;
  SamplingMode mode = SamplingMode::Tra;

  // curation
  int k_per_level = 8;
  int depth = 2;
  double sample_fraction = 1.0;
  int kmeans_iters = 25;
  int per_cluster = 4;
  double dedup_distance = 0.0;  // 0 disables near-duplicate suppression

  /// Enforces max_frames * t_min <= t_max among others.
  void validate() const;

  SamplerConfig sampler() const { return {fps, max_frames, key_threshold}; }
  BudgetConfig budget() const { return {t_max, t_min, ratio}; }
  SequenceLimits limits() const { return {visual_limit, context_limit}; }
  HierarchicalConfig hierarchy() const {
    return {k_per_level, depth, sample_fraction, seed, kmeans_iters};
  }
};

/// Parses and validates. Unknown keys and malformed values throw
/// ValidationError naming the line.
PipelineConfig parse_config(std::string_view text);
PipelineConfig load_config(const std::filesystem::path& path);

}  // namespace vlprep
