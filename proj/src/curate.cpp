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

#include "vlprep/curate.hpp"

namespace vlprep {

double motion_score(std::span<const Thumbnail> frames) {
  if (frames.size() < 2) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 1; i < frames.size(); ++i) {
    sum += mean_abs_diff(frames[i], frames[i - 1]);
  }
  return sum / static_cast<double>(frames.size() - 1);
}

std::vector<bool> motion_filter(std::span<const std::vector<Thumbnail>> videos,
                                double threshold) {
  std::vector<bool> keep;
  keep.reserve(videos.size());
  for (const auto& v : videos) {
    keep.push_back(v.size() >= 2 && motion_score(v) >= threshold);
  }
  return keep;
}

std::vector<std::size_t> duration_aware_sample(std::span<const double> durations,
                                               int buckets, int per_bucket_quota,
                                               std::uint64_t seed) {
  if (buckets < 1) throw ValidationError("buckets must be >= 1");
  if (per_bucket_quota < 0) throw ValidationError("quota must be >= 0");
  if (durations.empty()) return {};
  for (double d : durations) {
    if (!std::isfinite(d) || d < 0) throw ValidationError("bad video duration");
  }
  const auto [lo_it, hi_it] = std::minmax_element(durations.begin(), durations.end());
  const double lo = *lo_it;
  const double width = *hi_it - lo;

  std::vector<std::vector<std::size_t>> bins(static_cast<std::size_t>(buckets));
  for (std::size_t i = 0; i < durations.size(); ++i) {
    std::size_t b = 0;
    if (width > 0) {
      b = static_cast<std::size_t>(std::floor((durations[i] - lo) / width * buckets));
      b = std::min(b, static_cast<std::size_t>(buckets - 1));
    }
    bins[b].push_back(i);
  }

  std::vector<std::size_t> out;
  const auto quota = static_cast<std::size_t>(per_bucket_quota);
  for (std::size_t b = 0; b < bins.size(); ++b) {
    auto& bin = bins[b];
    if (bin.size() > quota) {
      SeededRng rng(mix_seed(seed + 0x9E3779B97F4A7C15ULL * (b + 1)));
      for (std::size_t i = 0; i < quota; ++i) {
        const std::size_t j = i + rng.below(bin.size() - i);
        std::swap(bin[i], bin[j]);
      }
      bin.resize(quota);
    }
    out.insert(out.end(), bin.begin(), bin.end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace vlprep
