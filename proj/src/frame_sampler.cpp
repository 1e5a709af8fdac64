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

#include "vlprep/frame_sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "vlprep/error.hpp"

namespace vlprep {

std::string_view to_string(FrameClass c) {
  return c == FrameClass::Key ? "key" : "intermediate";
}

FrameClass frame_class_from_string(std::string_view s) {
  if (s == "key") return FrameClass::Key;
  if (s == "intermediate") return FrameClass::Intermediate;
  throw ValidationError("unknown frame class '" + std::string(s) + "'");
}

void SamplerConfig::validate() const {
  if (!(fps > 0.0) || !std::isfinite(fps)) {
    throw ValidationError("fps must be positive");
  }
  if (max_frames < 1) throw ValidationError("max_frames must be >= 1");
  if (!(key_threshold >= 0.0 && key_threshold <= 1.0)) {
    throw ValidationError("key_threshold must lie in [0,1]");
  }
}

namespace {

void validate_duration(double duration) {
  if (!(duration > 0.0) || !std::isfinite(duration)) {
    throw ValidationError("video duration must be positive");
  }
}

// Number of k >= 0 with k / fps < limit.
std::size_t count_steps_below(double start, double limit, double fps) {
  if (!(start < limit)) return 0;
  auto n = static_cast<std::size_t>(std::ceil((limit - start) * fps));
  while (n > 0 && start + static_cast<double>(n - 1) / fps >= limit) --n;
  while (start + static_cast<double>(n) / fps < limit) ++n;
  return n;
}

}  // namespace

std::vector<double> sample_uniform(double duration, int n) {
  validate_duration(duration);
  if (n < 1) throw ValidationError("uniform sample count must be >= 1");
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = (i + 0.5) * duration / n;
  }
  return out;
}

std::vector<std::size_t> uniform_indices(std::size_t count, std::size_t n) {
  n = std::min(n, count);
  std::vector<std::size_t> out(n);
  for (std::size_t j = 0; j < n; ++j) {
    // floor((j + 0.5) * count / n) in integers.
    out[j] = ((2 * j + 1) * count) / (2 * n);
  }
  return out;
}

std::vector<double> sample_fixed_fps(const VideoMeta& meta,
                                     const SamplerConfig& cfg) {
  cfg.validate();
  validate_duration(meta.duration);
  const std::size_t n = count_steps_below(0.0, meta.duration, cfg.fps);
  if (n > static_cast<std::size_t>(cfg.max_frames)) {
    return sample_uniform(meta.duration, cfg.max_frames);
  }
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = static_cast<double>(k) / cfg.fps;
  return out;
}

double mean_abs_diff(const Thumbnail& a, const Thumbnail& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ValidationError("thumbnails differ in shape");
  }
  if (a.size() == 0) return 0.0;
  return (a - b).abs().mean();
}

std::vector<FrameClass> classify_frames(std::span<const Thumbnail> thumbnails,
                                        const SamplerConfig& cfg) {
  if (thumbnails.empty()) throw ValidationError("no frames to classify");
  std::vector<FrameClass> out;
  out.reserve(thumbnails.size());
  out.push_back(FrameClass::Key);
  std::size_t reference = 0;
  for (std::size_t i = 1; i < thumbnails.size(); ++i) {
    if (mean_abs_diff(thumbnails[i], thumbnails[reference]) > cfg.key_threshold) {
      out.push_back(FrameClass::Key);
      reference = i;
    } else {
      out.push_back(FrameClass::Intermediate);
    }
  }
  return out;
}

std::vector<SampledFrame> sample_tra_codec(const VideoMeta& meta,
                                           const SamplerConfig& cfg) {
  cfg.validate();
  validate_duration(meta.duration);
  if (!meta.iframe_times || meta.iframe_times->empty()) {
    throw ValidationError("codec sampling requires I-frame timestamps");
  }
  const auto& iframes = *meta.iframe_times;
  for (std::size_t i = 0; i < iframes.size(); ++i) {
    if (!(iframes[i] >= 0.0 && iframes[i] < meta.duration)) {
      throw ValidationError("I-frame timestamp outside [0, duration)");
    }
    if (i > 0 && !(iframes[i] > iframes[i - 1])) {
      throw ValidationError("I-frame timestamps must be strictly increasing");
    }
  }

  const auto cap = static_cast<std::size_t>(cfg.max_frames);
  std::vector<double> keys;
  if (iframes.size() > cap) {
    for (std::size_t idx : uniform_indices(iframes.size(), cap)) {
      keys.push_back(iframes[idx]);
    }
  } else {
    keys = iframes;
  }

  struct Interval {
    double start;
    double length;
    std::size_t count;
    std::size_t keep;
  };
  std::vector<Interval> intervals;
  std::size_t total = 0;
  for (std::size_t j = 0; j < keys.size(); ++j) {
    const double end = j + 1 < keys.size() ? keys[j + 1] : meta.duration;
    // Steps m >= 1, so subtract the key itself.
    const std::size_t n = count_steps_below(keys[j], end, cfg.fps) - 1;
    intervals.push_back({keys[j], end - keys[j], n, n});
    total += n;
  }

  const std::size_t budget = cap - keys.size();
  if (total > budget) {
    std::vector<std::size_t> order(intervals.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return intervals[a].length < intervals[b].length;
    });
    std::size_t to_drop = total - budget;
    for (std::size_t idx : order) {
      if (to_drop == 0) break;
      const std::size_t d = std::min(to_drop, intervals[idx].count);
      intervals[idx].keep = intervals[idx].count - d;
      to_drop -= d;
    }
  }

  std::vector<SampledFrame> out;
  out.reserve(keys.size() + std::min(total, budget));
  for (std::size_t j = 0; j < keys.size(); ++j) {
    out.push_back({keys[j], FrameClass::Key});
    const Interval& iv = intervals[j];
    for (std::size_t m : uniform_indices(iv.count, iv.keep)) {
      out.push_back({iv.start + static_cast<double>(m + 1) / cfg.fps,
                     FrameClass::Intermediate});
    }
  }
  return out;
}

}  // namespace vlprep
