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

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "vlprep/geometry.hpp"

namespace vlprep {

enum class FrameClass { Key, Intermediate };

std::string_view to_string(FrameClass c);
FrameClass frame_class_from_string(std::string_view s);

/// Grayscale thumbnail, luminance in [0,1].
using Thumbnail = Eigen::ArrayXXd;

struct VideoMeta {
  double duration = 0.0;  // seconds
  PixelSize native_size;
  std::optional<std::vector<double>> iframe_times;
};

struct SampledFrame {
  double timestamp = 0.0;
  FrameClass cls = FrameClass::Key;

  friend bool operator==(const SampledFrame&, const SampledFrame&) = default;
};

struct SamplerConfig {
  double fps = 1.0;
  int max_frames = 180;
  double key_threshold = 0.15;

  /// 1 fps, 180 frames.
  static SamplerConfig training() { return {1.0, 180, 0.15}; }
  /// Up to 3 fps, 300 frames.
  static SamplerConfig inference() { return {3.0, 300, 0.15}; }

  void validate() const;
};

/// Frames at 0, 1/fps, 2/fps, ... below duration. Switches to
/// sample_uniform(duration, max_frames) when that would exceed the cap.
std::vector<double> sample_fixed_fps(const VideoMeta& meta,
                                     const SamplerConfig& cfg);

/// Bin centers (i + 0.5) * duration / n.
std::vector<double> sample_uniform(double duration, int n);

/// n indices out of `count`, one per equal-width bin (center of bin).
std::vector<std::size_t> uniform_indices(std::size_t count, std::size_t n);

/// Mean absolute luminance difference.
double mean_abs_diff(const Thumbnail& a, const Thumbnail& b);

/// Frame 0 is Key. Later frames are Key when they differ from the most
/// recent Key by more than cfg.key_threshold.
std::vector<FrameClass> classify_frames(std::span<const Thumbnail> thumbnails,
                                        const SamplerConfig& cfg);

/// Keys at I-frames, intermediates at cfg.fps inside each I-frame interval.
/// Over the frame cap, I-frames are uniformly subsampled and intermediates
/// are dropped from the shortest intervals first.
std::vector<SampledFrame> sample_tra_codec(const VideoMeta& meta,
                                           const SamplerConfig& cfg);

}  // namespace vlprep
