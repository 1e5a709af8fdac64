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

// Record-level pipeline: video metadata in, sampled frames and token plans
// out, each as one JSON object per line.
//
// Video metadata record:
//   {"id": "clip-1", "duration": 90.0, "width": 1280, "height": 720,
//    "iframes": [0.0, 4.2, ...],                      // optional
//    "thumbs": [{"t": 0.0, "w": 32, "h": 32, "y": [...]}, ...]}  // optional
//
// "y" holds h*w luminance values in [0,1], row-major. In tra mode each
// sampled frame is classified against the thumbnail nearest its timestamp;
// without thumbnails every frame is a key frame. In codec mode key frames
// come from "iframes".
//
// Plan record:
//   {"id": ..., "mode": "tra", "stage": 2, "alpha": 0.61, "total": 10230,
//    "frames": [{"t": 0.0, "class": "key", "tokens": 560, "grid": [28, 20]}, ...]}

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "vlprep/config.hpp"
#include "vlprep/frame_sampler.hpp"
#include "vlprep/sequence.hpp"
#include "vlprep/tra_budget.hpp"

namespace vlprep {

struct TimedThumbnail {
  double timestamp = 0.0;
  Thumbnail luma;
};

struct VideoRecord {
  std::string id;
  VideoMeta meta;
  std::vector<TimedThumbnail> thumbs;
};

struct VideoPlan {
  std::string id;
  SamplingMode mode = SamplingMode::Tra;
  std::vector<SampledFrame> frames;
  BudgetPlan budget;
};

/// Parses one metadata line. Throws ValidationError on bad fields.
VideoRecord parse_video_record(std::string_view line);

/// LLM-side grids: key frames get the merged native grid, intermediate
/// frames that grid with each side scaled by 1/sqrt(ratio) and rounded to
/// nearest (raised to t_min if needed).
PatchGrid key_frame_grid(PixelSize size, const PipelineConfig& cfg);
PatchGrid intermediate_frame_grid(const PatchGrid& key_grid, const PipelineConfig& cfg);

/// Sampling plus classification per cfg.mode.
std::vector<SampledFrame> sample_video(const VideoRecord& video, const PipelineConfig& cfg);

VideoPlan plan_video(const VideoRecord& video, const PipelineConfig& cfg);

std::string sample_record_json(const VideoRecord& video,
                               const std::vector<SampledFrame>& frames);
std::string plan_record_json(const VideoPlan& plan);

struct PlannedFrame {
  double timestamp = 0.0;
  FrameClass cls = FrameClass::Key;
  std::int64_t tokens = 1;
};

struct PlanRecord {
  std::string id;
  std::vector<PlannedFrame> frames;
};

PlanRecord parse_plan_record(std::string_view line);

/// Video-layout sequence for a plan. Timestamps snap to 0.1 s.
TokenSequence pack_plan(const PlanRecord& plan, std::string text,
                        const SequenceLimits& limits);

}  // namespace vlprep
