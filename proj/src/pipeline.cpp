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

#include "vlprep/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "vlprep/error.hpp"

namespace vlprep {

using nlohmann::json;

namespace {

std::string_view mode_name(SamplingMode m) {
  return m == SamplingMode::Codec ? "codec" : "tra";
}

// Thumbnail closest in time to t; earlier wins ties.
const Thumbnail& nearest_thumb(const std::vector<TimedThumbnail>& sorted, double t) {
  auto it = std::lower_bound(sorted.begin(), sorted.end(), t,
                             [](const TimedThumbnail& a, double v) { return a.timestamp < v; });
  if (it == sorted.end()) return sorted.back().luma;
  if (it == sorted.begin()) return it->luma;
  const auto prev = std::prev(it);
  return (t - prev->timestamp <= it->timestamp - t) ? prev->luma : it->luma;
}

}  // namespace

VideoRecord parse_video_record(std::string_view line) {
  VideoRecord v;
  try {
    const json j = json::parse(line);
    v.id = j.at("id").get<std::string>();
    v.meta.duration = j.at("duration").get<double>();
    v.meta.native_size = {j.at("width").get<int>(), j.at("height").get<int>()};
    if (j.contains("iframes")) v.meta.iframe_times = j["iframes"].get<std::vector<double>>();
    if (j.contains("thumbs")) {
      for (const auto& t : j["thumbs"]) {
        const int w = t.at("w").get<int>();
        const int h = t.at("h").get<int>();
        const auto y = t.at("y").get<std::vector<double>>();
        if (w < 1 || h < 1 || y.size() != static_cast<std::size_t>(w) * static_cast<std::size_t>(h)) {
          throw ValidationError("thumbnail size does not match w*h");
        }
        TimedThumbnail tt{t.at("t").get<double>(), Thumbnail(h, w)};
        for (int r = 0; r < h; ++r) {
          for (int c = 0; c < w; ++c) {
            const double value = y[static_cast<std::size_t>(r * w + c)];
            if (!(value >= 0.0 && value <= 1.0)) {
              throw ValidationError("thumbnail luminance outside [0,1]");
            }
            tt.luma(r, c) = value;
          }
        }
        v.thumbs.push_back(std::move(tt));
      }
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed video record: ") + e.what());
  }
  if (!(v.meta.duration > 0.0) || !std::isfinite(v.meta.duration)) {
    throw ValidationError("video '" + v.id + "': duration must be positive");
  }
  if (v.meta.native_size.width < 1 || v.meta.native_size.height < 1) {
    throw ValidationError("video '" + v.id + "': width and height must be positive");
  }
  std::stable_sort(v.thumbs.begin(), v.thumbs.end(),
                   [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });
  return v;
}

PatchGrid key_frame_grid(PixelSize size, const PipelineConfig& cfg) {
  return merge_2x(native_grid(size, cfg.patch_size));
}

PatchGrid intermediate_frame_grid(const PatchGrid& key_grid, const PipelineConfig& cfg) {
  // Sides rounded to nearest, not floored: stage-2 downscaling floors again
  // later, and two stacked floors would skew the key:intermediate ratio.
  const double side_scale = 1.0 / std::sqrt(cfg.ratio);
  auto side = [&](int n) {
    return static_cast<int>(std::clamp<long long>(
        std::llround(n * side_scale), 1, static_cast<long long>(n)));
  };
  const PatchGrid g{side(key_grid.cols), side(key_grid.rows), key_grid.patch_size};
  if (g.tokens() >= cfg.t_min) return g;
  return floor_grid(key_grid, cfg.t_min);
}

std::vector<SampledFrame> sample_video(const VideoRecord& video, const PipelineConfig& cfg) {
  const SamplerConfig sc = cfg.sampler();
  if (cfg.mode == SamplingMode::Codec) return sample_tra_codec(video.meta, sc);

  const std::vector<double> times = sample_fixed_fps(video.meta, sc);
  std::vector<SampledFrame> out(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) out[i].timestamp = times[i];
  if (video.thumbs.empty()) return out;  // no similarity evidence: all key

  std::vector<Thumbnail> picked;
  picked.reserve(times.size());
  for (double t : times) picked.push_back(nearest_thumb(video.thumbs, t));
  const auto classes = classify_frames(picked, sc);
  for (std::size_t i = 0; i < out.size(); ++i) out[i].cls = classes[i];
  return out;
}

VideoPlan plan_video(const VideoRecord& video, const PipelineConfig& cfg) {
  VideoPlan plan;
  plan.id = video.id;
  plan.mode = cfg.mode;
  plan.frames = sample_video(video, cfg);
  const PatchGrid key = key_frame_grid(video.meta.native_size, cfg);
  const PatchGrid inter = intermediate_frame_grid(key, cfg);
  std::vector<FramePlanInput> inputs;
  inputs.reserve(plan.frames.size());
  for (const auto& f : plan.frames) {
    inputs.push_back(FramePlanInput::from_grid(f.cls, f.cls == FrameClass::Key ? key : inter));
  }
  plan.budget = plan_budget(inputs, cfg.budget());
  return plan;
}

std::string sample_record_json(const VideoRecord& video,
                               const std::vector<SampledFrame>& frames) {
  json j;
  j["id"] = video.id;
  json fs = json::array();
  for (const auto& f : frames) {
    fs.push_back({{"t", f.timestamp}, {"class", std::string(to_string(f.cls))}});
  }
  j["frames"] = std::move(fs);
  return j.dump();
}

std::string plan_record_json(const VideoPlan& plan) {
  json j;
  j["id"] = plan.id;
  j["mode"] = std::string(mode_name(plan.mode));
  j["stage"] = plan.budget.stage;
  j["alpha"] = plan.budget.alpha;
  j["total"] = plan.budget.total();
  json fs = json::array();
  for (std::size_t i = 0; i < plan.frames.size(); ++i) {
    json f = {{"t", plan.frames[i].timestamp},
              {"class", std::string(to_string(plan.frames[i].cls))},
              {"tokens", plan.budget.per_frame_tokens[i]}};
    if (const auto& g = plan.budget.grids[i]) f["grid"] = {g->cols, g->rows};
    fs.push_back(std::move(f));
  }
  j["frames"] = std::move(fs);
  return j.dump();
}

PlanRecord parse_plan_record(std::string_view line) {
  PlanRecord p;
  try {
    const json j = json::parse(line);
    p.id = j.at("id").get<std::string>();
    for (const auto& f : j.at("frames")) {
      p.frames.push_back({f.at("t").get<double>(),
                          frame_class_from_string(f.at("class").get<std::string>()),
                          f.at("tokens").get<std::int64_t>()});
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed plan record: ") + e.what());
  }
  return p;
}

TokenSequence pack_plan(const PlanRecord& plan, std::string text,
                        const SequenceLimits& limits) {
  std::vector<FrameBlock> frames;
  frames.reserve(plan.frames.size());
  for (const auto& f : plan.frames) {
    frames.push_back({Timestamp::from_seconds(f.timestamp), f.tokens});
  }
  return pack_video_sequence(frames, TextSpan{std::move(text)}, limits);
}

}  // namespace vlprep
