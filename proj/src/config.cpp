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

#include "vlprep/config.hpp"

#include <charconv>
#include <functional>
#include <map>

#include "vlprep/error.hpp"
#include "vlprep/io.hpp"

namespace vlprep {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(std::string_view v) {
  T out{};
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) {
    throw ValidationError("bad number '" + std::string(v) + "'");
  }
  return out;
}

}  // namespace

void PipelineConfig::validate() const {
  if (patch_size < 1) throw ValidationError("patch_size must be >= 1");
  sampler().validate();
  budget().validate(max_frames);
  if (visual_limit < 1 || context_limit < visual_limit) {
    throw ValidationError("need 1 <= visual_limit <= context_limit");
  }
  if (t_max > visual_limit) {
    throw ValidationError("t_max exceeds the visual token limit");
  }
  hierarchy().validate();
  if (per_cluster < 0) throw ValidationError("per_cluster must be >= 0");
  if (!(dedup_distance >= 0.0)) throw ValidationError("dedup_distance must be >= 0");
}

PipelineConfig parse_config(std::string_view text) {
  PipelineConfig cfg;
  using Setter = std::function<void(std::string_view)>;
  const std::map<std::string, Setter, std::less<>> setters = {
      {"patch_size", [&](auto v) { cfg.patch_size = parse_number<int>(v); }},
      {"t_max", [&](auto v) { cfg.t_max = parse_number<std::int64_t>(v); }},
      {"t_min", [&](auto v) { cfg.t_min = parse_number<std::int64_t>(v); }},
      {"context_limit", [&](auto v) { cfg.context_limit = parse_number<std::int64_t>(v); }},
      {"visual_limit", [&](auto v) { cfg.visual_limit = parse_number<std::int64_t>(v); }},
      {"fps", [&](auto v) { cfg.fps = parse_number<double>(v); }},
      {"max_frames", [&](auto v) { cfg.max_frames = parse_number<int>(v); }},
      {"key_threshold", [&](auto v) { cfg.key_threshold = parse_number<double>(v); }},
      {"ratio", [&](auto v) { cfg.ratio = parse_number<double>(v); }},
      {"seed", [&](auto v) { cfg.seed = parse_number<std::uint64_t>(v); }},
      {"mode",
       [&](auto v) {
         if (v == "tra") {
           cfg.mode = SamplingMode::Tra;
         } else if (v == "codec") {
           cfg.mode = SamplingMode::Codec;
         } else {
           throw ValidationError("mode must be 'tra' or 'codec'");
         }
       }},
      {"k_per_level", [&](auto v) { cfg.k_per_level = parse_number<int>(v); }},
      {"depth", [&](auto v) { cfg.depth = parse_number<int>(v); }},
      {"sample_fraction", [&](auto v) { cfg.sample_fraction = parse_number<double>(v); }},
      {"kmeans_iters", [&](auto v) { cfg.kmeans_iters = parse_number<int>(v); }},
      {"per_cluster", [&](auto v) { cfg.per_cluster = parse_number<int>(v); }},
      {"dedup_distance", [&](auto v) { cfg.dedup_distance = parse_number<double>(v); }},
  };

  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = "config line " + std::to_string(line_no) + ": ";
    if (eq == std::string_view::npos) throw ValidationError(where + "expected key = value");
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    const auto it = setters.find(key);
    if (it == setters.end()) {
      throw ValidationError(where + "unknown key '" + std::string(key) + "'");
    }
    try {
      it->second(value);
    } catch (const ValidationError& e) {
      throw ValidationError(where + e.what());
    }
  }
  cfg.validate();
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_file(path));
}

}  // namespace vlprep
