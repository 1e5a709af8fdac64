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

// vlprep: batch frontend. Every command reads line-delimited records and
// writes its whole output at the end, so a failed run leaves no partial
// file. Exit codes: 0 success, 1 validation failure, 2 I/O failure.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "vlprep/config.hpp"
#include "vlprep/curate.hpp"
#include "vlprep/error.hpp"
#include "vlprep/io.hpp"
#include "vlprep/numeric_checks.hpp"
#include "vlprep/pipeline.hpp"

namespace {

using namespace vlprep;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;

  PipelineConfig load() const {
    PipelineConfig cfg = config.empty() ? PipelineConfig{} : load_config(config);
    if (seed) cfg.seed = *seed;
    cfg.validate();
    return cfg;
  }

  void emit(const std::string& bytes) const {
    if (out.empty() || out == "-") {
      std::fwrite(bytes.data(), 1, bytes.size(), stdout);
      if (std::fflush(stdout) != 0) throw IoError("error writing stdout");
    } else {
      write_file(out, bytes);
    }
  }
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "key=value config file (defaults if omitted)");
  cmd->add_option("--seed", c.seed, "override the config seed");
  cmd->add_option("--out", c.out, "output file ('-' or omitted: stdout)");
}

std::string where(std::size_t line_no, const std::string& what) {
  return "record " + std::to_string(line_no + 1) + ": " + what;
}

// Runs fn over each metadata line; the first bad record aborts the run.
template <typename Fn>
std::string per_video(const std::string& path, Fn&& fn) {
  std::string out;
  const auto lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string id;
    try {
      const VideoRecord video = parse_video_record(lines[i]);
      id = video.id;
      out += fn(video);
      out += '\n';
    } catch (const ValidationError& e) {
      throw ValidationError(where(i, (id.empty() ? "" : "'" + id + "' ") + e.what()));
    }
  }
  return out;
}

int run_plan(const Common& c, const std::string& videos) {
  const PipelineConfig cfg = c.load();
  c.emit(per_video(videos, [&](const VideoRecord& v) { return plan_record_json(plan_video(v, cfg)); }));
  return kExitOk;
}

int run_sample(const Common& c, const std::string& videos) {
  const PipelineConfig cfg = c.load();
  c.emit(per_video(videos, [&](const VideoRecord& v) {
    return sample_record_json(v, sample_video(v, cfg));
  }));
  return kExitOk;
}

int run_pack(const Common& c, const std::string& plans_path, const std::string& text_path,
             const std::string& records_path) {
  const PipelineConfig cfg = c.load();
  const auto plans = read_lines(plans_path);
  const auto texts = text_path.empty() ? std::vector<std::string>{} : read_lines(text_path);
  if (texts.size() > 1 && texts.size() != plans.size()) {
    throw ValidationError("text file has " + std::to_string(texts.size()) +
                          " lines for " + std::to_string(plans.size()) +
                          " plans; give one line per plan or a single shared line");
  }
  std::string display, records;
  int failures = 0;
  for (std::size_t i = 0; i < plans.size(); ++i) {
    std::string id;
    try {
      const PlanRecord plan = parse_plan_record(plans[i]);
      id = plan.id;
      const std::string text = texts.empty() ? "" : texts.size() == 1 ? texts[0] : texts[i];
      const TokenSequence seq = pack_plan(plan, text, cfg.limits());
      display += to_display(seq);
      display += '\x1E';  // ASCII record separator; display text holds '\n'
      records += to_record(seq, plan.id);
      records += '\n';
    } catch (const ValidationError& e) {
      // Limit violations are per record: report and keep going.
      ++failures;
      std::cerr << "vlprep pack: "
                << where(i, (id.empty() ? "" : "'" + id + "' ") + e.what()) << '\n';
    }
  }
  if (!records_path.empty()) write_file(records_path, records);
  c.emit(display);
  return failures == 0 ? kExitOk : kExitValidation;
}

int run_check(const Common& c, const std::string& dims, int trials, bool corrupt) {
  CheckOptions opts;
  const auto x = dims.find('x');
  try {
    if (x == std::string::npos) throw std::invalid_argument(dims);
    std::size_t used = 0;
    opts.rows = std::stoi(dims.substr(0, x), &used);
    if (used != x) throw std::invalid_argument(dims);
    opts.cols = std::stoi(dims.substr(x + 1), &used);
    if (used != dims.size() - x - 1) throw std::invalid_argument(dims);
  } catch (const std::logic_error&) {
    throw ValidationError("--dims expects ROWSxCOLS, got '" + dims + "'");
  }
  opts.trials = trials;
  opts.rope_trials = 10 * trials;
  opts.seed = c.seed.value_or(c.config.empty() ? 0 : load_config(c.config).seed);
  opts.corrupt_gradient = corrupt;
  const CheckReport report = run_numeric_checks(opts);
  c.emit(report.format());
  return report.all_pass() ? kExitOk : kExitValidation;
}

int run_curate(const Common& c, const std::string& emb_path, const std::string& ids_path) {
  const PipelineConfig cfg = c.load();
  const auto set = read_embedding_set<double>(emb_path, ids_path);
  const auto tree = kmeans_hierarchical(set.vectors, cfg.hierarchy());
  std::string out;
  int leaf_no = 0;
  for (int leaf : tree.leaves()) {
    const auto& members = tree.nodes[static_cast<std::size_t>(leaf)].members;
    Matrix<double> sub(static_cast<Eigen::Index>(members.size()), set.vectors.cols());
    for (std::size_t r = 0; r < members.size(); ++r) {
      sub.row(static_cast<Eigen::Index>(r)) = set.vectors.row(members[r]);
    }
    const int n = std::min<int>(cfg.per_cluster, static_cast<int>(members.size()));
    const auto picks = greedy_diverse_select(sub, n, cfg.dedup_distance);
    for (std::size_t rank = 0; rank < picks.size(); ++rank) {
      const nlohmann::json j = {
          {"id", set.ids[static_cast<std::size_t>(members[static_cast<std::size_t>(picks[rank])])]},
          {"leaf", leaf_no},
          {"rank", rank}};
      out += j.dump();
      out += '\n';
    }
    ++leaf_no;
  }
  c.emit(out);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vlprep: deterministic pre-model pipeline for vision-language data"};
  app.require_subcommand(1);

  Common plan_c, sample_c, pack_c, check_c, curate_c;
  std::string plan_in, sample_in, pack_plans, pack_text, pack_records;
  std::string dims = "8x16", emb_path, ids_path;
  int trials = 100;
  bool corrupt = false;

  auto* plan = app.add_subcommand("plan", "sample, classify and budget each video");
  add_common(plan, plan_c);
  plan->add_option("videos", plan_in, "video metadata JSONL")->required();

  auto* sample = app.add_subcommand("sample", "sampled timestamps and frame classes per video");
  add_common(sample, sample_c);
  sample->add_option("videos", sample_in, "video metadata JSONL")->required();

  auto* pack = app.add_subcommand("pack", "pack plans and prompts into token sequences");
  add_common(pack, pack_c);
  pack->add_option("--plans,plans", pack_plans, "plan JSONL from `vlprep plan`")->required();
  pack->add_option("--text", pack_text, "prompt text: one line per plan, or one shared line");
  pack->add_option("--records", pack_records, "also write record-form JSONL here");

  auto* check = app.add_subcommand("check", "gradient checks and numeric invariants");
  add_common(check, check_c);
  check->add_option("--dims", dims, "feature matrix shape ROWSxCOLS")->capture_default_str();
  check->add_option("--trials", trials, "random trials per check")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  check->add_flag("--corrupt-gradient", corrupt, "test mode: skew the analytic gradients");

  auto* curate = app.add_subcommand("curate", "hierarchical clustering + diverse selection");
  add_common(curate, curate_c);
  curate->add_option("--embeddings,embeddings", emb_path, "binary matrix file")->required();
  curate->add_option("--ids", ids_path, "id manifest, one per line (default: row numbers)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*plan) return run_plan(plan_c, plan_in);
    if (*sample) return run_sample(sample_c, sample_in);
    if (*pack) return run_pack(pack_c, pack_plans, pack_text, pack_records);
    if (*check) return run_check(check_c, dims, trials, corrupt);
    if (*curate) return run_curate(curate_c, emb_path, ids_path);
  } catch (const IoError& e) {
    std::cerr << "vlprep: " << e.what() << '\n';
    return kExitIo;
  } catch (const ValidationError& e) {
    std::cerr << "vlprep: " << e.what() << '\n';
    return kExitValidation;
  }
  return kExitValidation;
}
