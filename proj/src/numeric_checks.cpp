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

#include "vlprep/numeric_checks.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include <Eigen/QR>

#include "vlprep/encoder.hpp"
#include "vlprep/error.hpp"
#include "vlprep/losses.hpp"
#include "vlprep/rng.hpp"

namespace vlprep {

namespace {

using Mat = Matrix<double>;
using Row = RowVector<double>;

Mat gaussian(SeededRng& rng, int rows, int cols) {
  Mat m(rows, cols);
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = rng.normal();
  }
  return m;
}

Mat random_orthogonal(SeededRng& rng, int n) {
  const Eigen::HouseholderQR<Mat> qr(gaussian(rng, n, n));
  return qr.householderQ() * Mat::Identity(n, n);
}

AttentionConfig attention_config_for(int cols) {
  AttentionConfig cfg;
  cfg.dim = cols;
  cfg.heads = 1;
  for (int h : {4, 2}) {
    if (cols % (4 * h) == 0) {
      cfg.heads = h;
      break;
    }
  }
  cfg.validate();
  return cfg;
}

TokenPos2D random_pos(SeededRng& rng, int extent) {
  return {static_cast<int>(rng.below(static_cast<std::uint64_t>(extent))),
          static_cast<int>(rng.below(static_cast<std::uint64_t>(extent)))};
}

std::vector<TokenPos2D> random_positions(SeededRng& rng, int n) {
  std::vector<TokenPos2D> out(static_cast<std::size_t>(n));
  for (auto& p : out) p = random_pos(rng, 32);
  return out;
}

CheckLine at_most(std::string name, double measured, double bound, long cases) {
  return {std::move(name), measured, bound, CheckLine::Bound::AtMost, cases};
}

}  // namespace

void CheckOptions::validate() const {
  if (rows < 1 || cols < 2) throw ValidationError("check dims must be at least 1x2");
  if (cols % 4 != 0) throw ValidationError("check width must be a multiple of 4");
  if (trials < 0 || rope_trials < 0) throw ValidationError("trials must be >= 0");
  if (!(step > 0.0)) throw ValidationError("step must be positive");
}

std::vector<CheckLine> gradient_checks(const CheckOptions& opts) {
  SeededRng rng(mix_seed(opts.seed ^ 0x6772616Bu));
  GradientHook<double> hook;
  if (opts.corrupt_gradient) {
    hook = [](Mat& g) { g *= 1.01; };
  }
  std::vector<CheckLine> out;
  for (LossKind kind : {LossKind::Amplitude, LossKind::Direction, LossKind::Relation}) {
    double worst = 0.0;
    long cases = 0;
    for (int t = 0; t < opts.trials; ++t) {
      const Mat fs = gaussian(rng, opts.rows, opts.cols);
      const Mat ft = gaussian(rng, opts.rows, opts.cols);
      const auto r = grad_check<double>(kind, fs, ft, opts.step, hook);
      worst = std::max(worst, r.max_rel_error);
      cases += r.checked;
    }
    out.push_back(at_most("grad_" + std::string(to_string(kind)), worst, 1e-4, cases));
  }
  return out;
}

std::vector<CheckLine> loss_invariant_checks(const CheckOptions& opts) {
  SeededRng rng(mix_seed(opts.seed ^ 0x6C6F7373u));
  double zero_exact = 0.0, zero_dir = 0.0, dir_scale = 0.0;
  double rel_orth = 0.0, rel_scale = 0.0;
  for (int t = 0; t < opts.trials; ++t) {
    const Mat fs = gaussian(rng, opts.rows, opts.cols);
    const Mat ft = gaussian(rng, opts.rows, opts.cols);

    zero_exact = std::max({zero_exact, amplitude_loss(fs, fs, false).value,
                           relation_loss(fs, fs, false).value});
    zero_dir = std::max(zero_dir, std::abs(direction_loss(fs, fs, false).value));

    Eigen::VectorXd c(opts.rows);
    for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = 0.1 + 10.0 * rng.uniform();
    const Mat scaled = c.asDiagonal() * fs;
    dir_scale = std::max(dir_scale, std::abs(direction_loss(scaled, ft, false).value -
                                             direction_loss(fs, ft, false).value));

    const double base = relation_loss(fs, ft, false).value;
    const Mat q = random_orthogonal(rng, opts.cols);
    rel_orth = std::max({rel_orth, std::abs(relation_loss(fs * q, ft, false).value - base),
                         std::abs(relation_loss(fs, ft * q, false).value - base)});
    const double s = 0.01 + 100.0 * rng.uniform();
    rel_scale = std::max({rel_scale, std::abs(relation_loss(s * fs, ft, false).value - base),
                          std::abs(relation_loss(fs, s * ft, false).value - base)});
  }
  const long n = opts.trials;
  return {at_most("loss_zero_at_identity", zero_exact, 0.0, n),
          at_most("direction_zero_at_identity", zero_dir, 1e-12, n),
          at_most("direction_row_scale_invariance", dir_scale, 1e-10, n),
          at_most("relation_orthogonal_invariance", rel_orth, 1e-10, n),
          at_most("relation_scale_invariance", rel_scale, 1e-10, n)};
}

std::vector<CheckLine> rope_checks(const CheckOptions& opts) {
  SeededRng rng(mix_seed(opts.seed ^ 0x726F7065u));
  const AttentionConfig cfg = attention_config_for(opts.cols);
  const int hd = cfg.head_dim();
  double iso = 0.0, rel = 0.0;
  for (int t = 0; t < opts.rope_trials; ++t) {
    const Row q = gaussian(rng, 1, cfg.dim);
    const Row k = gaussian(rng, 1, cfg.dim);
    const TokenPos2D p1 = random_pos(rng, 64);
    const TokenPos2D p2 = random_pos(rng, 64);
    // Shift that keeps both positions non-negative.
    const int lo_r = -std::min(p1.row, p2.row);
    const int lo_c = -std::min(p1.col, p2.col);
    const TokenPos2D d{lo_r + static_cast<int>(rng.below(static_cast<std::uint64_t>(128 - lo_r))),
                       lo_c + static_cast<int>(rng.below(static_cast<std::uint64_t>(128 - lo_c)))};

    const Row rq = rope2d_rotate(q, p1, cfg);
    iso = std::max(iso, std::abs(rq.norm() - q.norm()));

    const Row rk = rope2d_rotate(k, p2, cfg);
    const Row sq = rope2d_rotate(q, {p1.row + d.row, p1.col + d.col}, cfg);
    const Row sk = rope2d_rotate(k, {p2.row + d.row, p2.col + d.col}, cfg);
    for (int h = 0; h < cfg.heads; ++h) {
      const double a = rq.segment(h * hd, hd).dot(rk.segment(h * hd, hd));
      const double b = sq.segment(h * hd, hd).dot(sk.segment(h * hd, hd));
      rel = std::max(rel, std::abs(a - b));
    }
  }
  const long n = opts.rope_trials;
  return {at_most("rope_isometry", iso, 1e-12, n),
          at_most("rope_relative_position", rel, 1e-9, n)};
}

std::vector<CheckLine> attention_checks(const CheckOptions& opts) {
  SeededRng rng(mix_seed(opts.seed ^ 0x61747465u));
  const AttentionConfig cfg = attention_config_for(opts.cols);
  const int n = std::max(opts.rows, 2);  // the witness needs two tokens
  double row_sum = 0.0;
  double witness = std::numeric_limits<double>::infinity();
  double causal = 0.0;
  for (int t = 0; t < opts.trials; ++t) {
    const auto w = random_encoder_weights<double>(cfg, 4, 4, 4, rng).attention;
    const Mat x = gaussian(rng, n, cfg.dim);
    const auto pos = random_positions(rng, n);

    std::vector<Mat> probs;
    const Mat y = attend(x, w, pos, cfg, AttentionMask::Bidirectional, &probs);
    for (const Mat& p : probs) {
      row_sum = std::max(row_sum, (p.rowwise().sum().array() - 1.0).abs().maxCoeff());
    }

    Mat x2 = x;
    x2.row(n - 1) += 1e-3 * gaussian(rng, 1, cfg.dim);
    const Mat y2 = attend(x2, w, pos, cfg, AttentionMask::Bidirectional);
    witness = std::min(witness, (y2.row(0) - y.row(0)).cwiseAbs().maxCoeff());

    const Mat c1 = attend(x, w, pos, cfg, AttentionMask::Causal);
    const Mat c2 = attend(x2, w, pos, cfg, AttentionMask::Causal);
    causal = std::max(causal, (c2.row(0) - c1.row(0)).cwiseAbs().maxCoeff());
  }
  const long cases = opts.trials;
  return {at_most("attention_row_sums", row_sum, 1e-12, cases),
          {"bidirectional_witness", witness, 1e-6, CheckLine::Bound::Above, cases},
          at_most("causal_control", causal, 0.0, cases)};
}

bool CheckReport::all_pass() const {
  return std::all_of(lines.begin(), lines.end(), [](const CheckLine& l) { return l.pass(); });
}

std::string CheckReport::format() const {
  std::string out;
  char buf[256];
  for (const auto& l : lines) {
    std::snprintf(buf, sizeof buf, "%s %-32s %.3e %s %.1e (%ld cases)\n",
                  l.pass() ? "PASS" : "FAIL", l.name.c_str(), l.measured,
                  l.kind == CheckLine::Bound::AtMost ? "<=" : ">", l.bound, l.cases);
    out += buf;
  }
  return out;
}

CheckReport run_numeric_checks(const CheckOptions& opts) {
  opts.validate();
  CheckReport report;
  if (opts.trials == 0) return report;
  for (auto group : {gradient_checks, loss_invariant_checks, rope_checks, attention_checks}) {
    auto lines = group(opts);
    report.lines.insert(report.lines.end(), lines.begin(), lines.end());
  }
  return report;
}

}  // namespace vlprep
