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

// Randomized invariant suite over the losses and the encoder kernel, run by
// `vlprep check`. Every line is a measured worst case against a bound.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace vlprep {

struct CheckOptions {
  int rows = 8;    // tokens N
  int cols = 16;   // feature width D; multiple of 4 for the attention checks
  int trials = 100;
  int rope_trials = 1000;
  std::uint64_t seed = 0;
  double step = 1e-5;
  bool corrupt_gradient = false;  // test mode: skew analytic gradients

  void validate() const;
};

struct CheckLine {
  enum class Bound { AtMost, Above };

  std::string name;
  double measured = 0.0;  // worst case over all trials
  double bound = 0.0;
  Bound kind = Bound::AtMost;
  long cases = 0;

  bool pass() const {
    return kind == Bound::AtMost ? measured <= bound : measured > bound;
  }
};

struct CheckReport {
  std::vector<CheckLine> lines;

  bool all_pass() const;
  /// One line per check: "PASS name measured<=bound (cases)".
  std::string format() const;
};

/// trials == 0 yields an empty report.
CheckReport run_numeric_checks(const CheckOptions& opts);

/// Individual groups, exposed for tests.
std::vector<CheckLine> gradient_checks(const CheckOptions& opts);
std::vector<CheckLine> loss_invariant_checks(const CheckOptions& opts);
std::vector<CheckLine> rope_checks(const CheckOptions& opts);
std::vector<CheckLine> attention_checks(const CheckOptions& opts);

}  // namespace vlprep
