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

#include <random>
#include <vector>

#include <doctest.h>

#include "vlprep/error.hpp"
#include "vlprep/tra_budget.hpp"

using namespace vlprep;

namespace {

std::vector<FramePlanInput> worked_example() {
  std::vector<FramePlanInput> f;
  for (int i = 0; i < 2; ++i) f.push_back({FrameClass::Key, 1024, std::nullopt});
  for (int i = 0; i < 8; ++i) f.push_back({FrameClass::Intermediate, 64, std::nullopt});
  return f;
}

// Uniform-size video: every key shares one grid, every intermediate another.
std::vector<FramePlanInput> uniform_video(std::mt19937_64& rng) {
  const int kc = std::uniform_int_distribution<int>(8, 60)(rng);
  const int kr = std::uniform_int_distribution<int>(8, 60)(rng);
  const PatchGrid key{kc, kr, 16};
  const PatchGrid inter = shrink_grid(key, 1, 16);
  const int n = std::uniform_int_distribution<int>(1, 180)(rng);
  const double p = std::uniform_real_distribution<double>(0, 1)(rng);
  std::vector<FramePlanInput> f;
  for (int i = 0; i < n; ++i) {
    const bool is_key = i == 0 || std::uniform_real_distribution<double>(0, 1)(rng) < p;
    f.push_back(FramePlanInput::from_grid(is_key ? FrameClass::Key : FrameClass::Intermediate,
                                          is_key ? key : inter));
  }
  return f;
}

}  // namespace

TEST_SUITE("tra_budget") {

TEST_CASE("compute_alpha") {
  CHECK(compute_alpha(2560, 1280) == 0.5);
  CHECK(compute_alpha(100, 100) == 1.0);
  CHECK(compute_alpha(100, 1000) == 1.0);
  CHECK_THROWS_AS(compute_alpha(0, 10), ValidationError);
}

TEST_CASE("stage 1 passthrough") {
  const auto f = worked_example();
  const BudgetPlan p = plan_budget(f, {4096, 16, 16});
  CHECK(p.stage == 1);
  CHECK(p.alpha == 1.0);
  CHECK(p.total() == 2560);
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(p.per_frame_tokens[i] == f[i].native_tokens);
}

TEST_CASE("stage 2 synchronous downscaling") {
  const BudgetPlan p = plan_budget(worked_example(), {1280, 16, 16});
  CHECK(p.stage == 2);
  CHECK(p.alpha == 0.5);
  CHECK(p.total() == 1280);
  CHECK(p.per_frame_tokens[0] == 512);
  CHECK(p.per_frame_tokens[1] == 512);
  for (int i = 2; i < 10; ++i) CHECK(p.per_frame_tokens[static_cast<std::size_t>(i)] == 32);
}

TEST_CASE("stage 3 saturation-aware scaling") {
  const BudgetPlan p = plan_budget(worked_example(), {1280, 48, 16});
  CHECK(p.stage == 3);
  CHECK(p.total() == 1280);
  CHECK(p.per_frame_tokens[0] == 448);
  CHECK(p.per_frame_tokens[1] == 448);
  for (int i = 2; i < 10; ++i) CHECK(p.per_frame_tokens[static_cast<std::size_t>(i)] == 48);
}

TEST_CASE("gridded frames keep their aspect") {
  std::vector<FramePlanInput> f{FramePlanInput::from_grid(FrameClass::Key, {32, 32, 16}),
                                FramePlanInput::from_grid(FrameClass::Intermediate, {8, 8, 16})};
  const BudgetPlan p = plan_budget(f, {544, 16, 16});  // alpha = 0.5 of 1088
  CHECK(p.stage == 2);
  REQUIRE(p.grids[0]);
  CHECK(*p.grids[0] == PatchGrid{22, 22, 16});  // floor(32 / sqrt 2)
  CHECK(*p.grids[1] == PatchGrid{5, 5, 16});
  CHECK(p.total() <= 544);
}

TEST_CASE("rejections") {
  CHECK_THROWS_AS(plan_budget(std::vector<FramePlanInput>{}, {}), ValidationError);
  std::vector<FramePlanInput> many(700, {FrameClass::Key, 100, std::nullopt});
  CHECK_THROWS_AS(plan_budget(many, {10240, 16, 16}), ValidationError);  // 700*16 > 10240
  CHECK_THROWS_AS((BudgetConfig{10240, 16, 16}.validate(1000)), ValidationError);
  CHECK_NOTHROW((BudgetConfig{10240, 16, 16}.validate(180)));
  CHECK_THROWS_AS((BudgetConfig{10, 16, 16}.validate()), ValidationError);
  CHECK_THROWS_AS((BudgetConfig{10240, 0, 16}.validate()), ValidationError);
  std::vector<FramePlanInput> mismatch{{FrameClass::Key, 5, PatchGrid{2, 2, 16}}};
  CHECK_THROWS_AS(plan_budget(mismatch, {}), ValidationError);
}

TEST_CASE("feasibility, floor, determinism and monotonicity on uniform-size videos") {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 1500; ++t) {
    const auto f = uniform_video(rng);
    const BudgetConfig cfg{};
    const BudgetPlan p = plan_budget(f, cfg);
    REQUIRE(p.total() <= cfg.t_max);
    // Frames natively under the floor are never upscaled.
    for (std::size_t i = 0; i < f.size(); ++i) {
      REQUIRE(p.per_frame_tokens[i] >= std::min(cfg.t_min, f[i].native_tokens));
    }
    REQUIRE((p.alpha == 1.0) == (p.stage == 1));
    REQUIRE(plan_budget(f, cfg).per_frame_tokens == p.per_frame_tokens);

    // Tighter budget never grows any frame.
    BudgetPlan prev = p;
    for (std::int64_t tmax : {8000, 6000, 4000, 3000}) {
      // Grid floors can overshoot t_min, so skip budgets the floors overrun.
      std::int64_t floors = 0;
      for (const auto& x : f) {
        floors += x.cls == FrameClass::Key ? 1 : floor_grid(*x.grid, 16).tokens();
      }
      if (floors > tmax) break;
      const BudgetPlan q = plan_budget(f, {tmax, 16, 16});
      REQUIRE(q.total() <= tmax);
      for (std::size_t i = 0; i < f.size(); ++i) {
        REQUIRE(q.per_frame_tokens[i] <= prev.per_frame_tokens[i]);
      }
      prev = q;
    }
  }
}

}  // TEST_SUITE
