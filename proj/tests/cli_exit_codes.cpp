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

// Exit-code contract of the vlprep binary: 0 success, 1 validation
// failure, 2 I/O failure.

#include <cstdio>
#include <string>

#include "cli_harness.hpp"
#include "vlprep/encoder.hpp"

namespace {

int failures = 0;

void expect(bool ok, const std::string& what, const vlprep::testing::CliHarness& h) {
  std::printf("%s %s\n", ok ? "ok  " : "FAIL", what.c_str());
  if (!ok) {
    ++failures;
    std::printf("  stderr: %s\n", h.err().c_str());
  }
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 4) {
    std::fprintf(stderr, "usage: cli_exit_codes VLPREP WORKDIR CONFIGDIR\n");
    return 2;
  }
  const vlprep::testing::CliHarness h(argv[1], argv[2]);
  const std::string configs = argv[3];

  const std::string empty = h.put("empty.jsonl", "");
  expect(h.run("plan " + empty) == 0 && h.out().empty(), "empty metadata plans to nothing", h);
  expect(h.run("sample " + empty) == 0 && h.out().empty(), "empty metadata samples to nothing", h);

  const std::string videos = h.put(
      "videos.jsonl",
      R"({"id":"a","duration":30,"width":640,"height":360,"iframes":[0,12.5]})" "\n");
  expect(h.run("plan --config " + configs + "/train.conf " + videos) == 0, "train config", h);
  expect(h.run("plan --config " + configs + "/infer.conf " + videos) == 0, "infer config", h);
  const std::string no_iframes =
      h.put("plain.jsonl", R"({"id":"p","duration":5,"width":64,"height":64})" "\n");
  expect(h.run("plan --config " + configs + "/infer.conf " + no_iframes) == 1,
         "codec mode without I-frames -> 1", h);

  const std::string bad_conf = h.put("bad.conf", "fps = 1\nframes_per_second = 2\n");
  expect(h.run("plan --config " + bad_conf + " " + videos) == 1 &&
             h.err().find("line 2") != std::string::npos,
         "unknown config key -> 1 naming the line", h);
  const std::string infeasible = h.put("infeasible.conf", "t_max = 2000\nmax_frames = 180\n");
  expect(h.run("plan --config " + infeasible + " " + videos) == 1, "infeasible budget -> 1", h);
  expect(h.run("plan --config " + h.path("nope.conf") + " " + videos) == 2,
         "missing config -> 2", h);
  expect(h.run("plan " + h.path("nope.jsonl")) == 2, "missing input -> 2", h);
  expect(h.run("plan --out " + h.path("no/such/dir/out") + " " + videos) == 2,
         "unwritable output -> 2", h);

  const std::string bad_rec = h.put("bad.jsonl", R"({"id":"a","duration":30,"width":640,"height":360})"
                                                 "\n" R"({"id":"b","duration":-1,"width":1,"height":1})" "\n");
  expect(h.run("sample " + bad_rec) == 1 && h.err().find("record 2") != std::string::npos,
         "bad record -> 1 naming the record", h);
  expect(h.run("plan --bogus " + videos) == 1, "unknown flag -> 1", h);
  expect(h.run("") == 1, "no subcommand -> 1", h);

  expect(h.run("check") == 0 && h.out().find("FAIL") == std::string::npos, "check passes", h);
  expect(h.run("check --corrupt-gradient") == 1 && h.out().find("FAIL grad_") != std::string::npos,
         "corrupted gradients are caught", h);
  expect(h.run("check --trials 0") == 0 && h.out().empty(), "zero trials -> empty report", h);
  expect(h.run("check --dims 8x15") == 1, "check width not a multiple of 4 -> 1", h);
  expect(h.run("check --trials -3") == 1, "negative trials -> 1", h);

  const std::string plans = h.put(
      "plans.jsonl",
      R"({"id":"ok","frames":[{"t":0,"class":"key","tokens":64}]})" "\n"
      R"({"id":"big","frames":[{"t":0,"class":"key","tokens":10241}]})" "\n");
  expect(h.run("pack --records " + h.path("rec.jsonl") + " " + plans) == 1 &&
             h.err().find("'big'") != std::string::npos &&
             vlprep::read_lines(h.path("rec.jsonl")).size() == 1,
         "over-limit record -> 1, others still packed", h);

  vlprep::Matrix<double> one(1, 4);
  one << 1, 2, 3, 4;
  const std::string single = h.put("one.f32mat", vlprep::encode_matrix(one));
  expect(h.run("curate " + single) == 0 && vlprep::read_lines(h.path("out.txt")).size() == 1,
         "single point curates to itself", h);
  vlprep::Matrix<double> three(3, 2);
  three << 0, 0, 1, 1, 5, 5;
  const std::string small = h.put("three.f32mat", vlprep::encode_matrix(three));
  const std::string k10 = h.put("k10.conf", "k_per_level = 10\nper_cluster = 10\n");
  expect(h.run("curate --config " + k10 + " " + small) == 0 &&
             vlprep::read_lines(h.path("out.txt")).size() == 3,
         "k > M keeps every point", h);
  const std::string ids = h.put("ids.txt", "x\ny\n");
  expect(h.run("curate --ids " + ids + " " + small) == 1, "id count mismatch -> 1", h);
  const std::string junk = h.put("junk.f32mat", "abc");
  expect(h.run("curate " + junk) == 2, "truncated matrix -> 2", h);

  std::printf("%d failure(s)\n", failures);
  return failures == 0 ? 0 : 1;
}
