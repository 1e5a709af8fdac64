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
#include <set>
#include <string>
#include <vector>

#include <doctest.h>

#include "vlprep/error.hpp"
#include "vlprep/sequence.hpp"

using namespace vlprep;

namespace {

const std::string kImg4 = "\xE2\x9F\xA6IMG:4\xE2\x9F\xA7";

FrameBlock frame(std::int64_t tenths, std::int64_t tokens) {
  return {Timestamp::from_tenths(tenths), tokens};
}

std::string random_text(std::mt19937_64& rng, bool allow_newline) {
  static const std::string alphabet = "abc xyz,.:019TimeIMG\xC3\xA9";
  std::string out;
  const int n = std::uniform_int_distribution<int>(0, 12)(rng);
  for (int i = 0; i < n; ++i) {
    const auto k = std::uniform_int_distribution<std::size_t>(0, alphabet.size() - 1)(rng);
    char ch = alphabet[k];
    if (static_cast<unsigned char>(ch) >= 0x80) {
      out += "\xC3\xA9";
      continue;
    }
    out.push_back(ch);
  }
  if (allow_newline && n > 3) out.insert(0, "p\n");
  return out;
}

}  // namespace

TEST_SUITE("sequence") {

TEST_CASE("timestamp rendering is shortest and reversible") {
  CHECK(Timestamp::from_tenths(70).str() == "7");
  CHECK(Timestamp::from_tenths(25).str() == "2.5");
  CHECK(Timestamp::from_tenths(0).str() == "0");
  CHECK(Timestamp::from_seconds(1.6666666).str() == "1.7");
  CHECK(Timestamp::from_seconds(3.3333333).str() == "3.3");
  for (std::int64_t t = 0; t < 100000; t += 7) {
    REQUIRE(Timestamp::parse(Timestamp::from_tenths(t).str()).tenths() == t);
  }
  for (const char* bad : {"", "01", "1.0", "1.", ".5", "1.25", "-1", "1e3", "a"}) {
    CHECK_THROWS_AS(Timestamp::parse(bad), ValidationError);
  }
  CHECK_THROWS_AS(Timestamp::from_seconds(-1), ValidationError);
}

TEST_CASE("image layout") {
  const std::vector<ImageBlock> two{{4}, {4}};
  const auto seq = pack_image_sequence(two, {"describe"});
  CHECK(to_display(seq) == kImg4 + "\n" + kImg4 + "\ndescribe");
  CHECK(to_display(pack_image_sequence({}, {"hello"})) == "hello");
  CHECK(seq.visual_tokens() == 8);
  CHECK(seq.text_tokens() == 10);  // two separators + "describe"
}

TEST_CASE("video layout") {
  const std::vector<FrameBlock> f{frame(0, 4), frame(10, 4)};
  CHECK(to_display(pack_video_sequence(f, {"Q"})) ==
        "Time: 0s\xE2\x9F\xA6VID:4\xE2\x9F\xA7,Time: 1s\xE2\x9F\xA6VID:4\xE2\x9F\xA7\nQ");
  const std::vector<FrameBlock> one{frame(0, 1)};
  CHECK(to_display(pack_video_sequence(one, {""})) == "Time: 0s\xE2\x9F\xA6VID:1\xE2\x9F\xA7\n");
  const std::vector<FrameBlock> backwards{frame(10, 4), frame(0, 4)};
  CHECK_THROWS_AS(pack_video_sequence(backwards, {"Q"}), ValidationError);
  const std::vector<FrameBlock> same{frame(10, 4), frame(10, 4)};
  CHECK_THROWS_AS(pack_video_sequence(same, {"Q"}), ValidationError);
  CHECK_THROWS_AS(pack_video_sequence({}, {"Q"}), ValidationError);
}

TEST_CASE("streaming layout") {
  const std::vector<StreamSegment> segs{std::vector<FrameBlock>{frame(0, 2)}, TextSpan{"a"},
                                        std::vector<FrameBlock>{frame(50, 2)}, TextSpan{"b"}};
  const auto seq = pack_streaming(segs);
  CHECK(to_display(seq) ==
        "Time: 0s\xE2\x9F\xA6VID:2\xE2\x9F\xA7\na\nTime: 5s\xE2\x9F\xA6VID:2\xE2\x9F\xA7\nb");
  const std::vector<StreamSegment> only{TextSpan{"only text"}};
  CHECK(to_display(pack_streaming(only)) == "only text");
  CHECK(to_display(pack_streaming({})).empty());
  CHECK(parse_display("", Layout::Streaming).elements.empty());
  const std::vector<StreamSegment> late_first{std::vector<FrameBlock>{frame(50, 2)},
                                              TextSpan{"a"},
                                              std::vector<FrameBlock>{frame(0, 2)}};
  CHECK_THROWS_AS(pack_streaming(late_first), ValidationError);
  const std::vector<StreamSegment> two_texts{TextSpan{"a"}, TextSpan{"b"}};
  CHECK_THROWS_AS(pack_streaming(two_texts), ValidationError);
}

TEST_CASE("limits are exact and report which limit") {
  const std::vector<ImageBlock> full{{10240}};
  // 10240 visual + 1 separator + 6143 text = 16384 exactly.
  CHECK_NOTHROW(pack_image_sequence(full, {std::string(6143, 'x')}));
  try {
    pack_image_sequence(full, {std::string(6144, 'x')});
    FAIL("expected a limit error");
  } catch (const LimitError& e) {
    CHECK(e.limit_name() == "total");
    CHECK(e.limit() == 16384);
    CHECK(e.excess() == 1);
  }
  const std::vector<ImageBlock> over{{10000}, {241}};
  try {
    pack_image_sequence(over, {""});
    FAIL("expected a limit error");
  } catch (const LimitError& e) {
    CHECK(e.limit_name() == "visual");
    CHECK(e.excess() == 1);
  }
  const std::vector<ImageBlock> at{{10000}, {240}};
  CHECK_NOTHROW(pack_image_sequence(at, {""}));
}

TEST_CASE("parse errors") {
  const std::string v2 = "\xE2\x9F\xA6VID:2\xE2\x9F\xA7";
  CHECK_THROWS_AS(parse_display("Time: 0s" + v2 + "Time: 1s" + v2 + "\n", Layout::Video),
                  ValidationError);
  CHECK_THROWS_AS(parse_display("Time: 0s" + v2 + ",\n", Layout::Video), ValidationError);
  CHECK_THROWS_AS(parse_display("Time: 0.0s" + v2 + "\n", Layout::Video), ValidationError);
  CHECK_THROWS_AS(parse_display("Time: xs" + v2 + "\n", Layout::Video), ValidationError);
  CHECK_THROWS_AS(parse_display("Time: 0s\xE2\x9F\xA6VID:0\xE2\x9F\xA7\n", Layout::Video),
                  ValidationError);
  CHECK_THROWS_AS(parse_display("a\n\nb", Layout::Streaming), ValidationError);
  CHECK_THROWS_AS(parse_sequence("{\"layout\":\"video\",\"elements\":[]}"), ValidationError);
  CHECK_THROWS_AS(
      parse_sequence("{\"layout\":\"image\",\"elements\":[{\"type\":\"text\",\"len\":3,"
                     "\"text\":\"ab\"}]}"),
      ValidationError);
  CHECK_THROWS_AS(parse_sequence("not json"), ValidationError);
}

TEST_CASE("random round trips and injectivity") {
  std::mt19937_64 rng(23);
  std::set<std::string> records;
  std::set<std::string> seen_structures;
  for (int t = 0; t < 3000; ++t) {
    const auto layout = static_cast<Layout>(t % 3);
    TokenSequence seq{layout, {}};
    std::int64_t tenths = std::uniform_int_distribution<std::int64_t>(0, 30)(rng);
    auto next_frame = [&] {
      const auto f = frame(tenths, std::uniform_int_distribution<std::int64_t>(1, 400)(rng));
      tenths += std::uniform_int_distribution<std::int64_t>(1, 40)(rng);
      return f;
    };
    const int n = std::uniform_int_distribution<int>(0, 6)(rng);
    if (layout == Layout::Image) {
      for (int i = 0; i < n; ++i) {
        seq.elements.emplace_back(ImageBlock{std::uniform_int_distribution<std::int64_t>(1, 999)(rng)});
      }
      seq.elements.emplace_back(TextSpan{random_text(rng, true)});
    } else if (layout == Layout::Video) {
      for (int i = 0; i <= n; ++i) seq.elements.emplace_back(next_frame());
      seq.elements.emplace_back(TextSpan{random_text(rng, true)});
    } else {
      bool text_turn = rng() % 2 == 0;
      for (int i = 0; i < n; ++i, text_turn = !text_turn) {
        if (text_turn) {
          std::string s = random_text(rng, false);
          if (s.empty() || s.starts_with("Time: ")) s = "q" + s;
          seq.elements.emplace_back(TextSpan{s});
        } else {
          const int run = std::uniform_int_distribution<int>(1, 3)(rng);
          for (int r = 0; r < run; ++r) seq.elements.emplace_back(next_frame());
        }
      }
    }
    REQUIRE_NOTHROW(validate_sequence(seq));
    const std::string rec = to_record(seq, "s");
    REQUIRE(parse_sequence(rec) == seq);
    REQUIRE(parse_display(to_display(seq), layout) == seq);
    // Distinct sequences must give distinct bytes.
    const std::string key = std::string(to_string(layout)) + "|" + to_display(seq);
    if (seen_structures.insert(key).second) REQUIRE(records.insert(rec).second);
  }
}

}  // TEST_SUITE
