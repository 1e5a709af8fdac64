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

#include "vlprep/sequence.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "vlprep/error.hpp"

namespace vlprep {

namespace {

constexpr std::string_view kOpen = "\xE2\x9F\xA6";   // U+27E6
constexpr std::string_view kClose = "\xE2\x9F\xA7";  // U+27E7
constexpr std::string_view kImageTag = "IMG:";
constexpr std::string_view kFrameTag = "VID:";
constexpr std::string_view kTimePrefix = "Time: ";

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string marker(std::string_view tag, std::int64_t tokens) {
  std::string out;
  out.reserve(kOpen.size() + tag.size() + 8 + kClose.size());
  out.append(kOpen).append(tag).append(std::to_string(tokens)).append(kClose);
  return out;
}

std::size_t digit_count(std::int64_t v) {
  std::size_t n = 1;
  while (v >= 10) {
    v /= 10;
    ++n;
  }
  return n;
}

std::size_t marker_size(std::string_view tag, std::int64_t tokens) {
  return kOpen.size() + tag.size() + digit_count(tokens) + kClose.size();
}

void render_frame(std::string& out, const FrameBlock& f) {
  out.append(kTimePrefix).append(f.time.str()).push_back('s');
  out.append(marker(kFrameTag, f.tokens));
}

class Cursor {
 public:
  explicit Cursor(std::string_view s) : s_(s) {}

  bool done() const { return pos_ >= s_.size(); }
  std::string_view rest() const { return s_.substr(pos_); }
  bool starts_with(std::string_view p) const { return rest().starts_with(p); }

  bool consume(std::string_view p) {
    if (!starts_with(p)) return false;
    pos_ += p.size();
    return true;
  }

  void expect(std::string_view p, const char* what) {
    if (!consume(p)) fail(std::string("expected ") + what);
  }

  std::int64_t count() {
    const char* first = s_.data() + pos_;
    const char* last = s_.data() + s_.size();
    if (first == last || *first < '1' || *first > '9') fail("expected token count");
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{}) fail("bad token count");
    pos_ += static_cast<std::size_t>(ptr - first);
    return v;
  }

  std::string_view until(char c) {
    const auto end = s_.find(c, pos_);
    if (end == std::string_view::npos) fail("unterminated timestamp tag");
    auto out = s_.substr(pos_, end - pos_);
    pos_ = end + 1;
    return out;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ValidationError("parse error at byte " + std::to_string(pos_) +
                          ": " + msg);
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
};

FrameBlock parse_frame(Cursor& c) {
  c.expect(kTimePrefix, "'Time: '");
  const std::string_view t = c.until('s');
  FrameBlock f;
  try {
    f.time = Timestamp::parse(t);
  } catch (const ValidationError& e) {
    c.fail(std::string("malformed timestamp tag: ") + e.what());
  }
  c.expect(kOpen, "frame marker");
  c.expect(kFrameTag, "'VID:'");
  f.tokens = c.count();
  c.expect(kClose, "marker close");
  return f;
}

// A run is frames joined by ','; it ends at end of input or '\n'.
std::vector<FrameBlock> parse_run(Cursor& c) {
  std::vector<FrameBlock> run;
  run.push_back(parse_frame(c));
  while (!c.done() && !c.starts_with("\n")) {
    if (!c.consume(",")) c.fail("expected ',' between frames");
    if (c.done() || c.starts_with("\n") || c.starts_with(",")) {
      c.fail("stray separator");
    }
    run.push_back(parse_frame(c));
  }
  return run;
}

void check_limits(const TokenSequence& seq, const SequenceLimits& limits) {
  const std::int64_t visual = seq.visual_tokens();
  if (visual > limits.visual) throw LimitError("visual", limits.visual, visual);
  const std::int64_t total = visual + seq.text_tokens();
  if (total > limits.total) throw LimitError("total", limits.total, total);
}

}  // namespace

Timestamp Timestamp::from_seconds(double seconds) {
  if (!std::isfinite(seconds) || seconds < 0.0) {
    throw ValidationError("timestamp must be finite and non-negative");
  }
  return from_tenths(std::llround(seconds * 10.0));
}

std::string Timestamp::str() const {
  std::string out = std::to_string(tenths_ / 10);
  if (tenths_ % 10 != 0) {
    out.push_back('.');
    out.push_back(static_cast<char>('0' + tenths_ % 10));
  }
  return out;
}

Timestamp Timestamp::parse(std::string_view text) {
  const auto dot = text.find('.');
  const std::string_view whole = text.substr(0, dot);
  if (whole.empty() || whole[0] < '0' || whole[0] > '9' ||
      (whole.size() > 1 && whole[0] == '0')) {
    throw ValidationError("bad timestamp '" + std::string(text) + "'");
  }
  std::int64_t secs = 0;
  auto [ptr, ec] = std::from_chars(whole.data(), whole.data() + whole.size(), secs);
  if (ec != std::errc{} || ptr != whole.data() + whole.size() ||
      secs > std::numeric_limits<std::int64_t>::max() / 10 - 1) {
    throw ValidationError("bad timestamp '" + std::string(text) + "'");
  }
  std::int64_t frac = 0;
  if (dot != std::string_view::npos) {
    const std::string_view f = text.substr(dot + 1);
    if (f.size() != 1 || f[0] < '1' || f[0] > '9') {
      throw ValidationError("bad timestamp '" + std::string(text) + "'");
    }
    frac = f[0] - '0';
  }
  return from_tenths(secs * 10 + frac);
}

std::string_view to_string(Layout layout) {
  switch (layout) {
    case Layout::Image:
      return "image";
    case Layout::Video:
      return "video";
    case Layout::Streaming:
      return "streaming";
  }
  return "streaming";
}

Layout layout_from_string(std::string_view s) {
  if (s == "image") return Layout::Image;
  if (s == "video") return Layout::Video;
  if (s == "streaming") return Layout::Streaming;
  throw ValidationError("unknown layout '" + std::string(s) + "'");
}

std::int64_t TokenSequence::visual_tokens() const {
  std::int64_t n = 0;
  for (const auto& e : elements) {
    if (const auto* i = std::get_if<ImageBlock>(&e)) n += i->tokens;
    if (const auto* f = std::get_if<FrameBlock>(&e)) n += f->tokens;
  }
  return n;
}

std::int64_t TokenSequence::text_tokens() const {
  auto n = static_cast<std::int64_t>(to_display(*this).size());
  for (const auto& e : elements) {
    if (const auto* i = std::get_if<ImageBlock>(&e)) {
      n -= static_cast<std::int64_t>(marker_size(kImageTag, i->tokens));
    }
    if (const auto* f = std::get_if<FrameBlock>(&e)) {
      n -= static_cast<std::int64_t>(marker_size(kFrameTag, f->tokens));
    }
  }
  return n;
}

void validate_sequence(const TokenSequence& seq, const SequenceLimits& limits) {
  const auto& els = seq.elements;
  bool have_time = false;
  Timestamp last;
  for (std::size_t i = 0; i < els.size(); ++i) {
    std::visit(
        Overloaded{
            [&](const ImageBlock& b) {
              if (seq.layout != Layout::Image) {
                throw ValidationError("image block outside an image sequence");
              }
              if (b.tokens < 1) throw ValidationError("image block with no tokens");
            },
            [&](const FrameBlock& f) {
              if (seq.layout == Layout::Image) {
                throw ValidationError("frame block inside an image sequence");
              }
              if (f.tokens < 1) throw ValidationError("frame block with no tokens");
              if (f.time.tenths() < 0) throw ValidationError("negative timestamp");
              if (have_time && !(f.time > last)) {
                throw ValidationError("non-monotone timestamps: " + f.time.str() +
                                      "s after " + last.str() + "s");
              }
              have_time = true;
              last = f.time;
            },
            [&](const TextSpan& t) {
              if (seq.layout == Layout::Streaming) {
                if (t.text.empty()) throw ValidationError("empty streaming text span");
                if (i > 0 && std::holds_alternative<TextSpan>(els[i - 1])) {
                  throw ValidationError("adjacent streaming text spans");
                }
              } else if (i + 1 != els.size()) {
                throw ValidationError("text must close an image or video sequence");
              }
            }},
        els[i]);
  }
  if (seq.layout != Layout::Streaming) {
    if (els.empty() || !std::holds_alternative<TextSpan>(els.back())) {
      throw ValidationError("image and video sequences end with a text span");
    }
    if (seq.layout == Layout::Video && els.size() < 2) {
      throw ValidationError("video sequence needs at least one frame");
    }
  }
  check_limits(seq, limits);
}

TokenSequence pack_image_sequence(std::span<const ImageBlock> images,
                                  TextSpan text, const SequenceLimits& limits) {
  TokenSequence seq{Layout::Image, {}};
  seq.elements.reserve(images.size() + 1);
  for (const auto& i : images) seq.elements.emplace_back(i);
  seq.elements.emplace_back(std::move(text));
  validate_sequence(seq, limits);
  return seq;
}

TokenSequence pack_video_sequence(std::span<const FrameBlock> frames,
                                  TextSpan text, const SequenceLimits& limits) {
  TokenSequence seq{Layout::Video, {}};
  seq.elements.reserve(frames.size() + 1);
  for (const auto& f : frames) seq.elements.emplace_back(f);
  seq.elements.emplace_back(std::move(text));
  validate_sequence(seq, limits);
  return seq;
}

TokenSequence pack_streaming(std::span<const StreamSegment> segments,
                             const SequenceLimits& limits) {
  TokenSequence seq{Layout::Streaming, {}};
  for (std::size_t i = 0; i < segments.size(); ++i) {
    if (i > 0 && segments[i].index() == segments[i - 1].index()) {
      throw ValidationError("streaming segments must alternate video and text");
    }
    if (const auto* run = std::get_if<std::vector<FrameBlock>>(&segments[i])) {
      if (run->empty()) throw ValidationError("empty video run");
      for (const auto& f : *run) seq.elements.emplace_back(f);
    } else {
      seq.elements.emplace_back(std::get<TextSpan>(segments[i]));
    }
  }
  validate_sequence(seq, limits);
  return seq;
}

std::string to_display(const TokenSequence& seq) {
  std::string out;
  const auto& els = seq.elements;
  for (std::size_t i = 0; i < els.size(); ++i) {
    const SequenceElement* prev = i > 0 ? &els[i - 1] : nullptr;
    std::visit(
        Overloaded{
            [&](const ImageBlock& b) {
              out.append(marker(kImageTag, b.tokens));
              out.push_back('\n');
            },
            [&](const FrameBlock& f) {
              if (prev && std::holds_alternative<FrameBlock>(*prev)) {
                out.push_back(',');
              } else if (prev) {
                out.push_back('\n');
              }
              render_frame(out, f);
            },
            [&](const TextSpan& t) {
              if (prev && std::holds_alternative<FrameBlock>(*prev)) {
                out.push_back('\n');
              }
              out.append(t.text);
            }},
        els[i]);
  }
  return out;
}

TokenSequence parse_display(std::string_view bytes, Layout layout) {
  TokenSequence seq{layout, {}};
  Cursor c(bytes);
  switch (layout) {
    case Layout::Image: {
      const std::string image_open = std::string(kOpen).append(kImageTag);
      while (c.consume(image_open)) {
        seq.elements.emplace_back(ImageBlock{c.count()});
        c.expect(kClose, "marker close");
        c.expect("\n", "'\\n' after image block");
      }
      seq.elements.emplace_back(TextSpan{std::string(c.rest())});
      break;
    }
    case Layout::Video: {
      for (auto& f : parse_run(c)) seq.elements.emplace_back(f);
      c.expect("\n", "'\\n' before text");
      seq.elements.emplace_back(TextSpan{std::string(c.rest())});
      break;
    }
    case Layout::Streaming: {
      if (bytes.empty()) break;
      bool first = true;
      while (first || !c.done()) {
        if (!first) c.expect("\n", "'\\n' between segments");
        first = false;
        if (c.starts_with(kTimePrefix)) {
          if (!seq.elements.empty() &&
              std::holds_alternative<FrameBlock>(seq.elements.back())) {
            c.fail("adjacent video runs");
          }
          for (auto& f : parse_run(c)) seq.elements.emplace_back(f);
          continue;
        }
        const auto rest = c.rest();
        const auto nl = std::find(rest.begin(), rest.end(), '\n');
        const auto len = static_cast<std::size_t>(nl - rest.begin());
        if (len == 0) c.fail("stray separator");
        if (!seq.elements.empty() &&
            std::holds_alternative<TextSpan>(seq.elements.back())) {
          c.fail("adjacent text spans");
        }
        seq.elements.emplace_back(TextSpan{std::string(rest.substr(0, len))});
        c.consume(rest.substr(0, len));
      }
      break;
    }
  }
  validate_sequence(seq, {std::numeric_limits<std::int64_t>::max(),
                          std::numeric_limits<std::int64_t>::max()});
  return seq;
}

std::string to_record(const TokenSequence& seq, std::string_view id) {
  using nlohmann::json;
  json elements = json::array();
  for (const auto& e : seq.elements) {
    std::visit(Overloaded{[&](const ImageBlock& b) {
                            elements.push_back({{"type", "image"}, {"tokens", b.tokens}});
                          },
                          [&](const FrameBlock& f) {
                            elements.push_back({{"type", "frame"},
                                                {"t", f.time.str()},
                                                {"tokens", f.tokens}});
                          },
                          [&](const TextSpan& t) {
                            elements.push_back({{"type", "text"},
                                                {"len", t.text.size()},
                                                {"text", t.text}});
                          }},
               e);
  }
  json rec;
  if (!id.empty()) rec["id"] = std::string(id);
  rec["layout"] = std::string(to_string(seq.layout));
  rec["visual_tokens"] = seq.visual_tokens();
  rec["total_tokens"] = seq.total_tokens();
  rec["elements"] = std::move(elements);
  try {
    return rec.dump();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("cannot encode record: ") + e.what());
  }
}

TokenSequence parse_sequence(std::string_view record) {
  using nlohmann::json;
  TokenSequence seq;
  try {
    const json rec = json::parse(record);
    seq.layout = layout_from_string(rec.at("layout").get<std::string>());
    for (const auto& e : rec.at("elements")) {
      const auto type = e.at("type").get<std::string>();
      if (type == "image") {
        seq.elements.emplace_back(ImageBlock{e.at("tokens").get<std::int64_t>()});
      } else if (type == "frame") {
        seq.elements.emplace_back(
            FrameBlock{Timestamp::parse(e.at("t").get<std::string>()),
                       e.at("tokens").get<std::int64_t>()});
      } else if (type == "text") {
        auto text = e.at("text").get<std::string>();
        if (e.at("len").get<std::size_t>() != text.size()) {
          throw ValidationError("text span length prefix mismatch");
        }
        seq.elements.emplace_back(TextSpan{std::move(text)});
      } else {
        throw ValidationError("unknown element type '" + type + "'");
      }
    }
    validate_sequence(seq, {std::numeric_limits<std::int64_t>::max(),
                            std::numeric_limits<std::int64_t>::max()});
    if (rec.contains("visual_tokens") &&
        rec["visual_tokens"].get<std::int64_t>() != seq.visual_tokens()) {
      throw ValidationError("visual_tokens does not match elements");
    }
    if (rec.contains("total_tokens") &&
        rec["total_tokens"].get<std::int64_t>() != seq.total_tokens()) {
      throw ValidationError("total_tokens does not match elements");
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed sequence record: ") + e.what());
  }
  return seq;
}

}  // namespace vlprep
