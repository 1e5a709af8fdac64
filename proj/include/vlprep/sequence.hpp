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

// Multimodal token sequences.
//
// Three layouts are supported:
//
//   image      I1 \n I2 \n ... \n IN \n X
//   video      Time: t1s V1 , Time: t2s V2 , ... \n X
//   streaming  video runs and text spans interleaved, joined by \n
//
// Visual blocks have no embedding table here, so they render as the
// placeholder markers "⟦IMG:n⟧" and "⟦VID:n⟧" carrying their token count.
// The display form is the text layout above. The record form is one JSON
// object per line and is the canonical round-trip format.
//
// Token accounting: a visual block counts its token_count; every other
// display byte (text, timestamp tags, separators) counts as one text token.

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace vlprep {

inline constexpr std::int64_t kVisualTokenLimit = 10240;
inline constexpr std::int64_t kContextTokenLimit = 16384;

/// Frame timestamp held on a 0.1 s grid so rendering is exact and reversible.
class Timestamp {
 public:
  constexpr Timestamp() = default;
  static constexpr Timestamp from_tenths(std::int64_t tenths) {
    Timestamp t;
    t.tenths_ = tenths;
    return t;
  }
  /// Rounds to the nearest 0.1 s, half away from zero.
  static Timestamp from_seconds(double seconds);

  constexpr std::int64_t tenths() const { return tenths_; }
  double seconds() const { return static_cast<double>(tenths_) / 10.0; }

  /// "7" for whole seconds, "2.5" otherwise. Locale independent.
  std::string str() const;
  /// Inverse of str(). Throws ValidationError on anything else.
  static Timestamp parse(std::string_view text);

  friend constexpr auto operator<=>(const Timestamp&, const Timestamp&) = default;

 private:
  std::int64_t tenths_ = 0;
};

struct ImageBlock {
  std::int64_t tokens = 1;
  friend bool operator==(const ImageBlock&, const ImageBlock&) = default;
};

struct FrameBlock {
  Timestamp time;
  std::int64_t tokens = 1;
  friend bool operator==(const FrameBlock&, const FrameBlock&) = default;
};

struct TextSpan {
  std::string text;
  friend bool operator==(const TextSpan&, const TextSpan&) = default;
};

using SequenceElement = std::variant<ImageBlock, FrameBlock, TextSpan>;

enum class Layout { Image, Video, Streaming };

std::string_view to_string(Layout layout);
Layout layout_from_string(std::string_view s);

struct SequenceLimits {
  std::int64_t visual = kVisualTokenLimit;
  std::int64_t total = kContextTokenLimit;
};

struct TokenSequence {
  Layout layout = Layout::Streaming;
  /// Image and video layouts always end in exactly one TextSpan (possibly
  /// empty). Streaming sequences hold frame runs and non-empty text spans
  /// that never sit next to each other.
  std::vector<SequenceElement> elements;

  std::int64_t visual_tokens() const;
  std::int64_t text_tokens() const;
  std::int64_t total_tokens() const { return visual_tokens() + text_tokens(); }

  friend bool operator==(const TokenSequence&, const TokenSequence&) = default;
};

/// A streaming segment is either a run of frames or a text span.
using StreamSegment = std::variant<std::vector<FrameBlock>, TextSpan>;

TokenSequence pack_image_sequence(std::span<const ImageBlock> images,
                                  TextSpan text,
                                  const SequenceLimits& limits = {});

TokenSequence pack_video_sequence(std::span<const FrameBlock> frames,
                                  TextSpan text,
                                  const SequenceLimits& limits = {});

TokenSequence pack_streaming(std::span<const StreamSegment> segments,
                             const SequenceLimits& limits = {});

/// Structural checks for the layout, strictly increasing timestamps and the
/// token limits. Throws ValidationError or LimitError.
void validate_sequence(const TokenSequence& seq,
                       const SequenceLimits& limits = {});

std::string to_display(const TokenSequence& seq);

/// Parses a display string back into `layout`. Text that itself looks like
/// a marker or separator cannot be told apart here; use the record form.
TokenSequence parse_display(std::string_view bytes, Layout layout);

/// One-line JSON record. `id`, when non-empty, is stored alongside.
std::string to_record(const TokenSequence& seq, std::string_view id = {});

/// Inverse of to_record.
TokenSequence parse_sequence(std::string_view record);

}  // namespace vlprep
