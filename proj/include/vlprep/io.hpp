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

// Binary and line-oriented file formats.
//
// Embedding matrix (.f32mat):
//   u32 M, u32 D, then M*D float32, row-major. All little-endian.
//
// Encoder weights (.vlpw):
//   "VLPW"  u32 version (=1)
//   u32 dim  u32 heads  f32 rope_base  u32 patch_len  u32 hidden  u32 llm_dim
//   then float32 tensors, row-major, in this order:
//     embed.weight [dim x patch_len]  embed.bias [dim]
//     wq [dim x dim] bq [dim]  wk bk  wv bv  wo bo
//     q_scale [head_dim]  k_scale [head_dim]
//     w1 [hidden x dim] b1 [hidden]  w2 [llm_dim x hidden] b2 [llm_dim]
//
// Converting an external checkpoint means writing its tensors in this
// order; no other framing exists.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "vlprep/curate.hpp"
#include "vlprep/encoder.hpp"

namespace vlprep {

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

/// Non-empty lines, trailing '\r' stripped.
std::vector<std::string> read_lines(const std::filesystem::path& path);

namespace detail {

void put_u32(std::string& out, std::uint32_t v);
void put_f32(std::string& out, float v);

class ByteReader {
 public:
  ByteReader(std::string bytes, std::string source)
      : bytes_(std::move(bytes)), source_(std::move(source)) {}

  std::uint32_t u32();
  float f32();
  void expect_end() const;
  std::size_t remaining() const { return bytes_.size() - pos_; }
  const std::string& source() const { return source_; }

 private:
  void need(std::size_t n) const;

  std::string bytes_;
  std::string source_;
  std::size_t pos_ = 0;
};

template <typename Derived>
void put_tensor(std::string& out, const Eigen::MatrixBase<Derived>& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) put_f32(out, static_cast<float>(m(i, j)));
  }
}

template <typename Scalar>
Matrix<Scalar> take_matrix(ByteReader& in, Eigen::Index rows, Eigen::Index cols) {
  Matrix<Scalar> m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = static_cast<Scalar>(in.f32());
  }
  return m;
}

template <typename Scalar>
Vector<Scalar> take_vector(ByteReader& in, Eigen::Index n) {
  Vector<Scalar> v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = static_cast<Scalar>(in.f32());
  return v;
}

}  // namespace detail

template <typename Derived>
std::string encode_matrix(const Eigen::MatrixBase<Derived>& m) {
  std::string out;
  out.reserve(8 + 4 * static_cast<std::size_t>(m.size()));
  detail::put_u32(out, static_cast<std::uint32_t>(m.rows()));
  detail::put_u32(out, static_cast<std::uint32_t>(m.cols()));
  detail::put_tensor(out, m);
  return out;
}

template <typename Scalar = double>
Matrix<Scalar> decode_matrix(std::string bytes, std::string source = "<memory>") {
  detail::ByteReader in(std::move(bytes), std::move(source));
  const std::uint32_t rows = in.u32();
  const std::uint32_t cols = in.u32();
  if (static_cast<std::uint64_t>(rows) * cols * 4 != in.remaining()) {
    throw IoError(in.source() + ": header says " + std::to_string(rows) + "x" +
                  std::to_string(cols) + " but payload holds " +
                  std::to_string(in.remaining()) + " bytes");
  }
  return detail::take_matrix<Scalar>(in, rows, cols);
}

template <typename Scalar = double>
Matrix<Scalar> read_matrix_file(const std::filesystem::path& path) {
  return decode_matrix<Scalar>(read_file(path), path.string());
}

/// One id per line. Without a manifest, ids are the row numbers.
template <typename Scalar = double>
EmbeddingSet<Scalar> read_embedding_set(const std::filesystem::path& matrix_path,
                                        const std::filesystem::path& id_path = {}) {
  EmbeddingSet<Scalar> set;
  set.vectors = read_matrix_file<Scalar>(matrix_path);
  if (set.vectors.rows() < 1) throw ValidationError("embedding file holds no rows");
  if (!set.vectors.allFinite()) throw ValidationError("non-finite embedding value");
  if (id_path.empty()) {
    for (Eigen::Index i = 0; i < set.vectors.rows(); ++i) set.ids.push_back(std::to_string(i));
  } else {
    set.ids = read_lines(id_path);
    if (static_cast<Eigen::Index>(set.ids.size()) != set.vectors.rows()) {
      throw ValidationError("id manifest has " + std::to_string(set.ids.size()) +
                            " ids for " + std::to_string(set.vectors.rows()) +
                            " embeddings");
    }
  }
  return set;
}

template <typename Scalar>
std::string encode_encoder_weights(const EncoderWeights<Scalar>& w) {
  using detail::put_tensor;
  using detail::put_u32;
  w.config.validate();
  std::string out = "VLPW";
  put_u32(out, 1);
  put_u32(out, static_cast<std::uint32_t>(w.config.dim));
  put_u32(out, static_cast<std::uint32_t>(w.config.heads));
  detail::put_f32(out, static_cast<float>(w.config.rope_base));
  put_u32(out, static_cast<std::uint32_t>(w.patch_len()));
  put_u32(out, static_cast<std::uint32_t>(w.hidden_dim()));
  put_u32(out, static_cast<std::uint32_t>(w.llm_dim()));
  const auto& a = w.attention;
  put_tensor(out, w.embed.weight);
  put_tensor(out, w.embed.bias);
  put_tensor(out, a.wq);
  put_tensor(out, a.bq);
  put_tensor(out, a.wk);
  put_tensor(out, a.bk);
  put_tensor(out, a.wv);
  put_tensor(out, a.bv);
  put_tensor(out, a.wo);
  put_tensor(out, a.bo);
  put_tensor(out, a.q_scale);
  put_tensor(out, a.k_scale);
  put_tensor(out, w.projector.w1);
  put_tensor(out, w.projector.b1);
  put_tensor(out, w.projector.w2);
  put_tensor(out, w.projector.b2);
  return out;
}

template <typename Scalar = double>
EncoderWeights<Scalar> decode_encoder_weights(std::string bytes,
                                              std::string source = "<memory>") {
  using detail::take_matrix;
  using detail::take_vector;
  if (bytes.size() < 4 || bytes.compare(0, 4, "VLPW") != 0) {
    throw IoError(source + ": not an encoder weight file");
  }
  detail::ByteReader in(bytes.substr(4), std::move(source));
  if (const auto version = in.u32(); version != 1) {
    throw IoError(in.source() + ": unsupported weight file version " +
                  std::to_string(version));
  }
  EncoderWeights<Scalar> w;
  w.config.dim = static_cast<int>(in.u32());
  w.config.heads = static_cast<int>(in.u32());
  w.config.rope_base = in.f32();
  w.config.validate();
  const auto patch_len = static_cast<Eigen::Index>(in.u32());
  const auto hidden = static_cast<Eigen::Index>(in.u32());
  const auto llm = static_cast<Eigen::Index>(in.u32());
  const Eigen::Index dim = w.config.dim;
  const Eigen::Index hd = w.config.head_dim();
  auto& a = w.attention;
  w.embed.weight = take_matrix<Scalar>(in, dim, patch_len);
  w.embed.bias = take_vector<Scalar>(in, dim);
  a.wq = take_matrix<Scalar>(in, dim, dim);
  a.bq = take_vector<Scalar>(in, dim);
  a.wk = take_matrix<Scalar>(in, dim, dim);
  a.bk = take_vector<Scalar>(in, dim);
  a.wv = take_matrix<Scalar>(in, dim, dim);
  a.bv = take_vector<Scalar>(in, dim);
  a.wo = take_matrix<Scalar>(in, dim, dim);
  a.bo = take_vector<Scalar>(in, dim);
  a.q_scale = take_vector<Scalar>(in, hd);
  a.k_scale = take_vector<Scalar>(in, hd);
  w.projector.w1 = take_matrix<Scalar>(in, hidden, dim);
  w.projector.b1 = take_vector<Scalar>(in, hidden);
  w.projector.w2 = take_matrix<Scalar>(in, llm, hidden);
  w.projector.b2 = take_vector<Scalar>(in, llm);
  in.expect_end();
  return w;
}

}  // namespace vlprep
