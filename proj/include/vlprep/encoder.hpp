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

// Toy-scale vision encoder kernel: patch projection, full (non-causal)
// multi-head attention with QK normalization and 2D rotary positions, and
// the two-layer GELU projector into the language model's hidden size.
//
// Features are row-per-token: an N x D matrix holds N tokens of width D.

#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "vlprep/error.hpp"
#include "vlprep/geometry.hpp"
#include "vlprep/rng.hpp"

namespace vlprep {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

/// N x D token features.
template <typename Scalar>
using FeatureMatrix = Matrix<Scalar>;

struct TokenPos2D {
  int row = 0;
  int col = 0;

  friend bool operator==(const TokenPos2D&, const TokenPos2D&) = default;
};

/// Row-major positions of every patch in a grid.
inline std::vector<TokenPos2D> grid_positions(const PatchGrid& grid) {
  std::vector<TokenPos2D> out;
  out.reserve(static_cast<std::size_t>(grid.tokens()));
  for (int r = 0; r < grid.rows; ++r) {
    for (int c = 0; c < grid.cols; ++c) out.push_back({r, c});
  }
  return out;
}

struct AttentionConfig {
  int dim = 64;
  int heads = 4;
  double rope_base = 10000.0;

  int head_dim() const { return dim / heads; }

  /// Each head splits into a row half and a column half, each made of
  /// (cos, sin) pairs, so the per-head width must be a multiple of 4.
  void validate() const {
    if (dim < 1 || heads < 1 || dim % heads != 0) {
      throw ValidationError("attention dim must be divisible by heads");
    }
    if (head_dim() % 4 != 0) {
      throw ValidationError("per-head dim " + std::to_string(head_dim()) +
                            " is not a multiple of 4");
    }
    if (!(rope_base > 1.0)) throw ValidationError("rope_base must exceed 1");
  }
};

enum class AttentionMask { Bidirectional, Causal };

template <typename Scalar>
struct PatchEmbedding {
  Matrix<Scalar> weight;  // dim x patch_len
  Vector<Scalar> bias;    // dim
};

template <typename Scalar>
struct AttentionWeights {
  Matrix<Scalar> wq, wk, wv, wo;  // dim x dim, applied as W * x
  Vector<Scalar> bq, bk, bv, bo;  // dim
  Vector<Scalar> q_scale, k_scale;  // head_dim, QK-norm gains
};

template <typename Scalar>
struct Projector {
  Matrix<Scalar> w1;  // hidden x dim
  Vector<Scalar> b1;
  Matrix<Scalar> w2;  // llm_dim x hidden
  Vector<Scalar> b2;
};

template <typename Scalar>
struct EncoderWeights {
  AttentionConfig config;
  PatchEmbedding<Scalar> embed;
  AttentionWeights<Scalar> attention;
  Projector<Scalar> projector;

  int patch_len() const { return static_cast<int>(embed.weight.cols()); }
  int hidden_dim() const { return static_cast<int>(projector.w1.rows()); }
  int llm_dim() const { return static_cast<int>(projector.w2.rows()); }
};

namespace detail {

template <typename Scalar>
void require_shape(Eigen::Index rows, Eigen::Index cols, Eigen::Index want_rows,
                   Eigen::Index want_cols, const char* what) {
  if (rows != want_rows || cols != want_cols) {
    throw ValidationError(std::string(what) + ": expected " +
                          std::to_string(want_rows) + "x" +
                          std::to_string(want_cols) + ", got " +
                          std::to_string(rows) + "x" + std::to_string(cols));
  }
}

// x * W^T + b, row per token.
template <typename Scalar, typename Derived>
Matrix<Scalar> affine_rows(const Eigen::MatrixBase<Derived>& x,
                           const Matrix<Scalar>& w, const Vector<Scalar>& b) {
  Matrix<Scalar> out = x * w.transpose();
  out.rowwise() += b.transpose();
  return out;
}

template <typename Scalar>
Scalar gelu(Scalar x) {
  using std::erf;
  using std::sqrt;
  return Scalar(0.5) * x * (Scalar(1) + erf(x / sqrt(Scalar(2))));
}

}  // namespace detail

/// theta_j = rope_base^(-2j / axis_dim) for j < axis_dim / 2, where
/// axis_dim is half the per-head width.
template <typename Scalar>
Vector<Scalar> rope_frequencies(const AttentionConfig& cfg) {
  const int axis = cfg.head_dim() / 2;
  Vector<Scalar> out(axis / 2);
  for (int j = 0; j < axis / 2; ++j) {
    out(j) = static_cast<Scalar>(
        std::pow(cfg.rope_base, -2.0 * j / static_cast<double>(axis)));
  }
  return out;
}

/// Rotates one token row in place. In every head, the first half of the
/// channels turns with the patch row, the second half with the column;
/// channels pair up as (2j, 2j+1) inside each half.
template <typename Derived>
void rope2d_rotate_inplace(Eigen::MatrixBase<Derived> const& row_const,
                           TokenPos2D pos, const AttentionConfig& cfg,
                           const Vector<typename Derived::Scalar>& freqs) {
  using Scalar = typename Derived::Scalar;
  auto& row = const_cast<Eigen::MatrixBase<Derived>&>(row_const);
  const int hd = cfg.head_dim();
  const int axis = hd / 2;
  for (int h = 0; h < cfg.heads; ++h) {
    for (int a = 0; a < 2; ++a) {
      const Scalar p = static_cast<Scalar>(a == 0 ? pos.row : pos.col);
      const int offset = h * hd + a * axis;
      for (int j = 0; j < axis / 2; ++j) {
        const Scalar angle = p * freqs(j);
        const Scalar c = std::cos(angle);
        const Scalar s = std::sin(angle);
        const Scalar x0 = row(offset + 2 * j);
        const Scalar x1 = row(offset + 2 * j + 1);
        row(offset + 2 * j) = x0 * c - x1 * s;
        row(offset + 2 * j + 1) = x0 * s + x1 * c;
      }
    }
  }
}

template <typename Derived>
RowVector<typename Derived::Scalar> rope2d_rotate(
    const Eigen::MatrixBase<Derived>& vec, TokenPos2D pos,
    const AttentionConfig& cfg) {
  using Scalar = typename Derived::Scalar;
  cfg.validate();
  if (vec.size() != cfg.dim) {
    throw ValidationError("rope input width " + std::to_string(vec.size()) +
                          " != dim " + std::to_string(cfg.dim));
  }
  RowVector<Scalar> out(vec.size());
  for (Eigen::Index i = 0; i < vec.size(); ++i) out(i) = vec(i);
  rope2d_rotate_inplace(out, pos, cfg, rope_frequencies<Scalar>(cfg));
  return out;
}

/// Each row becomes weight * patch + bias.
template <typename Derived>
FeatureMatrix<typename Derived::Scalar> embed_patches(
    const Eigen::MatrixBase<Derived>& patches,
    const PatchEmbedding<typename Derived::Scalar>& embed) {
  using Scalar = typename Derived::Scalar;
  if (patches.cols() != embed.weight.cols()) {
    throw ValidationError("patch length " + std::to_string(patches.cols()) +
                          " != embedding input " +
                          std::to_string(embed.weight.cols()));
  }
  if (embed.bias.size() != embed.weight.rows()) {
    throw ValidationError("embedding bias length mismatch");
  }
  return detail::affine_rows<Scalar>(patches, embed.weight, embed.bias);
}

/// Multi-head scaled-dot-product attention. Queries and keys are
/// unit-normalized per head and multiplied by their learned gains, then
/// rotated by 2D RoPE. With AttentionMask::Bidirectional every output row
/// sees every input row. If `probs` is given it receives one N x N softmax
/// matrix per head.
template <typename Derived>
FeatureMatrix<typename Derived::Scalar> attend(
    const Eigen::MatrixBase<Derived>& x,
    const AttentionWeights<typename Derived::Scalar>& w,
    std::span<const TokenPos2D> positions, const AttentionConfig& cfg,
    AttentionMask mask,
    std::vector<Matrix<typename Derived::Scalar>>* probs = nullptr) {
  using Scalar = typename Derived::Scalar;
  using std::sqrt;
  cfg.validate();
  const Eigen::Index n = x.rows();
  const int dim = cfg.dim;
  const int hd = cfg.head_dim();
  if (n < 1) throw ValidationError("attention over zero tokens");
  detail::require_shape<Scalar>(x.rows(), x.cols(), n, dim, "attention input");
  for (const auto* m : {&w.wq, &w.wk, &w.wv, &w.wo}) {
    detail::require_shape<Scalar>(m->rows(), m->cols(), dim, dim, "attention weight");
  }
  for (const auto* b : {&w.bq, &w.bk, &w.bv, &w.bo}) {
    if (b->size() != dim) throw ValidationError("attention bias length mismatch");
  }
  if (w.q_scale.size() != hd || w.k_scale.size() != hd) {
    throw ValidationError("QK-norm gain length must equal the head dim");
  }
  if (static_cast<Eigen::Index>(positions.size()) != n) {
    throw ValidationError("one position per token required");
  }

  Matrix<Scalar> q = detail::affine_rows<Scalar>(x, w.wq, w.bq);
  Matrix<Scalar> k = detail::affine_rows<Scalar>(x, w.wk, w.bk);
  const Matrix<Scalar> v = detail::affine_rows<Scalar>(x, w.wv, w.bv);

  constexpr Scalar kEps = Scalar(1e-12);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int h = 0; h < cfg.heads; ++h) {
      auto qh = q.row(i).segment(h * hd, hd);
      auto kh = k.row(i).segment(h * hd, hd);
      qh = (qh / (qh.norm() + kEps)).cwiseProduct(w.q_scale.transpose());
      kh = (kh / (kh.norm() + kEps)).cwiseProduct(w.k_scale.transpose());
    }
  }
  const Vector<Scalar> freqs = rope_frequencies<Scalar>(cfg);
  for (Eigen::Index i = 0; i < n; ++i) {
    rope2d_rotate_inplace(q.row(i), positions[static_cast<std::size_t>(i)], cfg, freqs);
    rope2d_rotate_inplace(k.row(i), positions[static_cast<std::size_t>(i)], cfg, freqs);
  }

  if (probs) probs->clear();
  const Scalar scale = Scalar(1) / sqrt(static_cast<Scalar>(hd));
  Matrix<Scalar> heads_out(n, dim);
  for (int h = 0; h < cfg.heads; ++h) {
    Matrix<Scalar> logits =
        q.middleCols(h * hd, hd) * k.middleCols(h * hd, hd).transpose() * scale;
    if (mask == AttentionMask::Causal) {
      for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
          logits(i, j) = -std::numeric_limits<Scalar>::infinity();
        }
      }
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      auto r = logits.row(i);
      r = (r.array() - r.maxCoeff()).exp().matrix();
      r /= r.sum();
    }
    heads_out.middleCols(h * hd, hd) = logits * v.middleCols(h * hd, hd);
    if (probs) probs->push_back(std::move(logits));
  }
  return detail::affine_rows<Scalar>(heads_out, w.wo, w.bo);
}

template <typename Derived>
FeatureMatrix<typename Derived::Scalar> attend_bidirectional(
    const Eigen::MatrixBase<Derived>& x,
    const AttentionWeights<typename Derived::Scalar>& w,
    std::span<const TokenPos2D> positions, const AttentionConfig& cfg) {
  return attend(x, w, positions, cfg, AttentionMask::Bidirectional);
}

/// affine -> GELU (erf form) -> affine.
template <typename Derived>
FeatureMatrix<typename Derived::Scalar> project_to_llm(
    const Eigen::MatrixBase<Derived>& x,
    const Projector<typename Derived::Scalar>& p) {
  using Scalar = typename Derived::Scalar;
  if (x.cols() != p.w1.cols()) {
    throw ValidationError("projector input width " + std::to_string(x.cols()) +
                          " != " + std::to_string(p.w1.cols()));
  }
  if (p.b1.size() != p.w1.rows() || p.w2.cols() != p.w1.rows() ||
      p.b2.size() != p.w2.rows()) {
    throw ValidationError("projector weights are inconsistent");
  }
  Matrix<Scalar> h = detail::affine_rows<Scalar>(x, p.w1, p.b1);
  h = h.unaryExpr([](Scalar s) { return detail::gelu(s); });
  return detail::affine_rows<Scalar>(h, p.w2, p.b2);
}

/// embed -> residual bidirectional attention -> projector.
template <typename Derived>
FeatureMatrix<typename Derived::Scalar> encode(
    const Eigen::MatrixBase<Derived>& patches,
    std::span<const TokenPos2D> positions,
    const EncoderWeights<typename Derived::Scalar>& w) {
  using Scalar = typename Derived::Scalar;
  const Matrix<Scalar> x = embed_patches(patches, w.embed);
  const Matrix<Scalar> h = x + attend_bidirectional(x, w.attention, positions, w.config);
  return project_to_llm(h, w.projector);
}

/// Gaussian weights scaled by 1/sqrt(fan_in); QK gains start at 1.
template <typename Scalar>
EncoderWeights<Scalar> random_encoder_weights(const AttentionConfig& cfg,
                                              int patch_len, int hidden_dim,
                                              int llm_dim, SeededRng& rng) {
  cfg.validate();
  auto mat = [&](int rows, int cols) {
    Matrix<Scalar> m(rows, cols);
    const double s = 1.0 / std::sqrt(static_cast<double>(cols));
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      for (Eigen::Index i = 0; i < m.rows(); ++i) {
        m(i, j) = static_cast<Scalar>(rng.normal() * s);
      }
    }
    return m;
  };
  auto vec = [&](int n) {
    Vector<Scalar> v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = static_cast<Scalar>(0.1 * rng.normal());
    return v;
  };
  EncoderWeights<Scalar> w;
  w.config = cfg;
  w.embed = {mat(cfg.dim, patch_len), vec(cfg.dim)};
  auto& a = w.attention;
  a.wq = mat(cfg.dim, cfg.dim);
  a.wk = mat(cfg.dim, cfg.dim);
  a.wv = mat(cfg.dim, cfg.dim);
  a.wo = mat(cfg.dim, cfg.dim);
  a.bq = vec(cfg.dim);
  a.bk = vec(cfg.dim);
  a.bv = vec(cfg.dim);
  a.bo = vec(cfg.dim);
  a.q_scale = Vector<Scalar>::Ones(cfg.head_dim());
  a.k_scale = Vector<Scalar>::Ones(cfg.head_dim());
  w.projector = {mat(hidden_dim, cfg.dim), vec(hidden_dim), mat(llm_dim, hidden_dim),
                 vec(llm_dim)};
  return w;
}

}  // namespace vlprep
