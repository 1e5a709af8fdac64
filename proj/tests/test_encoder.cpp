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

#include <cmath>
#include <vector>

#include <doctest.h>

#include "vlprep/encoder.hpp"
#include "vlprep/error.hpp"
#include "vlprep/rng.hpp"

using namespace vlprep;

namespace {

using Mat = Matrix<double>;
using Vec = std::vector<double>;
using Table = std::vector<Vec>;

Mat random_matrix(SeededRng& rng, int r, int c) {
  Mat m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = rng.normal();
  return m;
}

// ---- naive loop oracle, written without Eigen expressions ----

Table to_table(const Mat& m) {
  Table t(static_cast<std::size_t>(m.rows()), Vec(static_cast<std::size_t>(m.cols())));
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) t[i][j] = m(i, j);
  return t;
}

Vec to_vec(const Vector<double>& v) { return Vec(v.data(), v.data() + v.size()); }

// y = W x + b per row.
Table naive_affine(const Table& x, const Table& w, const Vec& b) {
  Table y(x.size(), Vec(w.size(), 0.0));
  for (std::size_t n = 0; n < x.size(); ++n)
    for (std::size_t o = 0; o < w.size(); ++o) {
      double s = b[o];
      for (std::size_t i = 0; i < x[n].size(); ++i) s += w[o][i] * x[n][i];
      y[n][o] = s;
    }
  return y;
}

void naive_rope(Vec& v, TokenPos2D p, int heads, double base) {
  const std::size_t hd = v.size() / heads;
  const std::size_t half = hd / 2;
  for (int h = 0; h < heads; ++h)
    for (std::size_t c = 0; c < hd; c += 2) {
      const bool col_axis = c >= half;
      const std::size_t j = (col_axis ? c - half : c) / 2;
      const double theta = std::pow(base, -2.0 * j / static_cast<double>(half));
      const double angle = (col_axis ? p.col : p.row) * theta;
      const std::size_t i0 = h * hd + c;
      const double a = v[i0], b = v[i0 + 1];
      v[i0] = a * std::cos(angle) - b * std::sin(angle);
      v[i0 + 1] = a * std::sin(angle) + b * std::cos(angle);
    }
}

Table naive_attention(const Table& x, const AttentionWeights<double>& w,
                      const std::vector<TokenPos2D>& pos, const AttentionConfig& cfg,
                      bool causal) {
  Table q = naive_affine(x, to_table(w.wq), to_vec(w.bq));
  Table k = naive_affine(x, to_table(w.wk), to_vec(w.bk));
  Table v = naive_affine(x, to_table(w.wv), to_vec(w.bv));
  const std::size_t n = x.size(), hd = static_cast<std::size_t>(cfg.head_dim());
  for (std::size_t t = 0; t < n; ++t) {
    for (int h = 0; h < cfg.heads; ++h) {
      for (Table* m : {&q, &k}) {
        double norm = 0;
        for (std::size_t c = 0; c < hd; ++c) norm += (*m)[t][h * hd + c] * (*m)[t][h * hd + c];
        norm = std::sqrt(norm) + 1e-12;
        const auto& gain = m == &q ? w.q_scale : w.k_scale;
        for (std::size_t c = 0; c < hd; ++c) (*m)[t][h * hd + c] = (*m)[t][h * hd + c] / norm * gain(c);
      }
    }
    naive_rope(q[t], pos[t], cfg.heads, cfg.rope_base);
    naive_rope(k[t], pos[t], cfg.heads, cfg.rope_base);
  }
  Table out(n, Vec(static_cast<std::size_t>(cfg.dim), 0.0));
  for (int h = 0; h < cfg.heads; ++h)
    for (std::size_t i = 0; i < n; ++i) {
      Vec logit(n);
      double mx = -1e300;
      const std::size_t last = causal ? i : n - 1;
      for (std::size_t j = 0; j <= last; ++j) {
        double s = 0;
        for (std::size_t c = 0; c < hd; ++c) s += q[i][h * hd + c] * k[j][h * hd + c];
        logit[j] = s / std::sqrt(static_cast<double>(hd));
        mx = std::max(mx, logit[j]);
      }
      double z = 0;
      for (std::size_t j = 0; j <= last; ++j) z += std::exp(logit[j] - mx);
      for (std::size_t j = 0; j <= last; ++j) {
        const double p = std::exp(logit[j] - mx) / z;
        for (std::size_t c = 0; c < hd; ++c) out[i][h * hd + c] += p * v[j][h * hd + c];
      }
    }
  return naive_affine(out, to_table(w.wo), to_vec(w.bo));
}

Table naive_projector(const Table& x, const Projector<double>& p) {
  Table h = naive_affine(x, to_table(p.w1), to_vec(p.b1));
  for (auto& row : h)
    for (double& e : row) e = 0.5 * e * (1.0 + std::erf(e / std::sqrt(2.0)));
  return naive_affine(h, to_table(p.w2), to_vec(p.b2));
}

double max_diff(const Mat& a, const Table& b) {
  double d = 0;
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) d = std::max(d, std::abs(a(i, j) - b[i][j]));
  return d;
}

std::vector<TokenPos2D> positions(int n) {
  std::vector<TokenPos2D> p;
  for (int i = 0; i < n; ++i) p.push_back({i / 3, i % 3});
  return p;
}

}  // namespace

TEST_SUITE("encoder") {

TEST_CASE("config validation") {
  CHECK_NOTHROW((AttentionConfig{64, 4, 10000}.validate()));
  CHECK_THROWS_AS((AttentionConfig{64, 5, 10000}.validate()), ValidationError);
  CHECK_THROWS_AS((AttentionConfig{24, 4, 10000}.validate()), ValidationError);  // head dim 6
  CHECK_THROWS_AS((AttentionConfig{16, 1, 1.0}.validate()), ValidationError);
}

TEST_CASE("grid positions are row-major") {
  const auto p = grid_positions({3, 2, 16});
  REQUIRE(p.size() == 6);
  CHECK(p[0] == TokenPos2D{0, 0});
  CHECK(p[2] == TokenPos2D{0, 2});
  CHECK(p[3] == TokenPos2D{1, 0});
}

TEST_CASE("embed_patches") {
  SeededRng rng(1);
  PatchEmbedding<double> id{Mat::Identity(4, 4), Vector<double>::Zero(4)};
  const Mat basis = Mat::Identity(4, 4);
  CHECK(embed_patches(basis, id) == basis);
  PatchEmbedding<double> zero{Mat::Zero(8, 4), Vector<double>::Zero(8)};
  CHECK(embed_patches(random_matrix(rng, 3, 4), zero).isZero(0));
  PatchEmbedding<double> w{random_matrix(rng, 8, 5), random_matrix(rng, 8, 1).col(0)};
  const Mat x = random_matrix(rng, 3, 5);
  CHECK(max_diff(embed_patches(x, w), naive_affine(to_table(x), to_table(w.weight), to_vec(w.bias))) < 1e-12);
  CHECK_THROWS_AS(embed_patches(random_matrix(rng, 3, 4), w), ValidationError);
}

TEST_CASE("rope2d_rotate") {
  SeededRng rng(2);
  const AttentionConfig cfg{16, 2, 10000};
  const RowVector<double> v = random_matrix(rng, 1, 16);
  CHECK(rope2d_rotate(v, {0, 0}, cfg) == v);
  for (int t = 0; t < 50; ++t) {
    const TokenPos2D p{static_cast<int>(rng.below(40)), static_cast<int>(rng.below(40))};
    const RowVector<double> r = rope2d_rotate(v, p, cfg);
    CHECK(std::abs(r.norm() - v.norm()) < 1e-12);
    Vec naive(v.data(), v.data() + v.size());
    naive_rope(naive, p, cfg.heads, cfg.rope_base);
    for (int i = 0; i < 16; ++i) CHECK(r(i) == doctest::Approx(naive[static_cast<std::size_t>(i)]).epsilon(1e-13));
  }
  // Row shifts touch only the first half of each head, column shifts the second.
  const RowVector<double> row_only = rope2d_rotate(v, {3, 0}, cfg);
  CHECK(row_only.segment(4, 4) == v.segment(4, 4));
  CHECK(row_only.segment(12, 4) == v.segment(12, 4));
  CHECK_THROWS_AS(rope2d_rotate(random_matrix(rng, 1, 12), {0, 0}, cfg), ValidationError);
}

TEST_CASE("attention matches the naive oracle") {
  SeededRng rng(3);
  for (int t = 0; t < 10; ++t) {
    const AttentionConfig cfg{16, t % 2 == 0 ? 2 : 4, 10000};
    auto w = random_encoder_weights<double>(cfg, 6, 10, 12, rng);
    for (int c = 0; c < cfg.head_dim(); ++c) {
      w.attention.q_scale(c) = 0.5 + rng.uniform();
      w.attention.k_scale(c) = 0.5 + rng.uniform();
    }
    const int n = 1 + static_cast<int>(rng.below(7));
    const Mat x = random_matrix(rng, n, 16);
    const auto pos = positions(n);
    const Mat y = attend_bidirectional(x, w.attention, pos, cfg);
    CHECK(max_diff(y, naive_attention(to_table(x), w.attention, pos, cfg, false)) < 1e-10);
    const Mat c = attend(x, w.attention, pos, cfg, AttentionMask::Causal);
    CHECK(max_diff(c, naive_attention(to_table(x), w.attention, pos, cfg, true)) < 1e-10);

    std::vector<Mat> probs;
    attend(x, w.attention, pos, cfg, AttentionMask::Bidirectional, &probs);
    REQUIRE(probs.size() == static_cast<std::size_t>(cfg.heads));
    for (const Mat& p : probs) CHECK((p.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("attention special cases") {
  SeededRng rng(4);
  const AttentionConfig cfg{8, 2, 10000};
  const auto w = random_encoder_weights<double>(cfg, 4, 4, 4, rng).attention;
  // One token: softmax over a single entry returns its value projection.
  const Mat x = random_matrix(rng, 1, 8);
  const std::vector<TokenPos2D> p0{{0, 0}};
  const Mat value = (x * w.wv.transpose()).rowwise() + w.bv.transpose();
  const Mat expect = (value * w.wo.transpose()).rowwise() + w.bo.transpose();
  CHECK((attend_bidirectional(x, w, p0, cfg) - expect).cwiseAbs().maxCoeff() < 1e-12);

  // Identical tokens at one position: identical outputs.
  const Mat same = x.replicate(5, 1);
  const std::vector<TokenPos2D> p5(5, TokenPos2D{2, 1});
  const Mat y = attend_bidirectional(same, w, p5, cfg);
  for (int i = 1; i < 5; ++i) CHECK((y.row(i) - y.row(0)).cwiseAbs().maxCoeff() < 1e-12);

  CHECK_THROWS_AS(attend_bidirectional(random_matrix(rng, 3, 8), w, p5, cfg), ValidationError);
  CHECK_THROWS_AS(attend_bidirectional(random_matrix(rng, 5, 6), w, p5, cfg), ValidationError);
}

TEST_CASE("bidirectional witness against a causal control") {
  SeededRng rng(5);
  const AttentionConfig cfg{16, 4, 10000};
  const auto w = random_encoder_weights<double>(cfg, 4, 4, 4, rng).attention;
  const Mat x = random_matrix(rng, 6, 16);
  Mat x2 = x;
  x2.row(5) += 1e-3 * random_matrix(rng, 1, 16);
  const auto pos = positions(6);
  const double bi = (attend_bidirectional(x2, w, pos, cfg).row(0) -
                     attend_bidirectional(x, w, pos, cfg).row(0)).cwiseAbs().maxCoeff();
  const double causal = (attend(x2, w, pos, cfg, AttentionMask::Causal).row(0) -
                         attend(x, w, pos, cfg, AttentionMask::Causal).row(0)).cwiseAbs().maxCoeff();
  CHECK(bi > 1e-6);
  CHECK(causal == 0.0);
}

TEST_CASE("projector and full forward pass") {
  SeededRng rng(6);
  const AttentionConfig cfg{16, 2, 10000};
  const auto w = random_encoder_weights<double>(cfg, 12, 24, 20, rng);
  const Mat zero = Mat::Zero(3, 16);
  CHECK(max_diff(project_to_llm(zero, w.projector), naive_projector(to_table(zero), w.projector)) < 1e-12);
  const Mat x = random_matrix(rng, 4, 16);
  CHECK(max_diff(project_to_llm(x, w.projector), naive_projector(to_table(x), w.projector)) < 1e-12);
  Projector<double> nil{Mat::Zero(24, 16), Vector<double>::Zero(24), Mat::Zero(20, 24),
                        Vector<double>::Zero(20)};
  CHECK(project_to_llm(x, nil).isZero(0));
  CHECK_THROWS_AS(project_to_llm(random_matrix(rng, 2, 8), w.projector), ValidationError);

  const Mat patches = random_matrix(rng, 6, 12);
  const auto pos = positions(6);
  const Mat y = encode(patches, pos, w);
  CHECK(y.rows() == 6);
  CHECK(y.cols() == 20);
  Table e = naive_affine(to_table(patches), to_table(w.embed.weight), to_vec(w.embed.bias));
  const Table a = naive_attention(e, w.attention, pos, cfg, false);
  for (std::size_t i = 0; i < e.size(); ++i)
    for (std::size_t j = 0; j < e[i].size(); ++j) e[i][j] += a[i][j];
  CHECK(max_diff(y, naive_projector(e, w.projector)) < 1e-10);
}

TEST_CASE("float instantiation") {
  SeededRng rng(7);
  const AttentionConfig cfg{8, 2, 10000};
  const auto w = random_encoder_weights<float>(cfg, 4, 8, 8, rng);
  const Matrix<float> patches = random_matrix(rng, 3, 4).cast<float>();
  const Matrix<float> y = encode(patches, positions(3), w);
  CHECK(y.allFinite());
}

}  // TEST_SUITE
