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

// Corpus curation over precomputed embeddings and video thumbnails:
// seeded k-means, hierarchical k-means, farthest-point diversity
// selection, a frame-difference motion filter and duration-balanced
// subsampling. Distances are Euclidean. Everything is deterministic in
// (input, seed).

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "vlprep/encoder.hpp"
#include "vlprep/error.hpp"
#include "vlprep/frame_sampler.hpp"
#include "vlprep/rng.hpp"

namespace vlprep {

template <typename Scalar>
struct EmbeddingSet {
  Matrix<Scalar> vectors;  // M x D, one embedding per row
  std::vector<std::string> ids;

  Eigen::Index size() const { return vectors.rows(); }
};

template <typename Scalar>
struct KMeansResult {
  Matrix<Scalar> centroids;  // k x D
  std::vector<int> assignment;
  /// Inertia after every assignment step; non-increasing.
  std::vector<Scalar> inertia_history;

  Scalar inertia() const { return inertia_history.back(); }
};

namespace detail {

template <typename P, typename C>
int nearest_centroid(const Eigen::MatrixBase<P>& point,
                     const Eigen::MatrixBase<C>& centroids,
                     typename P::Scalar* best_dist = nullptr) {
  using Scalar = typename P::Scalar;
  int best = 0;
  Scalar best_d = std::numeric_limits<Scalar>::infinity();
  for (Eigen::Index c = 0; c < centroids.rows(); ++c) {
    const Scalar d = (point - centroids.row(c)).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  if (best_dist) *best_dist = best_d;
  return best;
}

// k-means++ seeding driven by SeededRng.
template <typename Derived>
Matrix<typename Derived::Scalar> seed_centroids(const Eigen::MatrixBase<Derived>& pts,
                                                int k, SeededRng& rng) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index m = pts.rows();
  Matrix<Scalar> centroids(k, pts.cols());
  std::vector<bool> chosen(static_cast<std::size_t>(m), false);
  auto first = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(m)));
  centroids.row(0) = pts.row(first);
  chosen[static_cast<std::size_t>(first)] = true;
  std::vector<double> d2(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) {
    d2[static_cast<std::size_t>(i)] =
        static_cast<double>((pts.row(i) - centroids.row(0)).squaredNorm());
  }
  for (int c = 1; c < k; ++c) {
    double total = 0;
    for (double d : d2) total += d;
    Eigen::Index pick = -1;
    if (total > 0) {
      const double r = rng.uniform() * total;
      double acc = 0;
      for (Eigen::Index i = 0; i < m; ++i) {
        const double d = d2[static_cast<std::size_t>(i)];
        if (d <= 0) continue;
        acc += d;
        pick = i;
        if (acc > r) break;
      }
    } else {
      // Every point coincides with a centroid already.
      for (Eigen::Index i = 0; i < m && pick < 0; ++i) {
        if (!chosen[static_cast<std::size_t>(i)]) pick = i;
      }
    }
    centroids.row(c) = pts.row(pick);
    chosen[static_cast<std::size_t>(pick)] = true;
    for (Eigen::Index i = 0; i < m; ++i) {
      auto& d = d2[static_cast<std::size_t>(i)];
      d = std::min(d, static_cast<double>((pts.row(i) - centroids.row(c)).squaredNorm()));
    }
  }
  return centroids;
}

}  // namespace detail

/// Lloyd's algorithm with k-means++ seeding. `iters` bounds the number of
/// assignment steps; the loop stops early once assignments settle. The
/// returned assignment is nearest-centroid with respect to the returned
/// centroids (ties go to the lower index). A cluster that empties is
/// repaired by moving in the point farthest from its own centroid.
template <typename Derived>
KMeansResult<typename Derived::Scalar> kmeans(const Eigen::MatrixBase<Derived>& pts,
                                              int k, std::uint64_t seed,
                                              int iters) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index m = pts.rows();
  if (m < 1) throw ValidationError("k-means needs at least one point");
  if (k < 1 || k > m) {
    throw ValidationError("k must lie in [1, " + std::to_string(m) + "], got " +
                          std::to_string(k));
  }
  if (iters < 1) throw ValidationError("k-means needs at least one iteration");
  if (!pts.allFinite()) throw ValidationError("non-finite embedding value");

  SeededRng rng(seed);
  KMeansResult<Scalar> out;
  out.centroids = detail::seed_centroids(pts, k, rng);
  out.assignment.assign(static_cast<std::size_t>(m), -1);
  std::vector<Scalar> dist(static_cast<std::size_t>(m));
  std::vector<int> counts(static_cast<std::size_t>(k));

  for (int it = 0; it < iters; ++it) {
    bool changed = false;
    std::fill(counts.begin(), counts.end(), 0);
    for (Eigen::Index i = 0; i < m; ++i) {
      const auto u = static_cast<std::size_t>(i);
      const int c = detail::nearest_centroid(pts.row(i), out.centroids, &dist[u]);
      changed |= c != out.assignment[u];
      out.assignment[u] = c;
      ++counts[static_cast<std::size_t>(c)];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] != 0) continue;
      Eigen::Index far = -1;
      for (Eigen::Index i = 0; i < m; ++i) {
        const auto u = static_cast<std::size_t>(i);
        if (counts[static_cast<std::size_t>(out.assignment[u])] < 2) continue;
        if (far < 0 || dist[u] > dist[static_cast<std::size_t>(far)]) far = i;
      }
      const auto fu = static_cast<std::size_t>(far);
      --counts[static_cast<std::size_t>(out.assignment[fu])];
      out.assignment[fu] = c;
      counts[static_cast<std::size_t>(c)] = 1;
      dist[fu] = 0;
      out.centroids.row(c) = pts.row(far);
      changed = true;
    }
    Scalar inertia = 0;
    for (Scalar d : dist) inertia += d;
    out.inertia_history.push_back(inertia);
    if (!changed || it + 1 == iters) break;

    Matrix<Scalar> sums = Matrix<Scalar>::Zero(k, pts.cols());
    for (Eigen::Index i = 0; i < m; ++i) {
      sums.row(out.assignment[static_cast<std::size_t>(i)]) += pts.row(i);
    }
    for (int c = 0; c < k; ++c) {
      out.centroids.row(c) = sums.row(c) / static_cast<Scalar>(counts[static_cast<std::size_t>(c)]);
    }
  }
  return out;
}

template <typename Scalar>
struct ClusterNode {
  RowVector<Scalar> centroid;
  std::vector<int> members;  // row indices into the input set
  std::vector<int> children;  // node indices
  int level = 0;
};

template <typename Scalar>
struct ClusterTree {
  std::vector<ClusterNode<Scalar>> nodes;  // nodes[0] is the root

  std::vector<int> leaves() const {
    std::vector<int> out;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (nodes[i].children.empty()) out.push_back(static_cast<int>(i));
    }
    return out;
  }
};

struct HierarchicalConfig {
  int k_per_level = 8;
  int depth = 2;
  double sample_fraction = 1.0;
  std::uint64_t seed = 0;
  int iters = 25;

  void validate() const {
    if (k_per_level < 1) throw ValidationError("k_per_level must be >= 1");
    if (depth < 1) throw ValidationError("depth must be >= 1");
    if (!(sample_fraction > 0.0 && sample_fraction <= 1.0)) {
      throw ValidationError("sample_fraction must lie in (0, 1]");
    }
    if (iters < 1) throw ValidationError("iters must be >= 1");
  }
};

namespace detail {

template <typename Derived>
void split_node(const Eigen::MatrixBase<Derived>& pts, const HierarchicalConfig& cfg,
                ClusterTree<typename Derived::Scalar>& tree, int node_index,
                std::uint64_t seed, int remaining) {
  using Scalar = typename Derived::Scalar;
  const std::vector<int> members = tree.nodes[static_cast<std::size_t>(node_index)].members;
  const auto m = static_cast<int>(members.size());
  const int k = cfg.k_per_level;
  if (remaining == 0 || m < k) return;

  auto want = static_cast<int>(std::ceil(cfg.sample_fraction * m));
  want = std::clamp(want, k, m);
  std::vector<int> sample;
  if (want == m) {
    sample = members;
  } else {
    // Partial Fisher-Yates, then restore input order.
    std::vector<int> pool = members;
    SeededRng rng(mix_seed(seed ^ 0x5A3D1E));
    for (int i = 0; i < want; ++i) {
      const auto j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(m - i)));
      std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
    }
    sample.assign(pool.begin(), pool.begin() + want);
    std::sort(sample.begin(), sample.end());
  }

  Matrix<Scalar> sub(static_cast<Eigen::Index>(sample.size()), pts.cols());
  for (std::size_t i = 0; i < sample.size(); ++i) sub.row(static_cast<Eigen::Index>(i)) = pts.row(sample[i]);
  const KMeansResult<Scalar> km = kmeans(sub, k, seed, cfg.iters);

  std::vector<std::vector<int>> groups(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < members.size(); ++i) {
    const int c = want == m ? km.assignment[i]
                            : nearest_centroid(pts.row(members[i]), km.centroids);
    groups[static_cast<std::size_t>(c)].push_back(members[i]);
  }

  const int level = tree.nodes[static_cast<std::size_t>(node_index)].level + 1;
  for (int c = 0; c < k; ++c) {
    auto& group = groups[static_cast<std::size_t>(c)];
    if (group.empty()) continue;
    ClusterNode<Scalar> child;
    child.centroid = km.centroids.row(c);
    child.members = std::move(group);
    child.level = level;
    const int child_index = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back(std::move(child));
    tree.nodes[static_cast<std::size_t>(node_index)].children.push_back(child_index);
    split_node(pts, cfg, tree, child_index,
               mix_seed(seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(c + 1)),
               remaining - 1);
  }
}

}  // namespace detail

/// Fits k_per_level centroids on a seeded subset of each node, assigns
/// every member to its nearest centroid, and recurses until `depth` levels
/// exist. Nodes with fewer than k_per_level members stay leaves. The
/// leaves partition the input rows.
template <typename Derived>
ClusterTree<typename Derived::Scalar> kmeans_hierarchical(
    const Eigen::MatrixBase<Derived>& pts, const HierarchicalConfig& cfg) {
  using Scalar = typename Derived::Scalar;
  cfg.validate();
  if (pts.rows() < 1) throw ValidationError("no embeddings to cluster");
  ClusterTree<Scalar> tree;
  ClusterNode<Scalar> root;
  root.centroid = pts.colwise().mean();
  root.members.resize(static_cast<std::size_t>(pts.rows()));
  for (Eigen::Index i = 0; i < pts.rows(); ++i) root.members[static_cast<std::size_t>(i)] = static_cast<int>(i);
  tree.nodes.push_back(std::move(root));
  detail::split_node(pts, cfg, tree, 0, cfg.seed, cfg.depth);
  return tree;
}

/// Farthest-point traversal. The first pick is the point nearest the mean;
/// each later pick maximizes its minimum distance to the picks so far.
/// Ties go to the lowest row. Selection also stops once the best candidate
/// lies closer than `min_separation` to an existing pick (near-duplicate).
template <typename Derived>
std::vector<int> greedy_diverse_select(const Eigen::MatrixBase<Derived>& pts, int n,
                                       double min_separation = 0.0) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index m = pts.rows();
  if (n < 0 || n > m) {
    throw ValidationError("cannot select " + std::to_string(n) + " of " +
                          std::to_string(m) + " points");
  }
  std::vector<int> picks;
  if (n == 0) return picks;
  picks.reserve(static_cast<std::size_t>(n));
  const RowVector<Scalar> center = pts.colwise().mean();
  int first = 0;
  Scalar best = std::numeric_limits<Scalar>::infinity();
  for (Eigen::Index i = 0; i < m; ++i) {
    const Scalar d = (pts.row(i) - center).squaredNorm();
    if (d < best) {
      best = d;
      first = static_cast<int>(i);
    }
  }
  picks.push_back(first);
  std::vector<Scalar> min_d(static_cast<std::size_t>(m));
  std::vector<bool> taken(static_cast<std::size_t>(m), false);
  taken[static_cast<std::size_t>(first)] = true;
  for (Eigen::Index i = 0; i < m; ++i) {
    min_d[static_cast<std::size_t>(i)] = (pts.row(i) - pts.row(first)).squaredNorm();
  }
  const auto sep2 = static_cast<Scalar>(min_separation * min_separation);
  while (static_cast<int>(picks.size()) < n) {
    int next = -1;
    for (Eigen::Index i = 0; i < m; ++i) {
      const auto u = static_cast<std::size_t>(i);
      if (taken[u]) continue;
      if (next < 0 || min_d[u] > min_d[static_cast<std::size_t>(next)]) next = static_cast<int>(i);
    }
    if (min_separation > 0.0 && min_d[static_cast<std::size_t>(next)] < sep2) break;
    picks.push_back(next);
    taken[static_cast<std::size_t>(next)] = true;
    for (Eigen::Index i = 0; i < m; ++i) {
      auto& d = min_d[static_cast<std::size_t>(i)];
      d = std::min(d, static_cast<Scalar>((pts.row(i) - pts.row(next)).squaredNorm()));
    }
  }
  return picks;
}

/// Mean over consecutive pairs of the mean absolute luminance difference.
/// A proxy for optical-flow magnitude. Zero for fewer than two frames.
double motion_score(std::span<const Thumbnail> frames);

/// keep[i] iff video i has at least two frames and score >= threshold.
std::vector<bool> motion_filter(std::span<const std::vector<Thumbnail>> videos,
                                double threshold);

/// Bins durations into `buckets` equal-width bins over [min, max] and keeps
/// up to `per_bucket_quota` per bin, chosen uniformly with the seed.
/// Returns kept indices in ascending order.
std::vector<std::size_t> duration_aware_sample(std::span<const double> durations,
                                               int buckets, int per_bucket_quota,
                                               std::uint64_t seed);

}  // namespace vlprep
