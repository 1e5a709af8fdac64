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

// Feature-distillation losses between student features Fs and teacher
// features Ft (both N x D, one row per token), with analytic gradients
// with respect to Fs.
//
//   amplitude  mean_{i,j} |Fs - Ft|
//   direction  1 - mean_i cos(Fs_i, Ft_i)
//   relation   mean_{i,j} |G(Fs) - G(Ft)|,  G(F) = F F^T / ||F||_F^2
//
// All three reduce by a full element mean. Denominators carry +1e-12 so
// zero rows or zero matrices stay finite. The subgradient of |x| at 0 is 0.

#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <string_view>

#include "vlprep/encoder.hpp"
#include "vlprep/error.hpp"

namespace vlprep {

enum class LossKind { Amplitude, Direction, Relation };

inline std::string_view to_string(LossKind kind) {
  switch (kind) {
    case LossKind::Amplitude:
      return "amplitude";
    case LossKind::Direction:
      return "direction";
    case LossKind::Relation:
      return "relation";
  }
  return "relation";
}

template <typename Scalar>
struct LossValue {
  Scalar value = 0;
  Matrix<Scalar> gradient;  // dLoss/dFs, empty when not requested
};

/// Weights for the combined reconstruction objective. No published values
/// exist, so all default to 1.
struct DistillWeights {
  double amplitude = 1.0;
  double direction = 1.0;
  double relation = 1.0;
};

inline constexpr double kLossEpsilon = 1e-12;

namespace detail {

template <typename A, typename B>
void check_pair(const Eigen::MatrixBase<A>& fs, const Eigen::MatrixBase<B>& ft) {
  if (fs.rows() != ft.rows() || fs.cols() != ft.cols()) {
    throw ValidationError("feature shapes differ: " + std::to_string(fs.rows()) +
                          "x" + std::to_string(fs.cols()) + " vs " +
                          std::to_string(ft.rows()) + "x" +
                          std::to_string(ft.cols()));
  }
  if (fs.size() == 0) throw ValidationError("empty feature matrix");
  if (!fs.allFinite() || !ft.allFinite()) {
    throw ValidationError("non-finite feature value");
  }
}

template <typename Scalar>
Scalar sign0(Scalar x) {
  return x > 0 ? Scalar(1) : (x < 0 ? Scalar(-1) : Scalar(0));
}

template <typename Derived>
Matrix<typename Derived::Scalar> normalized_gram(const Eigen::MatrixBase<Derived>& f,
                                                 typename Derived::Scalar& denom) {
  using Scalar = typename Derived::Scalar;
  denom = f.squaredNorm() + Scalar(kLossEpsilon);
  return (f * f.transpose()) / denom;
}

}  // namespace detail

template <typename A, typename B>
LossValue<typename A::Scalar> amplitude_loss(const Eigen::MatrixBase<A>& fs,
                                             const Eigen::MatrixBase<B>& ft,
                                             bool with_gradient = true) {
  using Scalar = typename A::Scalar;
  detail::check_pair(fs, ft);
  const Matrix<Scalar> diff = fs - ft;
  const auto count = static_cast<Scalar>(diff.size());
  LossValue<Scalar> out;
  out.value = diff.cwiseAbs().sum() / count;
  if (with_gradient) {
    out.gradient = diff.unaryExpr([](Scalar x) { return detail::sign0(x); }) / count;
  }
  return out;
}

template <typename A, typename B>
LossValue<typename A::Scalar> direction_loss(const Eigen::MatrixBase<A>& fs,
                                             const Eigen::MatrixBase<B>& ft,
                                             bool with_gradient = true) {
  using Scalar = typename A::Scalar;
  detail::check_pair(fs, ft);
  const Eigen::Index n = fs.rows();
  const Scalar eps = Scalar(kLossEpsilon);
  LossValue<Scalar> out;
  if (with_gradient) out.gradient.resize(fs.rows(), fs.cols());
  Scalar cos_sum = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto a = fs.row(i);
    const auto b = ft.row(i);
    const Scalar na = a.norm();
    const Scalar nb = b.norm();
    const Scalar den = na * nb + eps;
    const Scalar dot = a.dot(b);
    cos_sum += dot / den;
    if (with_gradient) {
      // d cos / da = b / den - dot * nb / den^2 * a / |a|
      auto g = out.gradient.row(i);
      g = b / den;
      if (na > 0) g -= (dot * nb / (den * den * na)) * a;
      g *= Scalar(-1) / static_cast<Scalar>(n);
    }
  }
  out.value = Scalar(1) - cos_sum / static_cast<Scalar>(n);
  return out;
}

template <typename A, typename B>
LossValue<typename A::Scalar> relation_loss(const Eigen::MatrixBase<A>& fs,
                                            const Eigen::MatrixBase<B>& ft,
                                            bool with_gradient = true) {
  using Scalar = typename A::Scalar;
  detail::check_pair(fs, ft);
  Scalar cs = 0;
  Scalar ct = 0;
  const Matrix<Scalar> gs = detail::normalized_gram(fs, cs);
  const Matrix<Scalar> gt = detail::normalized_gram(ft, ct);
  const Matrix<Scalar> diff = gs - gt;
  const auto count = static_cast<Scalar>(diff.size());
  LossValue<Scalar> out;
  out.value = diff.cwiseAbs().sum() / count;
  if (with_gradient) {
    // S = sign(Gs - Gt) / N^2 is symmetric, so
    // dL/dFs = (2 / cs) * (S Fs - <S, Gs> Fs).
    const Matrix<Scalar> s =
        diff.unaryExpr([](Scalar x) { return detail::sign0(x); }) / count;
    const Scalar inner = s.cwiseProduct(gs).sum();
    out.gradient = (Scalar(2) / cs) * (s * fs - inner * fs);
  }
  return out;
}

template <typename A, typename B>
LossValue<typename A::Scalar> evaluate_loss(LossKind kind,
                                            const Eigen::MatrixBase<A>& fs,
                                            const Eigen::MatrixBase<B>& ft,
                                            bool with_gradient = true) {
  switch (kind) {
    case LossKind::Amplitude:
      return amplitude_loss(fs, ft, with_gradient);
    case LossKind::Direction:
      return direction_loss(fs, ft, with_gradient);
    case LossKind::Relation:
      return relation_loss(fs, ft, with_gradient);
  }
  throw ValidationError("unknown loss kind");
}

/// Weighted sum of the three losses.
template <typename A, typename B>
LossValue<typename A::Scalar> distill_loss(const Eigen::MatrixBase<A>& fs,
                                           const Eigen::MatrixBase<B>& ft,
                                           const DistillWeights& weights = {},
                                           bool with_gradient = true) {
  using Scalar = typename A::Scalar;
  LossValue<Scalar> out;
  if (with_gradient) out.gradient = Matrix<Scalar>::Zero(fs.rows(), fs.cols());
  const std::pair<LossKind, double> terms[] = {
      {LossKind::Amplitude, weights.amplitude},
      {LossKind::Direction, weights.direction},
      {LossKind::Relation, weights.relation}};
  for (const auto& [kind, weight] : terms) {
    if (weight == 0.0) continue;
    const auto part = evaluate_loss(kind, fs, ft, with_gradient);
    out.value += static_cast<Scalar>(weight) * part.value;
    if (with_gradient) out.gradient += static_cast<Scalar>(weight) * part.gradient;
  }
  return out;
}

struct GradCheckReport {
  double max_rel_error = 0.0;
  long checked = 0;
  long skipped = 0;  // stencils straddling a kink of |.|
};

/// Called on the analytic gradient before comparison; lets a caller inject
/// a deliberate fault to prove the check can fail.
template <typename Scalar>
using GradientHook = std::function<void(Matrix<Scalar>&)>;

/// Central finite differences over every element of Fs against the
/// analytic gradient. Relative error is |a - f| / max(|a|, |f|, 1e-8).
/// Elements whose +/-step stencil changes the sign pattern inside an
/// absolute value are skipped and counted.
template <typename Scalar>
GradCheckReport grad_check(LossKind kind, const Matrix<Scalar>& fs,
                           const Matrix<Scalar>& ft, Scalar step,
                           const GradientHook<Scalar>& hook = {}) {
  if (!(step > 0)) throw ValidationError("finite-difference step must be positive");
  Matrix<Scalar> analytic = evaluate_loss(kind, fs, ft).gradient;
  if (hook) hook(analytic);

  // Sign pattern of the quantity inside |.|, if any.
  auto kink_signs = [&](const Matrix<Scalar>& f) -> Matrix<Scalar> {
    switch (kind) {
      case LossKind::Amplitude:
        return (f - ft).unaryExpr([](Scalar x) { return detail::sign0(x); });
      case LossKind::Relation: {
        Scalar cs = 0, ct = 0;
        return (detail::normalized_gram(f, cs) - detail::normalized_gram(ft, ct))
            .unaryExpr([](Scalar x) { return detail::sign0(x); });
      }
      case LossKind::Direction:
        break;
    }
    return {};
  };

  GradCheckReport report;
  Matrix<Scalar> probe = fs;
  for (Eigen::Index j = 0; j < fs.cols(); ++j) {
    for (Eigen::Index i = 0; i < fs.rows(); ++i) {
      const Scalar x = fs(i, j);
      probe(i, j) = x + step;
      const Scalar up = evaluate_loss(kind, probe, ft, false).value;
      const Matrix<Scalar> sign_up = kink_signs(probe);
      probe(i, j) = x - step;
      const Scalar down = evaluate_loss(kind, probe, ft, false).value;
      const Matrix<Scalar> sign_down = kink_signs(probe);
      probe(i, j) = x;
      if (sign_up != sign_down) {
        ++report.skipped;
        continue;
      }
      const double fd = static_cast<double>((up - down) / (Scalar(2) * step));
      const double a = static_cast<double>(analytic(i, j));
      const double denom = std::max({std::abs(a), std::abs(fd), 1e-8});
      report.max_rel_error = std::max(report.max_rel_error, std::abs(a - fd) / denom);
      ++report.checked;
    }
  }
  return report;
}

}  // namespace vlprep
