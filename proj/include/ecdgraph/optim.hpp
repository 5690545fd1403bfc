// Copyright 2026 The ecdgraph Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ECDGRAPH_OPTIM_HPP
#define ECDGRAPH_OPTIM_HPP

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ecdgraph/errors.hpp"
#include "ecdgraph/manifolds.hpp"
#include "ecdgraph/numerics/tensor.hpp"
#include "ecdgraph/rng.hpp"

namespace ecd {

/// Uniform in +-sqrt(6 / (fan_in + fan_out)).
inline Matrix XavierUniform(Index fan_in, Index fan_out, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Matrix m(fan_in, fan_out);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = rng.Uniform(-bound, bound);
  return m;
}

/// Scales every gradient by max_norm / g when the global L2 norm g exceeds
/// max_norm. Returns g. Throws TrainingError on NaN/Inf.
inline double ClipGlobalNorm(std::span<Var> params, double max_norm = 1.0) {
  double sq = 0.0;
  for (const Var& p : params) {
    if (!p.has_grad()) continue;
    const Matrix g = p.grad();
    if (!g.allFinite()) throw TrainingError("non-finite gradient");
    sq += g.squaredNorm();
  }
  const double norm = std::sqrt(sq);
  if (norm > max_norm) {
    const double s = max_norm / norm;
    for (Var& p : params) {
      if (p.has_grad()) p.mutable_grad() *= s;
    }
  }
  return norm;
}

struct AmsGradOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// First moment, second moment and running max of the second moment.
struct MomentState {
  Matrix m;
  Matrix v;
  Matrix v_hat;

  static MomentState Zeros(Index rows, Index cols) {
    return {Matrix::Zero(rows, cols), Matrix::Zero(rows, cols),
            Matrix::Zero(rows, cols)};
  }
};

namespace detail {

/// Updates the moments with `grad` and returns the step
/// -lr * m_hat / (sqrt(v_hat / (1 - beta2^t)) + eps).
inline Matrix AmsGradDirection(const Matrix& grad, MomentState& s,
                               std::int64_t step, const AmsGradOptions& o) {
  s.m = o.beta1 * s.m + (1.0 - o.beta1) * grad;
  s.v = o.beta2 * s.v + (1.0 - o.beta2) * grad.cwiseProduct(grad);
  s.v_hat = s.v_hat.cwiseMax(s.v);
  const double t = static_cast<double>(step);
  const double c1 = 1.0 - std::pow(o.beta1, t);
  const double c2 = 1.0 - std::pow(o.beta2, t);
  return (-o.lr * (s.m.array() / c1) /
          ((s.v_hat.array() / c2).sqrt() + o.eps))
      .matrix();
}

}  // namespace detail

/// One AMSGrad update of `param` at step `step` (1-based).
inline void AmsGradStep(Matrix& param, const Matrix& grad, MomentState& state,
                        std::int64_t step, const AmsGradOptions& o) {
  param += detail::AmsGradDirection(grad, state, step, o);
}

/// Riemannian AMSGrad on a matrix whose rows are manifold points.
///
/// The Euclidean gradient is rescaled to the Riemannian one and the first
/// moment is kept in ambient coordinates. For the hyperbolic kinds the second
/// moment of a row is the squared Riemannian norm of its gradient, stored
/// broadcast across the row, so a step covers about lr of manifold distance
/// wherever the point is. Each row then moves by x <- project(x + u).
/// Euclidean kind reduces to AmsGradStep. Throws DomainError if a row ends up
/// off its manifold.
inline void RiemannianAmsGradStep(ManifoldKind kind, Matrix& points,
                                  const Matrix& grad, MomentState& state,
                                  std::int64_t step, const AmsGradOptions& o) {
  if (kind == ManifoldKind::kEuclidean) {
    AmsGradStep(points, grad, state, step, o);
    return;
  }
  const double t = static_cast<double>(step);
  const double c1 = 1.0 - std::pow(o.beta1, t);
  const double c2 = 1.0 - std::pow(o.beta2, t);
  for (Index i = 0; i < points.rows(); ++i) {
    const RowVector x = points.row(i);
    const RowVector r = manifold::RiemannianRescale(kind, x, grad.row(i));
    const double sq = manifold::RiemannianSqNorm(kind, x, r);
    state.m.row(i) = o.beta1 * state.m.row(i) + (1.0 - o.beta1) * r;
    const double v = o.beta2 * state.v(i, 0) + (1.0 - o.beta2) * sq;
    state.v.row(i).setConstant(v);
    state.v_hat.row(i).setConstant(std::max(state.v_hat(i, 0), v));
    const RowVector u =
        -o.lr * (state.m.row(i) / c1) / (std::sqrt(state.v_hat(i, 0) / c2) + o.eps);
    points.row(i) = manifold::Project(kind, x + u);
    if (!manifold::OnManifold(kind, points.row(i))) {
      throw DomainError("RiemannianAmsGradStep: row " + std::to_string(i) +
                        " left the manifold");
    }
  }
}

/// Optimizer over a model's parameters: Euclidean tensors get AMSGrad,
/// manifold-valued tensors (rows are points) get Riemannian AMSGrad.
class AmsGrad {
 public:
  AmsGrad(std::vector<Var> euclidean, std::vector<Var> manifold_params,
          ManifoldKind kind, AmsGradOptions options = {})
      : euclidean_(std::move(euclidean)),
        manifold_(std::move(manifold_params)),
        kind_(kind),
        options_(options) {
    for (const Var& p : euclidean_)
      euclidean_state_.push_back(MomentState::Zeros(p.rows(), p.cols()));
    for (const Var& p : manifold_)
      manifold_state_.push_back(MomentState::Zeros(p.rows(), p.cols()));
  }

  /// Applies one update from the parameters' current gradients (missing
  /// gradients count as zero).
  void Step() {
    ++step_;
    for (std::size_t i = 0; i < euclidean_.size(); ++i) {
      Var& p = euclidean_[i];
      AmsGradStep(p.mutable_value(), p.grad(), euclidean_state_[i], step_,
                  options_);
    }
    for (std::size_t i = 0; i < manifold_.size(); ++i) {
      Var& p = manifold_[i];
      RiemannianAmsGradStep(kind_, p.mutable_value(), p.grad(),
                            manifold_state_[i], step_, options_);
    }
  }

  std::int64_t step() const { return step_; }
  void set_step(std::int64_t s) { step_ = s; }
  const AmsGradOptions& options() const { return options_; }

  /// States in parameter declaration order (Euclidean first).
  std::vector<MomentState*> States() {
    std::vector<MomentState*> out;
    for (auto& s : euclidean_state_) out.push_back(&s);
    for (auto& s : manifold_state_) out.push_back(&s);
    return out;
  }

 private:
  std::vector<Var> euclidean_;
  std::vector<Var> manifold_;
  ManifoldKind kind_;
  AmsGradOptions options_;
  std::vector<MomentState> euclidean_state_;
  std::vector<MomentState> manifold_state_;
  std::int64_t step_ = 0;
};

}  // namespace ecd

#endif  // ECDGRAPH_OPTIM_HPP
