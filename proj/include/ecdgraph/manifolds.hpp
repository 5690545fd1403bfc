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

// Geometry backends: Euclidean space, the Poincare ball and the Lorentz
// hyperboloid, both hyperbolic models at fixed curvature -1.
//
// Conventions:
//  * Poincare exp0(v) = tanh(|v|) v/|v|, so d(0, exp0(v)) = 2|v|.
//  * Lorentz points live in ambient coordinates (x0, x1..xd) on the upper
//    sheet <x,x>_L = -1, with <x,y>_L = -x0 y0 + sum xi yi. Tangent vectors at
//    the origin o = (1, 0, ..., 0) carry an explicit zero time coordinate in
//    the point-wise API; the row-wise (tape) API drops it and works with the
//    d spatial coordinates only.

#ifndef ECDGRAPH_MANIFOLDS_HPP
#define ECDGRAPH_MANIFOLDS_HPP

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ecdgraph/errors.hpp"
#include "ecdgraph/numerics/tensor.hpp"

namespace ecd {

enum class ManifoldKind { kEuclidean, kPoincare, kLorentz };

inline std::string_view ToString(ManifoldKind kind) {
  switch (kind) {
    case ManifoldKind::kEuclidean:
      return "euclidean";
    case ManifoldKind::kPoincare:
      return "poincare";
    case ManifoldKind::kLorentz:
      return "lorentz";
  }
  return "unknown";
}

inline std::optional<ManifoldKind> ParseManifoldKind(std::string_view s) {
  if (s == "euclidean") return ManifoldKind::kEuclidean;
  if (s == "poincare") return ManifoldKind::kPoincare;
  if (s == "lorentz") return ManifoldKind::kLorentz;
  return std::nullopt;
}

namespace manifold {

/// Poincare points are kept at norm <= 1 - kBallEps.
inline constexpr double kBallEps = 1e-5;
/// Norm that clamping targets: slightly inside 1 - kBallEps so that rounding
/// in a later norm computation cannot land outside it.
inline constexpr double kBallMaxNorm = (1.0 - kBallEps) * (1.0 - 1e-13);
/// artanh arguments are clamped to this value.
inline constexpr double kArtanhCap = 1.0 - 1e-9;
/// arcosh arguments within this distance below 1 are clamped to 1.
inline constexpr double kArcoshSlack = 1e-9;
/// Lorentz points are kept within this distance of the origin; beyond it the
/// sheet constraint cannot be held to 1e-6 in double precision.
inline constexpr double kLorentzMaxDist = 10.0;
/// Relative hyperboloid tolerance accepted by Log0 (scaled by x0^2).
inline constexpr double kLorentzTol = 1e-6;

/// Ambient dimension used to store a point whose tangent space has `dim`
/// coordinates.
inline Index AmbientDim(ManifoldKind kind, Index dim) {
  return kind == ManifoldKind::kLorentz ? dim + 1 : dim;
}

inline double MinkowskiDot(const RowVector& x, const RowVector& y) {
  if (x.size() != y.size() || x.size() < 1) {
    throw ShapeError("MinkowskiDot: dimension mismatch");
  }
  return -x(0) * y(0) + x.tail(x.size() - 1).dot(y.tail(y.size() - 1));
}

inline RowVector LorentzOrigin(Index ambient_dim) {
  RowVector o = RowVector::Zero(ambient_dim);
  o(0) = 1.0;
  return o;
}

inline RowVector Project(ManifoldKind kind, const RowVector& x) {
  switch (kind) {
    case ManifoldKind::kEuclidean:
      return x;
    case ManifoldKind::kPoincare: {
      const double n = x.norm();
      if (n > kBallMaxNorm) return x * (kBallMaxNorm / n);
      return x;
    }
    case ManifoldKind::kLorentz: {
      RowVector out = x;
      const Index d = x.size() - 1;
      const double max_norm = std::sinh(kLorentzMaxDist);
      const double n = x.tail(d).norm();
      if (n > max_norm) out.tail(d) *= max_norm / n;
      out(0) = std::sqrt(1.0 + out.tail(d).squaredNorm());
      return out;
    }
  }
  return x;
}

/// True when `x` satisfies its manifold constraint: Poincare |x| <= 1 - eps,
/// Lorentz |<x,x>_L + 1| <= tol and x0 > 0.
inline bool OnManifold(ManifoldKind kind, const RowVector& x,
                       double tol = 1e-6) {
  if (!x.allFinite()) return false;
  switch (kind) {
    case ManifoldKind::kEuclidean:
      return true;
    case ManifoldKind::kPoincare:
      return x.norm() <= 1.0 - kBallEps;
    case ManifoldKind::kLorentz:
      return x(0) > 0.0 && std::abs(MinkowskiDot(x, x) + 1.0) <= tol;
  }
  return false;
}

inline RowVector Exp0(ManifoldKind kind, const RowVector& v) {
  switch (kind) {
    case ManifoldKind::kEuclidean:
      return v;
    case ManifoldKind::kPoincare: {
      const double n = v.norm();
      if (n == 0.0) return v;
      return Project(kind, v * (std::tanh(n) / n));
    }
    case ManifoldKind::kLorentz: {
      if (v.size() < 1 || std::abs(v(0)) > 1e-12) {
        throw DomainError("Exp0: Lorentz tangent vector must have v0 = 0");
      }
      const Index d = v.size() - 1;
      const double n = v.tail(d).norm();
      const double scale =
          n == 0.0 ? 1.0 : std::sinh(std::min(n, kLorentzMaxDist)) / n;
      RowVector out(v.size());
      out.tail(d) = v.tail(d) * scale;
      out(0) = 0.0;
      return Project(kind, out);
    }
  }
  return v;
}

inline RowVector Log0(ManifoldKind kind, const RowVector& x) {
  switch (kind) {
    case ManifoldKind::kEuclidean:
      return x;
    case ManifoldKind::kPoincare: {
      const double n = x.norm();
      if (!(n < 1.0)) throw DomainError("Log0: point outside the Poincare ball");
      if (n == 0.0) return x;
      return x * (std::atanh(std::min(n, kArtanhCap)) / n);
    }
    case ManifoldKind::kLorentz: {
      if (x.size() < 1 || !(x(0) > 0.0) ||
          std::abs(MinkowskiDot(x, x) + 1.0) >
              kLorentzTol * std::max(1.0, x(0) * x(0))) {
        throw DomainError("Log0: point off the hyperboloid");
      }
      const Index d = x.size() - 1;
      const double s = x.tail(d).norm();
      RowVector out = RowVector::Zero(x.size());
      if (s == 0.0) return out;
      // arcosh(x0) == asinh(|xs|) on the sheet; the latter stays accurate
      // near the origin.
      out.tail(d) = x.tail(d) * (std::asinh(s) / s);
      return out;
    }
  }
  return x;
}

namespace detail {

inline double ClampedArcosh(double a) {
  if (a < 1.0) {
    if (a < 1.0 - kArcoshSlack) {
      throw DomainError("Dist: arcosh argument " + std::to_string(a) +
                        " below 1");
    }
    return 0.0;
  }
  return std::acosh(a);
}

}  // namespace detail

inline double Dist(ManifoldKind kind, const RowVector& x, const RowVector& y) {
  if (x.size() != y.size()) throw ShapeError("Dist: dimension mismatch");
  switch (kind) {
    case ManifoldKind::kEuclidean:
      return (x - y).norm();
    case ManifoldKind::kPoincare: {
      const double a = 1.0 - x.squaredNorm();
      const double b = 1.0 - y.squaredNorm();
      if (a <= 0.0 || b <= 0.0) {
        throw DomainError("Dist: point outside the Poincare ball");
      }
      return detail::ClampedArcosh(1.0 + 2.0 * (x - y).squaredNorm() / (a * b));
    }
    case ManifoldKind::kLorentz:
      return detail::ClampedArcosh(-MinkowskiDot(x, y));
  }
  return 0.0;
}

/// Converts a Euclidean gradient at `x` into the Riemannian gradient.
inline RowVector RiemannianRescale(ManifoldKind kind, const RowVector& x,
                                   const RowVector& grad) {
  switch (kind) {
    case ManifoldKind::kEuclidean:
      return grad;
    case ManifoldKind::kPoincare: {
      const double f = 1.0 - x.squaredNorm();
      return grad * (f * f / 4.0);
    }
    case ManifoldKind::kLorentz: {
      RowVector h = grad;
      h(0) = -h(0);
      // Tangent projection on the sheet <x,x>_L = -1.
      return h + MinkowskiDot(x, h) * x;
    }
  }
  return grad;
}

/// Squared length of tangent vector `v` at `x` under the manifold metric.
inline double RiemannianSqNorm(ManifoldKind kind, const RowVector& x,
                               const RowVector& v) {
  switch (kind) {
    case ManifoldKind::kEuclidean:
      return v.squaredNorm();
    case ManifoldKind::kPoincare: {
      const double lambda = 2.0 / (1.0 - x.squaredNorm());
      return lambda * lambda * v.squaredNorm();
    }
    case ManifoldKind::kLorentz:
      // Tangent vectors are spacelike; round-off can make this slightly < 0.
      return std::max(0.0, MinkowskiDot(v, v));
  }
  return v.squaredNorm();
}

/// Component k is Dist(kind, point, row k of `centroids`).
inline RowVector CentroidDistances(ManifoldKind kind, const RowVector& point,
                                   const Matrix& centroids) {
  RowVector out(centroids.rows());
  for (Index k = 0; k < centroids.rows(); ++k) {
    out(k) = Dist(kind, point, centroids.row(k));
  }
  return out;
}

// ---- row-wise differentiable maps -----------------------------------------

/// Maps each row of `v` (tangent coordinates at the origin, d columns) onto
/// the manifold. Lorentz output has d + 1 columns.
inline Var Exp0Rows(Tape& tape, ManifoldKind kind, const Var& v) {
  switch (kind) {
    case ManifoldKind::kEuclidean:
      return v;
    case ManifoldKind::kPoincare:
      return tape.Radial(v, radial::Tanh(kBallMaxNorm));
    case ManifoldKind::kLorentz: {
      Var spatial = tape.Radial(v, radial::Sinh(kLorentzMaxDist));
      Matrix time(spatial.rows(), 1);
      for (Index i = 0; i < spatial.rows(); ++i) {
        time(i, 0) = std::sqrt(1.0 + spatial.value().row(i).squaredNorm());
      }
      Matrix t = time;
      Var time_var = tape.Record(
          "LorentzTime", std::move(time), {spatial},
          [spatial, t](const Matrix& g) mutable {
            Matrix gs(spatial.rows(), spatial.cols());
            for (Index i = 0; i < spatial.rows(); ++i) {
              gs.row(i) = (g(i, 0) / t(i, 0)) * spatial.value().row(i);
            }
            spatial.AccumulateGrad(gs);
          });
      return tape.ConcatCols(time_var, spatial);
    }
  }
  return v;
}

/// Inverse of Exp0Rows: manifold points to d tangent coordinates.
inline Var Log0Rows(Tape& tape, ManifoldKind kind, const Var& x) {
  switch (kind) {
    case ManifoldKind::kEuclidean:
      return x;
    case ManifoldKind::kPoincare:
      return tape.Radial(x, radial::Artanh(kArtanhCap));
    case ManifoldKind::kLorentz: {
      Var spatial = tape.SliceCols(x, 1, x.cols() - 1);
      return tape.Radial(spatial, radial::Asinh());
    }
  }
  return x;
}

/// n x K matrix of distances between rows of `points` and rows of
/// `centroids`, differentiable in both.
inline Var PairwiseDistances(Tape& tape, ManifoldKind kind, const Var& points,
                             const Var& centroids) {
  if (points.cols() != centroids.cols()) {
    throw ShapeError("PairwiseDistances: shape mismatch " +
                     ShapeString(points.value()) + " vs " +
                     ShapeString(centroids.value()));
  }
  const Matrix& x = points.value();
  const Matrix& c = centroids.value();
  const Index n = x.rows();
  const Index k_count = c.rows();
  Matrix out(n, k_count);
  // d(dist)/d(arg) for the hyperbolic kinds, 1/dist for Euclidean.
  Matrix slope(n, k_count);
  for (Index i = 0; i < n; ++i) {
    for (Index k = 0; k < k_count; ++k) {
      switch (kind) {
        case ManifoldKind::kEuclidean: {
          const double d = (x.row(i) - c.row(k)).norm();
          out(i, k) = d;
          slope(i, k) = d > 0.0 ? 1.0 / d : 0.0;
          tape.NoteBranch(d > 0.0);
          break;
        }
        case ManifoldKind::kPoincare: {
          const double alpha = 1.0 - x.row(i).squaredNorm();
          const double beta = 1.0 - c.row(k).squaredNorm();
          const double a =
              1.0 + 2.0 * (x.row(i) - c.row(k)).squaredNorm() / (alpha * beta);
          out(i, k) = detail::ClampedArcosh(a);
          slope(i, k) = a - 1.0 > 1e-15 ? 1.0 / std::sqrt(a * a - 1.0) : 0.0;
          tape.NoteBranch(a - 1.0 > 1e-15);
          break;
        }
        case ManifoldKind::kLorentz: {
          const double a = -MinkowskiDot(x.row(i), c.row(k));
          out(i, k) = detail::ClampedArcosh(a);
          slope(i, k) = a - 1.0 > 1e-15 ? 1.0 / std::sqrt(a * a - 1.0) : 0.0;
          tape.NoteBranch(a - 1.0 > 1e-15);
          break;
        }
      }
    }
  }
  return tape.Record(
      "PairwiseDistances", std::move(out), {points, centroids},
      [points, centroids, slope, kind](const Matrix& g) mutable {
        const Matrix& x = points.value();
        const Matrix& c = centroids.value();
        Matrix gx = Matrix::Zero(x.rows(), x.cols());
        Matrix gc = Matrix::Zero(c.rows(), c.cols());
        for (Index i = 0; i < x.rows(); ++i) {
          for (Index k = 0; k < c.rows(); ++k) {
            const double w = g(i, k) * slope(i, k);
            if (w == 0.0) continue;
            switch (kind) {
              case ManifoldKind::kEuclidean: {
                RowVector diff = x.row(i) - c.row(k);
                gx.row(i) += w * diff;
                gc.row(k) -= w * diff;
                break;
              }
              case ManifoldKind::kPoincare: {
                const double alpha = 1.0 - x.row(i).squaredNorm();
                const double beta = 1.0 - c.row(k).squaredNorm();
                RowVector diff = x.row(i) - c.row(k);
                const double delta = diff.squaredNorm();
                const double base = 4.0 / (alpha * beta);
                gx.row(i) += w * (base * diff +
                                  (base * delta / alpha) * x.row(i));
                gc.row(k) += w * (-base * diff +
                                  (base * delta / beta) * c.row(k));
                break;
              }
              case ManifoldKind::kLorentz: {
                // d(-<x,c>_L)/dx = (c0, -cs), symmetric in c.
                RowVector dx = -c.row(k);
                dx(0) = c(k, 0);
                RowVector dc = -x.row(i);
                dc(0) = x(i, 0);
                gx.row(i) += w * dx;
                gc.row(k) += w * dc;
                break;
              }
            }
          }
        }
        points.AccumulateGrad(gx);
        centroids.AccumulateGrad(gc);
      });
}

}  // namespace manifold
}  // namespace ecd

#endif  // ECDGRAPH_MANIFOLDS_HPP
