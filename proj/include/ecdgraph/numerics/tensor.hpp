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

// Dense row-major tensors with a tape for reverse-mode differentiation.
//
// The engine covers exactly what the relational message-passing model needs.
// Every tensor is two-dimensional (vectors are 1xN or Nx1, scalars 1x1).
// Eigen provides storage and the dense kernels; gradients are our own.
//
//   Tape tape;
//   Var w(Matrix::Random(3, 2), /*requires_grad=*/true);
//   Var y = tape.Sum(tape.MatMul(x, w));
//   tape.Backward(y);  // w.grad() now holds dy/dw

#ifndef ECDGRAPH_NUMERICS_TENSOR_HPP
#define ECDGRAPH_NUMERICS_TENSOR_HPP

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <initializer_list>
#include <memory>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ecdgraph/errors.hpp"
#include "ecdgraph/rng.hpp"

namespace ecd {

using Matrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::Matrix<double, 1, Eigen::Dynamic>;
using Index = Eigen::Index;

inline std::string ShapeString(const Matrix& m) {
  std::ostringstream os;
  os << "(" << m.rows() << "x" << m.cols() << ")";
  return os.str();
}

namespace detail {

struct Node {
  Matrix value;
  Matrix grad;  // 0x0 means "no gradient yet" (zero).
  bool requires_grad = false;
};

}  // namespace detail

/// Shared handle to a tensor value and its accumulated gradient.
///
/// Copies alias the same storage, which is how parameters are shared between
/// the model, the optimizer and the tape.
class Var {
 public:
  Var() = default;
  explicit Var(Matrix value, bool requires_grad = false)
      : node_(std::make_shared<detail::Node>()) {
    node_->value = std::move(value);
    node_->requires_grad = requires_grad;
  }

  bool defined() const { return node_ != nullptr; }
  const Matrix& value() const { return node_->value; }
  Matrix& mutable_value() { return node_->value; }
  Index rows() const { return node_->value.rows(); }
  Index cols() const { return node_->value.cols(); }
  Index size() const { return node_->value.size(); }

  bool requires_grad() const { return node_ && node_->requires_grad; }
  bool has_grad() const { return node_ && node_->grad.size() > 0; }

  /// Accumulated gradient, or a zero matrix of the value's shape.
  Matrix grad() const {
    if (has_grad()) return node_->grad;
    return Matrix::Zero(rows(), cols());
  }
  // Gradient mutators are const: Var is a handle and constness does not
  // extend to the node it points at.
  Matrix& mutable_grad() const {
    if (!has_grad()) node_->grad = Matrix::Zero(rows(), cols());
    return node_->grad;
  }
  void ZeroGrad() { node_->grad.resize(0, 0); }

  template <typename Expr>
  void AccumulateGrad(const Expr& g) const {
    if (!requires_grad()) return;
    if (node_->grad.size() == 0) {
      node_->grad = g;
    } else {
      node_->grad += g;
    }
  }

  /// Deep copy detached from any tape.
  Var Clone() const { return Var(node_->value, node_->requires_grad); }

  bool SameNode(const Var& other) const { return node_ == other.node_; }

 private:
  friend class Tape;
  std::shared_ptr<detail::Node> node_;
};

/// Scalar profile of a row-wise radial map v -> g(|v|) v / |v|.
///
/// `ratio(n)` is g(n)/n and `curvature(n)` is (g'(n) - g(n)/n) / n^2. Both
/// must be finite at n = 0; implementations switch to a Taylor expansion for
/// small n. Backward uses
///   dL/dv = ratio * gy + curvature * (v . gy) * v.
struct RadialFn {
  std::function<double(double)> ratio;
  std::function<double(double)> curvature;
  /// For capped profiles: whether n is in the capped (flat) region.
  std::function<bool(double)> capped;
};

namespace radial {

inline constexpr double kSeriesCutoff = 1e-4;

inline RadialFn Identity() {
  return {[](double) { return 1.0; }, [](double) { return 0.0; }};
}

/// g = min(tanh(n), cap).
inline RadialFn Tanh(double cap = 1.0) {
  return {[cap](double n) {
            if (n < kSeriesCutoff) return 1.0 - n * n / 3.0;
            return std::min(std::tanh(n), cap) / n;
          },
          [cap](double n) {
            if (n < kSeriesCutoff) return -2.0 / 3.0 + 8.0 * n * n / 15.0;
            const double t = std::tanh(n);
            if (t >= cap) return -cap / (n * n * n);
            return ((1.0 - t * t) - t / n) / (n * n);
          },
          [cap](double n) { return std::tanh(n) >= cap; }};
}

/// g = artanh(min(n, cap)).
inline RadialFn Artanh(double cap) {
  return {[cap](double n) {
            if (n < kSeriesCutoff) return 1.0 + n * n / 3.0;
            return std::atanh(std::min(n, cap)) / n;
          },
          [cap](double n) {
            if (n < kSeriesCutoff) return 2.0 / 3.0 + 4.0 * n * n / 5.0;
            const double a = std::atanh(std::min(n, cap));
            const double da = n >= cap ? 0.0 : 1.0 / (1.0 - n * n);
            return (da - a / n) / (n * n);
          },
          [cap](double n) { return n >= cap; }};
}

/// g = asinh(n).
inline RadialFn Asinh() {
  return {[](double n) {
            if (n < kSeriesCutoff) return 1.0 - n * n / 6.0;
            return std::asinh(n) / n;
          },
          [](double n) {
            if (n < kSeriesCutoff) return -1.0 / 3.0 + 3.0 * n * n / 10.0;
            return (1.0 / std::sqrt(1.0 + n * n) - std::asinh(n) / n) / (n * n);
          }};
}

/// g = sinh(min(n, cap)).
inline RadialFn Sinh(double cap = std::numeric_limits<double>::infinity()) {
  return {[cap](double n) {
            if (n < kSeriesCutoff) return 1.0 + n * n / 6.0;
            return std::sinh(std::min(n, cap)) / n;
          },
          [cap](double n) {
            if (n < kSeriesCutoff) return 1.0 / 3.0 + n * n / 30.0;
            if (n >= cap) return -std::sinh(cap) / (n * n * n);
            return (std::cosh(n) - std::sinh(n) / n) / (n * n);
          },
          [cap](double n) { return n >= cap; }};
}

}  // namespace radial

/// Records differentiable operations and replays them backwards.
///
/// A tape in kNoGrad mode computes values only; ops never retain inputs.
/// The tape is single-threaded; separate tapes may run concurrently as long
/// as they do not share parameters that require gradients.
class Tape {
 public:
  enum class Mode { kRecord, kNoGrad };
  using BackwardFn = std::function<void(const Matrix& grad_out)>;

  explicit Tape(Mode mode = Mode::kRecord) : mode_(mode) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool recording() const { return mode_ == Mode::kRecord; }

  /// When enabled, every op checks its output for NaN/Inf and throws
  /// DomainError naming the op.
  void set_check_finite(bool on) { check_finite_ = on; }

  /// When set, piecewise ops append the side of every branch they take
  /// (LeakyRelu sign, clamps, caps). Two evaluations with different traces
  /// straddle a kink, which a finite-difference check cannot resolve.
  void set_branch_trace(std::vector<std::uint8_t>* trace) { trace_ = trace; }
  void NoteBranch(bool side) {
    if (trace_ != nullptr) trace_->push_back(side ? 1 : 0);
  }
  bool tracing_branches() const { return trace_ != nullptr; }

  std::size_t size() const { return entries_.size(); }

  /// Registers an op result. `backward` receives dL/d(result) and must
  /// accumulate into whichever inputs require gradients.
  Var Record(const char* op, Matrix value, std::initializer_list<Var> inputs,
             BackwardFn backward) {
    return Record(op, std::move(value),
                  std::span<const Var>(inputs.begin(), inputs.size()),
                  std::move(backward));
  }

  Var Record(const char* op, Matrix value, std::span<const Var> inputs,
             BackwardFn backward) {
    if (check_finite_ && !value.allFinite()) {
      throw DomainError(std::string(op) + ": non-finite output");
    }
    bool needs_grad = false;
    for (const Var& v : inputs) needs_grad = needs_grad || v.requires_grad();
    Var out(std::move(value), recording() && needs_grad);
    if (out.requires_grad()) {
      entries_.push_back({out.node_, std::move(backward)});
    }
    return out;
  }

  Var Constant(Matrix value) { return Var(std::move(value), false); }

  // ---- linear algebra -----------------------------------------------------

  Var MatMul(const Var& a, const Var& b) {
    if (a.cols() != b.rows()) {
      throw ShapeError("MatMul: shape mismatch " + ShapeString(a.value()) +
                       " vs " + ShapeString(b.value()));
    }
    Matrix out = a.value() * b.value();
    return Record("MatMul", std::move(out), {a, b},
                  [a, b](const Matrix& g) mutable {
                    if (a.requires_grad())
                      a.AccumulateGrad(g * b.value().transpose());
                    if (b.requires_grad())
                      b.AccumulateGrad(a.value().transpose() * g);
                  });
  }

  Var Add(const Var& a, const Var& b) {
    RequireSameShape("Add", a, b);
    return Record("Add", a.value() + b.value(), {a, b},
                  [a, b](const Matrix& g) mutable {
                    a.AccumulateGrad(g);
                    b.AccumulateGrad(g);
                  });
  }

  /// x + 1_n * row, broadcasting a 1xC row over every row of x.
  Var AddRow(const Var& x, const Var& row) {
    if (row.rows() != 1 || row.cols() != x.cols()) {
      throw ShapeError("AddRow: shape mismatch " + ShapeString(x.value()) +
                       " vs " + ShapeString(row.value()));
    }
    Matrix out = x.value().rowwise() + row.value().row(0);
    return Record("AddRow", std::move(out), {x, row},
                  [x, row](const Matrix& g) mutable {
                    x.AccumulateGrad(g);
                    if (row.requires_grad())
                      row.AccumulateGrad(g.colwise().sum());
                  });
  }

  Var Scale(const Var& x, double s) {
    return Record("Scale", x.value() * s, {x},
                  [x, s](const Matrix& g) mutable { x.AccumulateGrad(g * s); });
  }

  /// Elementwise product.
  Var Mul(const Var& a, const Var& b) {
    RequireSameShape("Mul", a, b);
    Matrix out = a.value().cwiseProduct(b.value());
    return Record("Mul", std::move(out), {a, b},
                  [a, b](const Matrix& g) mutable {
                    if (a.requires_grad())
                      a.AccumulateGrad(g.cwiseProduct(b.value()));
                    if (b.requires_grad())
                      b.AccumulateGrad(g.cwiseProduct(a.value()));
                  });
  }

  // ---- reshaping ----------------------------------------------------------

  Var ConcatCols(const Var& a, const Var& b) {
    if (a.rows() != b.rows()) {
      throw ShapeError("ConcatCols: shape mismatch " + ShapeString(a.value()) +
                       " vs " + ShapeString(b.value()));
    }
    Matrix out(a.rows(), a.cols() + b.cols());
    out << a.value(), b.value();
    const Index ca = a.cols();
    const Index cb = b.cols();
    return Record("ConcatCols", std::move(out), {a, b},
                  [a, b, ca, cb](const Matrix& g) mutable {
                    if (a.requires_grad()) a.AccumulateGrad(g.leftCols(ca));
                    if (b.requires_grad()) b.AccumulateGrad(g.rightCols(cb));
                  });
  }

  Var ConcatRows(std::span<const Var> parts) {
    if (parts.empty()) throw ShapeError("ConcatRows: no inputs");
    const Index cols = parts[0].cols();
    Index rows = 0;
    for (const Var& p : parts) {
      if (p.cols() != cols) {
        throw ShapeError("ConcatRows: shape mismatch " +
                         ShapeString(parts[0].value()) + " vs " +
                         ShapeString(p.value()));
      }
      rows += p.rows();
    }
    Matrix out(rows, cols);
    Index at = 0;
    for (const Var& p : parts) {
      out.middleRows(at, p.rows()) = p.value();
      at += p.rows();
    }
    std::vector<Var> inputs(parts.begin(), parts.end());
    return Record("ConcatRows", std::move(out), parts,
                  [inputs](const Matrix& g) mutable {
                    Index offset = 0;
                    for (Var& p : inputs) {
                      if (p.requires_grad())
                        p.AccumulateGrad(g.middleRows(offset, p.rows()));
                      offset += p.rows();
                    }
                  });
  }

  Var SliceCols(const Var& x, Index begin, Index count) {
    if (begin < 0 || count < 0 || begin + count > x.cols()) {
      throw ShapeError("SliceCols: columns [" + std::to_string(begin) + ", " +
                       std::to_string(begin + count) + ") out of " +
                       ShapeString(x.value()));
    }
    Matrix out = x.value().middleCols(begin, count);
    return Record("SliceCols", std::move(out), {x},
                  [x, begin, count](const Matrix& g) {
                    if (!x.requires_grad()) return;
                    x.mutable_grad().middleCols(begin, count) += g;
                  });
  }

  // ---- indexing -----------------------------------------------------------

  Var GatherRows(const Var& x, std::span<const Index> rows) {
    Matrix out(static_cast<Index>(rows.size()), x.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i] < 0 || rows[i] >= x.rows()) {
        throw ShapeError("GatherRows: row " + std::to_string(rows[i]) +
                         " out of " + ShapeString(x.value()));
      }
      out.row(static_cast<Index>(i)) = x.value().row(rows[i]);
    }
    std::vector<Index> idx(rows.begin(), rows.end());
    return Record("GatherRows", std::move(out), {x},
                  [x, idx](const Matrix& g) {
                    if (!x.requires_grad()) return;
                    Matrix& gx = x.mutable_grad();
                    for (std::size_t i = 0; i < idx.size(); ++i)
                      gx.row(idx[i]) += g.row(static_cast<Index>(i));
                  });
  }

  /// Row i of x is averaged into segment index[i]; empty segments are zero.
  Var ScatterMean(const Var& x, std::span<const Index> index,
                  Index num_segments) {
    if (static_cast<Index>(index.size()) != x.rows()) {
      throw ShapeError("ScatterMean: index length " +
                       std::to_string(index.size()) + " vs " +
                       ShapeString(x.value()));
    }
    std::vector<double> count(static_cast<std::size_t>(num_segments), 0.0);
    for (Index s : index) {
      if (s < 0 || s >= num_segments) {
        throw ShapeError("ScatterMean: segment " + std::to_string(s) +
                         " out of [0, " + std::to_string(num_segments) + ")");
      }
      count[static_cast<std::size_t>(s)] += 1.0;
    }
    Matrix out = Matrix::Zero(num_segments, x.cols());
    for (Index i = 0; i < x.rows(); ++i) out.row(index[i]) += x.value().row(i);
    for (Index s = 0; s < num_segments; ++s) {
      if (count[static_cast<std::size_t>(s)] > 0)
        out.row(s) /= count[static_cast<std::size_t>(s)];
    }
    std::vector<Index> idx(index.begin(), index.end());
    return Record("ScatterMean", std::move(out), {x},
                  [x, idx, count](const Matrix& g) mutable {
                    Matrix gx(x.rows(), x.cols());
                    for (Index i = 0; i < x.rows(); ++i) {
                      const auto s = static_cast<std::size_t>(idx[i]);
                      gx.row(i) = g.row(idx[i]) / count[s];
                    }
                    x.AccumulateGrad(gx);
                  });
  }

  // ---- elementwise --------------------------------------------------------

  Var LeakyRelu(const Var& x, double slope) {
    if (trace_ != nullptr) {
      for (Index i = 0; i < x.size(); ++i) NoteBranch(x.value().data()[i] > 0.0);
    }
    Matrix out = x.value().unaryExpr(
        [slope](double v) { return v > 0.0 ? v : slope * v; });
    return Record("LeakyRelu", std::move(out), {x},
                  [x, slope](const Matrix& g) mutable {
                    Matrix d = x.value().unaryExpr(
                        [slope](double v) { return v > 0.0 ? 1.0 : slope; });
                    x.AccumulateGrad(g.cwiseProduct(d));
                  });
  }

  Var Tanh(const Var& x) {
    Matrix out = x.value().array().tanh().matrix();
    Matrix y = out;
    return Record("Tanh", std::move(out), {x},
                  [x, y](const Matrix& g) mutable {
                    x.AccumulateGrad(
                        (g.array() * (1.0 - y.array().square())).matrix());
                  });
  }

  /// Throws DomainError unless every |x| < 1.
  Var Artanh(const Var& x) {
    if ((x.value().array().abs() >= 1.0).any()) {
      throw DomainError("Artanh: argument magnitude >= 1");
    }
    Matrix out = x.value().unaryExpr([](double v) { return std::atanh(v); });
    return Record("Artanh", std::move(out), {x},
                  [x](const Matrix& g) mutable {
                    x.AccumulateGrad(
                        (g.array() / (1.0 - x.value().array().square()))
                            .matrix());
                  });
  }

  Var Cosh(const Var& x) {
    Matrix out = x.value().array().cosh().matrix();
    return Record("Cosh", std::move(out), {x}, [x](const Matrix& g) mutable {
      x.AccumulateGrad((g.array() * x.value().array().sinh()).matrix());
    });
  }

  Var Sinh(const Var& x) {
    Matrix out = x.value().array().sinh().matrix();
    return Record("Sinh", std::move(out), {x}, [x](const Matrix& g) mutable {
      x.AccumulateGrad((g.array() * x.value().array().cosh()).matrix());
    });
  }

  /// Throws DomainError unless every x >= 1.
  Var Arcosh(const Var& x) {
    if ((x.value().array() < 1.0).any()) {
      throw DomainError("Arcosh: argument < 1");
    }
    Matrix out = x.value().unaryExpr([](double v) { return std::acosh(v); });
    return Record("Arcosh", std::move(out), {x},
                  [x](const Matrix& g) mutable {
                    x.AccumulateGrad(
                        (g.array() / (x.value().array().square() - 1.0).sqrt())
                            .matrix());
                  });
  }

  /// log(max(x, floor)). With floor = 0 any x <= 0 is a DomainError; with a
  /// positive floor, entries below it are clamped and get zero gradient.
  Var Log(const Var& x, double floor = 0.0) {
    if (floor <= 0.0 && (x.value().array() <= 0.0).any()) {
      throw DomainError("Log: non-positive argument");
    }
    if (trace_ != nullptr) {
      for (Index i = 0; i < x.size(); ++i) NoteBranch(x.value().data()[i] > floor);
    }
    Matrix out = x.value().unaryExpr(
        [floor](double v) { return std::log(std::max(v, floor)); });
    return Record("Log", std::move(out), {x},
                  [x, floor](const Matrix& g) mutable {
                    Matrix d = x.value().unaryExpr([floor](double v) {
                      return v > floor ? 1.0 / v : 0.0;
                    });
                    x.AccumulateGrad(g.cwiseProduct(d));
                  });
  }

  // ---- row-wise -----------------------------------------------------------

  /// Nx1 column of Euclidean row norms. Zero rows get zero gradient.
  Var RowNorm(const Var& x) {
    Matrix out = x.value().rowwise().norm();
    Matrix norms = out;
    return Record("RowNorm", std::move(out), {x},
                  [x, norms](const Matrix& g) mutable {
                    Matrix gx(x.rows(), x.cols());
                    for (Index i = 0; i < x.rows(); ++i) {
                      const double n = norms(i, 0);
                      if (n > 0.0) gx.row(i) = (g(i, 0) / n) * x.value().row(i);
                      else gx.row(i).setZero();
                    }
                    x.AccumulateGrad(gx);
                  });
  }

  Var Softmax(const Var& x) {
    Matrix out(x.rows(), x.cols());
    for (Index i = 0; i < x.rows(); ++i) {
      const double m = x.value().row(i).maxCoeff();
      RowVector e = (x.value().row(i).array() - m).exp().matrix();
      out.row(i) = e / e.sum();
    }
    Matrix y = out;
    return Record("Softmax", std::move(out), {x},
                  [x, y](const Matrix& g) mutable {
                    Matrix gx(y.rows(), y.cols());
                    for (Index i = 0; i < y.rows(); ++i) {
                      const double dot = g.row(i).dot(y.row(i));
                      gx.row(i) =
                          (y.row(i).array() * (g.row(i).array() - dot)).matrix();
                    }
                    x.AccumulateGrad(gx);
                  });
  }

  /// Row-wise v -> g(|v|) v / |v| for the profile `fn`.
  Var Radial(const Var& x, const RadialFn& fn) {
    const Index n = x.rows();
    std::vector<double> ratio(static_cast<std::size_t>(n));
    std::vector<double> curv(static_cast<std::size_t>(n));
    Matrix out(x.rows(), x.cols());
    for (Index i = 0; i < n; ++i) {
      const double norm = x.value().row(i).norm();
      ratio[static_cast<std::size_t>(i)] = fn.ratio(norm);
      if (trace_ != nullptr && fn.capped) NoteBranch(fn.capped(norm));
      out.row(i) = ratio[static_cast<std::size_t>(i)] * x.value().row(i);
      if (recording()) curv[static_cast<std::size_t>(i)] = fn.curvature(norm);
    }
    return Record("Radial", std::move(out), {x},
                  [x, ratio, curv](const Matrix& g) mutable {
                    Matrix gx(x.rows(), x.cols());
                    for (Index i = 0; i < x.rows(); ++i) {
                      const auto k = static_cast<std::size_t>(i);
                      const auto v = x.value().row(i);
                      gx.row(i) = ratio[k] * g.row(i) +
                                  (curv[k] * v.dot(g.row(i))) * v;
                    }
                    x.AccumulateGrad(gx);
                  });
  }

  // ---- reductions ---------------------------------------------------------

  Var Sum(const Var& x) {
    Matrix out(1, 1);
    out(0, 0) = x.value().sum();
    return Record("Sum", std::move(out), {x}, [x](const Matrix& g) mutable {
      x.AccumulateGrad(Matrix::Constant(x.rows(), x.cols(), g(0, 0)));
    });
  }

  Var Mean(const Var& x) {
    if (x.size() == 0) throw ShapeError("Mean: empty tensor");
    return Scale(Sum(x), 1.0 / static_cast<double>(x.size()));
  }

  // ---- stochastic ---------------------------------------------------------

  /// Inverted dropout. Returns `x` itself (same storage, no tape entry) when
  /// not training or p == 0.
  Var Dropout(const Var& x, double p, bool train, Rng& rng) {
    if (!train || p <= 0.0) return x;
    if (p >= 1.0) throw DomainError("Dropout: p must be < 1");
    const double keep_scale = 1.0 / (1.0 - p);
    Matrix mask(x.rows(), x.cols());
    for (Index i = 0; i < mask.size(); ++i) {
      mask.data()[i] = rng.Uniform() >= p ? keep_scale : 0.0;
    }
    Matrix out = x.value().cwiseProduct(mask);
    return Record("Dropout", std::move(out), {x},
                  [x, mask](const Matrix& g) mutable {
                    x.AccumulateGrad(g.cwiseProduct(mask));
                  });
  }

  // ---- differentiation ----------------------------------------------------

  /// Propagates d(loss)/d(.) to every recorded input, accumulating (+=) into
  /// leaves that require gradients, then clears the tape.
  void Backward(const Var& loss) {
    if (loss.rows() != 1 || loss.cols() != 1) {
      throw ShapeError("Backward: loss must be scalar, got " +
                       ShapeString(loss.value()));
    }
    if (!loss.requires_grad()) {
      entries_.clear();
      return;
    }
    bool recorded = false;
    for (const auto& e : entries_) recorded = recorded || e.out == loss.node_;
    if (!recorded) {
      // The loss is a leaf: d(loss)/d(loss) = 1 accumulates like any gradient.
      Var leaf = loss;
      leaf.AccumulateGrad(Matrix::Ones(1, 1));
      entries_.clear();
      return;
    }
    loss.node_->grad = Matrix::Ones(1, 1);
    for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
      if (it->out->grad.size() == 0) continue;
      it->backward(it->out->grad);
      it->out->grad.resize(0, 0);
    }
    Clear();
  }

  void Clear() {
    for (auto& e : entries_) e.out->grad.resize(0, 0);
    entries_.clear();
  }

 private:
  struct Entry {
    std::shared_ptr<detail::Node> out;
    BackwardFn backward;
  };

  static void RequireSameShape(const char* op, const Var& a, const Var& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
      throw ShapeError(std::string(op) + ": shape mismatch " +
                       ShapeString(a.value()) + " vs " +
                       ShapeString(b.value()));
    }
  }

  Mode mode_;
  bool check_finite_ = false;
  std::vector<std::uint8_t>* trace_ = nullptr;
  std::vector<Entry> entries_;
};

}  // namespace ecd

#endif  // ECDGRAPH_NUMERICS_TENSOR_HPP
