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

#ifndef ECDGRAPH_NUMERICS_GRADCHECK_HPP
#define ECDGRAPH_NUMERICS_GRADCHECK_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "ecdgraph/numerics/tensor.hpp"

namespace ecd {

struct GradCheckCoordinate {
  std::size_t param = 0;
  Index index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  GradCheckCoordinate worst;
  /// Coordinates where a perturbed evaluation left the function's domain.
  std::vector<GradCheckCoordinate> unstable;
  /// Coordinates where either derivative was NaN or infinite.
  std::vector<GradCheckCoordinate> non_finite;
  /// Coordinates whose +eps and -eps evaluations took different branches of
  /// a piecewise op. Central differences are meaningless there, so they are
  /// listed instead of scored.
  std::vector<GradCheckCoordinate> kinked;

  /// Share of perturbed coordinates that straddled a kink.
  double kinked_fraction() const {
    const std::size_t total = checked + kinked.size();
    return total == 0 ? 0.0
                      : static_cast<double>(kinked.size()) /
                            static_cast<double>(total);
  }

  bool Passed(double tolerance) const {
    return unstable.empty() && non_finite.empty() &&
           max_rel_error < tolerance;
  }
};

/// Compares tape gradients against central differences.
///
/// `loss` builds a scalar on the given tape from the current values of
/// `params`; it must be deterministic. The relative error of a coordinate is
/// |analytic - numeric| / max(1, |analytic|). `max_per_param` = 0 checks every
/// coordinate, otherwise that many coordinates per parameter are sampled
/// with `rng`. Perturbed evaluations record branch traces (see
/// Tape::set_branch_trace) to detect coordinates that straddle a kink.
inline GradCheckReport FiniteDiffCheck(
    const std::function<Var(Tape&)>& loss, std::span<Var> params,
    double eps = 1e-5, std::size_t max_per_param = 0, Rng* rng = nullptr) {
  for (Var& p : params) p.ZeroGrad();
  {
    Tape tape;
    Var out = loss(tape);
    tape.Backward(out);
  }
  std::vector<Matrix> analytic;
  analytic.reserve(params.size());
  for (const Var& p : params) analytic.push_back(p.grad());

  auto evaluate = [&](std::vector<std::uint8_t>& trace) {
    trace.clear();
    Tape tape(Tape::Mode::kNoGrad);
    tape.set_branch_trace(&trace);
    return loss(tape).value()(0, 0);
  };
  std::vector<std::uint8_t> trace_up, trace_down;

  GradCheckReport report;
  for (std::size_t k = 0; k < params.size(); ++k) {
    Var& p = params[k];
    std::vector<Index> coords;
    if (max_per_param == 0 || static_cast<Index>(max_per_param) >= p.size() ||
        rng == nullptr) {
      coords.resize(static_cast<std::size_t>(p.size()));
      for (Index i = 0; i < p.size(); ++i)
        coords[static_cast<std::size_t>(i)] = i;
    } else {
      for (std::size_t s = 0; s < max_per_param; ++s)
        coords.push_back(
            static_cast<Index>(rng->Below(static_cast<std::uint64_t>(p.size()))));
    }
    for (Index i : coords) {
      double* x = p.mutable_value().data() + i;
      const double saved = *x;
      GradCheckCoordinate c{k, i, analytic[k].data()[i], 0.0};
      try {
        *x = saved + eps;
        const double up = evaluate(trace_up);
        *x = saved - eps;
        const double down = evaluate(trace_down);
        *x = saved;
        c.numeric = (up - down) / (2.0 * eps);
      } catch (const DomainError&) {
        *x = saved;
        c.numeric = std::numeric_limits<double>::quiet_NaN();
        report.unstable.push_back(c);
        continue;
      }
      if (trace_up != trace_down) {
        report.kinked.push_back(c);
        continue;
      }
      ++report.checked;
      if (!std::isfinite(c.analytic) || !std::isfinite(c.numeric)) {
        report.non_finite.push_back(c);
        continue;
      }
      const double err = std::abs(c.analytic - c.numeric) /
                         std::max(1.0, std::abs(c.analytic));
      if (err > report.max_rel_error) {
        report.max_rel_error = err;
        report.worst = c;
      }
    }
  }
  for (Var& p : params) p.ZeroGrad();
  return report;
}

}  // namespace ecd

#endif  // ECDGRAPH_NUMERICS_GRADCHECK_HPP
