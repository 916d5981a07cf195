#pragma once

// Log-barrier Newton method for small concave maximization problems whose objective and
// constraints are sums of weighted log2-affine terms plus a linear part.

#include "risd2d/common.hpp"

#include <vector>

namespace risd2d::detail {

struct LogTerm {
  RVector a;
  double c = 1.0;
  double weight = 1.0;  // contributes weight * log2(a'x + c)
};

struct ConcaveFunction {
  std::vector<LogTerm> logs;
  RVector linear;
  double constant = 0.0;

  double value(const RVector& x) const;  // -inf outside the domain
  RVector gradient(const RVector& x) const;
  RMatrix hessian(const RVector& x) const;
};

/// maximize objective(x) s.t. constraints_j(x) >= 0, lower <= x <= upper (bounds may be infinite).
struct BarrierProblem {
  ConcaveFunction objective;
  std::vector<ConcaveFunction> constraints;
  RVector lower;
  RVector upper;

  int dim() const { return static_cast<int>(lower.size()); }
  bool strictly_feasible(const RVector& x) const;
};

struct BarrierResult {
  RVector x;
  double objective = 0.0;
  double kkt_residual = 0.0;
  int newton_steps = 0;
};

/// start must be strictly feasible. gap_tol bounds the final duality gap.
BarrierResult maximize_barrier(const BarrierProblem& problem, const RVector& start,
                               double gap_tol = 1e-9);

}  // namespace risd2d::detail
