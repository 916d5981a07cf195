#pragma once

// Small dense complex SDPs in trace form:
//
//   maximize    Tr(C Q)
//   subject to  Tr(G_j Q) <= h_j  or  >= h_j
//               Q_nn = 1            (optional)
//               Q Hermitian PSD
//
// Solved by a primal-dual interior-point method (HKM direction, Mehrotra
// predictor-corrector) on the real symmetric embedding of dimension 2n.

#include "risd2d/common.hpp"

#include <string>
#include <vector>

namespace risd2d::sdp {

enum class Sense { less_equal, greater_equal };

struct Constraint {
  CMatrix matrix;
  Sense sense = Sense::less_equal;
  double rhs = 0.0;
};

struct Problem {
  CMatrix objective;
  std::vector<Constraint> inequalities;
  bool diag_one = true;

  int dim() const { return static_cast<int>(objective.rows()); }
  /// Throws std::invalid_argument on shape mismatch or non-Hermitian data.
  void validate() const;
};

enum class Status { optimal, infeasible, max_iter };

std::string to_string(Status s);

struct Options {
  double tol = 1e-7;
  int max_iter = 100;
};

struct Solution {
  CMatrix q;
  double value = 0.0;
  Status status = Status::max_iter;
  double kkt_residual = 0.0;
  double duality_gap = 0.0;
  int iterations = 0;
  // Dual multipliers in the sign convention of the maximization problem:
  // dual objective sum(diag_dual) + sum_j ineq_dual_j * s_j * h_j with
  // s_j = +1 for <=, -1 for >=, ineq_dual >= 0 and
  // diag(diag_dual) + sum_j ineq_dual_j * s_j * G_j - C PSD.
  RVector diag_dual;
  RVector ineq_dual;
};

Solution solve(const Problem& problem, const Options& options = {});

/// Margins recomputed from the problem data and the returned primal/dual pair.
struct Residuals {
  double psd_margin = 0.0;          // min eigenvalue of Q
  double diag_violation = 0.0;      // max |Q_nn - 1|
  double ineq_violation = 0.0;      // max violation / max(1, ||G_j||_F)
  double dual_psd_margin = 0.0;     // min eigenvalue of the dual slack, relative to 1 + ||C||
  double dual_sign_violation = 0.0; // max(0, -ineq_dual)
  double primal_value = 0.0;
  double dual_value = 0.0;
  double duality_gap = 0.0;         // dual_value - primal_value

  /// Checks the certificate thresholds used for optimal solutions.
  bool certified(double psd_tol = 1e-8, double feas_tol = 1e-7, double gap_tol = 1e-6) const;
};

Residuals verify(const Problem& problem, const Solution& solution);

/// Real symmetric embedding [[Re A, -Im A], [Im A, Re A]] of a Hermitian matrix.
RMatrix embed(const CMatrix& a);
/// Inverse of embed for an arbitrary symmetric 2n x 2n matrix (averages the two copies).
CMatrix extract(const RMatrix& y);

}  // namespace risd2d::sdp
