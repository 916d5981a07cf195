#include "barrier.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace risd2d::detail {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Gradient of t f(x) + sum log g_j(x) + box log terms.
RVector barrier_gradient(const BarrierProblem& p, const RVector& x, double t) {
  RVector grad = t * p.objective.gradient(x);
  for (const ConcaveFunction& g : p.constraints) grad += g.gradient(x) / g.value(x);
  for (int i = 0; i < p.dim(); ++i) {
    if (std::isfinite(p.lower[i])) grad[i] += 1.0 / (x[i] - p.lower[i]);
    if (std::isfinite(p.upper[i])) grad[i] -= 1.0 / (p.upper[i] - x[i]);
  }
  return grad;
}

// Stationarity residual with barrier multipliers mu_j = 1/(t g_j), relative to the
// largest term in the Lagrangian gradient, and complementarity mu_j g_j = 1/t.
double kkt_residual(const BarrierProblem& p, const RVector& x, double t) {
  const RVector stat = barrier_gradient(p, x, t) / t;
  double scale = 1.0 + p.objective.gradient(x).lpNorm<Eigen::Infinity>();
  for (const ConcaveFunction& g : p.constraints) {
    scale = std::max(scale, g.gradient(x).lpNorm<Eigen::Infinity>() / (t * g.value(x)));
  }
  for (int i = 0; i < p.dim(); ++i) {
    if (std::isfinite(p.lower[i])) scale = std::max(scale, 1.0 / (t * (x[i] - p.lower[i])));
    if (std::isfinite(p.upper[i])) scale = std::max(scale, 1.0 / (t * (p.upper[i] - x[i])));
  }
  return std::max(stat.lpNorm<Eigen::Infinity>() / scale, 1.0 / t);
}

}  // namespace

double ConcaveFunction::value(const RVector& x) const {
  double v = constant + (linear.size() > 0 ? linear.dot(x) : 0.0);
  for (const LogTerm& t : logs) {
    const double arg = t.a.dot(x) + t.c;
    if (!(arg > 0.0)) return kNegInf;
    v += t.weight * std::log2(arg);
  }
  return v;
}

RVector ConcaveFunction::gradient(const RVector& x) const {
  RVector g = linear.size() > 0 ? linear : RVector::Zero(x.size());
  for (const LogTerm& t : logs) g += (t.weight / ((t.a.dot(x) + t.c) * kLn2)) * t.a;
  return g;
}

RMatrix ConcaveFunction::hessian(const RVector& x) const {
  RMatrix h = RMatrix::Zero(x.size(), x.size());
  for (const LogTerm& t : logs) {
    const double arg = t.a.dot(x) + t.c;
    h.noalias() -= (t.weight / (arg * arg * kLn2)) * t.a * t.a.transpose();
  }
  return h;
}

bool BarrierProblem::strictly_feasible(const RVector& x) const {
  for (int i = 0; i < dim(); ++i) {
    if (!(x[i] > lower[i]) || !(x[i] < upper[i])) return false;
  }
  if (!std::isfinite(objective.value(x))) return false;
  for (const ConcaveFunction& g : constraints) {
    if (!(g.value(x) > 0.0)) return false;
  }
  return true;
}

BarrierResult maximize_barrier(const BarrierProblem& problem, const RVector& start,
                               double gap_tol) {
  if (!problem.strictly_feasible(start)) {
    throw std::invalid_argument("maximize_barrier: start point is not strictly feasible");
  }
  const int n = problem.dim();
  int barrier_terms = static_cast<int>(problem.constraints.size());
  for (int i = 0; i < n; ++i) {
    barrier_terms += std::isfinite(problem.lower[i]) + std::isfinite(problem.upper[i]);
  }

  BarrierResult res;
  RVector x = start;
  double t = 1.0;
  RVector grad(n);
  for (int outer = 0; outer < 80; ++outer) {
    for (int newton = 0; newton < 100; ++newton) {
      grad = barrier_gradient(problem, x, t);
      RMatrix hess = t * problem.objective.hessian(x);
      for (const ConcaveFunction& g : problem.constraints) {
        const double gv = g.value(x);
        const RVector gg = g.gradient(x);
        hess += g.hessian(x) / gv - (gg * gg.transpose()) / (gv * gv);
      }
      for (int i = 0; i < n; ++i) {
        if (std::isfinite(problem.lower[i])) hess(i, i) -= 1.0 / ((x[i] - problem.lower[i]) * (x[i] - problem.lower[i]));
        if (std::isfinite(problem.upper[i])) hess(i, i) -= 1.0 / ((problem.upper[i] - x[i]) * (problem.upper[i] - x[i]));
      }
      const RMatrix neg = -hess;
      Eigen::LDLT<RMatrix> ldlt(neg);
      RVector step = ldlt.solve(grad);
      if (ldlt.info() != Eigen::Success || !step.allFinite()) {
        step = grad / (1.0 + neg.diagonal().cwiseAbs().maxCoeff());
      }
      const double decrement = grad.dot(step);
      if (!(decrement > 1e-14)) break;

      // The barrier is concave along the step. Accept the first feasible alpha whose
      // slope has not turned too negative (curvature condition). Slopes instead of
      // values avoid cancellation when t is large; the slack absorbs rounding in the
      // slope at the full Newton step, which otherwise forces alpha = 1/2 forever.
      double alpha = 1.0;
      bool moved = false;
      for (int ls = 0; ls < 60; ++ls, alpha *= 0.5) {
        const RVector trial = x + alpha * step;
        if (!problem.strictly_feasible(trial)) continue;
        if (barrier_gradient(problem, trial, t).dot(step) >= -0.25 * decrement || ls == 59) {
          x = trial;
          moved = true;
          break;
        }
      }
      ++res.newton_steps;
      // Below ~1e-9 a shortened step means rounding has taken over.
      if (!moved || decrement < 1e-14 || (decrement < 1e-9 && alpha < 1.0)) break;
    }
    // Near an active constraint the constraint value loses relative accuracy as t
    // grows, so the multiplier estimates eventually get worse. Keep the best stage.
    const double r = kkt_residual(problem, x, t);
    if (r <= res.kkt_residual || outer == 0) {
      res.x = x;
      res.kkt_residual = r;
    }
    if (barrier_terms / t < gap_tol || r > 1e3 * res.kkt_residual) break;
    t *= t < 1e5 ? 50.0 : 10.0;
  }

  res.objective = problem.objective.value(res.x);
  return res;
}

}  // namespace risd2d::detail
