#include "risd2d/power_control.hpp"

#include "barrier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace risd2d {

namespace {

using detail::BarrierProblem;
using detail::ConcaveFunction;
using detail::LogTerm;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kInteriorShift = 1e-7;
constexpr double kSnap = 1e-7;
constexpr double kDcaTol = 1e-6;
constexpr int kDcaMaxIter = 50;
constexpr int kScreenIter = 5;
constexpr double kDinkelbachTol = 1e-4;
constexpr int kDinkelbachMaxIter = 50;

// Pieces of the linearized problem in normalized power x = p / p_max.
struct Linearized {
  ConcaveFunction objective;                 // surrogate of F(lambda)
  std::vector<ConcaveFunction> rate_margin;  // c1_l - lin(c2_l) - R_min,l, all links
};

Linearized linearize(const PowerProblem& pp, double lambda, const RVector& pk) {
  const int L = pp.links();
  const double pm = pp.p_max;
  const double log_noise = std::log2(pp.noise_power);
  const DcComponents dc = dc_components(pp, pk, lambda);

  Linearized lin;
  lin.objective.linear = -pm * (RVector::Constant(L, lambda) + dc.grad_f2);
  lin.objective.constant =
      L * log_noise - lambda * pp.static_power - dc.f2 + dc.grad_f2.dot(pk);
  for (int l = 0; l < L; ++l) {
    LogTerm term{pp.gains.col(l) * (pm / pp.noise_power), 1.0, 1.0};
    lin.objective.logs.push_back(term);
    ConcaveFunction g;
    g.logs.push_back(term);
    g.linear = -pm * dc.grad_c2.row(l).transpose();
    g.constant = log_noise - dc.c2[l] + dc.grad_c2.row(l).dot(pk) - pp.r_min[l];
    lin.rate_margin.push_back(std::move(g));
  }
  return lin;
}

RVector interior(const RVector& x) {
  return x.cwiseMax(kInteriorShift).cwiseMin(1.0 - kInteriorShift);
}

// Appends a trailing variable s and subtracts it: g(x) - s.
ConcaveFunction with_slack(const ConcaveFunction& g) {
  ConcaveFunction out = g;
  const Eigen::Index n = g.linear.size();
  for (LogTerm& t : out.logs) {
    t.a.conservativeResize(n + 1);
    t.a[n] = 0.0;
  }
  out.linear.conservativeResize(n + 1);
  out.linear[n] = -1.0;
  return out;
}

// maximize s s.t. g_j(x) >= s, 0 <= x <= 1; returns (x, s*).
std::pair<RVector, double> maximize_worst_margin(const std::vector<ConcaveFunction>& margins,
                                                 const RVector& x_start) {
  const Eigen::Index n = x_start.size();
  BarrierProblem bp;
  bp.objective.linear = RVector::Zero(n + 1);
  bp.objective.linear[n] = 1.0;
  for (const ConcaveFunction& g : margins) bp.constraints.push_back(with_slack(g));
  bp.lower = RVector::Zero(n + 1);
  bp.upper = RVector::Ones(n + 1);
  bp.lower[n] = -kInf;
  bp.upper[n] = kInf;

  RVector z(n + 1);
  z.head(n) = interior(x_start);
  double worst = kInf;
  for (const ConcaveFunction& g : margins) worst = std::min(worst, g.value(z.head(n)));
  z[n] = worst - 1.0;
  const detail::BarrierResult res = detail::maximize_barrier(bp, z);
  return {res.x.head(n), res.x[n]};
}

}  // namespace

PowerProblem PowerProblem::from(const ChannelRealization& chan, const PhaseConfig& phase,
                                const SystemParams& params) {
  const int L = chan.links();
  params.validate(L);
  PowerProblem pp;
  pp.gains = effective_gains(chan, phase);
  pp.noise_power = params.noise_power;
  pp.p_max = params.p_max;
  pp.r_min = params.r_min;
  pp.static_power = risd2d::static_power(params, L, chan.elements());
  return pp;
}

RVector PowerProblem::rates(const RVector& p) const {
  return sinrs_from_gains(gains, p, noise_power).unaryExpr([](double z) { return std::log2(1.0 + z); });
}

double PowerProblem::sum_rate(const RVector& p) const { return rates(p).sum(); }

bool PowerProblem::rates_ok(const RVector& p, double tol) const {
  return ((r_min - rates(p)).array() <= tol).all();
}

double F_lambda(const PowerProblem& problem, const RVector& p, double lambda) {
  return problem.sum_rate(p) - lambda * problem.total_power(p);
}

double F_lambda(const ChannelRealization& chan, const PhaseConfig& phase, const PowerAlloc& p,
                const SystemParams& params, double lambda) {
  return F_lambda(PowerProblem::from(chan, phase, params), p.watts, lambda);
}

DcComponents dc_components(const PowerProblem& problem, const RVector& p, double lambda) {
  const int L = problem.links();
  if (p.size() != L) throw std::invalid_argument("dc_components: power vector size mismatch");
  const RMatrix& g = problem.gains;
  DcComponents dc;
  dc.c1.resize(L);
  dc.c2.resize(L);
  dc.grad_c2 = RMatrix::Zero(L, L);
  dc.grad_f2 = RVector::Zero(L);
  for (int l = 0; l < L; ++l) {
    double interference = problem.noise_power;
    for (int i = 0; i < L; ++i) {
      if (i != l) interference += g(i, l) * p[i];
    }
    const double total = interference + g(l, l) * p[l];
    dc.c1[l] = std::log2(total);
    dc.c2[l] = std::log2(interference);
    for (int k = 0; k < L; ++k) {
      if (k != l) dc.grad_c2(l, k) = g(k, l) / (kLn2 * interference);
    }
    dc.grad_f2 += dc.grad_c2.row(l).transpose();
  }
  dc.f1 = dc.c1.sum() - lambda * problem.total_power(p);
  dc.f2 = dc.c2.sum();
  return dc;
}

DcComponents dc_components(const ChannelRealization& chan, const PhaseConfig& phase,
                           const PowerAlloc& p, const SystemParams& params, double lambda) {
  return dc_components(PowerProblem::from(chan, phase, params), p.watts, lambda);
}

SubproblemResult solve_convex_subproblem(const PowerProblem& problem, double lambda,
                                         const PowerAlloc& p_k) {
  const int L = problem.links();
  const double pm = problem.p_max;
  const Linearized lin = linearize(problem, lambda, p_k.watts);

  BarrierProblem bp;
  bp.objective = lin.objective;
  for (int l = 0; l < L; ++l) {
    if (problem.r_min[l] > 0.0) bp.constraints.push_back(lin.rate_margin[static_cast<std::size_t>(l)]);
  }
  bp.lower = RVector::Zero(L);
  bp.upper = RVector::Ones(L);

  SubproblemResult out;
  RVector start = interior(p_k.watts / pm);
  if (!bp.strictly_feasible(start)) {
    auto [x, worst] = maximize_worst_margin(bp.constraints, start);
    if (!(worst > 0.0)) {
      out.p = p_k;
      out.feasible = false;
      out.objective = lin.objective.value(p_k.watts / pm);
      return out;
    }
    start = x;
  }
  const detail::BarrierResult res = detail::maximize_barrier(bp, start);

  // Move coordinates sitting on the box boundary onto it exactly.
  RVector x = res.x;
  double best = bp.objective.value(x);
  for (int i = 0; i < L; ++i) {
    RVector trial = x;
    if (x[i] < kSnap) {
      trial[i] = 0.0;
    } else if (x[i] > 1.0 - kSnap) {
      trial[i] = 1.0;
    } else {
      continue;
    }
    const double val = bp.objective.value(trial);
    bool ok = val >= best - 1e-12 * (1.0 + std::abs(best));
    for (const ConcaveFunction& g : bp.constraints) ok = ok && g.value(trial) >= 0.0;
    if (ok) {
      x = trial;
      best = std::max(best, val);
    }
  }
  out.p.watts = (pm * x).cwiseMax(0.0).cwiseMin(pm);
  out.objective = bp.objective.value(x);
  out.kkt_residual = res.kkt_residual;
  return out;
}

namespace {

DcaResult run_dca(const PowerProblem& problem, double lambda, const PowerAlloc& p_init,
                  int max_iter) {
  DcaResult res;
  PowerAlloc p = p_init;
  double f = F_lambda(problem, p.watts, lambda);
  res.iterates.push_back({p, f, 0.0});
  for (int k = 0; k < max_iter; ++k) {
    const SubproblemResult sub = solve_convex_subproblem(problem, lambda, p);
    if (!sub.feasible) {
      res.feasible = k > 0 || problem.rates_ok(p.watts);
      break;
    }
    const double fn = F_lambda(problem, sub.p.watts, lambda);
    if (fn < f - 1e-12 * (1.0 + std::abs(f))) break;
    res.iterates.push_back({sub.p, fn, sub.kkt_residual});
    const double gain = fn - f;
    p = sub.p;
    f = fn;
    if (gain < kDcaTol) break;
  }
  return res;
}

}  // namespace

DcaResult dca_solve(const PowerProblem& problem, double lambda, const PowerAlloc& p_init) {
  return run_dca(problem, lambda, p_init, kDcaMaxIter);
}

DcaResult dca_solve(const ChannelRealization& chan, const PhaseConfig& phase,
                    const SystemParams& params, double lambda, const PowerAlloc& p_init) {
  return dca_solve(PowerProblem::from(chan, phase, params), lambda, p_init);
}

FeasibilityResult feasibility_check(const PowerProblem& problem) {
  const int L = problem.links();
  FeasibilityResult out;
  out.maximizer = PowerAlloc::uniform(L, problem.p_max);
  out.margin = (problem.rates(out.maximizer.watts) - problem.r_min).minCoeff();
  if ((problem.r_min.array() <= 0.0).all()) {
    out.feasible = true;
    return out;
  }
  for (int k = 0; k < kDcaMaxIter; ++k) {
    const Linearized lin = linearize(problem, 0.0, out.maximizer.watts);
    const auto [x, worst] = maximize_worst_margin(lin.rate_margin, out.maximizer.watts / problem.p_max);
    (void)worst;
    const RVector p = (problem.p_max * x).cwiseMax(0.0).cwiseMin(problem.p_max);
    const double margin = (problem.rates(p) - problem.r_min).minCoeff();
    if (!(margin > out.margin)) break;
    const double gain = margin - out.margin;
    out.maximizer.watts = p;
    out.margin = margin;
    if (gain < kDcaTol) break;
  }
  out.feasible = out.margin >= 0.0;
  return out;
}

FeasibilityResult feasibility_check(const ChannelRealization& chan, const PhaseConfig& phase,
                                    const SystemParams& params) {
  return feasibility_check(PowerProblem::from(chan, phase, params));
}

std::string to_string(PowerStatus s) {
  switch (s) {
    case PowerStatus::converged: return "converged";
    case PowerStatus::max_iter: return "max_iter";
    case PowerStatus::failure: return "failure";
  }
  return "unknown";
}

DinkelbachResult dinkelbach(const PowerProblem& problem, const PowerAlloc& p_init) {
  const int L = problem.links();
  if (p_init.links() != L) throw std::invalid_argument("dinkelbach: initial power size mismatch");
  DinkelbachResult res;
  PowerAlloc p = p_init;
  p.watts = p.watts.cwiseMax(0.0).cwiseMin(problem.p_max);
  if (!problem.rates_ok(p.watts)) {
    const FeasibilityResult fc = feasibility_check(problem);
    if (!fc.feasible) {
      res.p = fc.maximizer;
      res.status = PowerStatus::failure;
      return res;
    }
    p = fc.maximizer;
  }

  double lambda = 0.0;
  res.status = PowerStatus::max_iter;
  for (int s = 0; s < kDinkelbachMaxIter; ++s) {
    // DCA is local. Screen a few short runs from full power and from each link
    // transmitting alone, then run DCA to convergence from the best screened point
    // (or the warm start if none beats it).
    PowerAlloc best = p;
    double f = F_lambda(problem, p.watts, lambda);
    std::vector<PowerAlloc> starts{PowerAlloc::uniform(L, problem.p_max)};
    for (int l = 0; l < L && L > 1; ++l) {
      PowerAlloc solo = PowerAlloc::uniform(L, 0.0);
      solo.watts[l] = problem.p_max;
      starts.push_back(solo);
    }
    for (const PowerAlloc& start : starts) {
      if (!problem.rates_ok(start.watts)) continue;
      const DcaResult dca = run_dca(problem, lambda, start, kScreenIter);
      res.dca_iterations += static_cast<int>(dca.iterates.size()) - 1;
      const PowerAlloc& cand = dca.final().p;
      const double fc = F_lambda(problem, cand.watts, lambda);
      if (fc > f && problem.rates_ok(cand.watts)) {
        best = cand;
        f = fc;
      }
    }
    const DcaResult dca = run_dca(problem, lambda, best, kDcaMaxIter);
    res.dca_iterations += static_cast<int>(dca.iterates.size()) - 1;
    if (problem.rates_ok(dca.final().p.watts)) best = dca.final().p;
    p = best;
    f = F_lambda(problem, p.watts, lambda);
    res.states.push_back({lambda, f, s});
    if (std::abs(f) < kDinkelbachTol) {
      res.status = PowerStatus::converged;
      break;
    }
    lambda = problem.energy_efficiency(p.watts);
  }
  res.p = p;
  res.lambda = problem.energy_efficiency(p.watts);
  res.energy_efficiency = res.lambda;
  return res;
}

DinkelbachResult dinkelbach(const ChannelRealization& chan, const PhaseConfig& phase,
                            const SystemParams& params, const PowerAlloc& p_init) {
  return dinkelbach(PowerProblem::from(chan, phase, params), p_init);
}

}  // namespace risd2d
