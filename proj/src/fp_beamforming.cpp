#include "risd2d/fp_beamforming.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace risd2d {

namespace {

bool rates_ok(const RVector& z, const RVector& gamma_min) {
  for (Eigen::Index l = 0; l < z.size(); ++l) {
    if (z[l] < gamma_min[l] - 1e-9 * (1.0 + gamma_min[l])) return false;
  }
  return true;
}

RVector gamma_from_rates(const RVector& r_min) {
  return r_min.unaryExpr([](double r) { return std::exp2(r) - 1.0; });
}

}  // namespace

CMatrix LinkCoefficients::received(const CVector& theta) const {
  CMatrix y = b;
  if (elements > 0) {
    for (int i = 0; i < links; ++i) {
      for (int l = 0; l < links; ++l) y(i, l) += theta.dot(A(i, l));
    }
  }
  return y;
}

LinkCoefficients link_coefficients(const ChannelRealization& chan, const PowerAlloc& p,
                                   double eta, double noise_power) {
  chan.validate();
  const int L = chan.links();
  const int N = chan.elements();
  if (p.links() != L) throw std::invalid_argument("power allocation size does not match links");
  LinkCoefficients c;
  c.links = L;
  c.elements = N;
  c.noise_power = noise_power;
  c.b.resize(L, L);
  c.a.resize(static_cast<std::size_t>(L * L));
  const double amp = std::sqrt(eta);
  for (int i = 0; i < L; ++i) {
    const double sp = std::sqrt(p.watts[i]);
    for (int l = 0; l < L; ++l) {
      c.b(i, l) = chan.direct(i, l) * sp;
      c.a[static_cast<std::size_t>(i * L + l)] =
          (amp * sp) * chan.ris_to_rx.col(l).cwiseProduct(chan.tx_to_ris.col(i));
    }
  }
  return c;
}

double QuadraticForm::evaluate(const CVector& theta) const {
  return -theta.dot(u * theta).real() + 2.0 * theta.dot(v).real() + c;
}

CMatrix LiftedProblem::lift(const CVector& theta) {
  CVector bar(theta.size() + 1);
  bar.head(theta.size()) = theta;
  bar[theta.size()] = 1.0;
  return bar * bar.adjoint();
}

double LiftedProblem::objective(const CMatrix& q) const {
  return ubar.cwiseProduct(q.transpose()).sum().real() + offset;
}

RMatrix LiftedProblem::received_power(const CMatrix& q) const {
  RMatrix out(links, links);
  const CMatrix qt = q.transpose();
  for (int i = 0; i < links; ++i) {
    for (int l = 0; l < links; ++l) {
      out(i, l) = R(i, l).cwiseProduct(qt).sum().real() + b_abs2(i, l);
    }
  }
  return out;
}

RVector LiftedProblem::constraint_margin(const CMatrix& q) const {
  const RMatrix pw = received_power(q);
  RVector margin(links);
  for (int l = 0; l < links; ++l) {
    double interference = noise_power;
    for (int i = 0; i < links; ++i) {
      if (i != l) interference += pw(i, l);
    }
    margin[l] = pw(l, l) - gamma_min[l] * interference;
  }
  return margin;
}

sdp::Problem LiftedProblem::to_sdp() const {
  sdp::Problem prob;
  prob.objective = ubar;
  prob.diag_one = true;
  for (int l = 0; l < links; ++l) {
    if (gamma_min[l] <= 0.0) continue;
    CMatrix g = -R(l, l);
    double rhs = b_abs2(l, l) - gamma_min[l] * noise_power;
    for (int i = 0; i < links; ++i) {
      if (i == l) continue;
      g += gamma_min[l] * R(i, l);
      rhs -= gamma_min[l] * b_abs2(i, l);
    }
    prob.inequalities.push_back({0.5 * (g + g.adjoint()), sdp::Sense::less_equal, rhs});
  }
  return prob;
}

RVector update_beta(const ChannelRealization& chan, const PhaseConfig& phase, const PowerAlloc& p,
                    const SystemParams& params) {
  return sinrs(chan, phase, p, params);
}

double lagrangian_objective(const ChannelRealization& chan, const PhaseConfig& phase,
                            const PowerAlloc& p, const SystemParams& params, const RVector& beta) {
  const RMatrix g = effective_gains(chan, phase);
  const int L = chan.links();
  if (beta.size() != L) throw std::invalid_argument("beta size does not match links");
  double acc = 0.0;
  for (int l = 0; l < L; ++l) {
    double total = params.noise_power;
    for (int i = 0; i < L; ++i) total += g(i, l) * p.watts[i];
    const double frac = g(l, l) * p.watts[l] / total;
    acc += std::log1p(beta[l]) - beta[l] + (1.0 + beta[l]) * frac;
  }
  return acc / kLn2;
}

double ratio_objective(const LinkCoefficients& coeffs, const CVector& theta, const RVector& beta) {
  const CMatrix y = coeffs.received(theta);
  double acc = 0.0;
  for (int l = 0; l < coeffs.links; ++l) {
    const double denom = y.col(l).squaredNorm() + coeffs.noise_power;
    acc += (1.0 + beta[l]) * std::norm(y(l, l)) / denom;
  }
  return acc;
}

CVector update_eps(const LinkCoefficients& coeffs, const CVector& theta, const RVector& beta) {
  const CMatrix y = coeffs.received(theta);
  CVector eps(coeffs.links);
  for (int l = 0; l < coeffs.links; ++l) {
    const double denom = y.col(l).squaredNorm() + coeffs.noise_power;
    eps[l] = std::sqrt(1.0 + beta[l]) * y(l, l) / denom;
  }
  return eps;
}

double quadratic_objective(const CVector& theta, const CVector& eps, const RVector& beta,
                           const LinkCoefficients& coeffs) {
  const CMatrix y = coeffs.received(theta);
  double acc = 0.0;
  for (int l = 0; l < coeffs.links; ++l) {
    acc += 2.0 * std::sqrt(1.0 + beta[l]) * (std::conj(eps[l]) * y(l, l)).real();
    acc -= std::norm(eps[l]) * (y.col(l).squaredNorm() + coeffs.noise_power);
  }
  return acc;
}

QuadraticForm build_quadratic_form(const LinkCoefficients& coeffs, const RVector& beta,
                                   const CVector& eps) {
  const int L = coeffs.links;
  const int N = coeffs.elements;
  QuadraticForm qf;
  qf.u = CMatrix::Zero(N, N);
  qf.v = CVector::Zero(N);
  qf.c = 0.0;
  for (int l = 0; l < L; ++l) {
    const double w = std::norm(eps[l]);
    const double root = std::sqrt(1.0 + beta[l]);
    qf.v += root * std::conj(eps[l]) * coeffs.A(l, l);
    double received = 0.0;
    for (int i = 0; i < L; ++i) {
      const CVector& a = coeffs.A(i, l);
      if (w != 0.0) {
        qf.u.noalias() += w * a * a.adjoint();
        qf.v -= w * std::conj(coeffs.b(i, l)) * a;
      }
      received += std::norm(coeffs.b(i, l));
    }
    qf.c += 2.0 * root * (std::conj(eps[l]) * coeffs.b(l, l)).real() -
            w * (coeffs.noise_power + received);
  }
  qf.u = 0.5 * (qf.u + qf.u.adjoint());
  return qf;
}

LiftedProblem build_sdr(const QuadraticForm& quadratic, const LinkCoefficients& coeffs,
                        const SystemParams& params) {
  const int L = coeffs.links;
  const int N = coeffs.elements;
  params.validate(L);
  LiftedProblem lp;
  lp.links = L;
  lp.noise_power = coeffs.noise_power;
  lp.offset = quadratic.c;
  lp.gamma_min = gamma_from_rates(params.r_min);

  // Tr(ubar Q) = f3 - C for rank-one Q.
  lp.ubar = CMatrix::Zero(N + 1, N + 1);
  lp.ubar.topLeftCorner(N, N) = -quadratic.u;
  lp.ubar.topRightCorner(N, 1) = quadratic.v;
  lp.ubar.bottomLeftCorner(1, N) = quadratic.v.adjoint();

  lp.b_abs2.resize(L, L);
  lp.r.resize(static_cast<std::size_t>(L * L));
  for (int i = 0; i < L; ++i) {
    for (int l = 0; l < L; ++l) {
      const CVector& a = coeffs.A(i, l);
      const cdouble b = coeffs.b(i, l);
      CMatrix r = CMatrix::Zero(N + 1, N + 1);
      r.topLeftCorner(N, N) = a * a.adjoint();
      r.topRightCorner(N, 1) = a * std::conj(b);
      r.bottomLeftCorner(1, N) = b * a.adjoint();
      lp.r[static_cast<std::size_t>(i * L + l)] = std::move(r);
      lp.b_abs2(i, l) = std::norm(b);
    }
  }
  return lp;
}

std::optional<RandomizedCandidate> gaussian_randomization(const CMatrix& q,
                                                          const LiftedProblem& problem,
                                                          int samples, Rng& rng,
                                                          const CandidateScore& score) {
  const int n = problem.dim();
  if (q.rows() != n || q.cols() != n) {
    throw std::invalid_argument("gaussian_randomization: covariance dimension mismatch");
  }
  const CMatrix herm = 0.5 * (q + q.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(herm);
  const RVector lam = eig.eigenvalues();
  if (lam.minCoeff() < -1e-8 * (1.0 + herm.norm())) {
    throw std::invalid_argument("gaussian_randomization: covariance is not PSD");
  }
  const CMatrix factor = eig.eigenvectors() * lam.cwiseMax(0.0).cwiseSqrt().asDiagonal();
  const bool constrained = (problem.gamma_min.array() > 0.0).any();

  std::optional<RandomizedCandidate> best;
  CVector w(n);
  CVector theta(n - 1);
  for (int s = 0; s < samples; ++s) {
    for (int k = 0; k < n; ++k) w[k] = circular_gaussian(rng);
    const CVector r = factor * w;
    const cdouble ref = r[n - 1];
    if (std::abs(ref) == 0.0) continue;
    for (int k = 0; k < n - 1; ++k) {
      const cdouble ratio = r[k] / ref;
      theta[k] = std::abs(ratio) > 0.0 ? ratio / std::abs(ratio) : cdouble(1.0, 0.0);
    }
    const CMatrix lifted = LiftedProblem::lift(theta);
    if (constrained) {
      const RMatrix pw = problem.received_power(lifted);
      RVector z(problem.links);
      for (int l = 0; l < problem.links; ++l) {
        double interference = problem.noise_power;
        for (int i = 0; i < problem.links; ++i) {
          if (i != l) interference += pw(i, l);
        }
        z[l] = pw(l, l) / interference;
      }
      if (!rates_ok(z, problem.gamma_min)) continue;
    }
    const double obj = problem.objective(lifted);
    const double rank = score ? score(theta) : obj;
    if (!best || rank > best->score) best = RandomizedCandidate{theta, obj, rank};
  }
  return best;
}

std::string to_string(PhaseStatus s) {
  switch (s) {
    case PhaseStatus::converged: return "converged";
    case PhaseStatus::max_iter: return "max_iter";
    case PhaseStatus::phase_infeasible: return "phase_infeasible";
    case PhaseStatus::no_elements: return "no_elements";
  }
  return "unknown";
}

PhaseResult optimize_phases(const ChannelRealization& chan, const PowerAlloc& p,
                            const SystemParams& params, const PhaseConfig& init,
                            const PhaseOptions& options) {
  const int L = chan.links();
  params.validate(L);
  if (init.elements() != chan.elements()) {
    throw std::invalid_argument("optimize_phases: initial phases do not match the channel");
  }
  const RVector gamma_min = gamma_from_rates(params.r_min);
  const bool has_floor = (gamma_min.array() > 0.0).any();

  PhaseResult res;
  res.phase = init;
  RVector z = sinrs(chan, init, p, params);
  double rate = z.unaryExpr([](double v) { return std::log2(1.0 + v); }).sum();
  res.feasible = rates_ok(z, gamma_min);
  if (res.feasible) res.trace.push_back(rate);

  if (chan.elements() == 0) {
    res.status = PhaseStatus::no_elements;
    if (res.trace.empty()) res.trace.push_back(rate);
    return res;
  }

  Rng rng(options.seed);
  const LinkCoefficients coeffs = link_coefficients(chan, p, init.eta, params.noise_power);
  res.status = PhaseStatus::max_iter;
  for (int it = 1; it <= options.max_iter; ++it) {
    res.iterations = it;
    const RVector beta = z;
    const CVector theta = res.phase.theta();
    const CVector eps = update_eps(coeffs, theta, beta);
    const QuadraticForm qf = build_quadratic_form(coeffs, beta, eps);
    const LiftedProblem lifted = build_sdr(qf, coeffs, params);
    const sdp::Solution sol = sdp::solve(lifted.to_sdp(), options.sdp);
    ++res.sdp_solves;
    if (sol.status == sdp::Status::infeasible) {
      res.status = (it == 1 && has_floor) ? PhaseStatus::phase_infeasible : PhaseStatus::converged;
      break;
    }
    // Rank candidates by the sum rate they actually achieve.
    const auto cand = gaussian_randomization(sol.q, lifted, options.samples, rng, [&](const CVector& th) {
      return sum_rate(chan, PhaseConfig::from_theta(th, init.eta), p, params);
    });
    double improvement = 0.0;
    bool accepted = false;
    if (cand) {
      const PhaseConfig next = PhaseConfig::from_theta(cand->theta, init.eta);
      const RVector zn = sinrs(chan, next, p, params);
      const double rn = zn.unaryExpr([](double v) { return std::log2(1.0 + v); }).sum();
      if (rates_ok(zn, gamma_min) && (!res.feasible || rn >= rate)) {
        improvement = res.feasible ? (rn - rate) / std::max(rate, 1e-300)
                                   : std::numeric_limits<double>::infinity();
        res.phase = next;
        res.feasible = true;
        z = zn;
        rate = rn;
        res.trace.push_back(rate);
        accepted = true;
      }
    }
    if (!accepted && !res.feasible && it == 1 && has_floor) {
      res.status = PhaseStatus::phase_infeasible;
      break;
    }
    if (!accepted || improvement < options.tol) {
      res.status = PhaseStatus::converged;
      break;
    }
  }
  if (res.trace.empty()) res.trace.push_back(rate);
  return res;
}

}  // namespace risd2d
