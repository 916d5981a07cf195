#include "risd2d/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace risd2d::sdp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kHermitianTol = 1e-12;
constexpr double kPhaseOneThreshold = 1e-6;

// One equality row of the real standard form. Diagonal rows encode Re Q_kk and are
// kept implicit; all others carry a dense symmetric coefficient matrix.
struct Row {
  int diag = -1;
  RMatrix dense;
  double rhs = 0.0;
};

// min <C, X> + c_lp's  s.t.  A(X) + B s = b,  X psd (2n x 2n),  s >= 0.
struct RealForm {
  int n = 0;
  RMatrix c;
  std::vector<Row> rows;
  RMatrix b_lp;
  RVector c_lp;

  int dim() const { return 2 * n; }
  int m() const { return static_cast<int>(rows.size()); }
  int lp() const { return static_cast<int>(c_lp.size()); }
};

double trace_product(const Row& r, const RMatrix& w, int n) {
  if (r.diag >= 0) return 0.5 * (w(r.diag, r.diag) + w(r.diag + n, r.diag + n));
  return r.dense.cwiseProduct(w.transpose()).sum();
}

void add_scaled(const Row& r, double y, RMatrix& acc, int n) {
  if (r.diag >= 0) {
    acc(r.diag, r.diag) += 0.5 * y;
    acc(r.diag + n, r.diag + n) += 0.5 * y;
  } else {
    acc.noalias() += y * r.dense;
  }
}

RMatrix adjoint(const RealForm& f, const RVector& y) {
  RMatrix acc = RMatrix::Zero(f.dim(), f.dim());
  for (int i = 0; i < f.m(); ++i) add_scaled(f.rows[i], y[i], acc, f.n);
  return acc;
}

RVector apply_rows(const RealForm& f, const RMatrix& w) {
  RVector out(f.m());
  for (int i = 0; i < f.m(); ++i) out[i] = trace_product(f.rows[i], w, f.n);
  return out;
}

RMatrix sym(const RMatrix& a) { return 0.5 * (a + a.transpose()); }

double max_step_psd(const Eigen::LLT<RMatrix>& chol, const RMatrix& dx) {
  const auto lower = chol.matrixL();
  const RMatrix t = lower.solve(dx);
  const RMatrix w = lower.solve(t.transpose());
  Eigen::SelfAdjointEigenSolver<RMatrix> eig(sym(w), Eigen::EigenvaluesOnly);
  const double lam = eig.eigenvalues().minCoeff();
  return lam < 0.0 ? -1.0 / lam : kInf;
}

double max_step_lp(const RVector& v, const RVector& dv) {
  double step = kInf;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (dv[i] < 0.0) step = std::min(step, -v[i] / dv[i]);
  }
  return step;
}

struct Iterate {
  RMatrix x, z;
  RVector s, w, y;
};

struct IpmOutcome {
  Iterate it;
  bool converged = false;
  int iterations = 0;
  double pinf = kInf;
  double dinf = kInf;
  double relgap = kInf;
  double pobj = 0.0;
  double dobj = 0.0;
};

struct Direction {
  RMatrix dx, dz;
  RVector ds, dw, dy;
};

// Infeasible-start primal-dual path following. gap_scale converts the internal
// objective back to user units so the gap test is also met there.
IpmOutcome run_ipm(const RealForm& f, Iterate it, double tol, int max_iter, double gap_scale) {
  const int d = f.dim();
  const int m = f.m();
  const int k = f.lp();
  const double c_norm = f.c.norm() + f.c_lp.norm();
  RVector b(m);
  for (int i = 0; i < m; ++i) b[i] = f.rows[i].rhs;

  std::vector<int> dense_rows;
  std::vector<int> diag_rows;
  for (int i = 0; i < m; ++i) (f.rows[i].diag >= 0 ? diag_rows : dense_rows).push_back(i);

  IpmOutcome out;
  int stalls = 0;
  for (int iter = 0; iter <= max_iter; ++iter) {
    out.iterations = iter;
    const RVector rp = b - apply_rows(f, it.x) - f.b_lp * it.s;
    const RMatrix rd = f.c - adjoint(f, it.y) - it.z;
    const RVector rl = f.c_lp - f.b_lp.transpose() * it.y - it.w;

    out.pobj = f.c.cwiseProduct(it.x).sum() + f.c_lp.dot(it.s);
    out.dobj = b.dot(it.y);
    out.pinf = m > 0 ? rp.lpNorm<Eigen::Infinity>() : 0.0;
    out.dinf = (rd.norm() + (k > 0 ? rl.lpNorm<Eigen::Infinity>() : 0.0)) / (1.0 + c_norm);
    const double gap = out.pobj - out.dobj;
    out.relgap = std::abs(gap) / (1.0 + std::abs(out.pobj) + std::abs(out.dobj));
    const bool user_gap_ok =
        gap_scale * std::abs(gap) <= 0.1 * tol * (1.0 + gap_scale * std::abs(out.pobj));
    if (out.pinf <= 0.1 * tol && out.dinf <= 0.1 * tol && out.relgap <= tol && user_gap_ok) {
      out.converged = true;
      break;
    }
    if (iter == max_iter) break;
    // Unbounded dual objective signals an infeasible primal.
    if (out.dobj > 1e10 * (1.0 + std::abs(out.pobj)) || !it.y.allFinite()) break;

    const double mu = (it.x.cwiseProduct(it.z).sum() + it.s.dot(it.w)) / (d + k);
    Eigen::LLT<RMatrix> chol_x(it.x);
    Eigen::LLT<RMatrix> chol_z(it.z);
    if (chol_x.info() != Eigen::Success || chol_z.info() != Eigen::Success) break;
    const RMatrix zinv = chol_z.solve(RMatrix::Identity(d, d));

    // Schur complement M_ij = Tr(A_i X A_j Z^-1) + (B D B')_ij.
    RMatrix schur(m, m);
    std::vector<RMatrix> g(static_cast<std::size_t>(m));
    for (int j : dense_rows) {
      g[j] = it.x * f.rows[j].dense * zinv;
      for (int i = 0; i < m; ++i) schur(i, j) = trace_product(f.rows[i], g[j], f.n);
    }
    for (int a : diag_rows) {
      const int pa[2] = {f.rows[a].diag, f.rows[a].diag + f.n};
      for (int bb : diag_rows) {
        const int pb[2] = {f.rows[bb].diag, f.rows[bb].diag + f.n};
        double acc = 0.0;
        for (int p : pa) {
          for (int q : pb) acc += it.x(p, q) * zinv(q, p);
        }
        schur(a, bb) = 0.25 * acc;
      }
      for (int j : dense_rows) schur(j, a) = schur(a, j);
    }
    schur = sym(schur);
    RVector dscale(k);
    for (int j = 0; j < k; ++j) dscale[j] = it.s[j] / it.w[j];
    if (k > 0) schur.noalias() += f.b_lp * dscale.asDiagonal() * f.b_lp.transpose();

    Eigen::LLT<RMatrix> chol_m(schur);
    if (chol_m.info() != Eigen::Success) {
      const double reg = 1e-14 * (1.0 + schur.diagonal().cwiseAbs().maxCoeff());
      chol_m.compute(schur + reg * RMatrix::Identity(m, m));
      if (chol_m.info() != Eigen::Success) break;
    }

    const RMatrix x_rd_zinv = it.x * rd * zinv;

    auto direction = [&](double sigma_mu, const Direction* pred) {
      RMatrix kmat = sigma_mu * zinv - it.x - x_rd_zinv;
      RVector lp_term(k);
      for (int j = 0; j < k; ++j) lp_term[j] = sigma_mu / it.w[j] - it.s[j] - dscale[j] * rl[j];
      RMatrix corr;
      if (pred != nullptr) {
        corr = pred->dx * pred->dz * zinv;
        kmat -= corr;
        for (int j = 0; j < k; ++j) lp_term[j] -= pred->ds[j] * pred->dw[j] / it.w[j];
      }
      RVector rhs = rp - apply_rows(f, kmat);
      if (k > 0) rhs -= f.b_lp * lp_term;
      Direction dir;
      dir.dy = chol_m.solve(rhs);
      dir.dz = rd - adjoint(f, dir.dy);
      RMatrix dx = sigma_mu * zinv - it.x - it.x * dir.dz * zinv;
      if (pred != nullptr) dx -= corr;
      dir.dx = sym(dx);
      dir.dw = rl - f.b_lp.transpose() * dir.dy;
      dir.ds.resize(k);
      for (int j = 0; j < k; ++j) {
        dir.ds[j] = sigma_mu / it.w[j] - it.s[j] - dscale[j] * dir.dw[j];
        if (pred != nullptr) dir.ds[j] -= pred->ds[j] * pred->dw[j] / it.w[j];
      }
      return dir;
    };

    auto steps = [&](const Direction& dir, double tau) {
      const double ap = std::min({1.0, tau * max_step_psd(chol_x, dir.dx),
                                  tau * max_step_lp(it.s, dir.ds)});
      const double ad = std::min({1.0, tau * max_step_psd(chol_z, dir.dz),
                                  tau * max_step_lp(it.w, dir.dw)});
      return std::pair{ap, ad};
    };

    const Direction pred = direction(0.0, nullptr);
    const auto [ap0, ad0] = steps(pred, 1.0);
    const double mu_aff =
        ((it.x + ap0 * pred.dx).cwiseProduct(it.z + ad0 * pred.dz).sum() +
         (it.s + ap0 * pred.ds).dot(it.w + ad0 * pred.dw)) / (d + k);
    const double sigma = std::clamp(std::pow(mu_aff / mu, 3.0), 0.0, 1.0);

    const Direction corr = direction(sigma * mu, &pred);
    const auto [ap, ad] = steps(corr, 0.98);

    it.x += ap * corr.dx;
    it.s += ap * corr.ds;
    it.y += ad * corr.dy;
    it.z += ad * corr.dz;
    it.w += ad * corr.dw;
    it.x = sym(it.x);
    it.z = sym(it.z);

    stalls = (std::max(ap, ad) < 1e-10) ? stalls + 1 : 0;
    if (stalls >= 3) break;
  }
  out.it = std::move(it);
  return out;
}

struct Normalized {
  RealForm form;
  double objective_scale = 1.0;
  std::vector<int> kept;        // original inequality index per dense row
  std::vector<double> row_scale;
  std::vector<double> sense;    // +1 for <=, -1 for >=
  bool trivially_infeasible = false;
};

Normalized normalize(const Problem& p) {
  Normalized out;
  RealForm& f = out.form;
  f.n = p.dim();
  const double cn = p.objective.norm();
  out.objective_scale = cn > 0.0 ? cn : 1.0;
  f.c = -0.5 * embed(p.objective / out.objective_scale);
  if (p.diag_one) {
    for (int k = 0; k < f.n; ++k) f.rows.push_back(Row{k, RMatrix(), 1.0});
  }
  for (std::size_t j = 0; j < p.inequalities.size(); ++j) {
    const Constraint& c = p.inequalities[j];
    const double sgn = c.sense == Sense::less_equal ? 1.0 : -1.0;
    const double gn = c.matrix.norm();
    if (gn == 0.0) {
      if (sgn * c.rhs < 0.0) out.trivially_infeasible = true;
      continue;
    }
    f.rows.push_back(Row{-1, 0.5 * embed(c.matrix / gn), c.rhs / gn});
    out.kept.push_back(static_cast<int>(j));
    out.row_scale.push_back(gn);
    out.sense.push_back(sgn);
  }
  const int m = f.m();
  const int k = static_cast<int>(out.kept.size());
  f.b_lp = RMatrix::Zero(m, k);
  const int first = m - k;
  for (int j = 0; j < k; ++j) f.b_lp(first + j, j) = out.sense[j];
  f.c_lp = RVector::Zero(k);
  return out;
}

Iterate start_point(const RealForm& f, int slack_count) {
  const int d = f.dim();
  Iterate it;
  it.x = RMatrix::Identity(d, d);
  it.z = std::max(1.0, f.c.norm()) * RMatrix::Identity(d, d);
  it.y = RVector::Zero(f.m());
  it.s = RVector::Ones(f.lp());
  it.w = RVector::Ones(f.lp());
  const int first = f.m() - slack_count;
  for (int j = 0; j < slack_count; ++j) {
    const Row& r = f.rows[first + j];
    const double gap = f.b_lp(first + j, j) * (r.rhs - trace_product(r, it.x, f.n));
    it.s[j] = std::max(1.0, gap);
  }
  return it;
}

// Minimizes the uniform violation t of all inequalities; returns t*.
double phase_one(const Normalized& nf, const Options& opt) {
  RealForm f = nf.form;
  const int m = f.m();
  const int k = static_cast<int>(nf.kept.size());
  const int first = m - k;
  f.c.setZero();
  f.b_lp.conservativeResize(m, k + 1);
  f.b_lp.col(k).setZero();
  for (int j = 0; j < k; ++j) f.b_lp(first + j, k) = -nf.sense[j];
  f.c_lp = RVector::Zero(k + 1);
  f.c_lp[k] = 1.0;

  Iterate it = start_point(f, 0);
  double worst = 0.0;
  RVector gaps(k);
  for (int j = 0; j < k; ++j) {
    const Row& r = f.rows[first + j];
    gaps[j] = nf.sense[j] * (r.rhs - trace_product(r, it.x, f.n));
    worst = std::max(worst, -gaps[j]);
  }
  const double t0 = 1.0 + worst;
  for (int j = 0; j < k; ++j) it.s[j] = t0 + gaps[j];
  it.s[k] = t0;
  const IpmOutcome res = run_ipm(f, it, opt.tol, opt.max_iter, 1.0);
  // The dual objective is a valid lower bound on t* once the dual is feasible.
  if (res.dinf <= 1e-6 && res.dobj > kPhaseOneThreshold) return res.dobj;
  return res.it.s[k];
}

}  // namespace

std::string to_string(Status s) {
  switch (s) {
    case Status::optimal: return "optimal";
    case Status::infeasible: return "infeasible";
    case Status::max_iter: return "max_iter";
  }
  return "unknown";
}

RMatrix embed(const CMatrix& a) {
  const Eigen::Index n = a.rows();
  RMatrix out(2 * n, 2 * n);
  out.topLeftCorner(n, n) = a.real();
  out.bottomRightCorner(n, n) = a.real();
  out.topRightCorner(n, n) = -a.imag();
  out.bottomLeftCorner(n, n) = a.imag();
  return out;
}

CMatrix extract(const RMatrix& y) {
  const Eigen::Index n = y.rows() / 2;
  const RMatrix re = 0.5 * (y.topLeftCorner(n, n) + y.bottomRightCorner(n, n));
  const RMatrix im = 0.5 * (y.bottomLeftCorner(n, n) - y.topRightCorner(n, n));
  CMatrix q(n, n);
  q.real() = re;
  q.imag() = im;
  return 0.5 * (q + q.adjoint());
}

void Problem::validate() const {
  const Eigen::Index n = objective.rows();
  if (n < 1 || objective.cols() != n) throw std::invalid_argument("SDP objective must be square, n >= 1");
  auto check = [&](const CMatrix& a, const char* what) {
    if (a.rows() != n || a.cols() != n) {
      throw std::invalid_argument(std::string("SDP ") + what + " has the wrong dimension");
    }
    if (!a.allFinite()) throw std::invalid_argument(std::string("SDP ") + what + " is not finite");
    if ((a - a.adjoint()).cwiseAbs().maxCoeff() > kHermitianTol * (1.0 + a.cwiseAbs().maxCoeff())) {
      throw std::invalid_argument(std::string("SDP ") + what + " is not Hermitian");
    }
  };
  check(objective, "objective");
  for (const Constraint& c : inequalities) {
    check(c.matrix, "constraint");
    if (!std::isfinite(c.rhs)) throw std::invalid_argument("SDP constraint rhs is not finite");
  }
}

Solution solve(const Problem& problem, const Options& options) {
  problem.validate();
  const Normalized nf = normalize(problem);
  const RealForm& f = nf.form;
  const int n = f.n;
  const int k = static_cast<int>(nf.kept.size());
  const int first = f.m() - k;

  Solution sol;
  sol.diag_dual = RVector::Zero(problem.diag_one ? n : 0);
  sol.ineq_dual = RVector::Zero(static_cast<Eigen::Index>(problem.inequalities.size()));
  if (nf.trivially_infeasible) {
    sol.status = Status::infeasible;
    sol.q = CMatrix::Identity(n, n);
    sol.value = problem.objective.trace().real();
    return sol;
  }

  const IpmOutcome res =
      run_ipm(f, start_point(f, k), options.tol, options.max_iter, nf.objective_scale);
  const double cs = nf.objective_scale;
  sol.q = extract(res.it.x);
  sol.value = (problem.objective * sol.q).trace().real();
  sol.iterations = res.iterations;
  sol.kkt_residual = std::max({res.pinf, res.dinf, res.relgap});
  sol.duality_gap = cs * (res.pobj - res.dobj);
  for (int i = 0; i < first; ++i) sol.diag_dual[i] = -cs * res.it.y[i];
  for (int j = 0; j < k; ++j) {
    sol.ineq_dual[nf.kept[j]] = -nf.sense[j] * res.it.y[first + j] * cs / nf.row_scale[j];
  }

  if (res.converged) {
    sol.status = Status::optimal;
  } else if (k > 0 && phase_one(nf, options) > kPhaseOneThreshold) {
    sol.status = Status::infeasible;
  } else {
    sol.status = Status::max_iter;
  }
  return sol;
}

bool Residuals::certified(double psd_tol, double feas_tol, double gap_tol) const {
  return psd_margin >= -psd_tol && diag_violation <= feas_tol && ineq_violation <= feas_tol &&
         dual_psd_margin >= -gap_tol && dual_sign_violation <= feas_tol &&
         std::abs(duality_gap) <= gap_tol * (1.0 + std::abs(primal_value));
}

Residuals verify(const Problem& problem, const Solution& solution) {
  const int n = problem.dim();
  if (solution.q.rows() != n || solution.q.cols() != n) {
    throw std::invalid_argument("verify: solution dimension mismatch");
  }
  Residuals r;
  const CMatrix q = 0.5 * (solution.q + solution.q.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(q, Eigen::EigenvaluesOnly);
  r.psd_margin = eig.eigenvalues().minCoeff();
  if (problem.diag_one) {
    for (int i = 0; i < n; ++i) {
      r.diag_violation = std::max(r.diag_violation, std::abs(q(i, i).real() - 1.0));
    }
  }
  for (const Constraint& c : problem.inequalities) {
    const double val = (c.matrix * q).trace().real();
    const double viol = c.sense == Sense::less_equal ? val - c.rhs : c.rhs - val;
    r.ineq_violation =
        std::max(r.ineq_violation, std::max(0.0, viol) / std::max(1.0, c.matrix.norm()));
  }
  r.primal_value = (problem.objective * q).trace().real();

  const bool have_duals =
      solution.ineq_dual.size() == static_cast<Eigen::Index>(problem.inequalities.size()) &&
      solution.diag_dual.size() == (problem.diag_one ? n : 0);
  if (have_duals) {
    CMatrix slack = -problem.objective;
    double dual = 0.0;
    for (Eigen::Index i = 0; i < solution.diag_dual.size(); ++i) {
      slack(i, i) += solution.diag_dual[i];
      dual += solution.diag_dual[i];
    }
    for (std::size_t j = 0; j < problem.inequalities.size(); ++j) {
      const Constraint& c = problem.inequalities[j];
      const double yj = solution.ineq_dual[static_cast<Eigen::Index>(j)];
      const double sgn = c.sense == Sense::less_equal ? 1.0 : -1.0;
      slack += yj * sgn * c.matrix;
      dual += yj * sgn * c.rhs;
      r.dual_sign_violation = std::max(r.dual_sign_violation, -yj);
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> zeig(0.5 * (slack + slack.adjoint()),
                                                Eigen::EigenvaluesOnly);
    r.dual_psd_margin = zeig.eigenvalues().minCoeff() / (1.0 + problem.objective.norm());
    r.dual_value = dual;
    r.duality_gap = r.dual_value - r.primal_value;
  } else {
    r.dual_value = std::numeric_limits<double>::quiet_NaN();
    r.duality_gap = std::numeric_limits<double>::quiet_NaN();
  }
  return r;
}

}  // namespace risd2d::sdp
