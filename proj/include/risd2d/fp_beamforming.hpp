#pragma once

// Passive beamforming for fixed transmit powers: Lagrangian dual transform,
// quadratic transform, semidefinite relaxation and Gaussian randomization.
//
// Phase convention: the beamforming vector is theta_n = exp(-j phi_n), so that
// theta^H A_il == sum_n exp(j phi_n) A_il[n]. A_il already carries sqrt(eta).

#include "risd2d/common.hpp"
#include "risd2d/netmodel.hpp"
#include "risd2d/sdp.hpp"
#include "risd2d/system.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace risd2d {

struct AuxVars {
  RVector beta;
  CVector eps;
};

/// A_il = sqrt(eta) diag(f_l) g_i sqrt(p_i) and b_il = h_il sqrt(p_i).
struct LinkCoefficients {
  int links = 0;
  int elements = 0;
  std::vector<CVector> a;  // a[i * links + l]
  CMatrix b;               // b(i, l)
  double noise_power = 0.0;

  const CVector& A(int i, int l) const { return a[static_cast<std::size_t>(i * links + l)]; }
  /// y(i, l) = b_il + theta^H A_il, i.e. effective_channel(i, l) * sqrt(p_i).
  CMatrix received(const CVector& theta) const;
};

LinkCoefficients link_coefficients(const ChannelRealization& chan, const PowerAlloc& p,
                                   double eta, double noise_power);

/// f3(theta) = -theta^H U theta + 2 Re{theta^H v} + c.
struct QuadraticForm {
  CMatrix u;
  CVector v;
  double c = 0.0;

  double evaluate(const CVector& theta) const;
};

/// Lifted problem in Q = [theta; 1][theta; 1]^H. Tr(ubar Q) + offset reproduces f3 and
/// Tr(R_il Q) + |b_il|^2 reproduces the received power |b_il + theta^H A_il|^2.
struct LiftedProblem {
  int links = 0;
  CMatrix ubar;
  std::vector<CMatrix> r;  // r[i * links + l]
  RMatrix b_abs2;          // (i, l)
  RVector gamma_min;
  double noise_power = 0.0;
  double offset = 0.0;

  const CMatrix& R(int i, int l) const { return r[static_cast<std::size_t>(i * links + l)]; }
  int dim() const { return static_cast<int>(ubar.rows()); }

  static CMatrix lift(const CVector& theta);
  double objective(const CMatrix& q) const;   // Tr(ubar Q) + offset
  RMatrix received_power(const CMatrix& q) const;
  /// Tr(R_ll Q) + |b_ll|^2 - gamma_l (sum_{i != l} (Tr(R_il Q) + |b_il|^2) + sigma^2).
  RVector constraint_margin(const CMatrix& q) const;
  /// Maximize Tr(ubar Q) with unit diagonal; links with gamma_min = 0 add no constraint.
  sdp::Problem to_sdp() const;
};

/// Closed-form optimum of the dual-transform auxiliaries: the per-link SINR.
RVector update_beta(const ChannelRealization& chan, const PhaseConfig& phase, const PowerAlloc& p,
                    const SystemParams& params);

/// Lagrangian dual transform objective in bits:
/// (1/ln 2) sum_l [ln(1 + beta_l) - beta_l + (1 + beta_l) S_l / (sum_i P_il + sigma^2)].
double lagrangian_objective(const ChannelRealization& chan, const PhaseConfig& phase,
                            const PowerAlloc& p, const SystemParams& params, const RVector& beta);

/// f1: sum_l (1 + beta_l) |y_ll|^2 / (sum_i |y_il|^2 + sigma^2).
double ratio_objective(const LinkCoefficients& coeffs, const CVector& theta, const RVector& beta);

CVector update_eps(const LinkCoefficients& coeffs, const CVector& theta, const RVector& beta);

/// f2(theta, eps) from the quadratic transform of f1.
double quadratic_objective(const CVector& theta, const CVector& eps, const RVector& beta,
                           const LinkCoefficients& coeffs);

QuadraticForm build_quadratic_form(const LinkCoefficients& coeffs, const RVector& beta,
                                   const CVector& eps);

/// gamma_min = 2^R_min - 1 per link.
LiftedProblem build_sdr(const QuadraticForm& quadratic, const LinkCoefficients& coeffs,
                        const SystemParams& params);

struct RandomizedCandidate {
  CVector theta;
  double objective = 0.0;  // f3 evaluated through the lift
  double score = 0.0;      // ranking value, equal to objective unless a scorer is given
};

using CandidateScore = std::function<double(const CVector& theta)>;

/// Draws samples r ~ CN(0, Q) and maps each to theta_n = exp(j arg(r_n / r_last)).
/// Returns the feasible candidate with the best score (f3 by default), or nullopt
/// if none is feasible. Throws if Q is not PSD within tolerance.
std::optional<RandomizedCandidate> gaussian_randomization(const CMatrix& q,
                                                          const LiftedProblem& problem,
                                                          int samples, Rng& rng,
                                                          const CandidateScore& score = {});

struct PhaseOptions {
  int max_iter = 20;
  double tol = 1e-4;
  int samples = 200;
  std::uint64_t seed = 0;
  sdp::Options sdp;
};

enum class PhaseStatus { converged, max_iter, phase_infeasible, no_elements };

std::string to_string(PhaseStatus s);

struct PhaseResult {
  PhaseConfig phase;
  std::vector<double> trace;  // sum rate of each accepted feasible iterate
  PhaseStatus status = PhaseStatus::converged;
  int iterations = 0;
  int sdp_solves = 0;
  bool feasible = false;
};

/// Alternates beta, eps and the SDR step. A randomized candidate replaces the current
/// phases only if it meets the rate floors and does not lower the sum rate (or the
/// current phases violate the floors).
PhaseResult optimize_phases(const ChannelRealization& chan, const PowerAlloc& p,
                            const SystemParams& params, const PhaseConfig& init,
                            const PhaseOptions& options = {});

}  // namespace risd2d
