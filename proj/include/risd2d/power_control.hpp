#pragma once

// Transmit-power control for fixed RIS phases: Dinkelbach's parametric method over
// lambda, with each parametric problem handled by DC programming (DCA).

#include "risd2d/common.hpp"
#include "risd2d/netmodel.hpp"
#include "risd2d/system.hpp"

#include <string>
#include <vector>

namespace risd2d {

/// Everything power control needs once the phases are fixed.
struct PowerProblem {
  RMatrix gains;  // |effective channel(i, l)|^2
  double noise_power = 0.0;
  double p_max = 0.0;
  RVector r_min;
  double static_power = 0.0;  // 2 L P_c + N P(b)

  int links() const { return static_cast<int>(gains.rows()); }
  static PowerProblem from(const ChannelRealization& chan, const PhaseConfig& phase,
                           const SystemParams& params);

  RVector rates(const RVector& p) const;
  double sum_rate(const RVector& p) const;
  double total_power(const RVector& p) const { return p.sum() + static_power; }
  double energy_efficiency(const RVector& p) const { return sum_rate(p) / total_power(p); }
  bool rates_ok(const RVector& p, double tol = 1e-9) const;
};

struct DinkelbachState {
  double lambda = 0.0;
  double F_value = 0.0;
  int iteration = 0;
};

struct DcIterate {
  PowerAlloc p;
  double objective = 0.0;  // F(lambda) at p
  double kkt_residual = 0.0;
};

/// F(lambda) = R(p) - lambda * P_total(p).
double F_lambda(const PowerProblem& problem, const RVector& p, double lambda);
double F_lambda(const ChannelRealization& chan, const PhaseConfig& phase, const PowerAlloc& p,
                const SystemParams& params, double lambda);

/// F = f1 - f2 and rate_l = c1_l - c2_l, with the gradients of the subtracted parts.
struct DcComponents {
  double f1 = 0.0;
  double f2 = 0.0;
  RVector grad_f2;
  RVector c1;
  RVector c2;
  RMatrix grad_c2;  // row l holds the gradient of c2_l
};

DcComponents dc_components(const PowerProblem& problem, const RVector& p, double lambda);
DcComponents dc_components(const ChannelRealization& chan, const PhaseConfig& phase,
                           const PowerAlloc& p, const SystemParams& params, double lambda);

struct SubproblemResult {
  PowerAlloc p;
  double objective = 0.0;  // surrogate value f1(p) - [f2(pk) + grad_f2(pk)'(p - pk)]
  double kkt_residual = 0.0;
  bool feasible = true;
};

/// One DCA step: maximizes the concave surrogate obtained by linearizing f2 and every
/// c2_l at p_k, subject to the linearized rate floors and the power box.
SubproblemResult solve_convex_subproblem(const PowerProblem& problem, double lambda,
                                         const PowerAlloc& p_k);

struct DcaResult {
  std::vector<DcIterate> iterates;  // starts with p_init
  bool feasible = true;

  const DcIterate& final() const { return iterates.back(); }
};

DcaResult dca_solve(const PowerProblem& problem, double lambda, const PowerAlloc& p_init);
DcaResult dca_solve(const ChannelRealization& chan, const PhaseConfig& phase,
                    const SystemParams& params, double lambda, const PowerAlloc& p_init);

struct FeasibilityResult {
  bool feasible = true;
  double margin = 0.0;  // best min_l (rate_l - R_min,l) found
  PowerAlloc maximizer;
};

/// Maximizes the worst rate margin over the power box with the DC machinery.
FeasibilityResult feasibility_check(const PowerProblem& problem);
FeasibilityResult feasibility_check(const ChannelRealization& chan, const PhaseConfig& phase,
                                    const SystemParams& params);

enum class PowerStatus { converged, max_iter, failure };

std::string to_string(PowerStatus s);

struct DinkelbachResult {
  PowerAlloc p;
  double lambda = 0.0;
  double energy_efficiency = 0.0;  // 0 on failure
  PowerStatus status = PowerStatus::converged;
  std::vector<DinkelbachState> states;
  int dca_iterations = 0;
};

DinkelbachResult dinkelbach(const PowerProblem& problem, const PowerAlloc& p_init);
DinkelbachResult dinkelbach(const ChannelRealization& chan, const PhaseConfig& phase,
                            const SystemParams& params, const PowerAlloc& p_init);

}  // namespace risd2d
