#pragma once

// Link-level metrics: effective channels, SINR, rates, power and energy efficiency.

#include "risd2d/common.hpp"
#include "risd2d/netmodel.hpp"

#include <vector>

namespace risd2d {

/// RIS reflection state. Element n reflects with coefficient sqrt(eta) * exp(j * phases[n]).
struct PhaseConfig {
  RVector phases;
  double eta = 0.8;

  int elements() const { return static_cast<int>(phases.size()); }
  /// sqrt(eta) * exp(j * phase), one entry per element.
  CVector reflection() const;
  /// Unit-modulus beamforming vector theta with theta^H x == sum_n exp(j phase_n) x_n.
  CVector theta() const;

  static PhaseConfig from_theta(const CVector& theta, double eta);
  static PhaseConfig random(int elements, double eta, Rng& rng);
  static PhaseConfig zeros(int elements, double eta);
};

struct PowerAlloc {
  RVector watts;

  int links() const { return static_cast<int>(watts.size()); }
  static PowerAlloc uniform(int links, double watts);
};

/// Per-element RIS power for b-bit phase resolution (3..6 bits).
double element_power_for_bits(int bits);

struct SystemParams {
  double noise_power = 0.0;    // W
  double circuit_power = 0.0;  // W, per transmitter and per receiver
  double element_power = 0.0;  // W, per RIS element
  int resolution_bits = 3;
  double p_max = 0.1;  // W
  RVector r_min;       // bits/s/Hz, one per link

  /// Defaults from the reference scenario: -117 dBm noise, 15 dBm circuit power,
  /// 20 dBm power budget, 3-bit elements, no rate floor.
  static SystemParams defaults(int links);
  void validate(int links) const;
};

cdouble effective_channel(const ChannelRealization& chan, const PhaseConfig& phase, int i, int l);

/// |effective_channel(i, l)|^2 for every pair, indexed (i, l).
RMatrix effective_gains(const ChannelRealization& chan, const PhaseConfig& phase);

double sinr(const ChannelRealization& chan, const PhaseConfig& phase, const PowerAlloc& p,
            const SystemParams& params, int l);
RVector sinrs(const ChannelRealization& chan, const PhaseConfig& phase, const PowerAlloc& p,
              const SystemParams& params);
RVector sinrs_from_gains(const RMatrix& gains, const RVector& p, double noise_power);

RVector link_rates(const ChannelRealization& chan, const PhaseConfig& phase, const PowerAlloc& p,
                   const SystemParams& params);
double sum_rate(const ChannelRealization& chan, const PhaseConfig& phase, const PowerAlloc& p,
                const SystemParams& params);

double total_power(const PowerAlloc& p, const SystemParams& params, int elements);
double static_power(const SystemParams& params, int links, int elements);

double energy_efficiency(const ChannelRealization& chan, const PhaseConfig& phase,
                         const PowerAlloc& p, const SystemParams& params);

struct FeasibilityReport {
  std::vector<bool> rate_ok;
  RVector rate_violation;   // max(0, R_min - rate)
  std::vector<bool> power_ok;
  RVector power_violation;  // distance outside [0, P_max]
  bool unit_modulus_ok = true;
  double modulus_violation = 0.0;

  bool all() const;
};

/// Rates may fall short of R_min by at most rate_tol; the power box is checked exactly.
FeasibilityReport check_feasibility(const ChannelRealization& chan, const PhaseConfig& phase,
                                    const PowerAlloc& p, const SystemParams& params,
                                    double rate_tol = 1e-9);

}  // namespace risd2d
