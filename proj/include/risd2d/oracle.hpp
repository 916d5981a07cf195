#pragma once

// Brute-force references (power grid, quantized phase enumeration) and the two
// baseline algorithms that share the main power-control path.

#include "risd2d/common.hpp"
#include "risd2d/netmodel.hpp"
#include "risd2d/power_control.hpp"
#include "risd2d/system.hpp"

namespace risd2d {

struct GridSpec {
  int points_per_dim = 200;  // per link, endpoints 0 and P_max included

  void validate() const;
};

struct GridSearchResult {
  bool feasible = false;
  PowerAlloc p;
  double energy_efficiency = 0.0;
};

/// Exhaustive EE search over the power grid; rate-infeasible points are skipped.
/// Requires L <= 4.
GridSearchResult grid_power_search(const ChannelRealization& chan, const PhaseConfig& phase,
                                   const SystemParams& params, const GridSpec& grid);
GridSearchResult grid_power_search(const PowerProblem& problem, const GridSpec& grid);

struct PhaseSearchResult {
  PhaseConfig phase;
  double sum_rate = 0.0;
};

/// Sum-rate maximum over phases phi_n in {2 pi k / 2^bits}. Requires 2^(N bits) <= 1e6.
PhaseSearchResult exhaustive_phase_search(const ChannelRealization& chan, const PowerAlloc& p,
                                          const SystemParams& params, int bits,
                                          double eta = 0.8);

struct BaselineResult {
  DinkelbachResult no_ris;
  DinkelbachResult random_phase;
  PhaseConfig random_phases;
};

/// Dinkelbach from P_max without the RIS (and without its element power), and with
/// phases drawn uniformly from rng.
BaselineResult baselines(const ChannelRealization& chan, const SystemParams& params, Rng& rng,
                         double eta = 0.8);
BaselineResult baselines(const ChannelRealization& chan, const SystemParams& params,
                         const PhaseConfig& random_phases);

}  // namespace risd2d
