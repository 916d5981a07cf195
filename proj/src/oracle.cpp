#include "risd2d/oracle.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace risd2d {

void GridSpec::validate() const {
  if (points_per_dim < 2) throw std::invalid_argument("GridSpec: points_per_dim must be >= 2");
}

GridSearchResult grid_power_search(const PowerProblem& problem, const GridSpec& grid) {
  grid.validate();
  const int L = problem.links();
  if (L < 1 || L > 4) throw std::invalid_argument("grid_power_search: needs 1 <= L <= 4");
  const int m = grid.points_per_dim;
  const double step = problem.p_max / (m - 1);

  GridSearchResult best;
  std::vector<int> idx(static_cast<std::size_t>(L), 0);
  RVector p(L);
  // Odometer with the first link as the most significant digit, so the first
  // maximizer met is the lexicographically smallest one.
  while (true) {
    for (int l = 0; l < L; ++l) {
      const int k = idx[static_cast<std::size_t>(l)];
      p[l] = k == m - 1 ? problem.p_max : k * step;
    }
    if (problem.rates_ok(p, 0.0)) {
      const double ee = problem.energy_efficiency(p);
      if (!best.feasible || ee > best.energy_efficiency) {
        best.feasible = true;
        best.energy_efficiency = ee;
        best.p.watts = p;
      }
    }
    int d = L - 1;
    while (d >= 0 && ++idx[static_cast<std::size_t>(d)] == m) idx[static_cast<std::size_t>(d--)] = 0;
    if (d < 0) break;
  }
  return best;
}

GridSearchResult grid_power_search(const ChannelRealization& chan, const PhaseConfig& phase,
                                   const SystemParams& params, const GridSpec& grid) {
  return grid_power_search(PowerProblem::from(chan, phase, params), grid);
}

PhaseSearchResult exhaustive_phase_search(const ChannelRealization& chan, const PowerAlloc& p,
                                          const SystemParams& params, int bits, double eta) {
  const int n = chan.elements();
  if (bits < 1) throw std::invalid_argument("exhaustive_phase_search: bits must be >= 1");
  if (static_cast<double>(n) * bits > 20.0 + 1e-9 && n > 0) {
    throw std::invalid_argument("exhaustive_phase_search: 2^(N*bits) exceeds 1e6 candidates (N=" +
                                std::to_string(n) + ", bits=" + std::to_string(bits) + ")");
  }
  const int levels = 1 << bits;
  PhaseConfig phase = PhaseConfig::zeros(n, eta);
  PhaseSearchResult best{phase, sum_rate(chan, phase, p, params)};

  std::vector<int> idx(static_cast<std::size_t>(n), 0);
  while (true) {
    int d = n - 1;
    while (d >= 0 && ++idx[static_cast<std::size_t>(d)] == levels) idx[static_cast<std::size_t>(d--)] = 0;
    if (d < 0) break;
    for (int k = 0; k < n; ++k) phase.phases[k] = 2.0 * kPi * idx[static_cast<std::size_t>(k)] / levels;
    const double r = sum_rate(chan, phase, p, params);
    if (r > best.sum_rate) best = {phase, r};
  }
  return best;
}

BaselineResult baselines(const ChannelRealization& chan, const SystemParams& params,
                         const PhaseConfig& random_phases) {
  const int L = chan.links();
  const PowerAlloc start = PowerAlloc::uniform(L, params.p_max);
  BaselineResult out;
  out.random_phases = random_phases;
  const ChannelRealization bare = chan.without_ris();
  out.no_ris = dinkelbach(bare, PhaseConfig::zeros(0, random_phases.eta), params, start);
  out.random_phase = dinkelbach(chan, random_phases, params, start);
  return out;
}

BaselineResult baselines(const ChannelRealization& chan, const SystemParams& params, Rng& rng,
                         double eta) {
  return baselines(chan, params, PhaseConfig::random(chan.elements(), eta, rng));
}

}  // namespace risd2d
