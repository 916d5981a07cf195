#pragma once

#include "risd2d/netmodel.hpp"
#include "risd2d/system.hpp"

#include <cmath>

namespace testing {

using namespace risd2d;

struct Instance {
  ChannelRealization chan;
  PhaseConfig phase;
  PowerAlloc p;
  SystemParams params;
};

// Scenario-scale draw: default geometry, Rician channels, random phases, random powers.
inline Instance scenario(int links, int elements, std::uint64_t seed) {
  Rng rng(seed);
  Area area;
  const auto ris = default_ris_positions(area);
  const Topology topo = sample_topology(area, links, ris, split_elements(elements, 4), DistanceRange{}, rng);
  Instance in;
  in.chan = realize_channels(topo, FadingParams{}, rng);
  in.phase = PhaseConfig::random(elements, 0.8, rng);
  in.params = SystemParams::defaults(links);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  in.p.watts.resize(links);
  for (int l = 0; l < links; ++l) in.p.watts[l] = in.params.p_max * (0.05 + 0.95 * u(rng));
  return in;
}

// Unit-scale draw where the reflected path is as strong as the direct one.
inline Instance unit_scale(int links, int elements, std::uint64_t seed) {
  Rng rng(seed);
  Instance in;
  in.chan.direct.resize(links, links);
  in.chan.tx_to_ris.resize(elements, links);
  in.chan.ris_to_rx.resize(elements, links);
  for (int i = 0; i < links; ++i) {
    for (int l = 0; l < links; ++l) in.chan.direct(i, l) = circular_gaussian(rng) * (i == l ? 1.0 : 0.3);
    for (int n = 0; n < elements; ++n) {
      in.chan.tx_to_ris(n, i) = circular_gaussian(rng) / std::sqrt(double(std::max(elements, 1)));
      in.chan.ris_to_rx(n, i) = circular_gaussian(rng);
    }
  }
  in.phase = PhaseConfig::random(elements, 0.8, rng);
  in.params = SystemParams::defaults(links);
  in.params.noise_power = 0.1;
  in.params.p_max = 1.0;
  in.params.circuit_power = 0.05;
  std::uniform_real_distribution<double> u(0.05, 1.0);
  in.p.watts.resize(links);
  for (int l = 0; l < links; ++l) in.p.watts[l] = u(rng);
  return in;
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b))); }

}  // namespace testing
