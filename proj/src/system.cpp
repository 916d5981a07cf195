#include "risd2d/system.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace risd2d {

namespace {

void check_dimensions(const ChannelRealization& chan, const PhaseConfig& phase) {
  if (phase.elements() != chan.elements()) {
    throw std::invalid_argument("phase configuration has " + std::to_string(phase.elements()) +
                                " elements, channel has " + std::to_string(chan.elements()));
  }
}

void check_powers(const ChannelRealization& chan, const PowerAlloc& p) {
  if (p.links() != chan.links()) {
    throw std::invalid_argument("power allocation size does not match link count");
  }
}

}  // namespace

CVector PhaseConfig::reflection() const {
  CVector r(phases.size());
  const double amp = std::sqrt(eta);
  for (Eigen::Index n = 0; n < phases.size(); ++n) r[n] = std::polar(amp, phases[n]);
  return r;
}

CVector PhaseConfig::theta() const {
  CVector t(phases.size());
  for (Eigen::Index n = 0; n < phases.size(); ++n) t[n] = std::polar(1.0, -phases[n]);
  return t;
}

PhaseConfig PhaseConfig::from_theta(const CVector& theta, double eta) {
  PhaseConfig cfg;
  cfg.eta = eta;
  cfg.phases.resize(theta.size());
  for (Eigen::Index n = 0; n < theta.size(); ++n) {
    double a = -std::arg(theta[n]);
    if (a < 0.0) a += 2.0 * kPi;
    if (a >= 2.0 * kPi) a -= 2.0 * kPi;
    cfg.phases[n] = a;
  }
  return cfg;
}

PhaseConfig PhaseConfig::random(int elements, double eta, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 2.0 * kPi);
  PhaseConfig cfg;
  cfg.eta = eta;
  cfg.phases.resize(elements);
  for (int n = 0; n < elements; ++n) cfg.phases[n] = u(rng);
  return cfg;
}

PhaseConfig PhaseConfig::zeros(int elements, double eta) {
  return {RVector::Zero(elements), eta};
}

PowerAlloc PowerAlloc::uniform(int links, double watts) {
  return {RVector::Constant(links, watts)};
}

double element_power_for_bits(int bits) {
  switch (bits) {
    case 3: return 1.5e-3;
    case 4: return 4.5e-3;
    case 5: return 6.0e-3;
    case 6: return 7.8e-3;
    default:
      throw std::invalid_argument("no element power tabulated for " + std::to_string(bits) +
                                  "-bit resolution");
  }
}

SystemParams SystemParams::defaults(int links) {
  SystemParams sp;
  sp.noise_power = dbm_to_watts(-117.0);
  sp.circuit_power = dbm_to_watts(15.0);
  sp.resolution_bits = 3;
  sp.element_power = element_power_for_bits(3);
  sp.p_max = dbm_to_watts(20.0);
  sp.r_min = RVector::Zero(links);
  return sp;
}

void SystemParams::validate(int links) const {
  if (!(noise_power > 0.0)) throw std::invalid_argument("noise power must be positive");
  if (!(circuit_power >= 0.0)) throw std::invalid_argument("circuit power must be nonnegative");
  if (!(element_power >= 0.0)) throw std::invalid_argument("element power must be nonnegative");
  if (!(p_max > 0.0)) throw std::invalid_argument("power budget must be positive");
  if (r_min.size() != links) throw std::invalid_argument("need one minimum rate per link");
  if ((r_min.array() < 0.0).any()) throw std::invalid_argument("minimum rates must be >= 0");
}

cdouble effective_channel(const ChannelRealization& chan, const PhaseConfig& phase, int i, int l) {
  check_dimensions(chan, phase);
  const int L = chan.links();
  if (i < 0 || i >= L || l < 0 || l >= L) throw std::out_of_range("link index out of range");
  cdouble reflected = 0.0;
  const double amp = std::sqrt(phase.eta);
  for (int n = 0; n < chan.elements(); ++n) {
    reflected += std::polar(amp, phase.phases[n]) * chan.ris_to_rx(n, l) * chan.tx_to_ris(n, i);
  }
  return chan.direct(i, l) + reflected;
}

RMatrix effective_gains(const ChannelRealization& chan, const PhaseConfig& phase) {
  check_dimensions(chan, phase);
  const int L = chan.links();
  // cascade(i, l) = sum_n r_n f_l[n] g_i[n]
  const CMatrix weighted = phase.reflection().asDiagonal() * chan.tx_to_ris;
  const CMatrix cascade = weighted.transpose() * chan.ris_to_rx;
  RMatrix gains(L, L);
  for (int i = 0; i < L; ++i) {
    for (int l = 0; l < L; ++l) gains(i, l) = std::norm(chan.direct(i, l) + cascade(i, l));
  }
  return gains;
}

RVector sinrs_from_gains(const RMatrix& gains, const RVector& p, double noise_power) {
  const Eigen::Index L = gains.rows();
  RVector z(L);
  for (Eigen::Index l = 0; l < L; ++l) {
    double interference = noise_power;
    for (Eigen::Index i = 0; i < L; ++i) {
      if (i != l) interference += gains(i, l) * p[i];
    }
    z[l] = gains(l, l) * p[l] / interference;
  }
  return z;
}

double sinr(const ChannelRealization& chan, const PhaseConfig& phase, const PowerAlloc& p,
            const SystemParams& params, int l) {
  check_powers(chan, p);
  if (l < 0 || l >= chan.links()) throw std::out_of_range("link index out of range");
  return sinrs_from_gains(effective_gains(chan, phase), p.watts, params.noise_power)[l];
}

RVector sinrs(const ChannelRealization& chan, const PhaseConfig& phase, const PowerAlloc& p,
              const SystemParams& params) {
  check_powers(chan, p);
  return sinrs_from_gains(effective_gains(chan, phase), p.watts, params.noise_power);
}

RVector link_rates(const ChannelRealization& chan, const PhaseConfig& phase, const PowerAlloc& p,
                   const SystemParams& params) {
  RVector z = sinrs(chan, phase, p, params);
  return z.unaryExpr([](double v) { return std::log2(1.0 + v); });
}

double sum_rate(const ChannelRealization& chan, const PhaseConfig& phase, const PowerAlloc& p,
                const SystemParams& params) {
  return link_rates(chan, phase, p, params).sum();
}

double static_power(const SystemParams& params, int links, int elements) {
  return 2.0 * links * params.circuit_power + elements * params.element_power;
}

double total_power(const PowerAlloc& p, const SystemParams& params, int elements) {
  return p.watts.sum() + static_power(params, p.links(), elements);
}

double energy_efficiency(const ChannelRealization& chan, const PhaseConfig& phase,
                         const PowerAlloc& p, const SystemParams& params) {
  return sum_rate(chan, phase, p, params) / total_power(p, params, chan.elements());
}

bool FeasibilityReport::all() const {
  return unit_modulus_ok && std::all_of(rate_ok.begin(), rate_ok.end(), [](bool b) { return b; }) &&
         std::all_of(power_ok.begin(), power_ok.end(), [](bool b) { return b; });
}

FeasibilityReport check_feasibility(const ChannelRealization& chan, const PhaseConfig& phase,
                                    const PowerAlloc& p, const SystemParams& params,
                                    double rate_tol) {
  const int L = chan.links();
  params.validate(L);
  const RVector rates = link_rates(chan, phase, p, params);

  FeasibilityReport rep;
  rep.rate_violation.resize(L);
  rep.power_violation.resize(L);
  for (int l = 0; l < L; ++l) {
    rep.rate_violation[l] = std::max(0.0, params.r_min[l] - rates[l]);
    rep.rate_ok.push_back(rep.rate_violation[l] <= rate_tol);
    const double pl = p.watts[l];
    rep.power_violation[l] = std::max({0.0, pl - params.p_max, -pl});
    rep.power_ok.push_back(rep.power_violation[l] == 0.0);
  }
  for (Eigen::Index n = 0; n < phase.phases.size(); ++n) {
    if (!std::isfinite(phase.phases[n])) rep.modulus_violation = INFINITY;
  }
  const CVector theta = phase.theta();
  for (Eigen::Index n = 0; n < theta.size(); ++n) {
    rep.modulus_violation = std::max(rep.modulus_violation, std::abs(std::abs(theta[n]) - 1.0));
  }
  rep.unit_modulus_ok = rep.modulus_violation <= 1e-12;
  return rep;
}

}  // namespace risd2d
