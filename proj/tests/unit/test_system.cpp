#include <doctest.h>

#include "helpers.hpp"
#include "risd2d/system.hpp"

#include <cmath>

using namespace risd2d;

namespace {

// Element-by-element evaluation of the composite channel.
cdouble naive_channel(const ChannelRealization& c, const PhaseConfig& ph, int i, int l) {
  cdouble h = c.direct(i, l);
  for (int n = 0; n < c.elements(); ++n) {
    h += std::sqrt(ph.eta) * std::exp(cdouble(0.0, ph.phases[n])) * c.ris_to_rx(n, l) * c.tx_to_ris(n, i);
  }
  return h;
}

double naive_sinr(const testing::Instance& in, int l) {
  double interference = in.params.noise_power;
  for (int i = 0; i < in.chan.links(); ++i) {
    if (i != l) interference += std::norm(naive_channel(in.chan, in.phase, i, l)) * in.p.watts[i];
  }
  return std::norm(naive_channel(in.chan, in.phase, l, l)) * in.p.watts[l] / interference;
}

}  // namespace

TEST_CASE("dBm conversion") {
  CHECK(dbm_to_watts(-117.0) == doctest::Approx(1.995262315e-15).epsilon(1e-9));
  CHECK(dbm_to_watts(15.0) == doctest::Approx(0.0316227766).epsilon(1e-9));
  CHECK(watts_to_dbm(0.1) == doctest::Approx(20.0));
}

TEST_CASE("effective channel") {
  SUBCASE("single element algebra") {
    ChannelRealization c;
    c.direct = CMatrix::Zero(1, 1);
    c.tx_to_ris = CMatrix::Ones(1, 1);
    c.ris_to_rx = CMatrix::Ones(1, 1);
    PhaseConfig ph{RVector::Constant(1, kPi / 2), 1.0};
    const cdouble h = effective_channel(c, ph, 0, 0);
    CHECK(h.real() == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(h.imag() == doctest::Approx(1.0));
  }
  SUBCASE("no surface gives the direct channel") {
    const auto in = testing::scenario(3, 8, 4);
    const ChannelRealization bare = in.chan.without_ris();
    for (int i = 0; i < 3; ++i) {
      for (int l = 0; l < 3; ++l) CHECK(effective_channel(bare, PhaseConfig::zeros(0, 0.8), i, l) == in.chan.direct(i, l));
    }
  }
  SUBCASE("matches the naive sum and is linear in h") {
    for (int s = 0; s < 20; ++s) {
      auto in = testing::unit_scale(3, 6, 300 + s);
      for (int i = 0; i < 3; ++i) {
        for (int l = 0; l < 3; ++l) {
          const cdouble a = effective_channel(in.chan, in.phase, i, l);
          CHECK(std::abs(a - naive_channel(in.chan, in.phase, i, l)) <= 1e-12 * (1.0 + std::abs(a)));
        }
      }
      ChannelRealization doubled = in.chan;
      doubled.direct *= 2.0;
      const cdouble reflected = effective_channel(in.chan, in.phase, 0, 1) - in.chan.direct(0, 1);
      const cdouble d2 = effective_channel(doubled, in.phase, 0, 1);
      CHECK(std::abs(d2 - (2.0 * in.chan.direct(0, 1) + reflected)) <= 1e-12);
    }
  }
  SUBCASE("dimension mismatch throws") {
    const auto in = testing::scenario(2, 4, 1);
    CHECK_THROWS(effective_channel(in.chan, PhaseConfig::zeros(3, 0.8), 0, 0));
  }
}

TEST_CASE("SINR and sum rate") {
  SUBCASE("single link has no interference") {
    const auto in = testing::scenario(1, 4, 9);
    const double g = effective_gains(in.chan, in.phase)(0, 0);
    CHECK(sinr(in.chan, in.phase, in.p, in.params, 0) ==
          doctest::Approx(g * in.p.watts[0] / in.params.noise_power).epsilon(1e-12));
  }
  SUBCASE("random instances match the direct formula") {
    for (int s = 0; s < 20; ++s) {
      const auto in = testing::unit_scale(3, 5, 40 + s);
      const RVector z = sinrs(in.chan, in.phase, in.p, in.params);
      double rate = 0.0;
      for (int l = 0; l < 3; ++l) {
        CHECK(z[l] == doctest::Approx(naive_sinr(in, l)).epsilon(1e-12));
        rate += std::log2(1.0 + naive_sinr(in, l));
      }
      CHECK(sum_rate(in.chan, in.phase, in.p, in.params) == doctest::Approx(rate).epsilon(1e-12));
    }
  }
  SUBCASE("zero power") {
    auto in = testing::scenario(3, 4, 2);
    in.p.watts[1] = 0.0;
    CHECK(sinr(in.chan, in.phase, in.p, in.params, 1) == 0.0);
    in.p.watts.setZero();
    CHECK(sum_rate(in.chan, in.phase, in.p, in.params) == 0.0);
    CHECK(energy_efficiency(in.chan, in.phase, in.p, in.params) == 0.0);
  }
  SUBCASE("unit SINR gives one bit") {
    ChannelRealization c;
    c.direct = CMatrix::Ones(1, 1);
    c.tx_to_ris.resize(0, 1);
    c.ris_to_rx.resize(0, 1);
    SystemParams sp = SystemParams::defaults(1);
    sp.noise_power = 0.5;
    CHECK(sum_rate(c, PhaseConfig::zeros(0, 0.8), PowerAlloc::uniform(1, 0.5), sp) == doctest::Approx(1.0));
  }
  SUBCASE("scaling powers and noise together keeps the SINR") {
    auto in = testing::scenario(3, 8, 12);
    const RVector z = sinrs(in.chan, in.phase, in.p, in.params);
    in.p.watts *= 7.5;
    in.params.noise_power *= 7.5;
    const RVector z2 = sinrs(in.chan, in.phase, in.p, in.params);
    for (int l = 0; l < 3; ++l) CHECK(z2[l] == doctest::Approx(z[l]).epsilon(1e-12));
  }
  SUBCASE("per-link monotonicity") {
    auto in = testing::unit_scale(3, 4, 13);
    const RVector z = sinrs(in.chan, in.phase, in.p, in.params);
    in.p.watts[0] *= 1.5;
    const RVector z2 = sinrs(in.chan, in.phase, in.p, in.params);
    CHECK(z2[0] > z[0]);
    CHECK(z2[1] < z[1]);
    CHECK(z2[2] < z[2]);
  }
}

TEST_CASE("power model") {
  CHECK(element_power_for_bits(3) == doctest::Approx(1.5e-3));
  CHECK(element_power_for_bits(4) == doctest::Approx(4.5e-3));
  CHECK(element_power_for_bits(5) == doctest::Approx(6e-3));
  CHECK(element_power_for_bits(6) == doctest::Approx(7.8e-3));
  CHECK_THROWS(element_power_for_bits(2));

  SystemParams sp = SystemParams::defaults(10);
  CHECK(total_power(PowerAlloc::uniform(10, 0.0), sp, 80) == doctest::Approx(0.7525).epsilon(1e-4));
  CHECK(total_power(PowerAlloc::uniform(10, 0.01), sp, 0) == doctest::Approx(0.1 + 20 * dbm_to_watts(15.0)));

  SystemParams one = SystemParams::defaults(1);
  one.circuit_power = 0.0;
  CHECK(total_power(PowerAlloc::uniform(1, 0.0), one, 1) == doctest::Approx(1.5e-3));
}

TEST_CASE("energy efficiency") {
  for (int s = 0; s < 10; ++s) {
    auto in = testing::scenario(3, 8, 60 + s);
    const double ee = energy_efficiency(in.chan, in.phase, in.p, in.params);
    CHECK(ee == doctest::Approx(sum_rate(in.chan, in.phase, in.p, in.params) /
                                total_power(in.p, in.params, 8)).epsilon(1e-14));
    in.params.element_power *= 2.0;
    CHECK(energy_efficiency(in.chan, in.phase, in.p, in.params) < ee);
  }
}

TEST_CASE("feasibility report") {
  auto in = testing::scenario(2, 4, 5);
  FeasibilityReport rep = check_feasibility(in.chan, in.phase, in.p, in.params);
  CHECK(rep.all());

  in.p.watts[1] = in.params.p_max + 1e-6;
  rep = check_feasibility(in.chan, in.phase, in.p, in.params);
  CHECK_FALSE(rep.power_ok[1]);
  CHECK(rep.power_violation[1] == doctest::Approx(1e-6).epsilon(1e-6));
  CHECK(rep.power_ok[0]);

  in.p.watts[1] = 0.5 * in.params.p_max;
  in.params.r_min = RVector::Constant(2, 50.0);
  rep = check_feasibility(in.chan, in.phase, in.p, in.params);
  CHECK_FALSE(rep.rate_ok[0]);
  const RVector rates = link_rates(in.chan, in.phase, in.p, in.params);
  CHECK(rep.rate_violation[0] == doctest::Approx(50.0 - rates[0]));
  CHECK(rep.unit_modulus_ok);
}
