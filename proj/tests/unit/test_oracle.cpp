#include <doctest.h>

#include "helpers.hpp"
#include "risd2d/fp_beamforming.hpp"
#include "risd2d/harness.hpp"
#include "risd2d/oracle.hpp"

#include <cmath>

using namespace risd2d;

namespace {

PowerProblem problem_for(int links, int elements, std::uint64_t seed) {
  const testing::Instance in = testing::scenario(links, elements, seed);
  return PowerProblem::from(in.chan, in.phase, in.params);
}

// Stationary point of log2(1 + a p) / (p + s) on [0, pmax] by bisection on the
// sign of the derivative numerator.
double single_link_optimum(double a, double s, double pmax) {
  auto slope = [&](double p) { return a * (p + s) / ((1.0 + a * p) * kLn2) - std::log2(1.0 + a * p); };
  if (slope(pmax) >= 0.0) return pmax;
  double lo = 0.0, hi = pmax;
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (lo + hi);
    (slope(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("grid power search") {
  SUBCASE("single link optimum within one grid step of the stationary point") {
    for (int s = 0; s < 20; ++s) {
      PowerProblem pp = problem_for(1, 0, 10 + s);
      // Shrink the static power so the optimum is interior on some draws.
      pp.static_power *= (s % 2) ? 1.0 : 1e-3;
      const GridSearchResult g = grid_power_search(pp, GridSpec{200});
      REQUIRE(g.feasible);
      const double a = pp.gains(0, 0) / pp.noise_power;
      const double star = single_link_optimum(a, pp.static_power, pp.p_max);
      CHECK(std::abs(g.p.watts[0] - star) <= pp.p_max / 199.0 + 1e-15);
      CHECK(g.energy_efficiency == doctest::Approx(pp.energy_efficiency(g.p.watts)).epsilon(1e-14));
    }
  }
  SUBCASE("unattainable floors fail") {
    testing::Instance in = testing::scenario(2, 4, 3);
    in.params.r_min = RVector::Constant(2, 50.0);
    const GridSearchResult g = grid_power_search(in.chan, in.phase, in.params, GridSpec{50});
    CHECK_FALSE(g.feasible);
    CHECK(g.energy_efficiency == 0.0);
  }
  SUBCASE("refining the grid never lowers the optimum") {
    for (int s = 0; s < 10; ++s) {
      const PowerProblem pp = problem_for(2, 0, 30 + s);
      const double coarse = grid_power_search(pp, GridSpec{51}).energy_efficiency;
      const double fine = grid_power_search(pp, GridSpec{101}).energy_efficiency;
      const double finer = grid_power_search(pp, GridSpec{201}).energy_efficiency;
      CHECK(fine >= coarse);
      CHECK(finer >= fine);
    }
  }
  SUBCASE("dominates every enumerated feasible point") {
    PowerProblem pp = problem_for(3, 0, 40);
    pp.r_min = 0.3 * pp.rates(RVector::Constant(3, 0.5 * pp.p_max));
    const GridSearchResult g = grid_power_search(pp, GridSpec{21});
    REQUIRE(g.feasible);
    CHECK(pp.rates_ok(g.p.watts, 0.0));
    RVector p(3);
    for (int a = 0; a < 21; ++a) {
      for (int b = 0; b < 21; ++b) {
        for (int c = 0; c < 21; ++c) {
          p << a / 20.0, b / 20.0, c / 20.0;
          p *= pp.p_max;
          if (pp.rates_ok(p, 0.0)) CHECK(pp.energy_efficiency(p) <= g.energy_efficiency);
        }
      }
    }
  }
  SUBCASE("ties go to the lexicographically lowest candidate") {
    PowerProblem pp;
    pp.gains = RMatrix::Constant(2, 2, 0.1);
    pp.gains.diagonal().setConstant(1.0);
    pp.noise_power = 0.01;
    pp.p_max = 1.0;
    pp.r_min = RVector::Zero(2);
    pp.static_power = 0.05;
    const GridSearchResult g = grid_power_search(pp, GridSpec{41});
    REQUIRE(g.feasible);
    // The problem is symmetric in the two links, so (a, b) and (b, a) tie.
    CHECK(g.p.watts[0] <= g.p.watts[1]);
  }
  SUBCASE("invalid input") {
    CHECK_THROWS_AS(GridSpec{1}.validate(), std::invalid_argument);
    CHECK_THROWS_AS(grid_power_search(problem_for(5, 0, 1), GridSpec{3}), std::invalid_argument);
  }
}

TEST_CASE("exhaustive phase search") {
  SUBCASE("one element, one bit") {
    const testing::Instance in = testing::scenario(2, 1, 50);
    const PhaseSearchResult r = exhaustive_phase_search(in.chan, in.p, in.params, 1, 0.8);
    const double r0 = sum_rate(in.chan, PhaseConfig{RVector::Constant(1, 0.0), 0.8}, in.p, in.params);
    const double r1 = sum_rate(in.chan, PhaseConfig{RVector::Constant(1, kPi), 0.8}, in.p, in.params);
    CHECK(r.sum_rate == std::max(r0, r1));
    CHECK(r.phase.elements() == 1);
  }
  SUBCASE("no elements gives the direct-channel rate") {
    const testing::Instance in = testing::scenario(3, 0, 51);
    const PhaseSearchResult r = exhaustive_phase_search(in.chan, in.p, in.params, 3);
    CHECK(r.phase.elements() == 0);
    CHECK(r.sum_rate == sum_rate(in.chan, in.phase, in.p, in.params));
  }
  SUBCASE("bounded by the relaxation built at the optimum") {
    for (int s = 0; s < 10; ++s) {
      const testing::Instance in = testing::unit_scale(2, 4, 60 + s);
      const PhaseSearchResult ex = exhaustive_phase_search(in.chan, in.p, in.params, 3, in.phase.eta);
      // Transforms at the exhaustive optimum, then the SDR over all unit-modulus theta.
      const LinkCoefficients c = link_coefficients(in.chan, in.p, ex.phase.eta, in.params.noise_power);
      const RVector beta = update_beta(in.chan, ex.phase, in.p, in.params);
      const CVector eps = update_eps(c, ex.phase.theta(), beta);
      const QuadraticForm qf = build_quadratic_form(c, beta, eps);
      const sdp::Solution sol = sdp::solve(build_sdr(qf, c, in.params).to_sdp());
      REQUIRE(sol.status == sdp::Status::optimal);
      double offset = 0.0;
      for (int l = 0; l < 2; ++l) offset += std::log1p(beta[l]) - beta[l];
      const double bound = (offset + sol.value + qf.c) / kLn2;
      CHECK(ex.sum_rate <= bound + 1e-6 * bound);
    }
  }
  SUBCASE("too many candidates") {
    const testing::Instance in = testing::scenario(1, 8, 52);
    CHECK_THROWS_AS(exhaustive_phase_search(in.chan, in.p, in.params, 3), std::invalid_argument);
  }
}

TEST_CASE("baselines") {
  SUBCASE("no-RIS baseline ignores the phases") {
    const testing::Instance in = testing::scenario(3, 8, 70);
    Rng a(1), b(2);
    const BaselineResult ra = baselines(in.chan, in.params, a);
    const BaselineResult rb = baselines(in.chan, in.params, b);
    CHECK(ra.no_ris.energy_efficiency == rb.no_ris.energy_efficiency);
    CHECK(ra.random_phase.energy_efficiency != rb.random_phase.energy_efficiency);
  }
  SUBCASE("vanishing reflection matches the no-RIS baseline") {
    for (int s = 0; s < 10; ++s) {
      testing::Instance in = testing::scenario(3, 8, 80 + s);
      // Element power must also vanish for the two problems to coincide.
      in.params.element_power = 0.0;
      Rng rng(s);
      const BaselineResult r = baselines(in.chan, in.params, rng, 1e-30);
      CHECK(r.random_phase.energy_efficiency == doctest::Approx(r.no_ris.energy_efficiency).epsilon(1e-4));
    }
  }
  SUBCASE("the main algorithm never loses to its own random-phase start") {
    for (int s = 0; s < 50; ++s) {
      const testing::Instance in = testing::scenario(3, 8, 90 + s);
      Rng rng(s);
      const PhaseConfig init = PhaseConfig::random(8, 0.8, rng);
      const BaselineResult base = baselines(in.chan, in.params, init);
      JointOptions opt;
      opt.phase.seed = s;
      const JointResult main = optimize_joint(in.chan, in.params, init, opt);
      CHECK(main.energy_efficiency >= base.random_phase.energy_efficiency);
    }
  }
}
