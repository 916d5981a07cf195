#include <doctest.h>

#include "helpers.hpp"
#include "risd2d/oracle.hpp"
#include "risd2d/power_control.hpp"

#include <cmath>

using namespace risd2d;

namespace {

PowerProblem problem_for(int links, int elements, std::uint64_t seed) {
  const testing::Instance in = testing::scenario(links, elements, seed);
  return PowerProblem::from(in.chan, in.phase, in.params);
}

RVector random_box_point(int links, double pmax, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, pmax);
  RVector p(links);
  for (int l = 0; l < links; ++l) p[l] = u(rng);
  return p;
}

// max over a points x points grid of F(lambda), two links.
double grid_max_F(const PowerProblem& pp, double lambda, int points) {
  double best = -1e300;
  RVector p(2);
  for (int a = 0; a < points; ++a) {
    for (int b = 0; b < points; ++b) {
      p << pp.p_max * a / (points - 1), pp.p_max * b / (points - 1);
      if (!pp.rates_ok(p, 0.0)) continue;
      best = std::max(best, F_lambda(pp, p, lambda));
    }
  }
  return best;
}

double surrogate(const PowerProblem& pp, double lambda, const RVector& pk, const RVector& p) {
  const DcComponents at_k = dc_components(pp, pk, lambda);
  const DcComponents at_p = dc_components(pp, p, lambda);
  return at_p.f1 - (at_k.f2 + at_k.grad_f2.dot(p - pk));
}

bool linearized_ok(const PowerProblem& pp, const RVector& pk, const RVector& p) {
  const DcComponents at_k = dc_components(pp, pk, 0.0);
  const DcComponents at_p = dc_components(pp, p, 0.0);
  for (int l = 0; l < pp.links(); ++l) {
    if (pp.r_min[l] <= 0.0) continue;
    const double lin = at_p.c1[l] - (at_k.c2[l] + at_k.grad_c2.row(l).dot(p - pk));
    if (lin < pp.r_min[l]) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("F_lambda identities") {
  const testing::Instance in = testing::scenario(3, 8, 1);
  const double rate = sum_rate(in.chan, in.phase, in.p, in.params);
  CHECK(F_lambda(in.chan, in.phase, in.p, in.params, 0.0) == doctest::Approx(rate).epsilon(1e-14));
  const double ee = energy_efficiency(in.chan, in.phase, in.p, in.params);
  CHECK(std::abs(F_lambda(in.chan, in.phase, in.p, in.params, ee)) <= 1e-12 * rate);
  CHECK(F_lambda(in.chan, in.phase, in.p, in.params, 1.0) > F_lambda(in.chan, in.phase, in.p, in.params, 2.0));
  const PowerProblem pp = PowerProblem::from(in.chan, in.phase, in.params);
  CHECK(pp.static_power == doctest::Approx(total_power(PowerAlloc::uniform(3, 0.0), in.params, 8)));
  CHECK(pp.energy_efficiency(in.p.watts) == doctest::Approx(ee).epsilon(1e-14));
}

TEST_CASE("DC decomposition") {
  SUBCASE("single link has no interference part") {
    const testing::Instance in = testing::scenario(1, 4, 2);
    const DcComponents dc = dc_components(in.chan, in.phase, in.p, in.params, 3.0);
    CHECK(dc.f2 == doctest::Approx(std::log2(in.params.noise_power)).epsilon(1e-14));
    CHECK(dc.grad_f2.isZero());
  }
  SUBCASE("F = f1 - f2 and rates = c1 - c2") {
    for (int s = 0; s < 20; ++s) {
      const testing::Instance in = testing::scenario(1 + s % 5, 4 * (s % 3), 20 + s);
      const double lambda = 10.0 * s;
      const DcComponents dc = dc_components(in.chan, in.phase, in.p, in.params, lambda);
      const double F = F_lambda(in.chan, in.phase, in.p, in.params, lambda);
      CHECK(std::abs(dc.f1 - dc.f2 - F) <= 1e-12 * (1.0 + std::abs(F)));
      const RVector rates = link_rates(in.chan, in.phase, in.p, in.params);
      CHECK(((dc.c1 - dc.c2) - rates).norm() <= 1e-12 * (1.0 + rates.norm()));
    }
  }
  SUBCASE("gradients match central differences") {
    Rng rng(3);
    for (int s = 0; s < 100; ++s) {
      const PowerProblem pp = problem_for(2 + s % 4, 8, 100 + s);
      const int L = pp.links();
      std::uniform_real_distribution<double> u(0.05, 0.95);
      RVector p(L);
      for (int l = 0; l < L; ++l) p[l] = u(rng) * pp.p_max;
      const DcComponents dc = dc_components(pp, p, 0.0);
      const double h = 1e-5 * pp.p_max;
      RVector fd_f2(L);
      RMatrix fd_c2(L, L);
      for (int k = 0; k < L; ++k) {
        RVector pp_ = p, pm_ = p;
        pp_[k] += h;
        pm_[k] -= h;
        const DcComponents a = dc_components(pp, pp_, 0.0);
        const DcComponents b = dc_components(pp, pm_, 0.0);
        fd_f2[k] = (a.f2 - b.f2) / (2 * h);
        fd_c2.col(k) = (a.c2 - b.c2) / (2 * h);
      }
      CHECK((fd_f2 - dc.grad_f2).norm() <= 1e-5 * dc.grad_f2.norm());
      for (int l = 0; l < L; ++l) {
        CHECK((fd_c2.row(l) - dc.grad_c2.row(l)).norm() <= 1e-5 * dc.grad_c2.row(l).norm());
      }
    }
  }
}

TEST_CASE("convex subproblem") {
  SUBCASE("single link boundary optima") {
    const PowerProblem pp = problem_for(1, 0, 4);
    const PowerAlloc half = PowerAlloc::uniform(1, 0.5 * pp.p_max);
    CHECK(solve_convex_subproblem(pp, 0.0, half).p.watts[0] == pp.p_max);
    CHECK(solve_convex_subproblem(pp, 1e9, half).p.watts[0] == 0.0);
  }
  SUBCASE("beats random feasible points of the linearized problem") {
    Rng rng(5);
    for (int s = 0; s < 10; ++s) {
      PowerProblem pp = problem_for(2, 0, 200 + s);
      const RVector pk = random_box_point(2, pp.p_max, rng);
      if (s % 2) pp.r_min = 0.7 * pp.rates(pk);
      const double lambda = 0.5 * pp.energy_efficiency(RVector::Constant(2, pp.p_max));
      const SubproblemResult sub = solve_convex_subproblem(pp, lambda, PowerAlloc{pk});
      REQUIRE(sub.feasible);
      CHECK(sub.kkt_residual <= 1e-6);
      CHECK(sub.objective == doctest::Approx(surrogate(pp, lambda, pk, sub.p.watts)).epsilon(1e-9));
      CHECK(linearized_ok(pp, pk, sub.p.watts));
      int tested = 0;
      for (int k = 0; k < 10000; ++k) {
        const RVector p = random_box_point(2, pp.p_max, rng);
        if (!linearized_ok(pp, pk, p)) continue;
        ++tested;
        CHECK(surrogate(pp, lambda, pk, p) <= sub.objective + 1e-9 * (1.0 + std::abs(sub.objective)));
      }
      CHECK(tested > 100);
    }
  }
  SUBCASE("infeasible linearization is reported") {
    PowerProblem pp = problem_for(2, 0, 9);
    pp.r_min = RVector::Constant(2, 50.0);
    CHECK_FALSE(solve_convex_subproblem(pp, 0.0, PowerAlloc::uniform(2, pp.p_max)).feasible);
  }
}

TEST_CASE("DCA") {
  SUBCASE("monotone trace inside the box") {
    for (int s = 0; s < 50; ++s) {
      const PowerProblem pp = problem_for(2 + s % 3, 8, 300 + s);
      const double lambda = 0.3 * pp.energy_efficiency(RVector::Constant(pp.links(), pp.p_max));
      const DcaResult r = dca_solve(pp, lambda, PowerAlloc::uniform(pp.links(), pp.p_max));
      for (std::size_t k = 1; k < r.iterates.size(); ++k) {
        CHECK(r.iterates[k].objective >= r.iterates[k - 1].objective);
      }
      for (const DcIterate& it : r.iterates) {
        CHECK(it.p.watts.minCoeff() >= 0.0);
        CHECK(it.p.watts.maxCoeff() <= pp.p_max);
        CHECK(it.objective == doctest::Approx(F_lambda(pp, it.p.watts, lambda)).epsilon(1e-12));
      }
      CHECK(r.iterates.size() <= 51);
    }
  }
  SUBCASE("stationary start terminates at once") {
    int checked = 0;
    for (int s = 0; s < 10; ++s) {
      const PowerProblem pp = problem_for(3, 0, 400 + s);
      const DcaResult first = dca_solve(pp, 0.0, PowerAlloc::uniform(3, pp.p_max));
      if (first.iterates.size() > 50) continue;  // still creeping at the cap
      ++checked;
      const DcaResult again = dca_solve(pp, 0.0, first.final().p);
      CHECK(again.iterates.size() <= 2);
      CHECK((again.final().p.watts - first.final().p.watts).norm() <= 1e-3 * pp.p_max);
      CHECK(again.final().objective - first.final().objective <= 1e-6);
    }
    CHECK(checked >= 5);
  }
}

namespace {

// Trials (out of 50, two links) where DCA ends within 1% of the 200 x 200 grid
// maximum of F(lambda). With multi_start the best of full power and each link alone.
int dca_near_grid(bool multi_start) {
  int close = 0;
  for (int s = 0; s < 50; ++s) {
    const PowerProblem pp = problem_for(2, 0, 500 + s);
    const double lambda = 0.5 * pp.energy_efficiency(RVector::Constant(2, pp.p_max));
    std::vector<RVector> starts{RVector::Constant(2, pp.p_max)};
    if (multi_start) {
      starts.push_back(RVector::Unit(2, 0) * pp.p_max);
      starts.push_back(RVector::Unit(2, 1) * pp.p_max);
    }
    double got = -1e300;
    for (const RVector& p0 : starts) got = std::max(got, dca_solve(pp, lambda, PowerAlloc{p0}).final().objective);
    const double best = grid_max_F(pp, lambda, 200);
    close += got >= best - 0.01 * std::abs(best);
  }
  return close;
}

}  // namespace

// DCA is local: from full power alone it stops at the wrong corner or runs into
// the iteration cap on about a fifth of the draws. Kept visible but non-fatal.
TEST_CASE("DCA from full power lands near the grid maximum" * doctest::may_fail()) {
  CHECK(dca_near_grid(false) >= 48);
}

TEST_CASE("DCA from full power and single-link starts lands near the grid maximum") {
  CHECK(dca_near_grid(true) >= 48);
}

TEST_CASE("Dinkelbach") {
  SUBCASE("single link matches a fine 1-D grid") {
    for (int s = 0; s < 50; ++s) {
      const PowerProblem pp = problem_for(1, 0, 600 + s);
      const DinkelbachResult r = dinkelbach(pp, PowerAlloc::uniform(1, pp.p_max));
      REQUIRE(r.status == PowerStatus::converged);
      double best = 0.0;
      for (int k = 0; k <= 10000; ++k) {
        best = std::max(best, pp.energy_efficiency(RVector::Constant(1, pp.p_max * k / 10000.0)));
      }
      CHECK(r.energy_efficiency >= 0.995 * best);
    }
  }
  SUBCASE("two links match the 200 x 200 grid") {
    int close = 0;
    for (int s = 0; s < 50; ++s) {
      const PowerProblem pp = problem_for(2, 0, 700 + s);
      const DinkelbachResult r = dinkelbach(pp, PowerAlloc::uniform(2, pp.p_max));
      const GridSearchResult g = grid_power_search(pp, GridSpec{200});
      close += r.energy_efficiency >= 0.99 * g.energy_efficiency;
    }
    CHECK(close >= 48);
  }
  SUBCASE("lambda sequence and termination") {
    for (int s = 0; s < 50; ++s) {
      const PowerProblem pp = problem_for(2 + s % 3, 8, 800 + s);
      const DinkelbachResult r = dinkelbach(pp, PowerAlloc::uniform(pp.links(), pp.p_max));
      REQUIRE(r.status == PowerStatus::converged);
      REQUIRE(!r.states.empty());
      CHECK(r.states.front().lambda == 0.0);
      for (std::size_t k = 1; k < r.states.size(); ++k) {
        CHECK(r.states[k].lambda >= r.states[k - 1].lambda);
        CHECK(std::abs(r.states[k].F_value) <= std::abs(r.states[k - 1].F_value));
      }
      CHECK(std::abs(r.states.back().F_value) < 1e-4);
      CHECK(std::abs(r.lambda - pp.energy_efficiency(r.p.watts)) <= 1e-4);
      CHECK(r.p.watts.minCoeff() >= 0.0);
      CHECK(r.p.watts.maxCoeff() <= pp.p_max);
    }
  }
  SUBCASE("unreachable rate floor is a failure") {
    testing::Instance in = testing::scenario(3, 8, 9);
    in.params.r_min = RVector::Constant(3, 50.0);
    const DinkelbachResult r = dinkelbach(in.chan, in.phase, in.params, PowerAlloc::uniform(3, in.params.p_max));
    CHECK(r.status == PowerStatus::failure);
    CHECK(r.energy_efficiency == 0.0);
  }
  SUBCASE("rate floors hold at the returned point") {
    for (int s = 0; s < 20; ++s) {
      PowerProblem pp = problem_for(3, 8, 900 + s);
      pp.r_min = 0.5 * pp.rates(RVector::Constant(3, 0.5 * pp.p_max));
      const DinkelbachResult r = dinkelbach(pp, PowerAlloc::uniform(3, pp.p_max));
      if (r.status == PowerStatus::failure) continue;
      CHECK(pp.rates_ok(r.p.watts));
    }
  }
  SUBCASE("joint scaling of noise and gains leaves the allocation unchanged") {
    for (int s = 0; s < 10; ++s) {
      const PowerProblem pp = problem_for(3, 8, 1000 + s);
      PowerProblem scaled = pp;
      scaled.gains *= 37.0;
      scaled.noise_power *= 37.0;
      const DinkelbachResult a = dinkelbach(pp, PowerAlloc::uniform(3, pp.p_max));
      const DinkelbachResult b = dinkelbach(scaled, PowerAlloc::uniform(3, pp.p_max));
      CHECK((a.p.watts - b.p.watts).norm() <= 1e-6 * pp.p_max);
      CHECK(a.energy_efficiency == doctest::Approx(b.energy_efficiency).epsilon(1e-8));
    }
  }
}

TEST_CASE("feasibility check") {
  SUBCASE("no floors is always feasible") {
    CHECK(feasibility_check(problem_for(4, 8, 1)).feasible);
  }
  SUBCASE("single link closed-form threshold") {
    PowerProblem pp = problem_for(1, 4, 2);
    const double cap = std::log2(1.0 + pp.gains(0, 0) * pp.p_max / pp.noise_power);
    pp.r_min = RVector::Constant(1, cap * (1.0 + 1e-6));
    CHECK_FALSE(feasibility_check(pp).feasible);
    pp.r_min = RVector::Constant(1, cap * (1.0 - 1e-6));
    CHECK(feasibility_check(pp).feasible);
  }
  SUBCASE("two links agree with the grid") {
    Rng rng(11);
    std::uniform_real_distribution<double> u(0.2, 1.2);
    int agree = 0, infeasible = 0;
    for (int s = 0; s < 50; ++s) {
      PowerProblem pp = problem_for(2, 0, 1100 + s);
      // Floors scaled around the full-power rates so both outcomes occur.
      const RVector full = pp.rates(RVector::Constant(2, pp.p_max));
      pp.r_min << u(rng) * full[0], u(rng) * full[1];
      const bool grid = grid_power_search(pp, GridSpec{200}).feasible;
      const FeasibilityResult fc = feasibility_check(pp);
      agree += fc.feasible == grid;
      infeasible += !grid;
      if (fc.feasible) CHECK(pp.rates_ok(fc.maximizer.watts, 0.0));
    }
    CHECK(agree == 50);
    CHECK(infeasible > 5);
  }
}
