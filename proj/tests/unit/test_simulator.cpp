#include "doctest.h"
#include "oracles.hpp"

#include "impulse/error.hpp"
#include "impulse/forex.hpp"
#include "impulse/labor.hpp"
#include "impulse/simulator.hpp"

#include <cmath>

using namespace impulse;

namespace {

ThresholdProblem fx_problem(double delay = 1.0) {
    ForexParams p;
    p.delay = delay;
    const auto fx = build_forex(p);
    return ThresholdProblem(fx.model, fx.cost);
}

SimConfig small_config(std::size_t paths, double dt = 0.02) {
    SimConfig cfg;
    cfg.n_paths = paths;
    cfg.dt = dt;
    cfg.horizon = 40.0;
    cfg.block_size = 64;
    return cfg;
}

bool within(const PolicyEstimate& est, double reference, double k = 3.0) {
    return std::abs(est.mean - reference) <= k * est.standard_error + est.discounted_tail_bound;
}

}  // namespace

TEST_CASE("determinism across runs and thread counts") {
    const auto problem = fx_problem();
    const ThresholdPolicy policy{5.066, 12.1756};
    auto cfg = small_config(3000);
    cfg.threads = 1;
    const auto one = simulate_threshold(problem, policy, 3.0, cfg);
    const auto again = simulate_threshold(problem, policy, 3.0, cfg);
    cfg.threads = 3;
    const auto many = simulate_threshold(problem, policy, 3.0, cfg);
    CHECK(one.mean == again.mean);
    CHECK(one.mean == many.mean);
    CHECK(one.standard_error == many.standard_error);
    CHECK(one.diagnostics.upper_impulses == many.diagnostics.upper_impulses);
    CHECK(one.diagnostics.bridge_detections == many.diagnostics.bridge_detections);

    cfg.seed += 1;
    CHECK(simulate_threshold(problem, policy, 3.0, cfg).mean != one.mean);
}

TEST_CASE("standard error scales as one over root n") {
    const auto problem = fx_problem();
    auto cfg = small_config(800);
    const auto small = mc_delayed_cost(problem, 9.0, 5.0, cfg);
    cfg.n_paths = 3200;
    const auto large = mc_delayed_cost(problem, 9.0, 5.0, cfg);
    CHECK(small.standard_error / large.standard_error == doctest::Approx(2.0).epsilon(0.2));
}

TEST_CASE("one-shot oracles") {
    const auto problem = fx_problem();
    auto cfg = small_config(40000);
    SUBCASE("delayed cost at (12, 5)") {
        const auto est = mc_delayed_cost(problem, 12.0, 5.0, cfg);
        CHECK(within(est, oracle::fx_r(150.0, 50.0, 0.2, 1.0, 12.0, 5.0)));
    }
    SUBCASE("zero delay has zero variance") {
        const auto p0 = fx_problem(0.0);
        const auto est = mc_delayed_cost(p0, 8.0, 5.0, cfg);
        CHECK(est.mean == doctest::Approx(p0.kbar(8.0, 5.0)).epsilon(1e-14));
        CHECK(est.standard_error == 0.0);
    }
    SUBCASE("expected reward") {
        const auto est = mc_expected_reward(problem.model(), problem.cost().running_reward, 2.0, cfg);
        CHECK(within(est, oracle::fx_g(0.2, 2.0)));
    }
    SUBCASE("transition expectation") {
        const auto est = mc_transition_expectation(problem.model(), 1.0, 2.0, [](double y) { return y * y; }, cfg);
        CHECK(within(est, 3.0));
    }
    SUBCASE("labor delayed firing cost") {
        const LaborParams lp;
        const auto lm = build_labor(lp);
        const BandProblem band(lm.model, lm.cost);
        for (double xi : {5.0, 40.0}) CHECK(within(mc_delayed_fire_cost(band, xi, 7.12, cfg), labor_r(lp, xi, 7.12)));
    }
}

TEST_CASE("hitting Laplace transforms by simulation") {
    const auto problem = fx_problem();
    auto cfg = small_config(20000, 1e-3);
    const auto est = mc_hitting_laplace(problem.model(), 0.0, -1.0, 1.0, cfg);
    const auto exact = hitting_laplace(problem.fundamentals(), 0.0, -1.0, 1.0);
    CHECK(within(est.up, exact.up));
    CHECK(within(est.down, exact.down));
}

TEST_CASE("threshold policy value") {
    const auto problem = fx_problem();
    const auto sol = threshold_solution_for(problem, {5.066, 12.1756});
    auto cfg = small_config(6000);
    cfg.horizon = 60.0;
    const auto est = simulate_threshold(problem, {5.066, 12.1756}, 0.0, cfg);
    CHECK(within(est, sol.v(0.0)));
    CHECK(est.diagnostics.upper_impulses > 0);
    CHECK(est.diagnostics.lower_impulses == 0);
}

TEST_CASE("costless inaction-equivalent policy") {
    ForexParams p;
    auto fx = build_forex(p);
    ThresholdCostStructure cost;
    cost.running_reward = [](double) { return 0.0; };
    cost.intervention_cost = [](double, double) { return -1e-9; };
    cost.delay = 1.0;
    const ThresholdProblem problem(fx.model, cost);
    const auto est = simulate_threshold(problem, {0.0, 2.0}, 0.0, small_config(200));
    CHECK(std::abs(est.mean) < 1e-6);
}

TEST_CASE("band policy value") {
    const LaborParams lp;
    const auto lm = build_labor(lp);
    const BandProblem problem(lm.model, lm.cost);
    const BandPolicy policy{1.0655, 2.117, 7.108, 36.64};
    const auto sol = band_solution_for(problem, policy);
    auto cfg = small_config(4000, 0.02);
    cfg.horizon = 300.0;
    const auto est = simulate_band(problem, policy, 10.0, cfg);
    CHECK(within(est, sol.v(10.0)));
    CHECK(est.diagnostics.exclusion_violations == 0);

    SUBCASE("degenerate band reduces to the running reward alone") {
        const BandPolicy wide{2e-3, 3e-3, 190.0, 199.0};
        auto c2 = small_config(4000, 0.05);
        c2.horizon = 300.0;
        const auto e2 = simulate_band(problem, wide, 5.0, c2);
        const auto g = mc_expected_reward(problem.model(), lm.cost.running_reward, 5.0, small_config(40000));
        CHECK(std::abs(e2.mean - labor_g(lp, 5.0)) <= 3.0 * e2.standard_error + 0.02 * std::abs(labor_g(lp, 5.0)));
        CHECK(within(g, labor_g(lp, 5.0)));
    }
}

TEST_CASE("configuration errors") {
    const auto problem = fx_problem();
    SimConfig cfg;
    cfg.n_paths = 0;
    CHECK_THROWS_AS(mc_delayed_cost(problem, 1.0, 0.0, cfg), Error);
    cfg = SimConfig{};
    cfg.dt = -1.0;
    try {
        (void)simulate_threshold(problem, {5.0, 12.0}, 0.0, cfg);
        FAIL("expected a simulation error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Simulation);
    }
}
