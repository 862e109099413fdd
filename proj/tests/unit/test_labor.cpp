#include "doctest.h"
#include "oracles.hpp"

#include "impulse/error.hpp"
#include "impulse/labor.hpp"

#include <cmath>

using namespace impulse;

namespace {

// E[h(xi_delay)] under the uncontrolled lognormal law, by Simpson quadrature
// split where xi_delay crosses `kink`.
double lognormal_mean(const LaborParams& p, double xi, const std::function<double(double)>& h, double kink = -1.0) {
    const double m = -(p.demand_drift + p.quit_rate + 0.5 * p.sigma * p.sigma) * p.delay;
    const double s = p.sigma * std::sqrt(p.delay);
    const double z_break = kink > 0.0 ? (std::log(kink / xi) - m) / s : 20.0;
    return oracle::gaussian_mean_split([&](double z) { return h(xi * std::exp(m + s * z)); }, z_break, 100000);
}

double cbar1(const LaborParams& p, double x, double c) {
    const double cost = x > c ? -(p.c3 * (x - c) + p.c4 * x) : -p.c1 * (c - x) - p.c2 * x;
    return cost - labor_g(p, x) + labor_g(p, c);
}

}  // namespace

TEST_CASE("fundamental exponents") {
    const LaborParams p;
    const auto [b1, b2] = labor_exponents(p);
    CHECK(b1 > 1.0);
    CHECK(b2 < 0.0);
    const double s2 = p.sigma * p.sigma;
    for (double beta : {b1, b2}) {
        const double q = 0.5 * s2 * beta * beta - (0.5 * s2 + p.demand_drift + p.quit_rate) * beta + p.demand_drift - p.rate;
        CHECK(std::abs(q) < 1e-12);
    }
}

TEST_CASE("expected reward g") {
    const LaborParams p;
    CHECK(labor_k2(p) == doctest::Approx(-12.5).epsilon(1e-15));
    const auto lm = build_labor(p);
    // (A - alpha) g + f = 0 by finite differences.
    for (double xi : {0.2, 1.0, 5.0, 30.0}) {
        const RealFn g = [&](double x) { return labor_g(p, x); };
        const double res = apply_discounted_generator(lm.model, g, xi, 1e-3 * xi) + lm.cost.running_reward(xi);
        CHECK(std::abs(res) < 1e-6 * std::abs(lm.cost.running_reward(xi)) + 1e-9);
        CHECK(labor_g_prime(p, xi) == doctest::Approx(central_difference(g, xi)).epsilon(1e-7));
    }
}

TEST_CASE("log terms") {
    LaborParams p;
    const auto at_c = labor_log_terms(p, 3.0, 3.0);
    const double s = p.sigma * std::sqrt(p.delay);
    CHECK(at_c.d1 - at_c.d2 == doctest::Approx(s).epsilon(1e-14));
    CHECK(at_c.d2 == doctest::Approx(-(p.demand_drift + p.quit_rate + 0.5 * p.sigma * p.sigma) * p.delay / s).epsilon(1e-14));
    p.mu = 1e-300;
    CHECK(labor_log_terms(p, 2.0, 3.0).epsilon == doctest::Approx(0.0));
    p = LaborParams{};
    p.delay = 0.0;
    CHECK(labor_log_terms(p, 2.0, 3.0).epsilon == 0.0);
}

TEST_CASE("delayed firing cost r") {
    LaborParams p;
    const double disc = std::exp((p.demand_drift - p.rate) * p.delay);
    SUBCASE("closed form equals the quadrature of the definition") {
        for (double xi : {0.5, 5.0, 7.2, 20.0, 36.6, 80.0}) {
            for (double c : {4.0, 7.12}) {
                const double ref = disc * lognormal_mean(p, xi, [&](double y) { return cbar1(p, y, c); }, c);
                CHECK(labor_r(p, xi, c) == doctest::Approx(ref).epsilon(1e-9));
                const double fd = central_difference([&](double x) { return labor_r(p, x, c); }, xi);
                CHECK(labor_r_dx(p, xi, c) == doctest::Approx(fd).epsilon(1e-6));
            }
        }
    }
    SUBCASE("vanishing delay") {
        LaborParams small = p;
        small.delay = 1e-12;
        LaborParams zero = p;
        zero.delay = 0.0;
        for (double xi : {2.0, 30.0}) {
            CHECK(labor_r(small, xi, 7.0) == doctest::Approx(cbar1(p, xi, 7.0)).epsilon(1e-6));
            CHECK(labor_r(zero, xi, 7.0) == doctest::Approx(cbar1(p, xi, 7.0)).epsilon(1e-14));
        }
    }
    SUBCASE("shape on the plotted range: convex above c, eventually increasing") {
        double prev = labor_r(p, 8.0, 7.12), prev_slope = -infinity;
        for (double xi = 10.0; xi <= 60.0; xi += 2.0) {
            const double now = labor_r(p, xi, 7.12);
            const double slope = (now - prev) / 2.0;
            CHECK(slope > prev_slope);
            prev_slope = slope;
            prev = now;
        }
        CHECK(prev_slope > 0.0);
    }
}

TEST_CASE("moments") {
    const LaborParams p;
    for (double xi : {1.0, 7.0, 30.0}) {
        const double c = 7.12;
        const auto m = labor_moments(p, xi, c);
        CHECK(m.A + m.B == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(std::abs(m.D + m.E - labor_power_moment(p, xi, 1.0)) <= 1e-12 * labor_power_moment(p, xi, 1.0));
        CHECK(m.A == doctest::Approx(lognormal_mean(p, xi, [&](double y) { return y > c ? 1.0 : 0.0; }, c)).epsilon(1e-6));
        CHECK(m.D == doctest::Approx(lognormal_mean(p, xi, [&](double y) { return y > c ? y : 0.0; }, c)).epsilon(1e-6));
        CHECK(m.E == doctest::Approx(lognormal_mean(p, xi, [&](double y) { return y < c ? y : 0.0; }, c)).epsilon(1e-6));
        for (double theta : {0.75, 1.0, 2.0})
            CHECK(labor_power_moment(p, xi, theta) ==
                  doctest::Approx(lognormal_mean(p, xi, [&](double y) { return std::pow(y, theta); })).epsilon(1e-9));
    }
    LaborParams zero = p;
    zero.delay = 0.0;
    CHECK_THROWS_AS(labor_moments(zero, 1.0, 2.0), Error);
}

TEST_CASE("parameter validation") {
    LaborParams p;
    p.rate = 0.02;
    try {
        p.validate();
        FAIL("expected NoAction");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NoAction);
    }
    p = LaborParams{};
    p.sigma = 0.0;
    CHECK_THROWS_AS(p.validate(), Error);
    CHECK_THROWS_AS(build_labor(p), Error);
}

TEST_CASE("uniqueness conditions") {
    LaborParams p;
    CHECK(labor_condition_warnings(p, 2.1).empty());
    p.c3 = 20.0;
    CHECK_FALSE(labor_condition_warnings(p, 2.1).empty());
}

TEST_CASE("lift to demand and labor") {
    const LaborParams p;
    const auto lm = build_labor(p);
    const BandProblem problem(lm.model, lm.cost);
    const auto sol = band_solution_for(problem, {1.0661, 2.100, 7.120, 36.640});
    for (double l : {0.5, 4.0, 20.0, 50.0}) {
        CHECK(lift_value(sol, 1.0, l) == doctest::Approx(sol.v(l)).epsilon(1e-14));
        for (double k : {0.5, 3.0}) CHECK(lift_value(sol, 2.0 * k, l * k) == doctest::Approx(k * lift_value(sol, 2.0, l)).epsilon(1e-12));
    }
    CHECK_THROWS_AS(lift_value(sol, 0.0, 1.0), Error);
}
