#include "doctest.h"
#include "oracles.hpp"

#include "impulse/error.hpp"
#include "impulse/forex.hpp"
#include "impulse/labor.hpp"

#include <cmath>

using namespace impulse;

namespace {

DiffusionModel fx_model(double alpha = 0.2) {
    ForexParams p;
    p.discount = alpha;
    return build_forex(p).model;
}

DiffusionModel labor_model() { return build_labor(LaborParams{}).model; }

}  // namespace

TEST_CASE("closed-form fundamentals solve (A - alpha) v = 0") {
    for (const auto& model : {fx_model(), labor_model()}) {
        const auto pair = fundamental_pair(model);
        CHECK_FALSE(pair.approximate());
        const bool fx = model.window.lower < 0.0;
        const std::vector<double> xs = fx ? std::vector<double>{-5, -1, 0, 2, 7, 15} : std::vector<double>{0.05, 0.5, 2, 10, 60};
        for (double x : xs) {
            const double h = 1e-4 * (fx ? std::max(1.0, std::abs(x)) : x);
            for (const RealFn& f : {RealFn([&](double y) { return pair.psi(y); }), RealFn([&](double y) { return pair.phi(y); })}) {
                const double residual = apply_discounted_generator(model, f, x, h);
                // 1/2 sigma^2 f'' = alpha f - drift f' for an exact solution.
                const double scale = 2.0 * model.discount * std::abs(f(x)) + std::abs(model.drift(x) * central_difference(f, x));
                CHECK(std::abs(residual) <= 1e-6 * scale);
            }
            CHECK(pair.wronskian(x) > 0.0);
        }
    }
}

TEST_CASE("FX fundamentals match the exponential solutions") {
    const double alpha = 0.2;
    const auto pair = fundamental_pair(fx_model(alpha));
    const double theta = std::sqrt(2.0 * alpha);
    for (double x : {-3.0, 0.0, 1.0, 4.5}) {
        CHECK(pair.psi(x) == doctest::Approx(std::exp(theta * x)).epsilon(1e-14));
        CHECK(pair.phi(x) == doctest::Approx(std::exp(-theta * x)).epsilon(1e-14));
    }
    CHECK(pair.psi(1.0) * pair.phi(1.0) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("F transform round trip") {
    for (const auto& model : {fx_model(), labor_model()}) {
        const auto pair = fundamental_pair(model);
        const TransformF F(pair, model.fundamentals);
        const auto xs = linear_grid(model.window.lower, model.window.upper, 1002);
        for (std::size_t i = 1; i + 1 < xs.size(); ++i) {
            const double x = xs[i];
            REQUIRE(std::abs(F.inverse(F(x)) - x) <= 1e-10 * (1.0 + std::abs(x)));
        }
        CHECK(F.derivative(xs[500]) == doctest::Approx(central_difference([&](double x) { return F(x); }, xs[500])).epsilon(1e-6));
    }
}

TEST_CASE("numeric fundamentals agree with the closed forms up to normalization") {
    for (auto model : {fx_model(), labor_model()}) {
        const bool fx = model.window.lower < 0.0;
        // Wide windows: the numeric pair is exact only up to terms that decay
        // away from the window edges.
        model.window = fx ? StateInterval{-30.0, 30.0} : StateInterval{1e-3, 1e4};
        const auto exact = fundamental_pair(model);
        FundamentalOptions numeric_opts;
        numeric_opts.force_numeric = true;
        const auto numeric = fundamental_pair(model, numeric_opts);
        CHECK(numeric.approximate());
        const double ref = fx ? 0.0 : 3.0;
        const std::vector<double> xs = fx ? std::vector<double>{-5.0, -2.0, 1.0, 5.5} : std::vector<double>{0.3, 1.0, 10.0, 40.0};
        for (double x : xs) {
            CHECK(oracle::rel_err(numeric.psi(x) / numeric.psi(ref), exact.psi(x) / exact.psi(ref)) < 1e-6);
            CHECK(oracle::rel_err(numeric.phi(x) / numeric.phi(ref), exact.phi(x) / exact.phi(ref)) < 1e-6);
        }
    }
}

TEST_CASE("second-derivative sign rule for the transformed function") {
    const auto model = fx_model();
    const auto pair = fundamental_pair(model);
    const TransformF F(pair, model.fundamentals);
    const std::vector<RealFn> tests = {[](double x) { return x * x; }, [](double x) { return std::cos(x); },
                                       [](double x) { return -std::abs(x) * x * x; }};
    for (const auto& h : tests) {
        const RealFn W = to_transformed(h, F, pair);
        for (double x : {-2.0, -0.7, 0.4, 1.3, 3.0}) {
            const double y = F(x);
            const double dy = 1e-3 * y;
            const double w2 = second_difference(W, y, dy);
            const double gen = apply_discounted_generator(model, h, x, 1e-4);
            if (std::abs(w2) > 1e-8 && std::abs(gen) > 1e-6) CHECK((w2 > 0.0) == (gen > 0.0));
        }
    }
}

TEST_CASE("hitting_laplace") {
    const double alpha = 0.2;
    const auto pair = fundamental_pair(fx_model(alpha));
    SUBCASE("endpoints") {
        auto at_r = hitting_laplace(pair, 1.0, -1.0, 1.0);
        CHECK(at_r.up == doctest::Approx(1.0));
        CHECK(at_r.down == doctest::Approx(0.0));
        auto at_l = hitting_laplace(pair, -1.0, -1.0, 1.0);
        CHECK(at_l.up == doctest::Approx(0.0));
        CHECK(at_l.down == doctest::Approx(1.0));
    }
    SUBCASE("Brownian closed form via sinh") {
        const double th = std::sqrt(2.0 * alpha);
        for (double x : {-0.5, 0.0, 0.3}) {
            const auto h = hitting_laplace(pair, x, -1.0, 1.0);
            CHECK(h.up == doctest::Approx(std::sinh(th * (x + 1.0)) / std::sinh(2.0 * th)).epsilon(1e-12));
            CHECK(h.down == doctest::Approx(std::sinh(th * (1.0 - x)) / std::sinh(2.0 * th)).epsilon(1e-12));
            CHECK(h.up >= 0.0);
            CHECK(h.up + h.down <= 1.0);
        }
    }
    SUBCASE("monotone in the start point") {
        double prev = -1.0;
        for (double x = -0.9; x < 1.0; x += 0.1) {
            const double up = hitting_laplace(pair, x, -1.0, 1.0).up;
            CHECK(up > prev);
            prev = up;
        }
    }
    SUBCASE("start outside the interval") {
        CHECK_THROWS_AS(hitting_laplace(pair, 2.0, -1.0, 1.0), Error);
        try {
            hitting_laplace(pair, 2.0, -1.0, 1.0);
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::Domain);
        }
    }
}

TEST_CASE("expected_reward_g") {
    const auto model = fx_model();
    const auto pair = fundamental_pair(model);
    SUBCASE("zero reward") {
        const auto g = expected_reward_g(model, pair, [](double) { return 0.0; });
        CHECK(g(3.0) == 0.0);
    }
    SUBCASE("FX quadratic reward, numeric route") {
        const auto g = expected_reward_g(model, pair, [](double x) { return -x * x; });
        for (double x : {-4.0, 0.0, 2.5, 10.0}) CHECK(g(x) == doctest::Approx(oracle::fx_g(0.2, x)).epsilon(1e-7));
        CHECK(g(0.0) == doctest::Approx(-25.0).epsilon(1e-8));
    }
    SUBCASE("labor reward, numeric route") {
        const LaborParams p;
        const auto lm = build_labor(p);
        const auto lp = fundamental_pair(lm.model);
        const auto g = expected_reward_g(lm.model, lp, lm.cost.running_reward);
        for (double xi : {0.5, 3.0, 20.0}) CHECK(g(xi) == doctest::Approx(labor_g(p, xi)).epsilon(1e-7));
    }
    SUBCASE("divergent reward") {
        const auto g = expected_reward_g(model, pair, [](double x) { return std::exp(x); });
        try {
            (void)g(0.0);
            FAIL("expected an integrability error");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::Integrability);
        }
    }
}

TEST_CASE("to_transformed identities") {
    const auto model = fx_model();
    const auto pair = fundamental_pair(model);
    const TransformF F(pair, model.fundamentals);
    const auto one = to_transformed([&](double x) { return pair.phi(x); }, F, pair);
    const auto id = to_transformed([&](double x) { return pair.psi(x); }, F, pair);
    const auto lin = to_transformed([&](double x) { return 2.5 * pair.psi(x) - 4.0 * pair.phi(x); }, F, pair);
    for (double y : {1e-3, 0.4, 1.0, 7.0, 300.0}) {
        CHECK(one(y) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(id(y) == doctest::Approx(y).epsilon(1e-12));
        CHECK(lin(y) == doctest::Approx(2.5 * y - 4.0).epsilon(1e-12));
    }
    CHECK_THROWS_AS(one(-1.0), Error);
}

TEST_CASE("transition_expectation uses the exact law") {
    const auto model = fx_model();
    CHECK(transition_expectation(model, 1.5, 2.0, [](double y) { return y * y; }) == doctest::Approx(1.5 * 1.5 + 2.0).epsilon(1e-10));
    CHECK(transition_expectation(model, 0.0, 1.0, [](double y) { return std::abs(y); }, 0.0) ==
          doctest::Approx(std::sqrt(2.0 / std::numbers::pi)).epsilon(1e-10));
    CHECK(transition_expectation(model, 0.7, 0.0, [](double y) { return y; }) == 0.7);
}

TEST_CASE("model validation") {
    auto model = fx_model();
    model.discount = 0.0;
    CHECK_THROWS_AS(model.validate(), Error);
    model = fx_model();
    model.window = {-infinity, 3.0};
    CHECK_THROWS_AS(model.validate(), Error);
}
