#include "impulse/forex.hpp"

#include "impulse/error.hpp"
#include "impulse/normal.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace impulse {

void ForexParams::validate() const {
    require(fixed_cost > 0.0 && std::isfinite(fixed_cost), ErrorKind::Configuration, "forex: c must be > 0");
    require(proportional_cost >= 0.0 && std::isfinite(proportional_cost), ErrorKind::Configuration,
            "forex: lambda must be >= 0");
    require(discount > 0.0 && std::isfinite(discount), ErrorKind::Configuration, "forex: alpha must be > 0");
    require(delay >= 0.0 && std::isfinite(delay), ErrorKind::Configuration, "forex: delta must be >= 0");
}

ForexRVariant parse_forex_r_variant(std::string_view name) {
    if (name == "exact") return ForexRVariant::exact;
    if (name == "printed") return ForexRVariant::printed;
    fail(ErrorKind::Configuration, "unknown r variant '" + std::string(name) + "' (expected exact|printed)");
}

std::string_view to_string(ForexRVariant variant) noexcept {
    return variant == ForexRVariant::exact ? "exact" : "printed";
}

double forex_g(const ForexParams& p, double x) {
    return -(x * x / p.discount + 1.0 / (p.discount * p.discount));
}

namespace {

// E|m + s Z| for Z ~ N(0, 1).
double folded_normal_mean(double m, double s) {
    if (s == 0.0) return std::abs(m);
    return s * std::sqrt(2.0 / std::numbers::pi) * std::exp(-0.5 * m * m / (s * s)) +
           m * (1.0 - 2.0 * normal_cdf(-m / s));
}

}  // namespace

double forex_r_exact(const ForexParams& p, double x, double a) {
    const double e = std::exp(-p.discount * p.delay);
    const double spread = folded_normal_mean(x - a, std::sqrt(p.delay));
    return e * (-p.fixed_cost - p.proportional_cost * spread + (x * x + p.delay - a * a) / p.discount);
}

double forex_r_exact_dx(const ForexParams& p, double x, double a) {
    const double e = std::exp(-p.discount * p.delay);
    const double m = x - a;
    const double slope = p.delay == 0.0 ? (m > 0.0 ? 1.0 : m < 0.0 ? -1.0 : 0.0)
                                        : 2.0 * normal_cdf(m / std::sqrt(p.delay)) - 1.0;
    return e * (-p.proportional_cost * slope + 2.0 * x / p.discount);
}

double forex_r_printed(const ForexParams& p, double x, double a) {
    if (p.delay == 0.0) return forex_r_exact(p, x, a);
    const double e = std::exp(-p.discount * p.delay);
    const double d = p.delay;
    const double m = a - x;
    const double spread = 2.0 * d * std::exp(-m * m / (4.0 * d * d)) + m * (-1.0 + 2.0 * normal_cdf(m / d));
    return e * (-p.fixed_cost - p.proportional_cost * spread + (x * x - a * a + d) / p.discount);
}

double forex_r_printed_dx(const ForexParams& p, double x, double a) {
    if (p.delay == 0.0) return forex_r_exact_dx(p, x, a);
    const double e = std::exp(-p.discount * p.delay);
    const double d = p.delay;
    const double m = a - x;
    const double spread_dm = -(m / d) * std::exp(-m * m / (4.0 * d * d)) + 2.0 * normal_cdf(m / d) - 1.0 +
                             2.0 * (m / d) * normal_pdf(m / d);
    return e * (p.proportional_cost * spread_dm + 2.0 * x / p.discount);
}

ForexModel build_forex(const ForexParams& params, ForexRVariant variant, StateInterval window) {
    params.validate();
    const double k = std::sqrt(2.0 * params.discount);

    ForexModel out;
    out.params = params;
    auto& m = out.model;
    m.name = "forex";
    m.drift = [](double) { return 0.0; };
    m.volatility = [](double) { return 1.0; };
    m.interval = {-infinity, infinity};
    m.discount = params.discount;
    m.window = window;
    m.fundamentals = ClosedFormFundamentals{
        [k](double x) { return std::exp(k * x); },
        [k](double x) { return std::exp(-k * x); },
        [k](double x) { return k * std::exp(k * x); },
        [k](double x) { return -k * std::exp(-k * x); },
        [k](double x) { return std::exp(2.0 * k * x); },
        [k](double y) { return std::log(y) / (2.0 * k); },
        [k](double x) { return 2.0 * k * std::exp(2.0 * k * x); },
    };
    m.transition = ExactTransition{[](double x, double t, double z) { return x + std::sqrt(t) * z; },
                                   [](double x) { return x; }, 1.0, [](double y) { return y; }, 0.0};
    m.validate();

    auto& c = out.cost;
    c.running_reward = [](double x) { return -x * x; };
    c.intervention_cost = [fixed = params.fixed_cost, lambda = params.proportional_cost](double x, double y) {
        return -fixed - lambda * std::abs(x - y);
    };
    c.delay = params.delay;
    c.boundary_limit = 0.0;
    c.reward_closed_form = [params](double x) { return forex_g(params, x); };
    if (variant == ForexRVariant::exact) {
        c.delayed_cost_closed_form = [params](double x, double a) { return forex_r_exact(params, x, a); };
        c.delayed_cost_closed_form_dx = [params](double x, double a) { return forex_r_exact_dx(params, x, a); };
    } else {
        c.delayed_cost_closed_form = [params](double x, double a) { return forex_r_printed(params, x, a); };
        c.delayed_cost_closed_form_dx = [params](double x, double a) { return forex_r_printed_dx(params, x, a); };
    }
    c.validate(m);
    return out;
}

double forex_cost_value(const ThresholdSolution& solution, double x) { return -solution.v(x); }

}  // namespace impulse
