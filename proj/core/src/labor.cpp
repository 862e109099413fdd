#include "impulse/labor.hpp"

#include "impulse/error.hpp"
#include "impulse/normal.hpp"

#include <cmath>
#include <sstream>

namespace impulse {

void LaborParams::validate() const {
    auto finite = [](double v) { return std::isfinite(v); };
    require(finite(demand_drift) && finite(rate), ErrorKind::Configuration, "labor: b and r must be finite");
    if (!(rate > demand_drift)) {
        std::ostringstream msg;
        msg << "labor: r = " << rate << " <= b = " << demand_drift
            << "; the expected reward is infinite and taking no action is optimal";
        fail(ErrorKind::NoAction, msg.str());
    }
    require(mu > 0.0 && mu < 1.0, ErrorKind::Configuration, "labor: mu must lie in (0, 1)");
    require(sigma > 0.0 && finite(sigma), ErrorKind::Configuration, "labor: sigma must be a positive constant");
    require(quit_rate > 0.0 && finite(quit_rate), ErrorKind::Configuration, "labor: delta must be > 0");
    require(productivity > 0.0 && finite(productivity), ErrorKind::Configuration, "labor: A must be > 0");
    require(wage > 0.0 && finite(wage), ErrorKind::Configuration, "labor: w must be > 0");
    require(delay >= 0.0 && finite(delay), ErrorKind::Configuration, "labor: delay must be >= 0");
    for (double c : {c1, c2, c3, c4})
        require(c > 0.0 && finite(c), ErrorKind::Configuration, "labor: c1..c4 must be > 0");
    const double s2 = sigma * sigma;
    const double denominator = rate - demand_drift + (demand_drift + quit_rate) * mu + 0.5 * s2 * mu - 0.5 * s2 * mu * mu;
    require(denominator > 0.0, ErrorKind::Configuration, "labor: the k1 denominator must be positive");
}

LaborExponents labor_exponents(const LaborParams& p) {
    const double a = 0.5 * p.sigma * p.sigma;
    const double b = -(a + p.demand_drift + p.quit_rate);
    const double c = p.demand_drift - p.rate;
    // c < 0, so the roots have opposite signs; avoid cancellation in the small one.
    const double root = std::sqrt(b * b - 4.0 * a * c);
    const double q = -0.5 * (b - root);  // b < 0: same sign as -b
    return {q / a, c / q};
}

double labor_k1(const LaborParams& p) {
    const double s2 = p.sigma * p.sigma;
    return std::pow(p.productivity, p.mu) /
           (p.rate - p.demand_drift + (p.demand_drift + p.quit_rate) * p.mu + 0.5 * s2 * p.mu - 0.5 * s2 * p.mu * p.mu);
}

double labor_k2(const LaborParams& p) { return -p.wage / (p.rate + p.quit_rate); }

double labor_g(const LaborParams& p, double xi) { return labor_k1(p) * std::pow(xi, p.mu) + labor_k2(p) * xi; }

double labor_g_prime(const LaborParams& p, double xi) {
    return labor_k1(p) * p.mu * std::pow(xi, p.mu - 1.0) + labor_k2(p);
}

LaborLogTerms labor_log_terms(const LaborParams& p, double xi, double c) {
    const double s = p.sigma * std::sqrt(p.delay);
    const double drift = p.demand_drift + p.quit_rate;
    const double half = 0.5 * p.sigma * p.sigma;
    const double ratio = std::log(xi / c) / s;
    return {ratio + (half - drift) * std::sqrt(p.delay) / p.sigma,
            ratio - (half + drift) * std::sqrt(p.delay) / p.sigma,
            -(drift + half * (1.0 - p.mu)) * p.mu * p.delay};
}

namespace {

double undelayed_cbar1(const LaborParams& p, double xi, double c) {
    const double cost = xi > c ? -(p.c3 * (xi - c) + p.c4 * xi) : (c > xi ? -p.c1 * (c - xi) : 0.0) - p.c2 * xi;
    return cost - labor_g(p, xi) + labor_g(p, c);
}

}  // namespace

double labor_r(const LaborParams& p, double xi, double c) {
    if (p.delay == 0.0) return undelayed_cbar1(p, xi, c);
    const auto [d1, d2, eps] = labor_log_terms(p, xi, c);
    const double k1 = labor_k1(p), k2 = labor_k2(p);
    const double decay = std::exp(-(p.demand_drift + p.quit_rate) * p.delay);
    const double bracket = -(p.c3 + p.c4) * decay * xi * normal_cdf(d1) + (p.c1 - p.c2) * decay * xi * normal_cdf(-d1) +
                           p.c3 * c * normal_cdf(d2) - p.c1 * c * normal_cdf(-d2) -
                           k1 * std::exp(eps) * std::pow(xi, p.mu) - k2 * decay * xi + k1 * std::pow(c, p.mu) + k2 * c;
    return std::exp((p.demand_drift - p.rate) * p.delay) * bracket;
}

double labor_r_dx(const LaborParams& p, double xi, double c) {
    if (p.delay == 0.0) {
        const double cost_dx = xi > c ? -(p.c3 + p.c4) : (c > xi ? p.c1 : 0.0) - p.c2;
        return cost_dx - labor_g_prime(p, xi);
    }
    const auto [d1, d2, eps] = labor_log_terms(p, xi, c);
    const double k1 = labor_k1(p), k2 = labor_k2(p);
    const double s = p.sigma * std::sqrt(p.delay);
    const double decay = std::exp(-(p.demand_drift + p.quit_rate) * p.delay);
    const double n1 = normal_pdf(d1) / s;          // d/dxi of xi N(d1) beyond N(d1)
    const double n2 = normal_pdf(d2) / (xi * s);   // d/dxi of N(d2)
    const double bracket = -(p.c3 + p.c4) * decay * (normal_cdf(d1) + n1) +
                           (p.c1 - p.c2) * decay * (normal_cdf(-d1) - n1) + p.c3 * c * n2 + p.c1 * c * n2 -
                           k1 * p.mu * std::exp(eps) * std::pow(xi, p.mu - 1.0) - k2 * decay;
    return std::exp((p.demand_drift - p.rate) * p.delay) * bracket;
}

LaborMoments labor_moments(const LaborParams& p, double xi, double c) {
    require(p.delay > 0.0, ErrorKind::Domain, "labor moments need a positive delay");
    const auto [d1, d2, eps] = labor_log_terms(p, xi, c);
    const double decay = std::exp(-(p.demand_drift + p.quit_rate) * p.delay);
    return {normal_cdf(d2), normal_cdf(-d2), xi * decay * normal_cdf(d1), xi * decay * normal_cdf(-d1)};
}

double labor_power_moment(const LaborParams& p, double xi, double theta) {
    const double drift = p.demand_drift + p.quit_rate;
    return std::pow(xi, theta) * std::exp(-(drift + 0.5 * p.sigma * p.sigma * (1.0 - theta)) * theta * p.delay);
}

LaborModel build_labor(const LaborParams& params, StateInterval window) {
    params.validate();
    const auto [beta1, beta2] = labor_exponents(params);
    const double spread = beta1 - beta2;
    const double drift = params.demand_drift + params.quit_rate;
    const double sigma = params.sigma;

    LaborModel out;
    out.params = params;
    auto& m = out.model;
    m.name = "labor";
    m.drift = [drift](double x) { return -drift * x; };
    m.volatility = [sigma](double x) { return sigma * x; };
    m.interval = {0.0, infinity};
    m.discount = params.rate - params.demand_drift;
    m.window = window;
    m.fundamentals = ClosedFormFundamentals{
        [beta1](double x) { return std::pow(x, beta1); },
        [beta2](double x) { return std::pow(x, beta2); },
        [beta1](double x) { return beta1 * std::pow(x, beta1 - 1.0); },
        [beta2](double x) { return beta2 * std::pow(x, beta2 - 1.0); },
        [spread](double x) { return std::pow(x, spread); },
        [spread](double y) { return std::pow(y, 1.0 / spread); },
        [spread](double x) { return spread * std::pow(x, spread - 1.0); },
    };
    m.transition = ExactTransition{
        [drift, sigma](double x, double t, double z) {
            return x * std::exp(-(drift + 0.5 * sigma * sigma) * t + sigma * std::sqrt(t) * z);
        },
        [](double x) { return std::log(x); }, sigma, [](double y) { return std::exp(y); },
        -(drift + 0.5 * sigma * sigma)};
    m.validate();

    auto& c = out.cost;
    c.c1 = params.c1;
    c.c2 = params.c2;
    c.c3 = params.c3;
    c.c4 = params.c4;
    c.delay = params.delay;
    c.running_reward = [params](double x) {
        return std::pow(params.productivity * x, params.mu) - params.wage * x;
    };
    c.reward_closed_form = [params](double x) { return labor_g(params, x); };
    c.reward_closed_form_prime = [params](double x) { return labor_g_prime(params, x); };
    c.delayed_cost_closed_form = [params](double x, double level) { return labor_r(params, x, level); };
    c.delayed_cost_closed_form_dx = [params](double x, double level) { return labor_r_dx(params, x, level); };
    c.validate();
    return out;
}

std::vector<std::string> labor_condition_warnings(const LaborParams& p, double q) {
    std::vector<std::string> warnings;
    if (!(p.c1 * q - labor_g(p, q) < 0.0)) {
        std::ostringstream msg;
        msg << "sign condition c1 q - g(q) < 0 fails at q = " << q;
        warnings.push_back(msg.str());
    }
    if (!(std::max(p.c1 - p.c2, p.c3 + p.c4) < std::abs(labor_k2(p))))
        warnings.emplace_back("cost condition max(c1 - c2, c3 + c4) < |k2| fails");
    return warnings;
}

double lift_value(const BandSolution& solution, double z, double l) {
    require(z > 0.0 && l > 0.0, ErrorKind::Domain, "lift_value needs z, l > 0");
    return z * solution.v(l / z);
}

}  // namespace impulse
