#pragma once

#include "impulse/threshold.hpp"

#include <string_view>

namespace impulse {

/// Exchange-rate intervention: X is a standard Brownian motion, running reward
/// f(x) = -x^2, intervention reward K(x, y) = -c - lambda |x - y|.
struct ForexParams {
    double fixed_cost = 150.0;
    double proportional_cost = 50.0;
    double discount = 0.2;
    double delay = 1.0;

    void validate() const;
};

/// Which closed form for r(x; a) to install. `exact` is the Gaussian
/// expectation E|a - X_delay| with X_delay ~ N(x, delay); `printed` keeps the
/// widely quoted spread term 2 delay exp(-m^2 / 4 delay^2) + m (2 N(m / delay) - 1),
/// m = a - x, for audit only.
enum class ForexRVariant { exact, printed };

ForexRVariant parse_forex_r_variant(std::string_view name);
std::string_view to_string(ForexRVariant variant) noexcept;

struct ForexModel {
    ForexParams params;
    DiffusionModel model;
    ThresholdCostStructure cost;
};

ForexModel build_forex(const ForexParams& params, ForexRVariant variant = ForexRVariant::exact,
                       StateInterval window = {-30.0, 60.0});

double forex_g(const ForexParams& params, double x);
double forex_r_exact(const ForexParams& params, double x, double a);
double forex_r_exact_dx(const ForexParams& params, double x, double a);
double forex_r_printed(const ForexParams& params, double x, double a);
double forex_r_printed_dx(const ForexParams& params, double x, double a);

/// The optimal cost v_D = -v (the model is posed as cost minimization).
double forex_cost_value(const ThresholdSolution& solution, double x);

}  // namespace impulse
