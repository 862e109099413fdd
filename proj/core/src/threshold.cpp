#include "impulse/threshold.hpp"

#include "impulse/error.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

namespace impulse {

void ThresholdCostStructure::validate(const DiffusionModel& model) const {
    require(static_cast<bool>(running_reward) || static_cast<bool>(reward_closed_form), ErrorKind::Configuration,
            "threshold cost needs a running reward or a closed-form g");
    require(static_cast<bool>(intervention_cost), ErrorKind::Configuration, "threshold cost needs K(x, y)");
    require(delay >= 0.0 && std::isfinite(delay), ErrorKind::Configuration, "delay must be finite and >= 0");
    require(std::isfinite(boundary_limit), ErrorKind::Configuration, "boundary limit must be finite");
    for (double x : linear_grid(model.window.lower, model.window.upper, 101)) {
        const double k = intervention_cost(x, x);
        if (!(k < 0.0)) {
            std::ostringstream msg;
            msg << "intervention must be costly: K(x, x) = " << k << " at x = " << x;
            fail(ErrorKind::Configuration, msg.str());
        }
    }
}

void ThresholdPolicy::validate(const DiffusionModel& model) const {
    require(model.window.contains(a) && model.window.contains(b), ErrorKind::Domain,
            "threshold policy levels must lie inside the computational window");
    require(a < b, ErrorKind::DegeneratePolicy, "threshold policy needs a < b");
}

ThresholdProblem::ThresholdProblem(DiffusionModel model, ThresholdCostStructure cost, ThresholdSolverConfig config,
                                   FundamentalOptions fundamentals)
    : model_(std::move(model)),
      cost_(std::move(cost)),
      config_(config),
      pair_(fundamental_pair(model_, fundamentals)),
      transform_(pair_, fundamentals.force_numeric ? std::nullopt : model_.fundamentals),
      g_(expected_reward_g(model_, pair_, cost_.running_reward, cost_.reward_closed_form)),
      delay_discount_(std::exp(-model_.discount * cost_.delay)) {
    cost_.validate(model_);
    require(config_.b_scan_points >= 10 && config_.a_grid_points >= 5 && config_.majorant_points >= 50,
            ErrorKind::Configuration, "threshold solver grids are too coarse");
}

double ThresholdProblem::kbar(double x, double y) const {
    return cost_.intervention_cost(x, y) - g_(x) + g_(y);
}

double ThresholdProblem::delayed_cost(double x, double a) const {
    if (cost_.delayed_cost_closed_form) return cost_.delayed_cost_closed_form(x, a);
    if (cost_.delay == 0.0) return kbar(x, a);
    require(model_.transition.has_value(), ErrorKind::Configuration,
            "delayed cost needs a closed form or an exact transition law");
    // The intervention cost usually has a kink at X = a; split the quadrature there.
    const double mean = transition_expectation(model_, x, cost_.delay, [&](double y) { return kbar(y, a); }, a);
    return delay_discount_ * mean;
}

double ThresholdProblem::delayed_cost_dx(double x, double a) const {
    if (cost_.delayed_cost_closed_form_dx) return cost_.delayed_cost_closed_form_dx(x, a);
    return central_difference([&](double s) { return delayed_cost(s, a); }, x);
}

double ThresholdProblem::transformed_cost_at_state(double x, double a) const {
    return delayed_cost(x, a) / pair_.phi(x);
}

double ThresholdProblem::transformed_cost_slope_at_state(double x, double a) const {
    const double phi = pair_.phi(x);
    const double numerator = delayed_cost_dx(x, a) * phi - delayed_cost(x, a) * pair_.phi_prime(x);
    return numerator / (phi * phi) / transform_.derivative(x);
}

double ThresholdProblem::transformed_cost(double y, double a) const {
    return transformed_cost_at_state(transform_.inverse(y), a);
}

double ThresholdProblem::transformed_cost_prime(double y, double a) const {
    return transformed_cost_slope_at_state(transform_.inverse(y), a);
}

double ThresholdProblem::rho_for(double a, double b) const {
    require(b > a, ErrorKind::DegeneratePolicy, "continuous fit needs b > a");
    const double e = delay_discount_;
    const double l_c = cost_.boundary_limit;
    const double ratio = pair_.phi(a) / pair_.phi(b);
    const double denominator = transform_(b) - e * ratio * transform_(a);
    if (!(denominator > 0.0)) {
        std::ostringstream msg;
        msg << "continuous-fit system is singular at (a, b) = (" << a << ", " << b << ")";
        fail(ErrorKind::DegeneratePolicy, msg.str());
    }
    return (transformed_cost_at_state(b, a) + l_c * (e * ratio - 1.0)) / denominator;
}

SmoothFitResidual ThresholdProblem::smooth_fit_residual(double a, double b) const {
    const double rho = rho_for(a, b);
    const double e = delay_discount_;
    const double phi_b = pair_.phi(b);
    const double shift = -e * (rho * transform_(a) + cost_.boundary_limit) * pair_.phi(a) * pair_.phi_prime(b) /
                         (phi_b * phi_b * transform_.derivative(b));
    const double slope = transformed_cost_slope_at_state(b, a);
    SmoothFitResidual out;
    out.rho = rho;
    out.raw = rho - (shift + slope);
    const double scale = std::abs(rho) + std::abs(shift) + std::abs(slope);
    out.scaled = scale > 0.0 ? out.raw / scale : out.raw;
    return out;
}

BoundarySolve ThresholdProblem::solve_b_given_a(double a) const {
    const double hi = model_.window.upper;
    require(a >= model_.window.lower && a < hi, ErrorKind::Domain, "a must lie inside the computational window");
    const auto grid =
        geometric_offsets_grid(a, hi, config_.b_first_offset * std::max(1.0, std::abs(a)), config_.b_scan_points);

    auto residual = [&](double b) {
        try {
            return smooth_fit_residual(a, b).raw;
        } catch (const Error&) {
            return std::numeric_limits<double>::quiet_NaN();
        }
    };
    std::vector<double> values(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) values[i] = residual(grid[i]);

    // rho_b has the sign of -residual, so local maxima of b -> rho are the
    // crossings from negative to positive residual.
    BoundarySolve best;
    best.rho = -infinity;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        if (!(values[i] < 0.0 && values[i + 1] >= 0.0)) continue;
        ++best.sign_changes;
        const auto root = solve_bracketed(residual, grid[i], grid[i + 1], values[i], values[i + 1]);
        const auto fit = smooth_fit_residual(a, root.root);
        if (fit.rho > best.rho) {
            best.b = root.root;
            best.rho = fit.rho;
            best.residual = fit;
        }
    }
    if (best.sign_changes == 0) {
        std::ostringstream msg;
        msg << "smooth-fit residual has no admissible sign change on (" << a << ", " << hi << "]";
        fail(ErrorKind::NoThreshold, msg.str());
    }
    return best;
}

MajorantEvaluation ThresholdProblem::majorant_value(double a, double gamma) const {
    const double e = delay_discount_;
    const double l_c = cost_.boundary_limit;
    auto shifted = [&](double x) { return (delayed_cost(x, a) + e * gamma) / pair_.phi(x); };

    // Threshold strategies stop only above the reset level, so candidate
    // stopping points are restricted to [a, x_hi].
    const auto xs = linear_grid(a, model_.window.upper, config_.majorant_points);
    struct Node {
        double y;
        double h;
        std::size_t index;  // grid index; npos for the anchor
    };
    constexpr std::size_t anchor = std::numeric_limits<std::size_t>::max();
    auto slope = [](const Node& p, const Node& q) { return (q.h - p.h) / (q.y - p.y); };

    // Upper hull of the anchor (0, l_c) and the positive part of R^gamma.
    std::vector<Node> hull{{0.0, l_c, anchor}};
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const Node node{transform_(xs[i]), std::max(shifted(xs[i]), 0.0), i};
        while (hull.size() >= 2 && slope(hull[hull.size() - 2], hull.back()) <= slope(hull.back(), node))
            hull.pop_back();
        hull.push_back(node);
    }
    require(hull.size() >= 2, ErrorKind::OracleFailure, "concave majorant is degenerate");

    // Refine the first tangency continuously: it maximizes the chord slope from the anchor.
    const std::size_t j = hull[1].index;
    const double lo = xs[j == 0 ? 0 : j - 1];
    const double hi = xs[std::min(j + 1, xs.size() - 1)];
    auto chord = [&](double x) { return (std::max(shifted(x), 0.0) - l_c) / transform_(x); };
    const auto refined = maximize_on_interval(chord, lo, hi, 1e-12 * std::max(1.0, std::abs(hi)));

    MajorantEvaluation out;
    out.tangency = chord(xs[j]) > refined.value ? xs[j] : refined.argmax;
    out.slope = std::max(refined.value, chord(xs[j]));

    const double y_a = transform_(a);
    double w;
    if (y_a <= transform_(out.tangency)) {
        w = out.slope * y_a + l_c;
    } else {
        std::size_t k = 1;
        while (k + 1 < hull.size() && hull[k + 1].y < y_a) ++k;
        if (k + 1 >= hull.size()) {
            w = hull.back().h;
        } else {
            const double t = (y_a - hull[k].y) / (hull[k + 1].y - hull[k].y);
            w = hull[k].h + t * (hull[k + 1].h - hull[k].h);
        }
        w = std::max(w, std::max(shifted(a), 0.0));
    }
    out.value_at_a = pair_.phi(a) * w;
    return out;
}

GammaFixedPoint ThresholdProblem::gamma_fixed_point_oracle(double a) const {
    require(model_.window.contains(a), ErrorKind::Domain, "a must lie inside the computational window");
    double best = -infinity;
    for (double x : linear_grid(model_.window.lower, model_.window.upper, config_.majorant_points))
        best = std::max(best, delayed_cost(x, a));
    require(best > 0.0, ErrorKind::OracleFailure,
            "positivity condition fails: the delayed intervention reward is never positive on the window");

    GammaFixedPoint out;
    double gamma = std::max(0.0, majorant_value(a, 0.0).value_at_a);
    for (int k = 1; k <= config_.gamma_max_iterations; ++k) {
        const auto step = majorant_value(a, gamma);
        const double next = step.value_at_a;
        out.iterations = k;
        out.tangency = step.tangency;
        out.slope = step.slope;
        if (!std::isfinite(next)) break;
        if (std::abs(next - gamma) <= config_.gamma_tolerance * (1.0 + std::abs(next))) {
            out.gamma_star = next;
            return out;
        }
        gamma = next;
    }
    std::ostringstream msg;
    msg << "gamma fixed-point iteration did not converge at a = " << a;
    fail(ErrorKind::OracleFailure, msg.str());
}

std::vector<std::string> ThresholdProblem::check_hypotheses(double a) const {
    std::vector<std::string> warnings;
    const auto xs = linear_grid(model_.window.lower, model_.window.upper, 201);
    double best = -infinity;
    for (double x : xs) best = std::max(best, delayed_cost(x, a));
    if (!(best > 0.0)) warnings.emplace_back("delayed intervention reward is never positive on the window");

    // R should be eventually increasing and concave in the transformed variable.
    const std::size_t tail = xs.size() * 3 / 4;
    bool increasing = true;
    bool concave = true;
    for (std::size_t i = tail; i + 2 < xs.size(); ++i) {
        const double y0 = transform_(xs[i]), y1 = transform_(xs[i + 1]), y2 = transform_(xs[i + 2]);
        const double r0 = transformed_cost_at_state(xs[i], a);
        const double r1 = transformed_cost_at_state(xs[i + 1], a);
        const double r2 = transformed_cost_at_state(xs[i + 2], a);
        const double s01 = (r1 - r0) / (y1 - y0);
        const double s12 = (r2 - r1) / (y2 - y1);
        if (s12 <= 0.0) increasing = false;
        if (s12 > s01 * (1.0 + 1e-9) + 1e-300) concave = false;
    }
    if (!increasing) warnings.emplace_back("transformed delayed reward is not increasing near the window top");
    if (!concave) warnings.emplace_back("transformed delayed reward is not concave near the window top");
    return warnings;
}

ThresholdSolution::ThresholdSolution(ThresholdProblem problem, double a, double b, double rho,
                                     ThresholdDiagnostics diagnostics)
    : problem_(std::move(problem)), a_(a), b_(b), rho_(rho), diagnostics_(std::move(diagnostics)) {
    require(a < b, ErrorKind::DegeneratePolicy, "threshold solution needs a < b");
    const auto& pair = problem_.fundamentals();
    u_at_a_ = rho_ * pair.psi(a_) + boundary_limit() * pair.phi(a_);
}

double ThresholdSolution::u(double x) const {
    const auto& pair = problem_.fundamentals();
    if (x <= b_) return rho_ * pair.psi(x) + boundary_limit() * pair.phi(x);
    return problem_.delayed_cost(x, a_) + problem_.delay_discount() * u_at_a_;
}

double ThresholdSolution::transformed_value(double y) const {
    const double x = problem_.transform().inverse(y);
    return u(x) / problem_.fundamentals().phi(x);
}

ThresholdSolution optimize_threshold(const ThresholdProblem& problem) {
    const auto& window = problem.model().window;
    const auto& config = problem.config();
    const double margin = 1e-3 * (window.upper - window.lower);
    const auto grid = linear_grid(window.lower + margin, window.upper - 50.0 * margin, config.a_grid_points);

    ThresholdDiagnostics diagnostics;
    auto rho_of = [&](double a) {
        try {
            return problem.solve_b_given_a(a).rho;
        } catch (const Error&) {
            return -infinity;
        }
    };

    std::size_t best = 0;
    double best_rho = -infinity;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        OuterTracePoint point{grid[i], std::numeric_limits<double>::quiet_NaN(), -infinity};
        try {
            const auto solve = problem.solve_b_given_a(grid[i]);
            point.b = solve.b;
            point.rho = solve.rho;
        } catch (const Error&) {
        }
        diagnostics.outer_trace.push_back(point);
        if (point.rho > best_rho) {
            best_rho = point.rho;
            best = i;
        }
    }
    require(std::isfinite(best_rho), ErrorKind::NoThreshold, "no admissible threshold for any reset level a");
    if (best == 0 || best + 1 == grid.size())
        diagnostics.warnings.emplace_back("optimal reset level lies at the edge of the computational window");

    const double lo = grid[best == 0 ? 0 : best - 1];
    const double hi = grid[std::min(best + 1, grid.size() - 1)];
    const auto refined = maximize_on_interval(rho_of, lo, hi, config.a_tolerance);
    const double a_star = refined.value >= best_rho ? refined.argmax : grid[best];
    const auto solve = problem.solve_b_given_a(a_star);

    diagnostics.residual = solve.residual;
    if (std::abs(solve.residual.scaled) > config.residual_tolerance) {
        std::ostringstream msg;
        msg << "smooth-fit residual " << solve.residual.scaled << " exceeds tolerance";
        diagnostics.warnings.push_back(msg.str());
    }
    if (solve.sign_changes > 1)
        diagnostics.warnings.emplace_back("smooth-fit residual has several roots; kept the one maximizing rho");
    for (auto& w : problem.check_hypotheses(a_star)) diagnostics.warnings.push_back(std::move(w));
    return ThresholdSolution(problem, a_star, solve.b, solve.rho, std::move(diagnostics));
}

ThresholdSolution threshold_solution_for(const ThresholdProblem& problem, const ThresholdPolicy& policy) {
    policy.validate(problem.model());
    ThresholdDiagnostics diagnostics;
    diagnostics.residual = problem.smooth_fit_residual(policy.a, policy.b);
    return ThresholdSolution(problem, policy.a, policy.b, diagnostics.residual.rho, std::move(diagnostics));
}

}  // namespace impulse
