#include "impulse/band.hpp"

#include "impulse/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

namespace impulse {

double BandCostStructure::hire_cost(double x, double y) const {
    return (y > x ? -c1 * (y - x) : 0.0) - c2 * x;
}

double BandCostStructure::hire_cost_dx(double x, double y) const {
    return (y > x ? c1 : 0.0) - c2;
}

double BandCostStructure::mixed_cost(double x, double y) const {
    if (x > y) return -(c3 * (x - y) + c4 * x);
    return hire_cost(x, y);
}

void BandCostStructure::validate() const {
    for (double k : {c1, c2, c3, c4})
        require(k > 0.0 && std::isfinite(k), ErrorKind::Configuration, "band costs c1..c4 must be positive");
    require(delay >= 0.0 && std::isfinite(delay), ErrorKind::Configuration, "delay must be finite and >= 0");
    require(static_cast<bool>(running_reward) || static_cast<bool>(reward_closed_form), ErrorKind::Configuration,
            "band cost needs a running reward or a closed-form g");
}

void BandPolicy::validate(const DiffusionModel& model) const {
    require(p < q && q < c && c < d, ErrorKind::DegeneratePolicy, "band policy needs p < q < c < d");
    require(model.interval.contains(p) && model.interval.contains(d), ErrorKind::Domain,
            "band levels must lie inside the state interval");
}

namespace {

// Positive windows are scanned and refined in log coordinates.
struct Coordinates {
    bool log;
    double to(double x) const { return log ? std::log(x) : x; }
    double from(double s) const { return log ? std::exp(s) : s; }
};

std::vector<double> scan_grid(double lo, double hi, std::size_t n, bool log) {
    // Open interval: drop the end points.
    auto grid = log ? log_grid(lo, hi, n + 2) : linear_grid(lo, hi, n + 2);
    return {grid.begin() + 1, grid.end() - 1};
}

}  // namespace

BandProblem::BandProblem(DiffusionModel model, BandCostStructure cost, BandSolverConfig config,
                         FundamentalOptions fundamentals)
    : model_(std::move(model)),
      cost_(std::move(cost)),
      config_(config),
      pair_(fundamental_pair(model_, fundamentals)),
      transform_(pair_, fundamentals.force_numeric ? std::nullopt : model_.fundamentals),
      g_(expected_reward_g(model_, pair_, cost_.running_reward, cost_.reward_closed_form)),
      delay_discount_(std::exp(-model_.discount * cost_.delay)) {
    cost_.validate();
    require(config_.pd_grid_points >= 4 && config_.qc_grid_points >= 4 && config_.residual_tolerance > 0.0,
            ErrorKind::Configuration, "band solver grids are too coarse");
}

double BandProblem::g_prime(double x) const {
    if (cost_.reward_closed_form_prime) return cost_.reward_closed_form_prime(x);
    return central_difference(g_, x);
}

double BandProblem::cbar1(double x, double y) const { return cost_.mixed_cost(x, y) - g_(x) + g_(y); }
double BandProblem::cbar2(double x, double y) const { return cost_.hire_cost(x, y) - g_(x) + g_(y); }

double BandProblem::delayed_fire_cost(double x, double c) const {
    if (cost_.delayed_cost_closed_form) return cost_.delayed_cost_closed_form(x, c);
    if (cost_.delay == 0.0) return cbar1(x, c);
    const double mean = transition_expectation(model_, x, cost_.delay, [&](double y) { return cbar1(y, c); }, c);
    return delay_discount_ * mean;
}

double BandProblem::delayed_fire_cost_dx(double x, double c) const {
    if (cost_.delayed_cost_closed_form_dx) return cost_.delayed_cost_closed_form_dx(x, c);
    return central_difference([&](double s) { return delayed_fire_cost(s, c); }, x);
}

double BandProblem::r1_at_state(double x, double c) const { return delayed_fire_cost(x, c) / pair_.phi(x); }

double BandProblem::r1_slope_at_state(double x, double c) const {
    const double phi = pair_.phi(x);
    const double numerator = delayed_fire_cost_dx(x, c) * phi - delayed_fire_cost(x, c) * pair_.phi_prime(x);
    return numerator / (phi * phi) / transform_.derivative(x);
}

double BandProblem::r2_at_state(double x, double q) const { return cbar2(x, q) / pair_.phi(x); }

double BandProblem::r2_slope_at_state(double x, double q) const {
    const double phi = pair_.phi(x);
    const double dx = cost_.hire_cost_dx(x, q) - g_prime(x);
    const double numerator = dx * phi - cbar2(x, q) * pair_.phi_prime(x);
    return numerator / (phi * phi) / transform_.derivative(x);
}

double BandProblem::transformed_r1(double y, double c) const { return r1_at_state(transform_.inverse(y), c); }
double BandProblem::transformed_r1_prime(double y, double c) const {
    return r1_slope_at_state(transform_.inverse(y), c);
}
double BandProblem::transformed_r2(double y, double q) const { return r2_at_state(transform_.inverse(y), q); }
double BandProblem::transformed_r2_prime(double y, double q) const {
    return r2_slope_at_state(transform_.inverse(y), q);
}

RhoTau BandProblem::rho_tau_for(const BandPolicy& policy) const {
    policy.validate(model_);
    const auto [p, q, c, d] = policy;
    const double e = delay_discount_;
    const double up = e * pair_.phi(c) / pair_.phi(d);
    const double down = pair_.phi(q) / pair_.phi(p);
    // rho F(d) + tau = e (rho F(c) + tau) phi(c)/phi(d) + R1(F(d); c)
    // rho F(p) + tau = (rho F(q) + tau) phi(q)/phi(p) + R2(F(p); q)
    const double a11 = transform_(d) - up * transform_(c);
    const double a12 = 1.0 - up;
    const double a21 = transform_(p) - down * transform_(q);
    const double a22 = 1.0 - down;
    const double b1 = r1_at_state(d, c);
    const double b2 = r2_at_state(p, q);
    const double det = a11 * a22 - a12 * a21;
    if (!(std::abs(det) > 1e-14 * (std::abs(a11 * a22) + std::abs(a12 * a21))) || !std::isfinite(det)) {
        std::ostringstream msg;
        msg << "continuous-fit system is singular for band (" << p << ", " << q << ", " << c << ", " << d << ")";
        fail(ErrorKind::DegeneratePolicy, msg.str());
    }
    return {(b1 * a22 - a12 * b2) / det, (a11 * b2 - a21 * b1) / det};
}

BandResiduals BandProblem::smooth_fit_system(const BandPolicy& policy) const {
    const auto [rho, tau] = rho_tau_for(policy);
    const auto [p, q, c, d] = policy;
    const double e = delay_discount_;

    const double phi_p = pair_.phi(p);
    const double shift_p =
        -(rho * transform_(q) + tau) * pair_.phi(q) * pair_.phi_prime(p) / (phi_p * phi_p * transform_.derivative(p));
    const double slope_p = r2_slope_at_state(p, q);

    const double phi_d = pair_.phi(d);
    const double shift_d = -e * (rho * transform_(c) + tau) * pair_.phi(c) * pair_.phi_prime(d) /
                           (phi_d * phi_d * transform_.derivative(d));
    const double slope_d = r1_slope_at_state(d, c);

    BandResiduals out;
    out.rho = rho;
    out.tau = tau;
    out.p = (shift_p + slope_p) - rho;
    out.d = rho - (shift_d + slope_d);
    const double scale_p = std::abs(rho) + std::abs(shift_p) + std::abs(slope_p);
    const double scale_d = std::abs(rho) + std::abs(shift_d) + std::abs(slope_d);
    out.p_scaled = scale_p > 0.0 ? out.p / scale_p : out.p;
    out.d_scaled = scale_d > 0.0 ? out.d / scale_d : out.d;
    return out;
}

std::optional<PdSolve> BandProblem::newton(double q, double c, double p0, double d0) const {
    const Coordinates coords{model_.window.lower > 0.0};
    const StateInterval& interval = model_.interval;
    auto feasible = [&](double p, double d) {
        return std::isfinite(p) && std::isfinite(d) && interval.contains(p) && p < q && d > c && interval.contains(d);
    };
    auto evaluate = [&](double s, double t) -> std::optional<BandResiduals> {
        const double p = coords.from(s), d = coords.from(t);
        if (!feasible(p, d)) return std::nullopt;
        try {
            auto r = smooth_fit_system({p, q, c, d});
            if (!std::isfinite(r.p_scaled) || !std::isfinite(r.d_scaled)) return std::nullopt;
            return r;
        } catch (const Error&) {
            return std::nullopt;
        }
    };

    double s = coords.to(p0), t = coords.to(d0);
    auto current = evaluate(s, t);
    if (!current) return std::nullopt;
    for (int it = 0; it <= config_.newton_max_iterations; ++it) {
        if (current->scaled_norm() < config_.residual_tolerance) {
            PdSolve out;
            out.p = coords.from(s);
            out.d = coords.from(t);
            out.rho = current->rho;
            out.tau = current->tau;
            out.residuals = *current;
            out.newton_iterations = it;
            return out;
        }
        // Central-difference Jacobian of the scaled residuals.
        const double hs = 1e-6 * (1.0 + std::abs(s));
        const double ht = 1e-6 * (1.0 + std::abs(t));
        const auto sp = evaluate(s + hs, t), sm = evaluate(s - hs, t);
        const auto tp = evaluate(s, t + ht), tm = evaluate(s, t - ht);
        if (!sp || !sm || !tp || !tm) return std::nullopt;
        const double j11 = (sp->p_scaled - sm->p_scaled) / (2.0 * hs);
        const double j21 = (sp->d_scaled - sm->d_scaled) / (2.0 * hs);
        const double j12 = (tp->p_scaled - tm->p_scaled) / (2.0 * ht);
        const double j22 = (tp->d_scaled - tm->d_scaled) / (2.0 * ht);
        const double det = j11 * j22 - j12 * j21;
        if (!(std::abs(det) > 0.0) || !std::isfinite(det)) return std::nullopt;
        const double ds = -(current->p_scaled * j22 - j12 * current->d_scaled) / det;
        const double dt = -(j11 * current->d_scaled - j21 * current->p_scaled) / det;

        double step = 1.0;
        bool accepted = false;
        for (int h = 0; h <= config_.newton_max_halvings; ++h, step *= 0.5) {
            const auto trial = evaluate(s + step * ds, t + step * dt);
            if (trial && trial->scaled_norm() < current->scaled_norm()) {
                s += step * ds;
                t += step * dt;
                current = trial;
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            // Stagnation at round-off level still counts when close to tolerance.
            if (current->scaled_norm() < 100.0 * config_.residual_tolerance) {
                PdSolve out{coords.from(s), coords.from(t), current->rho, current->tau, *current, it};
                return out;
            }
            return std::nullopt;
        }
    }
    return std::nullopt;
}

PdSolve BandProblem::solve_pd_given_qc(double q, double c, std::optional<std::pair<double, double>> seed) const {
    require(q < c, ErrorKind::DegeneratePolicy, "band solver needs q < c");
    require(model_.window.contains(q) && model_.window.contains(c), ErrorKind::Domain,
            "q and c must lie inside the computational window");
    if (seed) {
        if (auto solved = newton(q, c, seed->first, seed->second)) return *solved;
    }

    const bool log = model_.window.lower > 0.0;
    const auto ps = scan_grid(model_.window.lower, q, config_.pd_grid_points, log);
    const auto ds = scan_grid(c, model_.window.upper, config_.pd_grid_points, log);
    struct Cell {
        double norm;
        double p;
        double d;
    };
    std::vector<Cell> cells;
    cells.reserve(ps.size() * ds.size());
    for (double p : ps) {
        for (double d : ds) {
            try {
                const auto r = smooth_fit_system({p, q, c, d});
                const double norm = r.scaled_norm();
                if (std::isfinite(norm)) cells.push_back({norm, p, d});
            } catch (const Error&) {
            }
        }
    }
    const std::size_t seeds = std::min(cells.size(), config_.newton_seeds);
    std::partial_sort(cells.begin(), cells.begin() + static_cast<std::ptrdiff_t>(seeds), cells.end(),
                      [](const Cell& x, const Cell& y) { return x.norm < y.norm; });
    for (std::size_t i = 0; i < seeds; ++i) {
        if (auto solved = newton(q, c, cells[i].p, cells[i].d)) return *solved;
    }
    std::ostringstream msg;
    msg << "no admissible (p, d) seed for (q, c) = (" << q << ", " << c << ")";
    if (!cells.empty()) msg << "; best scaled residual on the grid " << cells.front().norm;
    fail(ErrorKind::NoBand, msg.str());
}

std::vector<std::string> BandProblem::check_hypotheses(double q, double c) const {
    std::vector<std::string> warnings;
    const bool log = model_.window.lower > 0.0;
    const auto xs = log ? log_grid(model_.window.lower, model_.window.upper, 401)
                        : linear_grid(model_.window.lower, model_.window.upper, 401);

    // R1: increasing and concave on the top tenth of the window.
    bool r1_increasing = true, r1_concave = true;
    for (std::size_t i = xs.size() * 9 / 10; i + 1 < xs.size(); ++i) {
        const double s0 = r1_slope_at_state(xs[i], c);
        const double s1 = r1_slope_at_state(xs[i + 1], c);
        if (s1 <= 0.0) r1_increasing = false;
        if (s1 > s0 * (1.0 + 1e-9)) r1_concave = false;
    }
    if (!r1_increasing) warnings.emplace_back("R1 is not increasing near the window top");
    if (!r1_concave) warnings.emplace_back("R1 is not concave near the window top");

    // R2 enters the construction only below F(q): it should rise to an
    // interior maximum and then fall until q.
    std::size_t turn = xs.size();
    for (std::size_t i = 0; i < xs.size() && xs[i] < q; ++i) {
        if (r2_slope_at_state(xs[i], q) <= 0.0) {
            turn = i;
            break;
        }
    }
    if (turn == xs.size() || turn == 0) {
        warnings.emplace_back("R2 has no interior maximum below q");
    } else {
        for (std::size_t i = turn; i < xs.size() && xs[i] < q; ++i) {
            if (r2_slope_at_state(xs[i], q) > 0.0) {
                warnings.emplace_back("R2 is not decreasing between its maximum and q");
                break;
            }
        }
    }
    return warnings;
}

BandSolution::BandSolution(BandProblem problem, BandPolicy policy, RhoTau rho_tau, BandDiagnostics diagnostics)
    : problem_(std::move(problem)),
      policy_(policy),
      rho_(rho_tau.rho),
      tau_(rho_tau.tau),
      diagnostics_(std::move(diagnostics)) {
    policy_.validate(problem_.model());
    u_at_q_ = continuation(policy_.q);
    u_at_c_ = continuation(policy_.c);
}

double BandSolution::continuation(double x) const {
    const auto& pair = problem_.fundamentals();
    return rho_ * pair.psi(x) + tau_ * pair.phi(x);
}

double BandSolution::u(double x) const {
    if (x <= policy_.p) return u_at_q_ + problem_.cbar2(x, policy_.q);
    if (x < policy_.d) return continuation(x);
    return problem_.delay_discount() * u_at_c_ + problem_.delayed_fire_cost(x, policy_.c);
}

double BandSolution::transformed_value(double y) const {
    const double x = problem_.transform().inverse(y);
    return u(x) / problem_.fundamentals().phi(x);
}

namespace {

double band_value_at(const BandProblem& problem, const PdSolve& solve, double q, double c, double x) {
    const BandPolicy policy{solve.p, q, c, solve.d};
    const auto& pair = problem.fundamentals();
    auto continuation = [&](double s) { return solve.rho * pair.psi(s) + solve.tau * pair.phi(s); };
    if (x <= policy.p) return continuation(q) + problem.cbar2(x, q);
    if (x < policy.d) return continuation(x);
    return problem.delay_discount() * continuation(c) + problem.delayed_fire_cost(x, c);
}

}  // namespace

BandSolution optimize_band(const BandProblem& problem) {
    const auto& config = problem.config();
    const auto& window = problem.model().window;
    const Coordinates coords{window.lower > 0.0};
    const auto grid = scan_grid(window.lower, window.upper, config.qc_grid_points, coords.log);

    struct Cell {
        std::size_t i;
        std::size_t j;
        PdSolve solve;
    };
    std::vector<Cell> cells;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        for (std::size_t j = i + 1; j < grid.size(); ++j) {
            try {
                cells.push_back({i, j, problem.solve_pd_given_qc(grid[i], grid[j])});
            } catch (const Error&) {
            }
        }
    }
    require(!cells.empty(), ErrorKind::NoBand, "no admissible band for any (q, c) on the grid");

    // Every policy value is comparable at a common state, and the optimal band
    // dominates at all of them. A first pass at the window's centre locates the
    // band; the reference is then frozen at the geometric mean of its (q, c).
    auto best_cell = [&](double x_ref) {
        std::size_t best = 0;
        double best_value = -infinity;
        for (std::size_t k = 0; k < cells.size(); ++k) {
            const auto& cell = cells[k];
            const double value = band_value_at(problem, cell.solve, grid[cell.i], grid[cell.j], x_ref);
            if (value > best_value) {
                best_value = value;
                best = k;
            }
        }
        return best;
    };
    const double centre = coords.log ? std::sqrt(window.lower * window.upper) : 0.5 * (window.lower + window.upper);
    double x_ref = config.reference_state.value_or(centre);
    std::size_t best = best_cell(x_ref);
    if (!config.reference_state) {
        x_ref = std::sqrt(grid[cells[best].i] * grid[cells[best].j]);
        if (!coords.log) x_ref = 0.5 * (grid[cells[best].i] + grid[cells[best].j]);
        best = best_cell(x_ref);
    }
    BandDiagnostics diagnostics;
    diagnostics.reference_state = x_ref;
    for (const auto& cell : cells)
        diagnostics.outer_trace.push_back(
            {grid[cell.i], grid[cell.j], band_value_at(problem, cell.solve, grid[cell.i], grid[cell.j], x_ref)});

    const std::size_t best_i = cells[best].i, best_j = cells[best].j;
    const PdSolve* best_solve = &cells[best].solve;
    if (best_i == 0 || best_j + 1 == grid.size() || best_j == best_i + 1)
        diagnostics.warnings.emplace_back("best (q, c) cell lies on the edge of the search grid");

    std::pair<double, double> warm{best_solve->p, best_solve->d};
    auto objective = [&](const std::vector<double>& z) {
        const double q = coords.from(z[0]), c = coords.from(z[1]);
        if (!(q < c) || !window.contains(q) || !window.contains(c)) return infinity;
        try {
            const auto solve = problem.solve_pd_given_qc(q, c, warm);
            warm = {solve.p, solve.d};
            return -band_value_at(problem, solve, q, c, x_ref);
        } catch (const Error&) {
            return infinity;
        }
    };
    const double step_i = coords.to(grid[std::min(best_i + 1, grid.size() - 1)]) - coords.to(grid[best_i]);
    const double step = 0.5 * std::abs(step_i);
    const double start_value = objective({coords.to(grid[best_i]), coords.to(grid[best_j])});
    const auto refined = nelder_mead(objective, {coords.to(grid[best_i]), coords.to(grid[best_j])}, {step, step},
                                     config.outer_x_tolerance, 1e-15 * std::max(1.0, std::abs(start_value)),
                                     config.outer_max_iterations);
    if (!refined.converged) diagnostics.warnings.emplace_back("outer (q, c) refinement hit its iteration cap");

    const double q = coords.from(refined.argmin[0]);
    const double c = coords.from(refined.argmin[1]);
    const auto solve = problem.solve_pd_given_qc(q, c, std::pair{best_solve->p, best_solve->d});
    diagnostics.residuals = solve.residuals;
    if (solve.residuals.scaled_norm() > config.residual_tolerance) {
        std::ostringstream msg;
        msg << "smooth-fit residual norm " << solve.residuals.scaled_norm() << " exceeds tolerance";
        diagnostics.warnings.push_back(msg.str());
    }
    for (auto& w : problem.check_hypotheses(q, c)) diagnostics.warnings.push_back(std::move(w));
    return BandSolution(problem, {solve.p, q, c, solve.d}, {solve.rho, solve.tau}, std::move(diagnostics));
}

BandSolution band_solution_for(const BandProblem& problem, const BandPolicy& policy) {
    BandDiagnostics diagnostics;
    diagnostics.residuals = problem.smooth_fit_system(policy);
    return BandSolution(problem, policy, {diagnostics.residuals.rho, diagnostics.residuals.tau},
                        std::move(diagnostics));
}

}  // namespace impulse
