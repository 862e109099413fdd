#pragma once

#include "impulse/diffusion.hpp"

#include <optional>
#include <string>
#include <vector>

namespace impulse {

/// Two-sided costs: immediate hiring C2 and delayed firing C1.
///   C2(x, y) = -c1 (y - x) 1{y > x} - c2 x
///   C1(x, y) = -(c3 (x - y) + c4 x) 1{x > y} + C2(x, y) 1{y > x}
/// The delay applies to the upper (firing) trigger only.
struct BandCostStructure {
    double c1 = 0.0;
    double c2 = 0.0;
    double c3 = 0.0;
    double c4 = 0.0;
    double delay = 0.0;
    RealFn running_reward;

    RealFn reward_closed_form;          // g
    RealFn reward_closed_form_prime;    // g'
    RealFn2 delayed_cost_closed_form;   // r(x, c), including the delay discount
    RealFn2 delayed_cost_closed_form_dx;

    double hire_cost(double x, double y) const;
    double hire_cost_dx(double x, double y) const;
    double mixed_cost(double x, double y) const;

    void validate() const;
};

struct BandPolicy {
    double p = 0.0;
    double q = 0.0;
    double c = 0.0;
    double d = 0.0;

    /// p < q < c < d, all inside the state interval.
    void validate(const DiffusionModel& model) const;
};

struct BandSolverConfig {
    std::size_t pd_grid_points = 60;
    std::size_t qc_grid_points = 40;
    double residual_tolerance = 1e-9;
    int newton_max_iterations = 100;
    int newton_max_halvings = 60;
    std::size_t newton_seeds = 6;
    double outer_x_tolerance = 1e-7;  // in log q, log c
    int outer_max_iterations = 2000;
    /// Reference state for the outer objective u(x_ref). When empty, the
    /// coarse scan scores each cell at sqrt(q c) and the refinement freezes
    /// x_ref at the geometric mean of the best cell.
    std::optional<double> reference_state;
};

struct BandResiduals {
    double p = 0.0;         // W'(F(p)-) - W'(F(p)+)
    double d = 0.0;         // W'(F(d)-) - W'(F(d)+)
    double p_scaled = 0.0;
    double d_scaled = 0.0;
    double rho = 0.0;
    double tau = 0.0;

    double scaled_norm() const noexcept { return std::max(std::abs(p_scaled), std::abs(d_scaled)); }
};

struct RhoTau {
    double rho = 0.0;
    double tau = 0.0;
};

struct PdSolve {
    double p = 0.0;
    double d = 0.0;
    double rho = 0.0;
    double tau = 0.0;
    BandResiduals residuals;
    int newton_iterations = 0;
};

struct QcTracePoint {
    double q = 0.0;
    double c = 0.0;
    double objective = 0.0;
};

class BandProblem {
  public:
    BandProblem(DiffusionModel model, BandCostStructure cost, BandSolverConfig config = {},
                FundamentalOptions fundamentals = {});

    const DiffusionModel& model() const noexcept { return model_; }
    const BandCostStructure& cost() const noexcept { return cost_; }
    const BandSolverConfig& config() const noexcept { return config_; }
    const FundamentalPair& fundamentals() const noexcept { return pair_; }
    const TransformF& transform() const noexcept { return transform_; }
    double delay_discount() const noexcept { return delay_discount_; }

    double g(double x) const { return g_(x); }
    double g_prime(double x) const;

    double cbar1(double x, double y) const;
    double cbar2(double x, double y) const;

    /// r(x; c) = E^x[exp(-alpha delay) C1bar(X_delay, c)].
    double delayed_fire_cost(double x, double c) const;
    double delayed_fire_cost_dx(double x, double c) const;

    /// R1(y; c) = r(x; c)/phi(x) and R2(y; q) = C2bar(x, q)/phi(x) at x = F^{-1}(y).
    double transformed_r1(double y, double c) const;
    double transformed_r1_prime(double y, double c) const;
    double transformed_r2(double y, double q) const;
    double transformed_r2_prime(double y, double q) const;

    /// Slope and intercept of W on [F(p), F(d)] from the two continuous-fit equations.
    RhoTau rho_tau_for(const BandPolicy& policy) const;

    BandResiduals smooth_fit_system(const BandPolicy& policy) const;

    /// Unique (p, d) solving both smooth-fit equations for fixed (q, c).
    /// `seed` skips the grid scan when Newton converges from it.
    PdSolve solve_pd_given_qc(double q, double c, std::optional<std::pair<double, double>> seed = {}) const;

    /// Numerical check of the R1/R2 shape properties behind uniqueness.
    std::vector<std::string> check_hypotheses(double q, double c) const;

  private:
    double r1_at_state(double x, double c) const;
    double r1_slope_at_state(double x, double c) const;
    double r2_at_state(double x, double q) const;
    double r2_slope_at_state(double x, double q) const;
    std::optional<PdSolve> newton(double q, double c, double p0, double d0) const;

    DiffusionModel model_;
    BandCostStructure cost_;
    BandSolverConfig config_;
    FundamentalPair pair_;
    TransformF transform_;
    RealFn g_;
    double delay_discount_;
};

struct BandDiagnostics {
    BandResiduals residuals;
    std::vector<QcTracePoint> outer_trace;
    std::vector<std::string> warnings;
    double reference_state = 0.0;
};

/// Optimal band with the assembled value
///   u(x) = u(q) + C2bar(x, q)                        for x <= p
///   u(x) = rho psi(x) + tau phi(x)                    for p <= x <= d
///   u(x) = exp(-alpha delay) u(c) + r(x; c)           for x >= d
class BandSolution {
  public:
    BandSolution(BandProblem problem, BandPolicy policy, RhoTau rho_tau, BandDiagnostics diagnostics = {});

    const BandPolicy& policy() const noexcept { return policy_; }
    double rho_star() const noexcept { return rho_; }
    double tau_star() const noexcept { return tau_; }
    const BandProblem& problem() const noexcept { return problem_; }
    const BandDiagnostics& diagnostics() const noexcept { return diagnostics_; }

    double u(double x) const;
    double v(double x) const { return u(x) + problem_.g(x); }
    double transformed_value(double y) const;

  private:
    double continuation(double x) const;

    BandProblem problem_;
    BandPolicy policy_;
    double rho_;
    double tau_;
    double u_at_q_;
    double u_at_c_;
    BandDiagnostics diagnostics_;
};

/// Outer search over (q, c): coarse grid, then Nelder-Mead in (log q, log c).
BandSolution optimize_band(const BandProblem& problem);

/// Assemble the value of a fixed band policy from the continuous-fit system.
BandSolution band_solution_for(const BandProblem& problem, const BandPolicy& policy);

}  // namespace impulse
