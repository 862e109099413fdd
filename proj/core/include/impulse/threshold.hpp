#pragma once

#include "impulse/diffusion.hpp"

#include <string>
#include <vector>

namespace impulse {

/// Running reward f, intervention reward K(x, y) (negative: it is a cost),
/// implementation delay and the left-boundary intercept l_c. The closed-form
/// members are optional model-supplied overrides.
struct ThresholdCostStructure {
    RealFn running_reward;
    RealFn2 intervention_cost;
    double delay = 0.0;
    double boundary_limit = 0.0;

    RealFn reward_closed_form;           // g
    RealFn2 delayed_cost_closed_form;    // r(x, a), including exp(-alpha delay)
    RealFn2 delayed_cost_closed_form_dx; // d r / d x

    /// Throws Error{Configuration} unless delay >= 0 and K(x, x) < 0 on the window.
    void validate(const DiffusionModel& model) const;
};

/// Commit to intervene when the state reaches b; after the delay move it to a.
struct ThresholdPolicy {
    double a = 0.0;
    double b = 0.0;

    void validate(const DiffusionModel& model) const;
};

struct ThresholdSolverConfig {
    std::size_t b_scan_points = 400;
    double b_first_offset = 1e-3;
    double residual_tolerance = 1e-10;
    std::size_t a_grid_points = 200;
    double a_tolerance = 1e-6;
    std::size_t majorant_points = 4000;
    double gamma_tolerance = 1e-9;
    int gamma_max_iterations = 10000;
};

/// Jump of the transformed value W' across F(b): W'(F(b)-) - W'(F(b)+).
/// `scaled` divides by the sum of magnitudes of the terms that cancel.
struct SmoothFitResidual {
    double raw = 0.0;
    double scaled = 0.0;
    double rho = 0.0;
};

struct BoundarySolve {
    double b = 0.0;
    double rho = 0.0;
    SmoothFitResidual residual;
    std::size_t sign_changes = 0;
};

struct MajorantEvaluation {
    double value_at_a = 0.0;  // V_a^gamma(a)
    double tangency = 0.0;    // b^gamma: end of the linear piece
    double slope = 0.0;       // slope of the linear piece in transformed space
};

struct GammaFixedPoint {
    double gamma_star = 0.0;
    double tangency = 0.0;
    double slope = 0.0;
    int iterations = 0;
};

struct OuterTracePoint {
    double a = 0.0;
    double b = 0.0;
    double rho = 0.0;
};

/// One-sided threshold impulse control with delay for a fixed model and cost.
/// All members are immutable after construction.
class ThresholdProblem {
  public:
    ThresholdProblem(DiffusionModel model, ThresholdCostStructure cost, ThresholdSolverConfig config = {},
                     FundamentalOptions fundamentals = {});

    const DiffusionModel& model() const noexcept { return model_; }
    const ThresholdCostStructure& cost() const noexcept { return cost_; }
    const ThresholdSolverConfig& config() const noexcept { return config_; }
    const FundamentalPair& fundamentals() const noexcept { return pair_; }
    const TransformF& transform() const noexcept { return transform_; }

    /// exp(-alpha delay).
    double delay_discount() const noexcept { return delay_discount_; }

    double g(double x) const { return g_(x); }

    /// K(x, y) - g(x) + g(y).
    double kbar(double x, double y) const;

    /// r(x; a) = E^x[exp(-alpha delay) kbar(X_delay, a)].
    double delayed_cost(double x, double a) const;
    double delayed_cost_dx(double x, double a) const;

    /// R(y; a) = r(F^{-1}(y); a) / phi(F^{-1}(y)) and its y-derivative.
    double transformed_cost(double y, double a) const;
    double transformed_cost_prime(double y, double a) const;

    /// Slope of the transformed value on (0, F(b)] from the continuous-fit equation.
    double rho_for(double a, double b) const;

    SmoothFitResidual smooth_fit_residual(double a, double b) const;

    /// Unique root of the smooth-fit equation above a (maximizer of b -> rho).
    BoundarySolve solve_b_given_a(double a) const;

    /// V_a^gamma(a) from the smallest non-negative concave majorant of
    /// R^gamma(y) = (r(x; a) + exp(-alpha delay) gamma) / phi(x) through (0, l_c),
    /// with stopping restricted to x >= a as in the threshold class.
    MajorantEvaluation majorant_value(double a, double gamma) const;

    /// Fixed point gamma* = V_a^{gamma*}(a); independent of the smooth-fit route.
    GammaFixedPoint gamma_fixed_point_oracle(double a) const;

    /// Numerical check of the uniqueness hypotheses for fixed a; returns warnings.
    std::vector<std::string> check_hypotheses(double a) const;

  private:
    double transformed_cost_at_state(double x, double a) const;
    double transformed_cost_slope_at_state(double x, double a) const;

    DiffusionModel model_;
    ThresholdCostStructure cost_;
    ThresholdSolverConfig config_;
    FundamentalPair pair_;
    TransformF transform_;
    RealFn g_;
    double delay_discount_;
};

struct ThresholdDiagnostics {
    SmoothFitResidual residual;
    std::vector<OuterTracePoint> outer_trace;
    std::vector<std::string> warnings;
};

/// Optimal (a*, b*, rho*) with the assembled value functions
///   u(x) = rho psi(x) + l_c phi(x)                     for x <= b
///   u(x) = r(x; a) + exp(-alpha delay) u(a)           for x > b
/// and v = u + g.
class ThresholdSolution {
  public:
    ThresholdSolution(ThresholdProblem problem, double a, double b, double rho, ThresholdDiagnostics diagnostics = {});

    double a_star() const noexcept { return a_; }
    double b_star() const noexcept { return b_; }
    double rho_star() const noexcept { return rho_; }
    double boundary_limit() const noexcept { return problem_.cost().boundary_limit; }
    const ThresholdProblem& problem() const noexcept { return problem_; }
    const ThresholdDiagnostics& diagnostics() const noexcept { return diagnostics_; }

    double u(double x) const;
    double v(double x) const { return u(x) + problem_.g(x); }
    /// Transformed value W(y) = (u / phi)(F^{-1}(y)).
    double transformed_value(double y) const;

  private:
    ThresholdProblem problem_;
    double a_;
    double b_;
    double rho_;
    double u_at_a_;
    ThresholdDiagnostics diagnostics_;
};

/// Third stage: maximize a -> rho(a, b(a)) over the window.
ThresholdSolution optimize_threshold(const ThresholdProblem& problem);

/// Assemble a solution for a fixed policy, computing rho from the continuous fit.
ThresholdSolution threshold_solution_for(const ThresholdProblem& problem, const ThresholdPolicy& policy);

}  // namespace impulse
