#pragma once

#include "impulse/band.hpp"
#include "impulse/threshold.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace impulse {

struct SimConfig {
    std::size_t n_paths = 100000;
    double dt = 1e-3;
    /// Defaults to 30 / discount.
    std::optional<double> horizon;
    std::uint64_t seed = 20240611;
    bool bridge_correction = true;
    bool antithetic = true;
    /// 0: IMPULSE_THREADS from the environment, else hardware concurrency.
    unsigned threads = 0;
    /// Paths (or antithetic pairs) per reduction block; fixes the reduction tree.
    std::size_t block_size = 512;

    void validate() const;
    double horizon_for(double discount) const { return horizon.value_or(30.0 / discount); }
};

/// Worker count used when SimConfig::threads == 0.
unsigned default_thread_count();

struct SimDiagnostics {
    std::uint64_t upper_impulses = 0;   // delayed impulses executed
    std::uint64_t lower_impulses = 0;   // immediate (hire-side) impulses
    std::uint64_t bridge_detections = 0;  // crossings found only by the bridge test
    std::uint64_t exclusion_violations = 0;  // hire impulses inside a delay window
    std::uint64_t pending_at_horizon = 0;
    std::string bias_direction;
    std::vector<std::string> warnings;
};

struct PolicyEstimate {
    double mean = 0.0;
    double standard_error = 0.0;
    std::size_t n_paths = 0;
    double discounted_tail_bound = 0.0;
    std::uint64_t seed = 0;
    double horizon = 0.0;
    double dt = 0.0;
    SimDiagnostics diagnostics;

    double z_score(double reference) const { return standard_error > 0.0 ? (mean - reference) / standard_error : 0.0; }
};

/// Discounted reward of a threshold policy started at x0: running reward by the
/// trapezoid rule on exact transition samples, impulse K(X_{(T+delay)-}, a) at
/// T + delay, no new decision while a delay window is open.
PolicyEstimate simulate_threshold(const ThresholdProblem& problem, const ThresholdPolicy& policy, double x0,
                                  const SimConfig& config);

/// Band policy: immediate jump p -> q below, delayed jump to c after hitting d;
/// lower crossings are ignored while a delay window is open.
PolicyEstimate simulate_band(const BandProblem& problem, const BandPolicy& policy, double x0,
                             const SimConfig& config);

/// One-shot estimate of E^x[h(X_t)] with exact transition sampling.
PolicyEstimate mc_transition_expectation(const DiffusionModel& model, double x, double t, const RealFn& h,
                                         const SimConfig& config);

/// r(x; a) = E^x[exp(-alpha delay) Kbar(X_delay, a)] by exact sampling.
PolicyEstimate mc_delayed_cost(const ThresholdProblem& problem, double x, double a, const SimConfig& config);
PolicyEstimate mc_delayed_fire_cost(const BandProblem& problem, double x, double c, const SimConfig& config);

/// g(x) = E[f(X_T)] / alpha with T ~ Exp(alpha) independent of X (exact, no
/// time discretization).
PolicyEstimate mc_expected_reward(const DiffusionModel& model, const RealFn& reward, double x,
                                  const SimConfig& config);

struct HittingEstimate {
    PolicyEstimate up;
    PolicyEstimate down;
};

/// E[exp(-alpha tau) 1{exit at r}] and E[exp(-alpha tau) 1{exit at l}].
HittingEstimate mc_hitting_laplace(const DiffusionModel& model, double x, double l, double r,
                                   const SimConfig& config);

}  // namespace impulse
