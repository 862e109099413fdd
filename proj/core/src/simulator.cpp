#include "impulse/simulator.hpp"

#include "impulse/error.hpp"
#include "impulse/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

namespace impulse {

void SimConfig::validate() const {
    require(n_paths >= 1, ErrorKind::Simulation, "simulation needs at least one path");
    require(dt > 0.0 && std::isfinite(dt), ErrorKind::Simulation, "simulation time step must be positive");
    require(!horizon || (*horizon > 0.0 && std::isfinite(*horizon)), ErrorKind::Simulation,
            "simulation horizon must be positive");
    require(block_size >= 1, ErrorKind::Simulation, "block size must be positive");
    require(n_paths / (antithetic ? 2 : 1) < (std::size_t{1} << 32), ErrorKind::Simulation,
            "too many paths for the 32-bit stream counter");
}

unsigned default_thread_count() {
    if (const char* env = std::getenv("IMPULSE_THREADS")) {
        char* end = nullptr;
        const long n = std::strtol(env, &end, 10);
        if (end != env && n > 0) return static_cast<unsigned>(n);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

// Counter domains keep the streams for different purposes disjoint.
enum Domain : std::uint32_t { kIncrement = 0, kBridge = 1, kOneShot = 2, kExpTime = 3, kExpNormal = 4 };

struct PathCounters {
    std::uint64_t upper = 0;
    std::uint64_t lower = 0;
    std::uint64_t bridge = 0;
    std::uint64_t exclusion = 0;
    std::uint64_t pending = 0;

    void add(const PathCounters& o) {
        upper += o.upper;
        lower += o.lower;
        bridge += o.bridge;
        exclusion += o.exclusion;
        pending += o.pending;
    }
};

struct PathResult {
    double value = 0.0;
    double tail = 0.0;
};

// Running mean/M2 of one reduction block (Chan et al. merge is order-fixed).
struct BlockStats {
    double count = 0.0;
    double mean = 0.0;
    double m2 = 0.0;
    double tail = 0.0;
    PathCounters counters;

    void push(double x) {
        count += 1.0;
        const double delta = x - mean;
        mean += delta / count;
        m2 += delta * (x - mean);
    }
};

BlockStats merge(const BlockStats& a, const BlockStats& b) {
    if (a.count == 0.0) return b;
    if (b.count == 0.0) return a;
    BlockStats out;
    out.count = a.count + b.count;
    const double delta = b.mean - a.mean;
    out.mean = a.mean + delta * (b.count / out.count);
    out.m2 = a.m2 + b.m2 + delta * delta * (a.count * b.count / out.count);
    out.tail = a.tail + b.tail;
    out.counters = a.counters;
    out.counters.add(b.counters);
    return out;
}

BlockStats reduce(const std::vector<BlockStats>& blocks, std::size_t lo, std::size_t hi) {
    if (hi - lo == 1) return blocks[lo];
    const std::size_t mid = lo + (hi - lo) / 2;
    return merge(reduce(blocks, lo, mid), reduce(blocks, mid, hi));
}

// Draws the standard normals of one path: step k uses one half of the
// Box-Muller pair at counter k / 2.
class PathNormals {
  public:
    PathNormals(const Philox4x32& rng, std::uint32_t stream, std::uint32_t domain, double sign)
        : rng_(rng), stream_(stream), domain_(domain), sign_(sign) {}

    double operator()(std::uint64_t step) {
        const std::uint64_t block = step >> 1;
        if (block != cached_) {
            pair_ = normal_pair(rng_, block, stream_, domain_);
            cached_ = block;
        }
        return sign_ * ((step & 1u) ? pair_.z1 : pair_.z0);
    }

  private:
    const Philox4x32& rng_;
    std::uint32_t stream_;
    std::uint32_t domain_;
    double sign_;
    std::uint64_t cached_ = ~std::uint64_t{0};
    NormalPair pair_{};
};

double bridge_uniform(const Philox4x32& rng, std::uint32_t stream, std::uint64_t step) {
    return uniform_pair(rng, step >> 1, stream, kBridge)[step & 1u];
}

// Probability that a Brownian bridge from y0 to y1 over time h with
// volatility s touched level `barrier` (both endpoints on the same side).
double bridge_probability(double y0, double y1, double barrier, double s, double h) {
    const double exponent = 2.0 * (barrier - y0) * (barrier - y1) / (s * s * h);
    return exponent > 40.0 ? 0.0 : std::exp(-exponent);
}

// One exact step of the state, in Brownian coordinates when available.
class Stepper {
  public:
    Stepper(const ExactTransition& transition, double dt)
        : tr_(transition), fast_(static_cast<bool>(transition.from_brownian)), dt_(dt), sqrt_dt_(std::sqrt(dt)) {}

    // Returns X_{t+h} and stores its Brownian coordinate in `y_new`.
    double operator()(double x, double y, double h, double z, double& y_new) const {
        if (!fast_) {
            const double x_new = tr_.sample(x, h, z);
            y_new = tr_.to_brownian(x_new);
            return x_new;
        }
        const double root = h == dt_ ? sqrt_dt_ : std::sqrt(h);
        y_new = y + tr_.brownian_drift * h + tr_.brownian_volatility * root * z;
        return tr_.from_brownian(y_new);
    }

  private:
    const ExactTransition& tr_;
    bool fast_;
    double dt_;
    double sqrt_dt_;
};

// Fraction of a step at which the path is taken to reach `barrier`: linear
// interpolation in Brownian coordinates when the endpoint is beyond it, the
// midpoint for crossings found by the bridge test.
double crossing_fraction(double y0, double y1, double barrier, bool via_bridge) {
    if (via_bridge || y1 == y0) return 0.5;
    return std::clamp((barrier - y0) / (y1 - y0), 0.0, 1.0);
}

using PathFunction = std::function<PathResult(std::uint32_t unit, double sign, PathCounters& counters)>;

PolicyEstimate run_paths(const SimConfig& config, const PathFunction& path) {
    config.validate();
    const std::size_t units = config.antithetic ? (config.n_paths + 1) / 2 : config.n_paths;
    const std::size_t n_blocks = (units + config.block_size - 1) / config.block_size;
    std::vector<BlockStats> blocks(n_blocks);

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t b = next.fetch_add(1);
            if (b >= n_blocks) return;
            try {
                BlockStats stats;
                const std::size_t end = std::min(units, (b + 1) * config.block_size);
                for (std::size_t u = b * config.block_size; u < end; ++u) {
                    const auto unit = static_cast<std::uint32_t>(u);
                    PathResult r = path(unit, 1.0, stats.counters);
                    if (config.antithetic) {
                        const PathResult mirror = path(unit, -1.0, stats.counters);
                        r.value = 0.5 * (r.value + mirror.value);
                        r.tail = 0.5 * (r.tail + mirror.tail);
                    }
                    stats.push(r.value);
                    stats.tail += r.tail;
                }
                blocks[b] = stats;
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(n_blocks);
                return;
            }
        }
    };

    const unsigned threads =
        static_cast<unsigned>(std::min<std::size_t>(config.threads == 0 ? default_thread_count() : config.threads,
                                                    std::max<std::size_t>(1, n_blocks)));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);

    const BlockStats total = reduce(blocks, 0, blocks.size());
    PolicyEstimate out;
    out.mean = total.mean;
    out.standard_error = total.count > 1.0 ? std::sqrt(total.m2 / (total.count - 1.0) / total.count) : 0.0;
    out.n_paths = config.antithetic ? 2 * units : units;
    out.discounted_tail_bound = total.tail / total.count;
    out.seed = config.seed;
    out.dt = config.dt;
    out.diagnostics.upper_impulses = total.counters.upper;
    out.diagnostics.lower_impulses = total.counters.lower;
    out.diagnostics.bridge_detections = total.counters.bridge;
    out.diagnostics.exclusion_violations = total.counters.exclusion;
    out.diagnostics.pending_at_horizon = total.counters.pending;
    return out;
}

void finish_policy_estimate(PolicyEstimate& out, const SimConfig& config, double horizon) {
    out.horizon = horizon;
    out.diagnostics.bias_direction =
        config.bridge_correction
            ? "bridge-corrected crossings; residual O(dt) trigger-time bias"
            : "discrete monitoring detects crossings late; triggers are biased towards later times";
    if (out.discounted_tail_bound > 0.1 * out.standard_error && out.discounted_tail_bound > 0.0) {
        std::ostringstream msg;
        msg << "horizon " << horizon << " leaves a discounted tail of up to " << out.discounted_tail_bound
            << ", comparable to the standard error " << out.standard_error;
        out.diagnostics.warnings.push_back(msg.str());
    }
}

const ExactTransition& require_transition(const DiffusionModel& model) {
    require(model.transition.has_value(), ErrorKind::Simulation,
            "model '" + model.name + "' has no exact transition law for simulation");
    return *model.transition;
}

}  // namespace

PolicyEstimate simulate_threshold(const ThresholdProblem& problem, const ThresholdPolicy& policy, double x0,
                                  const SimConfig& config) {
    const auto& model = problem.model();
    const auto& cost = problem.cost();
    policy.validate(model);
    require(model.window.contains(x0), ErrorKind::Simulation, "initial state must lie inside the window");
    require(static_cast<bool>(cost.running_reward), ErrorKind::Simulation, "simulation needs the running reward");
    const auto& transition = require_transition(model);

    const double alpha = model.discount;
    const double horizon = config.horizon_for(alpha);
    const double delay = cost.delay;
    const double a = policy.a, b = policy.b;
    const double vol = transition.brownian_volatility;
    const double yb = transition.to_brownian(b);
    const Philox4x32 rng(config.seed);
    const double step_discount = std::exp(-alpha * config.dt);

    auto path = [&](std::uint32_t unit, double sign, PathCounters& counters) {
        PathNormals normals(rng, unit, kIncrement, sign);
        const Stepper step(transition, config.dt);
        double x = x0, t = 0.0, disc = 1.0;
        double y = transition.to_brownian(x);
        double f_prev = cost.running_reward(x);
        double total = 0.0;
        bool pending = false;
        double execute_at = 0.0;
        for (std::uint64_t k = 0; t < horizon * (1.0 - 1e-14); ++k) {
            double h = std::min(config.dt, horizon - t);
            if (pending) h = std::min(h, execute_at - t);
            double y_sampled = 0.0;
            const double x_sampled = step(x, y, h, normals(k), y_sampled);
            const double t_new = pending && h == execute_at - t ? execute_at : t + h;
            const double disc_new = h == config.dt ? disc * step_discount : std::exp(-alpha * t_new);

            if (!pending) {
                bool crossed = x_sampled >= b;
                bool via_bridge = false;
                if (!crossed && config.bridge_correction) {
                    const double p = bridge_probability(y, y_sampled, yb, vol, h);
                    via_bridge = p > 0.0 && bridge_uniform(rng, unit, k) < p;
                    crossed = via_bridge;
                }
                if (crossed) {
                    if (via_bridge) ++counters.bridge;
                    // Decide at the barrier at the interpolated crossing time
                    // and restart the grid there.
                    const double tau = t + h * crossing_fraction(y, y_sampled, yb, via_bridge);
                    const double disc_tau = disc * std::exp(-alpha * (tau - t));
                    total += 0.5 * (tau - t) * (disc * f_prev + disc_tau * cost.running_reward(b));
                    x = b;
                    if (delay == 0.0) {
                        total += disc_tau * cost.intervention_cost(b, a);
                        x = a;
                        ++counters.upper;
                    } else {
                        pending = true;
                        execute_at = tau + delay;
                    }
                    y = transition.to_brownian(x);
                    t = tau;
                    disc = disc_tau;
                    f_prev = cost.running_reward(x);
                    continue;
                }
            }

            double x_new = x_sampled;
            double f_new = cost.running_reward(x_new);
            total += 0.5 * h * (disc * f_prev + disc_new * f_new);
            if (pending && t_new >= execute_at) {
                total += disc_new * cost.intervention_cost(x_new, a);
                x_new = a;
                f_new = cost.running_reward(x_new);
                pending = false;
                ++counters.upper;
            }
            x = x_new;
            y = x_new == x_sampled ? y_sampled : transition.to_brownian(x_new);
            t = t_new;
            disc = disc_new;
            f_prev = f_new;
        }
        if (pending) ++counters.pending;
        PathResult r;
        r.value = total;
        r.tail = disc * (std::abs(problem.g(x)) + std::abs(cost.intervention_cost(x, a)));
        return r;
    };
    auto out = run_paths(config, path);
    finish_policy_estimate(out, config, horizon);
    return out;
}

PolicyEstimate simulate_band(const BandProblem& problem, const BandPolicy& policy, double x0,
                             const SimConfig& config) {
    const auto& model = problem.model();
    const auto& cost = problem.cost();
    policy.validate(model);
    require(model.interval.contains(x0), ErrorKind::Simulation, "initial state must lie inside the state interval");
    require(static_cast<bool>(cost.running_reward), ErrorKind::Simulation, "simulation needs the running reward");
    const auto& transition = require_transition(model);

    const double alpha = model.discount;
    const double horizon = config.horizon_for(alpha);
    const double delay = cost.delay;
    const auto [p, q, c, d] = policy;
    const double vol = transition.brownian_volatility;
    const double yp = transition.to_brownian(p);
    const double yd = transition.to_brownian(d);
    const Philox4x32 rng(config.seed);
    const double step_discount = std::exp(-alpha * config.dt);

    auto path = [&](std::uint32_t unit, double sign, PathCounters& counters) {
        PathNormals normals(rng, unit, kIncrement, sign);
        const Stepper step(transition, config.dt);
        double x = x0, t = 0.0, disc = 1.0;
        double f_prev = cost.running_reward(x);
        double total = 0.0;
        bool pending = false;
        double execute_at = 0.0;

        // Starting outside [p, d] acts at time zero.
        if (x <= p) {
            total += cost.hire_cost(x, q);
            x = q;
            ++counters.lower;
        } else if (x >= d) {
            if (delay == 0.0) {
                total += cost.mixed_cost(x, c);
                x = c;
                ++counters.upper;
            } else {
                pending = true;
                execute_at = delay;
            }
        }
        f_prev = cost.running_reward(x);
        double y = transition.to_brownian(x);

        for (std::uint64_t k = 0; t < horizon * (1.0 - 1e-14); ++k) {
            double h = std::min(config.dt, horizon - t);
            if (pending) h = std::min(h, execute_at - t);
            double y_sampled = 0.0;
            const double x_sampled = step(x, y, h, normals(k), y_sampled);
            const double t_new = pending && h == execute_at - t ? execute_at : t + h;
            const double disc_new = h == config.dt ? disc * step_discount : std::exp(-alpha * t_new);

            // Lower crossings are ignored while a firing decision is in flight.
            if (!pending) {
                bool up = x_sampled >= d;
                bool down = x_sampled <= p;
                bool via_bridge = false;
                if (!up && !down && config.bridge_correction) {
                    const double p_up = bridge_probability(y, y_sampled, yd, vol, h);
                    const double p_down = bridge_probability(y, y_sampled, yp, vol, h);
                    if (p_up + p_down > 0.0) {
                        // The two barrier events are nearly exclusive for small steps.
                        const double u = bridge_uniform(rng, unit, k);
                        up = u < p_up;
                        down = !up && u < p_up + p_down;
                        via_bridge = up || down;
                    }
                }
                if (up || down) {
                    if (via_bridge) ++counters.bridge;
                    const double barrier = up ? d : p;
                    const double tau =
                        t + h * crossing_fraction(y, y_sampled, up ? yd : yp, via_bridge);
                    const double disc_tau = disc * std::exp(-alpha * (tau - t));
                    total += 0.5 * (tau - t) * (disc * f_prev + disc_tau * cost.running_reward(barrier));
                    if (down) {
                        if (pending) ++counters.exclusion;
                        total += disc_tau * cost.hire_cost(p, q);
                        x = q;
                        ++counters.lower;
                    } else if (delay == 0.0) {
                        total += disc_tau * cost.mixed_cost(d, c);
                        x = c;
                        ++counters.upper;
                    } else {
                        x = d;
                        pending = true;
                        execute_at = tau + delay;
                    }
                    y = transition.to_brownian(x);
                    t = tau;
                    disc = disc_tau;
                    f_prev = cost.running_reward(x);
                    continue;
                }
            }

            double x_new = x_sampled;
            double f_new = cost.running_reward(x_new);
            total += 0.5 * h * (disc * f_prev + disc_new * f_new);
            if (pending && t_new >= execute_at) {
                total += disc_new * cost.mixed_cost(x_new, c);
                x_new = c;
                f_new = cost.running_reward(x_new);
                pending = false;
                ++counters.upper;
            }
            x = x_new;
            y = x_new == x_sampled ? y_sampled : transition.to_brownian(x_new);
            t = t_new;
            disc = disc_new;
            f_prev = f_new;
        }
        if (pending) ++counters.pending;
        PathResult r;
        r.value = total;
        r.tail = disc * (std::abs(problem.g(x)) + std::abs(cost.mixed_cost(x, c)) + std::abs(cost.hire_cost(x, q)));
        return r;
    };
    auto out = run_paths(config, path);
    finish_policy_estimate(out, config, horizon);
    return out;
}

PolicyEstimate mc_transition_expectation(const DiffusionModel& model, double x, double t, const RealFn& h,
                                         const SimConfig& config) {
    const auto& transition = require_transition(model);
    require(t >= 0.0, ErrorKind::Simulation, "transition time must be non-negative");
    const Philox4x32 rng(config.seed);
    auto path = [&](std::uint32_t unit, double sign, PathCounters&) {
        const double z = sign * normal_pair(rng, 0, unit, kOneShot).z0;
        return PathResult{h(transition.sample(x, t, z)), 0.0};
    };
    auto out = run_paths(config, path);
    out.horizon = t;
    return out;
}

PolicyEstimate mc_delayed_cost(const ThresholdProblem& problem, double x, double a, const SimConfig& config) {
    const double e = problem.delay_discount();
    return mc_transition_expectation(
        problem.model(), x, problem.cost().delay, [&](double y) { return e * problem.kbar(y, a); }, config);
}

PolicyEstimate mc_delayed_fire_cost(const BandProblem& problem, double x, double c, const SimConfig& config) {
    const double e = problem.delay_discount();
    return mc_transition_expectation(
        problem.model(), x, problem.cost().delay, [&](double y) { return e * problem.cbar1(y, c); }, config);
}

PolicyEstimate mc_expected_reward(const DiffusionModel& model, const RealFn& reward, double x,
                                  const SimConfig& config) {
    const auto& transition = require_transition(model);
    const double alpha = model.discount;
    const Philox4x32 rng(config.seed);
    auto path = [&](std::uint32_t unit, double sign, PathCounters&) {
        const double time = -std::log(uniform_pair(rng, 0, unit, kExpTime)[0]) / alpha;
        const double z = sign * normal_pair(rng, 0, unit, kExpNormal).z0;
        return PathResult{reward(transition.sample(x, time, z)) / alpha, 0.0};
    };
    return run_paths(config, path);
}

HittingEstimate mc_hitting_laplace(const DiffusionModel& model, double x, double l, double r,
                                   const SimConfig& config) {
    require(l < r && x >= l && x <= r, ErrorKind::Domain, "hitting estimate needs l <= x <= r");
    const auto& transition = require_transition(model);
    const double alpha = model.discount;
    const double horizon = config.horizon_for(alpha);
    const double vol = transition.brownian_volatility;
    const double yl = transition.to_brownian(l), yr = transition.to_brownian(r);
    const Philox4x32 rng(config.seed);

    auto exit_of = [&](std::uint32_t unit, double sign) -> std::pair<int, double> {
        if (x >= r) return {1, 0.0};
        if (x <= l) return {-1, 0.0};
        PathNormals normals(rng, unit, kIncrement, sign);
        const Stepper step(transition, config.dt);
        double s = x, y = transition.to_brownian(x), t = 0.0;
        for (std::uint64_t k = 0; t < horizon; ++k) {
            const double h = std::min(config.dt, horizon - t);
            double y_new = 0.0;
            const double s_new = step(s, y, h, normals(k), y_new);
            t += h;
            if (s_new >= r) return {1, t};
            if (s_new <= l) return {-1, t};
            if (config.bridge_correction) {
                const double p_up = bridge_probability(y, y_new, yr, vol, h);
                const double p_down = bridge_probability(y, y_new, yl, vol, h);
                if (p_up + p_down > 0.0) {
                    const double u = bridge_uniform(rng, unit, k);
                    if (u < p_up) return {1, t};
                    if (u < p_up + p_down) return {-1, t};
                }
            }
            s = s_new;
            y = y_new;
        }
        return {0, t};
    };
    auto side = [&](int wanted) {
        return [&, wanted](std::uint32_t unit, double sign, PathCounters&) {
            const auto [exit, time] = exit_of(unit, sign);
            return PathResult{exit == wanted ? std::exp(-alpha * time) : 0.0, 0.0};
        };
    };
    HittingEstimate out{run_paths(config, side(1)), run_paths(config, side(-1))};
    out.up.horizon = out.down.horizon = horizon;
    return out;
}

}  // namespace impulse
