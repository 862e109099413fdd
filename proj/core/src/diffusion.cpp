#include "impulse/diffusion.hpp"

#include "impulse/error.hpp"

#include <cmath>
#include <sstream>
#include <utility>
#include <vector>

namespace impulse {

void DiffusionModel::validate() const {
    require(static_cast<bool>(drift) && static_cast<bool>(volatility), ErrorKind::Configuration,
            "diffusion model '" + name + "' needs drift and volatility");
    require(discount > 0.0 && std::isfinite(discount), ErrorKind::Configuration,
            "diffusion model '" + name + "': discount must be positive");
    require(interval.lower < interval.upper, ErrorKind::Configuration, "empty state interval");
    require(std::isfinite(window.lower) && std::isfinite(window.upper) && window.lower < window.upper,
            ErrorKind::Configuration, "computational window must be a finite non-empty interval");
    require(interval.contains(window.lower) && interval.contains(window.upper), ErrorKind::Configuration,
            "computational window must lie strictly inside the state interval");
    for (double x : linear_grid(window.lower, window.upper, 101)) {
        const double s = volatility(x);
        if (!(s > 0.0) || !std::isfinite(s)) {
            std::ostringstream msg;
            msg << "volatility must be positive; got " << s << " at x = " << x;
            fail(ErrorKind::Configuration, msg.str());
        }
    }
}

double apply_discounted_generator(const DiffusionModel& model, const RealFn& h, double x, double step) {
    const double center = h(x);
    const double up = h(x + step);
    const double down = h(x - step);
    const double first = (up - down) / (2.0 * step);
    const double second = (up - 2.0 * center + down) / (step * step);
    const double sigma = model.volatility(x);
    return 0.5 * sigma * sigma * second + model.drift(x) * first - model.discount * center;
}

FundamentalPair::FundamentalPair(RealFn psi, RealFn phi, RealFn psi_prime, RealFn phi_prime, StateInterval domain,
                                 bool approximate)
    : psi_(std::move(psi)),
      phi_(std::move(phi)),
      psi_prime_(std::move(psi_prime)),
      phi_prime_(std::move(phi_prime)),
      domain_(domain),
      approximate_(approximate) {}

namespace {

// Logarithmic-derivative representation of one fundamental solution on a grid:
// log v and w = v'/v, with w solving the Riccati equation
//   w' = 2 (alpha - mu w) / sigma^2 - w^2.
class RiccatiSolution {
  public:
    RiccatiSolution(const DiffusionModel& model, std::size_t points, bool increasing)
        : lo_(model.window.lower), hi_(model.window.upper) {
        log_spaced_ = lo_ > 0.0 && hi_ / lo_ > 50.0;
        nodes_ = log_spaced_ ? log_grid(lo_, hi_, points) : linear_grid(lo_, hi_, points);
        log_v_.assign(points, 0.0);
        w_.assign(points, 0.0);
        slope_.assign(points, 0.0);

        const double alpha = model.discount;
        auto rhs = [&model, alpha](double x, double w) {
            const double s = model.volatility(x);
            return 2.0 * (alpha - model.drift(x) * w) / (s * s) - w * w;
        };
        // Start from the constant-coefficient root at the end where this
        // solution is subdominant; the Riccati flow is stable in that direction.
        auto local_root = [&model, alpha](double x, bool positive) {
            const double mu = model.drift(x);
            const double s2 = model.volatility(x) * model.volatility(x);
            const double disc = std::sqrt(mu * mu + 2.0 * alpha * s2);
            return positive ? (-mu + disc) / s2 : (-mu - disc) / s2;
        };

        const std::size_t n = points;
        auto rk4 = [&rhs](double x, double w, double h, double& log_increment) {
            const double k1 = rhs(x, w);
            const double k2 = rhs(x + 0.5 * h, w + 0.5 * h * k1);
            const double k3 = rhs(x + 0.5 * h, w + 0.5 * h * k2);
            const double k4 = rhs(x + h, w + h * k3);
            const double w1 = w + 0.5 * h * k1;
            const double w2 = w + 0.5 * h * k2;
            const double w3 = w + h * k3;
            log_increment = h * (w + 2.0 * w1 + 2.0 * w2 + w3) / 6.0;
            return w + h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
        };

        if (increasing) {
            w_[0] = local_root(nodes_[0], true);
            for (std::size_t i = 0; i + 1 < n; ++i) {
                double increment = 0.0;
                w_[i + 1] = rk4(nodes_[i], w_[i], nodes_[i + 1] - nodes_[i], increment);
                log_v_[i + 1] = log_v_[i] + increment;
            }
        } else {
            w_[n - 1] = local_root(nodes_[n - 1], false);
            for (std::size_t i = n - 1; i > 0; --i) {
                double increment = 0.0;
                w_[i - 1] = rk4(nodes_[i], w_[i], nodes_[i - 1] - nodes_[i], increment);
                log_v_[i - 1] = log_v_[i] + increment;
            }
        }
        for (std::size_t i = 0; i < n; ++i) slope_[i] = rhs(nodes_[i], w_[i]);

        const double mid = 0.5 * (lo_ + hi_);
        const double shift = log_value(mid);
        for (double& v : log_v_) v -= shift;
    }

    double log_value(double x) const {
        const auto [i, t, h] = locate(x);
        return hermite(log_v_[i], log_v_[i + 1], w_[i], w_[i + 1], t, h);
    }

    double log_derivative(double x) const {
        const auto [i, t, h] = locate(x);
        return hermite(w_[i], w_[i + 1], slope_[i], slope_[i + 1], t, h);
    }

  private:
    struct Cell {
        std::size_t index;
        double t;
        double width;
    };

    Cell locate(double x) const {
        if (!(x >= lo_ && x <= hi_)) {
            std::ostringstream msg;
            msg << "numeric fundamental solutions are only available on the window [" << lo_ << ", " << hi_
                << "]; got x = " << x;
            fail(ErrorKind::Domain, msg.str());
        }
        const std::size_t n = nodes_.size();
        double position = log_spaced_ ? std::log(x / lo_) / std::log(hi_ / lo_) : (x - lo_) / (hi_ - lo_);
        position *= static_cast<double>(n - 1);
        std::size_t i = static_cast<std::size_t>(std::floor(position));
        if (i >= n - 1) i = n - 2;
        // Grid rounding can misplace x by one cell.
        if (x < nodes_[i] && i > 0) --i;
        if (x > nodes_[i + 1] && i + 2 < n) ++i;
        const double width = nodes_[i + 1] - nodes_[i];
        return {i, (x - nodes_[i]) / width, width};
    }

    static double hermite(double v0, double v1, double d0, double d1, double t, double h) {
        const double t2 = t * t;
        const double t3 = t2 * t;
        return (2 * t3 - 3 * t2 + 1) * v0 + (t3 - 2 * t2 + t) * h * d0 + (-2 * t3 + 3 * t2) * v1 +
               (t3 - t2) * h * d1;
    }

    double lo_;
    double hi_;
    bool log_spaced_ = false;
    std::vector<double> nodes_;
    std::vector<double> log_v_;
    std::vector<double> w_;
    std::vector<double> slope_;
};

// Bracket a root of an increasing function h on the interval, starting from the
// window and moving outwards.
double invert_increasing(const RealFn& h, double target, const StateInterval& interval, const StateInterval& start) {
    double lo = start.lower;
    double hi = start.upper;
    double f_lo = h(lo) - target;
    double f_hi = h(hi) - target;
    for (int k = 0; k < 200 && f_lo > 0.0; ++k) {
        const double width = hi - lo;
        hi = lo;
        f_hi = f_lo;
        lo = std::isfinite(interval.lower) ? interval.lower + 0.5 * (lo - interval.lower) : lo - 2.0 * width;
        f_lo = h(lo) - target;
    }
    for (int k = 0; k < 200 && f_hi < 0.0; ++k) {
        const double width = hi - lo;
        lo = hi;
        f_lo = f_hi;
        hi = std::isfinite(interval.upper) ? interval.upper - 0.5 * (interval.upper - hi) : hi + 2.0 * width;
        f_hi = h(hi) - target;
    }
    require(f_lo <= 0.0 && f_hi >= 0.0 && std::isfinite(f_lo) && std::isfinite(f_hi), ErrorKind::Domain,
            "value outside the image of F");
    return solve_bracketed(h, lo, hi, f_lo, f_hi).root;
}

}  // namespace

FundamentalPair fundamental_pair(const DiffusionModel& model, const FundamentalOptions& options) {
    model.validate();
    if (model.fundamentals && !options.force_numeric) {
        const auto& cf = *model.fundamentals;
        require(cf.psi && cf.phi && cf.psi_prime && cf.phi_prime, ErrorKind::Configuration,
                "closed-form fundamentals need psi, phi and both derivatives");
        return FundamentalPair(cf.psi, cf.phi, cf.psi_prime, cf.phi_prime, model.interval, false);
    }
    require(options.grid_points >= 101, ErrorKind::Configuration, "numeric fundamentals need at least 101 grid points");
    auto increasing = std::make_shared<const RiccatiSolution>(model, options.grid_points, true);
    auto decreasing = std::make_shared<const RiccatiSolution>(model, options.grid_points, false);
    return FundamentalPair(
        [increasing](double x) { return std::exp(increasing->log_value(x)); },
        [decreasing](double x) { return std::exp(decreasing->log_value(x)); },
        [increasing](double x) { return increasing->log_derivative(x) * std::exp(increasing->log_value(x)); },
        [decreasing](double x) { return decreasing->log_derivative(x) * std::exp(decreasing->log_value(x)); },
        model.window, true);
}

TransformF::TransformF(FundamentalPair pair, const std::optional<ClosedFormFundamentals>& closed_forms)
    : pair_(std::move(pair)) {
    const bool use_closed = closed_forms.has_value() && !pair_.approximate();
    if (use_closed && closed_forms->transform) {
        forward_ = closed_forms->transform;
    } else {
        forward_ = [p = pair_](double x) { return p.psi(x) / p.phi(x); };
    }
    if (use_closed && closed_forms->transform_prime) {
        derivative_ = closed_forms->transform_prime;
    } else {
        derivative_ = [p = pair_](double x) {
            const double phi = p.phi(x);
            return p.wronskian(x) / (phi * phi);
        };
    }
    const StateInterval domain = pair_.domain();
    if (use_closed && closed_forms->transform_inverse) {
        inverse_ = closed_forms->transform_inverse;
    } else {
        // Work with log F to keep the bracketing well scaled.
        inverse_ = [f = forward_, domain](double y) {
            const double target = std::log(y);
            auto log_f = [&f](double x) { return std::log(f(x)); };
            StateInterval start = domain;
            if (!std::isfinite(start.lower) || !std::isfinite(start.upper)) {
                const double center = std::isfinite(start.lower) ? start.lower + 1.0
                                      : std::isfinite(start.upper) ? start.upper - 1.0
                                                                   : 0.0;
                start = {center - 1.0, center + 1.0};
                if (std::isfinite(domain.lower)) start.lower = 0.5 * (domain.lower + center);
                if (std::isfinite(domain.upper)) start.upper = 0.5 * (domain.upper + center);
            }
            return invert_increasing(log_f, target, domain, start);
        };
    }
    if (pair_.approximate()) {
        image_lower_ = forward_(domain.lower);
        image_upper_ = forward_(domain.upper);
    } else {
        // Natural boundaries: psi(c+) = 0 and phi(d-) = 0.
        image_lower_ = 0.0;
        image_upper_ = infinity;
    }
}

double TransformF::inverse(double y) const {
    if (!(y > image_lower_ && y < image_upper_)) {
        std::ostringstream msg;
        msg << "y = " << y << " is outside the image of F (" << image_lower_ << ", " << image_upper_ << ")";
        fail(ErrorKind::Domain, msg.str());
    }
    return inverse_(y);
}

HittingLaplace hitting_laplace(const FundamentalPair& pair, double x, double l, double r) {
    require(l < r, ErrorKind::Domain, "hitting_laplace needs l < r");
    if (!(x >= l && x <= r)) {
        std::ostringstream msg;
        msg << "x = " << x << " outside [" << l << ", " << r << "]";
        fail(ErrorKind::Domain, msg.str());
    }
    require(pair.domain().contains(l) && pair.domain().contains(r), ErrorKind::Domain,
            "hitting levels must lie inside the state interval");
    if (x == r) return {1.0, 0.0};
    if (x == l) return {0.0, 1.0};
    const double psi_l = pair.psi(l), phi_l = pair.phi(l);
    const double psi_r = pair.psi(r), phi_r = pair.phi(r);
    const double psi_x = pair.psi(x), phi_x = pair.phi(x);
    const double denominator = psi_l * phi_r - psi_r * phi_l;
    return {(psi_l * phi_x - psi_x * phi_l) / denominator, (psi_x * phi_r - psi_r * phi_x) / denominator};
}

namespace {

// Integral of h over [a, b] with a logarithmic change of variables towards a
// finite boundary, so that integrable endpoint singularities are resolved.
double integrate_towards(const RealFn& h, double a, double b, const StateInterval& interval) {
    if (!(b > a)) return 0.0;
    if (std::isfinite(interval.lower) && a - interval.lower < 1e-2 * (b - a)) {
        const double c = interval.lower;
        return integrate([&](double s) { const double e = std::exp(s); return h(c + e) * e; },
                         std::log(a - c), std::log(b - c));
    }
    if (std::isfinite(interval.upper) && interval.upper - b < 1e-2 * (b - a)) {
        const double d = interval.upper;
        return integrate([&](double s) { const double e = std::exp(s); return h(d - e) * e; },
                         std::log(d - b), std::log(d - a));
    }
    return integrate(h, a, b);
}

}  // namespace

RealFn expected_reward_g(const DiffusionModel& model, const FundamentalPair& pair, const RealFn& reward,
                         const RealFn& closed_form, const RewardOptions& options) {
    if (closed_form) return closed_form;
    require(static_cast<bool>(reward), ErrorKind::Configuration, "running reward is required");

    return [model, pair, reward, options](double x) {
        require(pair.domain().contains(x) || (x >= pair.domain().lower && x <= pair.domain().upper),
                ErrorKind::Domain, "g evaluated outside the model domain");
        auto speed = [&](double y) {
            const double s = model.volatility(y);
            return 2.0 / (s * s * pair.wronskian(y));
        };
        const double psi_x = pair.psi(x);
        const double phi_x = pair.phi(x);
        auto left = [&](double y) { return pair.psi(y) * phi_x * reward(y) * speed(y); };
        auto right = [&](double y) { return psi_x * pair.phi(y) * reward(y) * speed(y); };

        const StateInterval& interval = model.interval;
        double lo = std::min(model.window.lower, x);
        double hi = std::max(model.window.upper, x);
        auto evaluate = [&](double a, double b) {
            return integrate_towards(left, a, x, interval) + integrate_towards(right, x, b, interval);
        };

        double value = evaluate(lo, hi);
        if (pair.approximate()) {
            require(std::isfinite(value), ErrorKind::Integrability, "expected discounted reward is not finite");
            return value;
        }
        for (int k = 0; k < options.max_expansions; ++k) {
            lo = std::isfinite(interval.lower) ? interval.lower + 0.1 * (lo - interval.lower) : x - 2.0 * (x - lo);
            hi = std::isfinite(interval.upper) ? interval.upper - 0.1 * (interval.upper - hi) : x + 2.0 * (hi - x);
            const double next = evaluate(lo, hi);
            if (!std::isfinite(next)) break;
            if (std::abs(next - value) <= options.relative_tolerance * std::abs(next) ||
                (next == 0.0 && value == 0.0))
                return next;
            value = next;
        }
        std::ostringstream msg;
        msg << "expected discounted running reward does not converge at x = " << x;
        fail(ErrorKind::Integrability, msg.str());
    };
}

double transition_expectation(const DiffusionModel& model, double x, double t, const RealFn& h, double kink) {
    require(model.transition.has_value(), ErrorKind::Configuration,
            "model '" + model.name + "' has no exact transition law");
    const auto& sample = model.transition->sample;
    if (t == 0.0) return h(x);
    std::vector<double> breaks;
    if (std::isfinite(kink)) {
        auto offset = [&](double z) { return sample(x, t, z) - kink; };
        const double lo = offset(-12.0), hi = offset(12.0);
        if (std::isfinite(lo) && std::isfinite(hi) && std::signbit(lo) != std::signbit(hi))
            breaks.push_back(solve_bracketed(offset, -12.0, 12.0, lo, hi).root);
    }
    return gaussian_expectation([&](double z) { return h(sample(x, t, z)); }, breaks);
}

RealFn to_transformed(RealFn h, const TransformF& transform, const FundamentalPair& pair) {
    return [h = std::move(h), transform, pair](double y) {
        const double x = transform.inverse(y);
        return h(x) / pair.phi(x);
    };
}

}  // namespace impulse
