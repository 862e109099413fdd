#pragma once

#include "impulse/numerics.hpp"

#include <cstddef>
#include <limits>
#include <memory>
#include <optional>
#include <string>

namespace impulse {

inline constexpr double infinity = std::numeric_limits<double>::infinity();

/// Open interval (lower, upper); endpoints may be infinite.
struct StateInterval {
    double lower = -infinity;
    double upper = infinity;

    bool contains(double x) const noexcept { return x > lower && x < upper; }
    bool contains(const StateInterval& other) const noexcept {
        return other.lower >= lower && other.upper <= upper;
    }
};

/// Closed forms of the increasing (psi) and decreasing (phi) solutions of
/// (A - alpha) v = 0. The transform members are optional; when empty they are
/// derived from psi and phi.
struct ClosedFormFundamentals {
    RealFn psi;
    RealFn phi;
    RealFn psi_prime;
    RealFn phi_prime;
    RealFn transform;
    RealFn transform_inverse;
    RealFn transform_prime;
};

/// Exact-in-law sampling of the uncontrolled process. `sample(x, t, z)` maps a
/// standard normal z to X_t given X_0 = x. `to_brownian` is a coordinate change
/// in which the process is a Brownian motion with constant volatility
/// `brownian_volatility` (plus drift), used for bridge crossing corrections.
/// When `from_brownian` is set, path simulation steps y = to_brownian(x) as
/// y + brownian_drift t + brownian_volatility sqrt(t) z and maps back; it must
/// agree in law with `sample`.
struct ExactTransition {
    std::function<double(double x, double t, double z)> sample;
    RealFn to_brownian;
    double brownian_volatility = 1.0;
    RealFn from_brownian;
    double brownian_drift = 0.0;
};

/// dX = drift(X) dt + volatility(X) dW on `interval` (natural boundaries),
/// discounted at rate `discount`. Numerical work is restricted to `window`.
/// Well-posedness of the SDE for the supplied coefficients is the caller's
/// responsibility.
struct DiffusionModel {
    std::string name;
    RealFn drift;
    RealFn volatility;
    StateInterval interval;
    double discount = 0.0;
    StateInterval window;
    std::optional<ClosedFormFundamentals> fundamentals;
    std::optional<ExactTransition> transition;

    /// Throws Error{Configuration} on a non-positive discount, non-positive
    /// volatility on the window, or a window outside the state interval.
    void validate() const;
};

/// (A - alpha) h at x by central differences with step `step`.
double apply_discounted_generator(const DiffusionModel& model, const RealFn& h, double x, double step);

struct FundamentalOptions {
    /// Ignore closed forms and integrate the ODE on the computational window.
    bool force_numeric = false;
    std::size_t grid_points = 20001;
};

/// psi (increasing) and phi (decreasing) with their derivatives. The numeric
/// fallback is normalized to psi = phi = 1 at the window midpoint and is only
/// evaluable inside the window; it reports approximate() == true.
class FundamentalPair {
  public:
    FundamentalPair(RealFn psi, RealFn phi, RealFn psi_prime, RealFn phi_prime, StateInterval domain,
                    bool approximate);

    double psi(double x) const { return psi_(x); }
    double phi(double x) const { return phi_(x); }
    double psi_prime(double x) const { return psi_prime_(x); }
    double phi_prime(double x) const { return phi_prime_(x); }
    /// psi' phi - psi phi' (> 0).
    double wronskian(double x) const { return psi_prime_(x) * phi_(x) - psi_(x) * phi_prime_(x); }

    const StateInterval& domain() const noexcept { return domain_; }
    bool approximate() const noexcept { return approximate_; }

  private:
    RealFn psi_;
    RealFn phi_;
    RealFn psi_prime_;
    RealFn phi_prime_;
    StateInterval domain_;
    bool approximate_;
};

FundamentalPair fundamental_pair(const DiffusionModel& model, const FundamentalOptions& options = {});

/// F = psi / phi, strictly increasing, with inverse and derivative.
class TransformF {
  public:
    TransformF(FundamentalPair pair, const std::optional<ClosedFormFundamentals>& closed_forms);

    double operator()(double x) const { return forward_(x); }
    double inverse(double y) const;
    double derivative(double x) const { return derivative_(x); }

    /// Image of the evaluable domain; (0, inf) for closed-form natural boundaries.
    double image_lower() const noexcept { return image_lower_; }
    double image_upper() const noexcept { return image_upper_; }
    bool in_image(double y) const noexcept { return y > image_lower_ && y < image_upper_; }

  private:
    FundamentalPair pair_;
    RealFn forward_;
    RealFn inverse_;
    RealFn derivative_;
    double image_lower_;
    double image_upper_;
};

struct HittingLaplace {
    double up;    // E[exp(-alpha tau_r) 1{tau_r < tau_l}]
    double down;  // E[exp(-alpha tau_l) 1{tau_l < tau_r}]
};

/// Two-sided Laplace transforms of the exit time from [l, r] started at x.
HittingLaplace hitting_laplace(const FundamentalPair& pair, double x, double l, double r);

struct RewardOptions {
    /// Successive window expansions must agree to this relative tolerance.
    double relative_tolerance = 1e-8;
    int max_expansions = 24;
};

/// g(x) = E^x[int_0^inf exp(-alpha s) f(X_s) ds]. Uses `closed_form` when it is
/// non-empty; otherwise integrates f against the Green kernel
/// 2 psi(min) phi(max) / (sigma^2 W) over an expanding window and throws
/// Error{Integrability} if the truncation sequence does not settle.
RealFn expected_reward_g(const DiffusionModel& model, const FundamentalPair& pair, const RealFn& reward,
                         const RealFn& closed_form = {}, const RewardOptions& options = {});

/// E^x[h(X_t)] under the model's exact transition law, splitting the Gaussian
/// quadrature where X_t crosses `kink` (pass NaN for none). Throws
/// Error{Configuration} if the model has no exact transition.
double transition_expectation(const DiffusionModel& model, double x, double t, const RealFn& h,
                              double kink = std::numeric_limits<double>::quiet_NaN());

/// y -> (h / phi)(F^{-1}(y)). Throws Error{Domain} outside the image of F.
RealFn to_transformed(RealFn h, const TransformF& transform, const FundamentalPair& pair);

}  // namespace impulse
