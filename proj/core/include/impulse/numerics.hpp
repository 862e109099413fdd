#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace impulse {

using RealFn = std::function<double(double)>;
using RealFn2 = std::function<double(double, double)>;

/// Step used for every central difference in the library.
inline double difference_step(double x) noexcept { return 1e-6 * std::max(1.0, std::abs(x)); }

template <class F>
double central_difference(const F& f, double x) {
    const double h = difference_step(x);
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

template <class F>
double second_difference(const F& f, double x, double h) {
    return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
}

/// n points lo + offset where the offsets grow geometrically from first_offset
/// to hi - lo. Used to scan for free boundaries close to a reference point.
std::vector<double> geometric_offsets_grid(double lo, double hi, double first_offset, std::size_t n);

/// n points evenly spaced in log between lo > 0 and hi.
std::vector<double> log_grid(double lo, double hi, std::size_t n);

std::vector<double> linear_grid(double lo, double hi, std::size_t n);

struct RootBracket {
    double root = 0.0;
    double value = 0.0;
    int iterations = 0;
};

/// Root of f on [lo, hi] given f(lo), f(hi) of opposite sign (TOMS 748).
RootBracket solve_bracketed(const RealFn& f, double lo, double hi, double f_lo, double f_hi,
                            int max_iterations = 200);

struct ScalarOptimum {
    double argmax = 0.0;
    double value = 0.0;
    int iterations = 0;
};

/// Maximizer of f on [lo, hi] by Brent's golden-section/parabolic search.
ScalarOptimum maximize_on_interval(const RealFn& f, double lo, double hi, double x_tolerance,
                                   int max_iterations = 500);

struct SimplexOptimum {
    std::vector<double> argmin;
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Derivative-free Nelder-Mead minimization. Stops when the simplex diameter
/// drops below x_tolerance and the value spread below f_tolerance.
SimplexOptimum nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                           std::vector<double> start, std::vector<double> step,
                           double x_tolerance, double f_tolerance, int max_iterations = 5000);

/// Adaptive Gauss-Kronrod quadrature of f over [a, b]; a or b may be infinite.
double integrate(const RealFn& f, double a, double b, double relative_tolerance = 1e-12,
                 double* error_estimate = nullptr);

/// E[h(Z)] for Z ~ N(0, 1), by adaptive quadrature on [-12, 12] with optional
/// extra break points (kinks of h).
double gaussian_expectation(const RealFn& h, const std::vector<double>& breaks = {});

}  // namespace impulse
