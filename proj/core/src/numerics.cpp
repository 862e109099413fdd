#include "impulse/numerics.hpp"

#include "impulse/error.hpp"
#include "impulse/normal.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include <cstdint>
#include <limits>
#include <numeric>

namespace impulse {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::Configuration: return "configuration";
        case ErrorKind::Domain: return "domain";
        case ErrorKind::Integrability: return "integrability";
        case ErrorKind::DegeneratePolicy: return "degenerate-policy";
        case ErrorKind::NoThreshold: return "no-threshold";
        case ErrorKind::NoBand: return "no-band";
        case ErrorKind::OracleFailure: return "oracle-failure";
        case ErrorKind::NoAction: return "no-action";
        case ErrorKind::Simulation: return "simulation";
    }
    return "unknown";
}

std::vector<double> geometric_offsets_grid(double lo, double hi, double first_offset, std::size_t n) {
    require(hi > lo && first_offset > 0.0 && n >= 2, ErrorKind::Configuration,
            "geometric grid needs hi > lo, positive first offset and n >= 2");
    const double span = hi - lo;
    const double first = std::min(first_offset, 0.5 * span);
    const double ratio = std::pow(span / first, 1.0 / static_cast<double>(n - 1));
    std::vector<double> grid(n);
    double offset = first;
    for (std::size_t i = 0; i < n; ++i) {
        grid[i] = lo + offset;
        offset *= ratio;
    }
    grid.back() = hi;
    return grid;
}

std::vector<double> log_grid(double lo, double hi, std::size_t n) {
    require(lo > 0.0 && hi > lo && n >= 2, ErrorKind::Configuration, "log grid needs 0 < lo < hi, n >= 2");
    std::vector<double> grid(n);
    const double step = std::log(hi / lo) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) grid[i] = lo * std::exp(step * static_cast<double>(i));
    grid.back() = hi;
    return grid;
}

std::vector<double> linear_grid(double lo, double hi, std::size_t n) {
    require(hi > lo && n >= 2, ErrorKind::Configuration, "linear grid needs lo < hi, n >= 2");
    std::vector<double> grid(n);
    const double step = (hi - lo) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) grid[i] = lo + step * static_cast<double>(i);
    grid.back() = hi;
    return grid;
}

RootBracket solve_bracketed(const RealFn& f, double lo, double hi, double f_lo, double f_hi,
                            int max_iterations) {
    if (f_lo == 0.0) return {lo, 0.0, 0};
    if (f_hi == 0.0) return {hi, 0.0, 0};
    require(std::signbit(f_lo) != std::signbit(f_hi), ErrorKind::Domain, "root is not bracketed");
    std::uintmax_t iterations = static_cast<std::uintmax_t>(max_iterations);
    const auto tolerance = boost::math::tools::eps_tolerance<double>(std::numeric_limits<double>::digits - 3);
    const auto [left, right] =
        boost::math::tools::toms748_solve(f, lo, hi, f_lo, f_hi, tolerance, iterations);
    // Keep the end with the smaller residual rather than the midpoint.
    const double f_left = f(left);
    const double f_right = f(right);
    RootBracket result;
    if (std::abs(f_left) <= std::abs(f_right)) {
        result.root = left;
        result.value = f_left;
    } else {
        result.root = right;
        result.value = f_right;
    }
    result.iterations = static_cast<int>(iterations);
    return result;
}

ScalarOptimum maximize_on_interval(const RealFn& f, double lo, double hi, double x_tolerance,
                                   int max_iterations) {
    require(hi > lo, ErrorKind::Configuration, "empty interval for scalar maximization");
    // Brent's stopping rule works in relative bits; pick enough bits to reach
    // the requested absolute tolerance near the interval.
    const double scale = std::max({1.0, std::abs(lo), std::abs(hi)});
    const int bits = std::clamp(static_cast<int>(std::ceil(-std::log2(x_tolerance / scale))) + 1, 8,
                                std::numeric_limits<double>::digits / 2);
    std::uintmax_t iterations = static_cast<std::uintmax_t>(max_iterations);
    const auto [x, negated] = boost::math::tools::brent_find_minima(
        [&f](double x) { return -f(x); }, lo, hi, bits, iterations);
    return {x, -negated, static_cast<int>(iterations)};
}

SimplexOptimum nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                           std::vector<double> start, std::vector<double> step, double x_tolerance,
                           double f_tolerance, int max_iterations) {
    const std::size_t n = start.size();
    require(n >= 1 && step.size() == n, ErrorKind::Configuration, "nelder-mead: dimension mismatch");

    std::vector<std::vector<double>> simplex(n + 1, start);
    for (std::size_t i = 0; i < n; ++i) simplex[i + 1][i] += step[i];
    std::vector<double> values(n + 1);
    for (std::size_t i = 0; i <= n; ++i) values[i] = f(simplex[i]);

    std::vector<std::size_t> order(n + 1);
    auto point = [n](const std::vector<double>& base, const std::vector<double>& toward, double t) {
        std::vector<double> out(n);
        for (std::size_t k = 0; k < n; ++k) out[k] = base[k] + t * (toward[k] - base[k]);
        return out;
    };

    SimplexOptimum result;
    int iteration = 0;
    for (; iteration < max_iterations; ++iteration) {
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return values[i] < values[j]; });
        const std::size_t best = order.front();
        const std::size_t worst = order.back();
        const std::size_t second_worst = order[n - 1];

        double diameter = 0.0;
        for (std::size_t i = 0; i <= n; ++i)
            for (std::size_t k = 0; k < n; ++k)
                diameter = std::max(diameter, std::abs(simplex[i][k] - simplex[best][k]));
        const double spread = values[worst] - values[best];
        if (diameter < x_tolerance && spread <= f_tolerance) {
            result.converged = true;
            break;
        }

        std::vector<double> centroid(n, 0.0);
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == worst) continue;
            for (std::size_t k = 0; k < n; ++k) centroid[k] += simplex[i][k] / static_cast<double>(n);
        }

        const auto reflected = point(centroid, simplex[worst], -1.0);
        const double f_reflected = f(reflected);
        if (f_reflected < values[best]) {
            const auto expanded = point(centroid, simplex[worst], -2.0);
            const double f_expanded = f(expanded);
            if (f_expanded < f_reflected) {
                simplex[worst] = expanded;
                values[worst] = f_expanded;
            } else {
                simplex[worst] = reflected;
                values[worst] = f_reflected;
            }
            continue;
        }
        if (f_reflected < values[second_worst]) {
            simplex[worst] = reflected;
            values[worst] = f_reflected;
            continue;
        }
        const bool outside = f_reflected < values[worst];
        const auto contracted = outside ? point(centroid, simplex[worst], -0.5) : point(centroid, simplex[worst], 0.5);
        const double f_contracted = f(contracted);
        if (f_contracted < std::min(f_reflected, values[worst])) {
            simplex[worst] = contracted;
            values[worst] = f_contracted;
            continue;
        }
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == best) continue;
            simplex[i] = point(simplex[best], simplex[i], 0.5);
            values[i] = f(simplex[i]);
        }
    }

    const auto best = static_cast<std::size_t>(std::min_element(values.begin(), values.end()) - values.begin());
    result.argmin = simplex[best];
    result.value = values[best];
    result.iterations = iteration;
    return result;
}

double integrate(const RealFn& f, double a, double b, double relative_tolerance, double* error_estimate) {
    double error = 0.0;
    const double value =
        boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 15, relative_tolerance, &error);
    if (error_estimate != nullptr) *error_estimate = error;
    return value;
}

double gaussian_expectation(const RealFn& h, const std::vector<double>& breaks) {
    constexpr double z_max = 12.0;
    std::vector<double> points{-z_max, z_max};
    for (double b : breaks)
        if (std::isfinite(b) && b > -z_max && b < z_max) points.push_back(b);
    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end()), points.end());
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < points.size(); ++i)
        total += integrate([&h](double z) { return h(z) * normal_pdf(z); }, points[i], points[i + 1], 1e-13);
    return total;
}

}  // namespace impulse
