#pragma once

#include <cmath>
#include <numbers>

namespace impulse {

/// Standard normal density.
inline double normal_pdf(double x) noexcept {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

/// Standard normal distribution function. erfc keeps full relative accuracy
/// in the lower tail, where 1 + erf(x) would cancel.
inline double normal_cdf(double x) noexcept {
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

}  // namespace impulse
