#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace impulse {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11). Every draw is
/// a pure function of (key, counter), so any path and step can be generated
/// independently of scheduling.
class Philox4x32 {
  public:
    using Block = std::array<std::uint32_t, 4>;

    explicit Philox4x32(std::uint64_t seed) noexcept
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

    Block operator()(Block counter) const noexcept {
        std::array<std::uint32_t, 2> key = key_;
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * counter[0];
            const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * counter[2];
            counter = {static_cast<std::uint32_t>(p1 >> 32) ^ counter[1] ^ key[0], static_cast<std::uint32_t>(p1),
                       static_cast<std::uint32_t>(p0 >> 32) ^ counter[3] ^ key[1], static_cast<std::uint32_t>(p0)};
            key[0] += kW0;
            key[1] += kW1;
        }
        return counter;
    }

  private:
    static constexpr std::uint32_t kM0 = 0xD2511F53u;
    static constexpr std::uint32_t kM1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kW0 = 0x9E3779B9u;
    static constexpr std::uint32_t kW1 = 0xBB67AE85u;
    std::array<std::uint32_t, 2> key_;
};

/// Uniform on the open interval (0, 1) with 53 random bits.
inline double to_open_unit(std::uint32_t hi, std::uint32_t lo) noexcept {
    const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

struct NormalPair {
    double z0;
    double z1;
};

/// Standard normal quantile, Wichura's AS241 (PPND16); relative error ~1e-16.
inline double normal_quantile(double u) noexcept {
    const double q = u - 0.5;
    if (std::abs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q *
               (((((((2509.0809287301226727 * r + 33430.575583588128105) * r + 67265.770927008700853) * r +
                    45921.953931549871457) * r + 13731.693765509461125) * r + 1971.5909503065514427) * r +
                 133.14166789178437745) * r + 3.387132872796366608) /
               (((((((5226.495278852545925 * r + 28729.085735721942674) * r + 39307.89580009271061) * r +
                    21213.794301586595867) * r + 5394.1960214247511077) * r + 687.1870074920579083) * r +
                 42.313330701600911252) * r + 1.0);
    }
    double r = std::sqrt(-std::log(q < 0.0 ? u : 1.0 - u));
    double z;
    if (r <= 5.0) {
        r -= 1.6;
        z = (((((((7.7454501427834140764e-4 * r + 0.0227238449892691845833) * r + 0.24178072517745061177) * r +
                 1.27045825245236838258) * r + 3.64784832476320460504) * r + 5.7694972214606914055) * r +
              4.6303378461565452959) * r + 1.42343711074968357734) /
            (((((((1.05075007164441684324e-9 * r + 5.475938084995344946e-4) * r + 0.0151986665636164571966) * r +
                 0.14810397642748007459) * r + 0.68976733498510000455) * r + 1.6763848301838038494) * r +
              2.05319162663775882187) * r + 1.0);
    } else {
        r -= 5.0;
        z = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r + 0.0012426609473880784386) * r +
                 0.026532189526576123093) * r + 0.29656057182850489123) * r + 1.7848265399172913358) * r +
              5.4637849111641143699) * r + 6.6579046435011037772) /
            (((((((2.04426310338993978564e-15 * r + 1.4215117583164458887e-7) * r + 1.8463183175100546818e-5) * r +
                 7.868691311456132591e-4) * r + 0.0148753612908506148525) * r + 0.13692988092273580531) * r +
              0.59983220655588793769) * r + 1.0);
    }
    return q < 0.0 ? -z : z;
}

/// Two independent standard normals (inverse CDF) for one counter.
inline NormalPair normal_pair(const Philox4x32& rng, std::uint64_t step, std::uint32_t stream,
                              std::uint32_t domain) noexcept {
    const auto block = rng({static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(step >> 32), stream, domain});
    return {normal_quantile(to_open_unit(block[0], block[1])), normal_quantile(to_open_unit(block[2], block[3]))};
}

/// Two independent uniforms on (0, 1) for one counter.
inline std::array<double, 2> uniform_pair(const Philox4x32& rng, std::uint64_t step, std::uint32_t stream,
                                          std::uint32_t domain) noexcept {
    const auto block = rng({static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(step >> 32), stream, domain});
    return {to_open_unit(block[0], block[1]), to_open_unit(block[2], block[3])};
}

}  // namespace impulse
