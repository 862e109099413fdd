#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace impulse {

enum class ErrorKind {
    Configuration,     // invalid model, cost, or solver configuration
    Domain,            // argument outside the admissible state/transformed range
    Integrability,     // expected discounted reward does not converge
    DegeneratePolicy,  // (a, b) or (p, q, c, d) gives a singular continuous-fit system
    NoThreshold,       // smooth-fit residual has no sign change on the window
    NoBand,            // no admissible seed for the (p, d) smooth-fit system
    OracleFailure,     // fixed-point iteration did not converge
    NoAction,          // discount does not exceed demand drift; inaction is optimal
    Simulation,        // invalid simulator configuration or failed run
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

  private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

inline void require(bool condition, ErrorKind kind, const std::string& message) {
    if (!condition) throw Error(kind, message);
}

}  // namespace impulse
