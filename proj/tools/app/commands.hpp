#pragma once

#include "impulse/error.hpp"

#include <ostream>

namespace impulse::app {

enum ExitCode : int {
    exit_ok = 0,
    exit_io = 1,
    exit_config = 2,
    exit_solver = 3,
    exit_simulation = 4,
};

int exit_code_for(ErrorKind kind) noexcept;

/// Entry point of the `impulse` tool; never throws. Summaries go to `out`,
/// diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace impulse::app
