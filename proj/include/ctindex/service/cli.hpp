#pragma once

#include <iosfwd>

#include "ctindex/error.hpp"
#include "ctindex/service/config.hpp"

namespace ctindex::service {

/// Process exit codes.
enum ExitCode : int {
    kExitOk = 0,
    kExitInternal = 1,
    kExitUsage = 2,
    kExitInvalidInput = 3,
    kExitNotFound = 4,
    kExitConflict = 5,
};

int exit_code(Errc code) noexcept;

/// The `ctindex` command line. Results go to `out` (JSON or key/value
/// text), diagnostics to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err,
            const EnvLookup& env = process_environment());

}  // namespace ctindex::service
