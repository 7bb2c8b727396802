#pragma once

#include <iosfwd>

#include "sisr/error.hpp"

namespace sisr::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int {
  kExitOk = 0,
  kExitData = 1,
  kExitUsage = 2,
  kExitNumerical = 3,
};

int exit_code(ErrorKind kind);

/// Entry point shared by the executable and the tests. argv[0] is the
/// program name.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sisr::cli
