#pragma once

#include <iosfwd>

namespace rbmh {

/// Entry point behind the `rbmh` binary; split out so tests can drive the
/// subcommands in-process. Returns the process exit code.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Fast deterministic checks of the closed forms against independent
/// numerical routes (quadrature, simulation, exact kernels). Returns the
/// number of failed checks and prints one line per check.
int run_selftest(std::ostream& out);

}  // namespace rbmh
