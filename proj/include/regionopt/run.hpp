#pragma once

#include <iosfwd>

#include "regionopt/config.hpp"

namespace regionopt {

/// Process exit statuses of the command-line driver.
enum ExitCode : int {
    kExitSuccess = 0,
    kExitConfigError = 2,
    kExitSolverFailure = 3,
    kExitConvergenceFailure = 4,
};

/// Runs the configured pipeline and writes its artifacts into cfg.output_dir:
/// summary.txt always, plus trace.csv, omega_####.pgm / omega_best.pgm and
/// field CSVs depending on the command. Failures are reported on `log` with
/// the failing stage named and mapped to an ExitCode; nothing is thrown.
int run(const RunConfig& cfg, std::ostream& log);

}  // namespace regionopt
