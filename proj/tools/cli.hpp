#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace binstream::cli {

enum ExitCode : int {
    kOk = 0,
    kInvariantFailure = 1,
    kUsageError = 2,
};

struct SweepRow {
    std::string method;
    std::size_t n = 0;
    double alpha = 1.0;
    double beta = 0.0;
    double c = 0.0;
    double tau = 0.0;
    double d = 0.0;
    std::size_t bin_size = 0;
    double mean_se_ratio = 1.0;
    double max_se_ratio = 1.0;
    double wall_time_ms = 0.0;
};

/// Geometric grid of `steps` values from lo to hi inclusive.
std::vector<double> d_grid(double lo, double hi, std::size_t steps);

/// Runs the command line and returns the process exit code. Diagnostics go to
/// `err`; command output goes to `out` unless redirected with --out.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace binstream::cli
