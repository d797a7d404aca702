#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace binstream {

/// Outcome of one invariant check. `slack` is the smallest observed margin
/// to the bound (negative when violated); its unit depends on the check.
struct CheckResult {
    std::string suite;
    std::string name;
    bool passed = false;
    double slack = 0.0;
    std::string detail;
};

/// Suite names accepted by run_verify_suite, excluding "all".
const std::vector<std::string>& verify_suite_names();

/// Runs "kernels", "binning", "perturbation", "streaming" or "all".
/// Throws ParameterError for an unknown suite.
std::vector<CheckResult> run_verify_suite(std::string_view suite);

} // namespace binstream
