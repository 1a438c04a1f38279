#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gt {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

/// Runs the full acceptance battery, printing one pass/fail line per
/// criterion to `out` as it goes, and returns the results.
std::vector<CriterionResult> run_acceptance(std::ostream& out);

} // namespace gt
