// Acceptance battery runner: one pass/fail line per criterion, nonzero exit
// if any criterion fails.

#include <iostream>

#include "gt/verify.hpp"

int main() {
    const std::vector<gt::CriterionResult> results = gt::run_acceptance(std::cout);
    int failures = 0;
    for (const auto& r : results)
        if (!r.pass) ++failures;
    return failures == 0 ? 0 : 1;
}
