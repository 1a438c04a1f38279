#pragma once

#include <cstdint>

#include "gt/analytics.hpp"
#include "gt/design.hpp"
#include "gt/generators.hpp"

namespace gt {

/// Point estimate of the mean test count with its uncertainty. `exact`
/// estimates carry std_error = 0. Always mean = m_tests + mean_u0 + mean_u1.
struct Estimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::int64_t n_trials = 0;
    bool exact = false;
    std::uint64_t seed = 0;
    double mean_u0 = 0.0;
    double mean_u1 = 0.0;
    std::int64_t m_tests = 0;
};

/// Exact mean of T, |U0| and |U1| under the Bernoulli(p) assignment measure
/// by full enumeration of the 2^N assignments. Requires N <= 24.
Estimate exhaustive_expected_tests(const PoolDesign& design, const AnalyticContext& ctx);

/// Monte Carlo mean over `trials` sampled assignments. Trial t draws from an
/// RNG stream keyed by (seed, t) and results accumulate in trial order, so
/// the output is identical under any scheduling of the trials.
Estimate mc_expected_tests(const PoolDesign& design, const AnalyticContext& ctx,
                           std::int64_t trials, std::uint64_t seed);

/// Two-level Monte Carlo over random designs of a family (RegularPoisson or
/// PoissonPoisson) and assignments: `design_samples` designs, each averaged
/// over `trials_per_design` assignments. The standard error is computed from
/// the spread of per-design means, which carries both the between-design and
/// the within-design variance components.
Estimate mc_family_expected_tests(const DesignParams& params, const AnalyticContext& ctx,
                                  std::int64_t design_samples, std::int64_t trials_per_design,
                                  std::uint64_t seed);

/// Exhaustive E|U0| minus the closed-form bound; >= 0 up to rounding, and 0
/// exactly when the design has girth >= 6. Requires N <= 24.
double fkg_gap(const PoolDesign& design, const AnalyticContext& ctx);

} // namespace gt
