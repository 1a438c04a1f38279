#include "gt/simulate.hpp"

#include <bit>
#include <cassert>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "gt/decode.hpp"
#include "gt/rng.hpp"

namespace gt {

namespace {

struct ExactMoments {
    double u0 = 0.0;
    double u1 = 0.0;
};

// Enumeration with the whole decode in machine words: variables fit a
// 32-bit mask (N <= 24), tests a 64-bit mask (M <= 64).
ExactMoments enumerate_bitmask(const PoolDesign& design, const AnalyticContext& ctx) {
    const int n = static_cast<int>(design.n_variables());
    const int m = static_cast<int>(design.n_tests());

    std::vector<std::uint64_t> var_testmask(static_cast<std::size_t>(n), 0);
    std::vector<std::uint32_t> test_varmask(static_cast<std::size_t>(m), 0);
    for (int a = 0; a < m; ++a)
        for (std::int32_t i : design.pool(a)) {
            var_testmask[static_cast<std::size_t>(i)] |= std::uint64_t{1} << a;
            test_varmask[static_cast<std::size_t>(a)] |= std::uint32_t{1} << i;
        }

    std::vector<double> weight_by_popcount(static_cast<std::size_t>(n) + 1);
    for (int k = 0; k <= n; ++k)
        weight_by_popcount[static_cast<std::size_t>(k)] = std::pow(ctx.p, k) * std::pow(ctx.q, n - k);

    const std::uint32_t full = n == 32 ? ~std::uint32_t{0} : (std::uint32_t{1} << n) - 1;
    ExactMoments moments;
    for (std::uint32_t defect = 0;; ++defect) {
        std::uint64_t positive = 0;
        for (std::uint32_t rest = defect; rest;) {
            const int i = std::countr_zero(rest);
            positive |= var_testmask[static_cast<std::size_t>(i)];
            rest &= rest - 1;
        }
        std::uint32_t sure_zero = 0;
        for (int a = 0; a < m; ++a)
            if (!(positive & (std::uint64_t{1} << a))) sure_zero |= test_varmask[static_cast<std::size_t>(a)];
        std::uint32_t sure_one = 0;
        for (int a = 0; a < m; ++a) {
            if (!(positive & (std::uint64_t{1} << a))) continue;
            const std::uint32_t open = test_varmask[static_cast<std::size_t>(a)] & ~sure_zero;
            if (std::popcount(open) == 1) {
                assert((open & defect) == open);
                sure_one |= open;
            }
        }
        const int u0 = std::popcount(full & ~defect & ~sure_zero);
        const int u1 = std::popcount(defect & ~sure_one);
        const double w = weight_by_popcount[static_cast<std::size_t>(std::popcount(defect))];
        moments.u0 += w * u0;
        moments.u1 += w * u1;
        if (defect == full) break;
    }
    return moments;
}

ExactMoments enumerate_general(const PoolDesign& design, const AnalyticContext& ctx) {
    const std::int64_t n = design.n_variables();
    std::vector<double> weight_by_popcount(static_cast<std::size_t>(n) + 1);
    for (std::int64_t k = 0; k <= n; ++k)
        weight_by_popcount[static_cast<std::size_t>(k)] =
            std::pow(ctx.p, static_cast<double>(k)) * std::pow(ctx.q, static_cast<double>(n - k));

    TrialDecoder decoder(design);
    std::vector<std::int32_t> defects;
    ExactMoments moments;
    for (std::uint32_t mask = 0;; ++mask) {
        defects.clear();
        for (std::uint32_t rest = mask; rest;) {
            defects.push_back(static_cast<std::int32_t>(std::countr_zero(rest)));
            rest &= rest - 1;
        }
        const UndeterminedCounts counts = decoder.count(defects);
        const double w = weight_by_popcount[defects.size()];
        moments.u0 += w * static_cast<double>(counts.u0);
        moments.u1 += w * static_cast<double>(counts.u1);
        if (mask == (std::uint32_t{1} << n) - 1) break;
    }
    return moments;
}

ExactMoments enumerate_exact(const PoolDesign& design, const AnalyticContext& ctx) {
    if (design.n_variables() > 24)
        throw std::invalid_argument("exhaustive enumeration requires N <= 24, got N = " +
                                    std::to_string(design.n_variables()));
    if (design.n_tests() <= 64) return enumerate_bitmask(design, ctx);
    return enumerate_general(design, ctx);
}

} // namespace

Estimate exhaustive_expected_tests(const PoolDesign& design, const AnalyticContext& ctx) {
    const ExactMoments moments = enumerate_exact(design, ctx);
    Estimate estimate;
    estimate.m_tests = design.n_tests();
    estimate.mean_u0 = moments.u0;
    estimate.mean_u1 = moments.u1;
    estimate.mean = static_cast<double>(estimate.m_tests) + moments.u0 + moments.u1;
    estimate.std_error = 0.0;
    estimate.exact = true;
    estimate.n_trials = std::int64_t{1} << design.n_variables();
    return estimate;
}

namespace {

// Defect list of one trial via geometric skipping: expected O(Np) work.
void sample_defects(Rng& rng, std::int64_t n, double log_q, std::vector<std::int32_t>& out) {
    out.clear();
    std::uint64_t pos = geometric_skip(rng, log_q);
    while (pos < static_cast<std::uint64_t>(n)) {
        out.push_back(static_cast<std::int32_t>(pos));
        pos += 1 + geometric_skip(rng, log_q);
    }
}

} // namespace

Estimate mc_expected_tests(const PoolDesign& design, const AnalyticContext& ctx,
                           std::int64_t trials, std::uint64_t seed) {
    if (trials < 1) throw std::invalid_argument("mc_expected_tests: trials must be >= 1");
    const double log_q = std::log1p(-ctx.p);

    TrialDecoder decoder(design);
    std::vector<std::int32_t> defects;
    double sum_u0 = 0.0, sum_u1 = 0.0, sum_extra = 0.0, sum_extra_sq = 0.0;
    for (std::int64_t t = 0; t < trials; ++t) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
        sample_defects(rng, design.n_variables(), log_q, defects);
        const UndeterminedCounts counts = decoder.count(defects);
        const double extra = static_cast<double>(counts.u0 + counts.u1);
        sum_u0 += static_cast<double>(counts.u0);
        sum_u1 += static_cast<double>(counts.u1);
        sum_extra += extra;
        sum_extra_sq += extra * extra;
    }

    Estimate estimate;
    estimate.m_tests = design.n_tests();
    estimate.n_trials = trials;
    estimate.seed = seed;
    estimate.mean_u0 = sum_u0 / static_cast<double>(trials);
    estimate.mean_u1 = sum_u1 / static_cast<double>(trials);
    estimate.mean = static_cast<double>(estimate.m_tests) + estimate.mean_u0 + estimate.mean_u1;
    if (trials >= 2) {
        const double mean_extra = sum_extra / static_cast<double>(trials);
        const double var = std::max(0.0, (sum_extra_sq / static_cast<double>(trials) - mean_extra * mean_extra) *
                                             static_cast<double>(trials) / static_cast<double>(trials - 1));
        estimate.std_error = std::sqrt(var / static_cast<double>(trials));
    }
    return estimate;
}

Estimate mc_family_expected_tests(const DesignParams& params, const AnalyticContext& ctx,
                                  std::int64_t design_samples, std::int64_t trials_per_design,
                                  std::uint64_t seed) {
    if (design_samples < 1 || trials_per_design < 1)
        throw std::invalid_argument("mc_family_expected_tests: sample counts must be >= 1");
    if (params.family == DesignFamily::RegularRegularGirth6)
        throw std::invalid_argument("mc_family_expected_tests: family must be RegularPoisson or PoissonPoisson");

    double sum_mean = 0.0, sum_mean_sq = 0.0, sum_u0 = 0.0, sum_u1 = 0.0;
    Estimate last{};
    for (std::int64_t d = 0; d < design_samples; ++d) {
        const std::uint64_t design_seed = derive_seed(seed, 2 * static_cast<std::uint64_t>(d));
        const std::uint64_t trial_seed = derive_seed(seed, 2 * static_cast<std::uint64_t>(d) + 1);
        const PoolDesign design =
            params.family == DesignFamily::RegularPoisson
                ? gen_regular_poisson(params.n_variables, params.n_tests, params.tests_per_variable, design_seed)
                : gen_poisson_poisson(params.n_variables, params.n_tests,
                                      static_cast<double>(params.tests_per_variable), design_seed);
        last = mc_expected_tests(design, ctx, trials_per_design, trial_seed);
        sum_mean += last.mean;
        sum_mean_sq += last.mean * last.mean;
        sum_u0 += last.mean_u0;
        sum_u1 += last.mean_u1;
    }

    Estimate estimate;
    estimate.m_tests = params.n_tests;
    estimate.n_trials = design_samples * trials_per_design;
    estimate.seed = seed;
    estimate.mean_u0 = sum_u0 / static_cast<double>(design_samples);
    estimate.mean_u1 = sum_u1 / static_cast<double>(design_samples);
    estimate.mean = static_cast<double>(estimate.m_tests) + estimate.mean_u0 + estimate.mean_u1;
    if (design_samples >= 2) {
        const double mean = sum_mean / static_cast<double>(design_samples);
        const double var =
            std::max(0.0, (sum_mean_sq / static_cast<double>(design_samples) - mean * mean) *
                              static_cast<double>(design_samples) / static_cast<double>(design_samples - 1));
        estimate.std_error = std::sqrt(var / static_cast<double>(design_samples));
    } else {
        estimate.std_error = last.std_error;
    }
    return estimate;
}

double fkg_gap(const PoolDesign& design, const AnalyticContext& ctx) {
    const ExactMoments moments = enumerate_exact(design, ctx);
    return moments.u0 - bound_b(design, ctx);
}

} // namespace gt
