#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "gt/analytics.hpp"
#include "gt/decode.hpp"
#include "gt/design.hpp"
#include "gt/generators.hpp"
#include "gt/rng.hpp"
#include "gt/simulate.hpp"

using namespace gt;

namespace {

PoolDesign random_design(std::int64_t n, std::int64_t m, double edge_prob, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::vector<std::int32_t>> pools(static_cast<std::size_t>(m));
    for (std::int64_t a = 0; a < m; ++a)
        for (std::int32_t i = 0; i < n; ++i)
            if (rng.bernoulli(edge_prob)) pools[static_cast<std::size_t>(a)].push_back(i);
    return PoolDesign(n, std::move(pools));
}

} // namespace

TEST_CASE("exhaustive enumeration on the worked examples") {
    SUBCASE("pools {0,1},{1,2} at p = 1/2") {
        const PoolDesign d(3, {{0, 1}, {1, 2}});
        const Estimate e = exhaustive_expected_tests(d, AnalyticContext(0.5));
        CHECK(e.exact);
        CHECK(e.std_error == 0.0);
        CHECK(e.mean_u0 == doctest::Approx(0.625).epsilon(1e-14));  // girth >= 6: equals the bound
        CHECK(e.mean_u1 == doctest::Approx(1.25).epsilon(1e-14));
        CHECK(e.mean == doctest::Approx(3.875).epsilon(1e-14));
        CHECK(e.mean == doctest::Approx(static_cast<double>(e.m_tests) + e.mean_u0 + e.mean_u1));
    }
    SUBCASE("single pool {0,1} at p = 1/2, enumerated by hand") {
        // Four assignments: 00 -> (u0,u1)=(0,0); 10 and 01 -> (1,1); 11 -> (0,2).
        const PoolDesign d(2, {{0, 1}});
        const Estimate e = exhaustive_expected_tests(d, AnalyticContext(0.5));
        CHECK(e.mean_u0 == doctest::Approx(0.5).epsilon(1e-14));
        CHECK(e.mean_u1 == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(e.mean == doctest::Approx(2.5).epsilon(1e-14));
    }
    SUBCASE("p -> 0 drives the mean to M") {
        const PoolDesign d(4, {{0, 1}, {2, 3}});
        const Estimate e = exhaustive_expected_tests(d, AnalyticContext(1e-12));
        CHECK(e.mean == doctest::Approx(2.0).epsilon(1e-9));
    }
    SUBCASE("N cap enforced") {
        std::vector<std::vector<std::int32_t>> one_pool(1);
        for (std::int32_t i = 0; i < 25; ++i) one_pool[0].push_back(i);
        CHECK_THROWS_AS(exhaustive_expected_tests(PoolDesign(25, std::move(one_pool)), AnalyticContext(0.5)),
                        std::invalid_argument);
    }
}

TEST_CASE("bitmask and general enumeration paths agree") {
    // More than 64 tests forces the general path; compare against the
    // bitmask path on an equivalent design extended with empty pools.
    std::vector<std::vector<std::int32_t>> pools = {{0, 1}, {1, 2}, {0, 3}, {2, 3, 4}};
    std::vector<std::vector<std::int32_t>> padded = pools;
    padded.resize(70);
    const AnalyticContext ctx(0.35);
    const Estimate small = exhaustive_expected_tests(PoolDesign(5, pools), ctx);
    const Estimate large = exhaustive_expected_tests(PoolDesign(5, padded), ctx);
    CHECK(small.mean_u0 == doctest::Approx(large.mean_u0).epsilon(1e-12));
    CHECK(small.mean_u1 == doctest::Approx(large.mean_u1).epsilon(1e-12));
    CHECK(large.mean == doctest::Approx(small.mean + 66.0).epsilon(1e-12));
}

TEST_CASE("Monte Carlo agrees with exhaustive within 4 sigma on 50 random designs") {
    int failures = 0;
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        const PoolDesign d = random_design(8 + seed % 6, 2 + seed % 5, 0.3, seed);
        Rng prng(derive_seed(seed, 5));
        const double p = 0.1 + 0.6 * prng.next_double();
        const AnalyticContext ctx(p);
        const Estimate exact = exhaustive_expected_tests(d, ctx);
        const Estimate mc = mc_expected_tests(d, ctx, 4000, derive_seed(seed, 6));
        if (mc.std_error > 0.0 && std::abs(mc.mean - exact.mean) > 4.0 * mc.std_error) ++failures;
    }
    CHECK(failures <= 1);  // 4-sigma misses should be rare, not impossible
}

TEST_CASE("Monte Carlo determinism and error scaling") {
    const PoolDesign d = random_design(30, 10, 0.2, 3);
    const AnalyticContext ctx(0.15);

    SUBCASE("single trial with a fixed seed reproduces") {
        const Estimate a = mc_expected_tests(d, ctx, 1, 42);
        const Estimate b = mc_expected_tests(d, ctx, 1, 42);
        CHECK(a.mean == b.mean);
        CHECK(a.std_error == 0.0);
    }
    SUBCASE("full estimate reproduces bit-identically") {
        const Estimate a = mc_expected_tests(d, ctx, 500, 42);
        const Estimate b = mc_expected_tests(d, ctx, 500, 42);
        CHECK(a.mean == b.mean);
        CHECK(a.std_error == b.std_error);
        CHECK(a.mean == doctest::Approx(static_cast<double>(a.m_tests) + a.mean_u0 + a.mean_u1));
    }
    SUBCASE("doubling trials shrinks the standard error by about sqrt(2)") {
        const Estimate base = mc_expected_tests(d, ctx, 20000, 7);
        const Estimate doubled = mc_expected_tests(d, ctx, 40000, 7);
        const double shrink = base.std_error / doubled.std_error;
        CHECK(shrink > std::sqrt(2.0) * 0.8);
        CHECK(shrink < std::sqrt(2.0) * 1.2);
    }
}

TEST_CASE("estimator consistency battery: exhaustive within 4 sigma in nearly all repetitions") {
    const PoolDesign d = random_design(12, 5, 0.3, 11);
    const AnalyticContext ctx(0.25);
    const Estimate exact = exhaustive_expected_tests(d, ctx);
    int hits = 0;
    const int reps = 200;
    for (int rep = 0; rep < reps; ++rep) {
        const Estimate mc = mc_expected_tests(d, ctx, 600, derive_seed(0xBA77E21, static_cast<std::uint64_t>(rep)));
        if (std::abs(mc.mean - exact.mean) <= 4.0 * mc.std_error) ++hits;
    }
    CHECK(hits >= static_cast<int>(0.99 * reps));
}

TEST_CASE("family Monte Carlo") {
    SUBCASE("design_samples = 1 reduces to a single-design estimate") {
        DesignParams params;
        params.family = DesignFamily::RegularPoisson;
        params.n_variables = 40;
        params.defect_prob = 0.1;
        params.tests_per_variable = 3;
        params.n_tests = 15;
        params.mean_test_degree = 8.0;
        const AnalyticContext ctx(0.1);
        const Estimate family = mc_family_expected_tests(params, ctx, 1, 300, 5);
        const PoolDesign same = gen_regular_poisson(40, 15, 3, derive_seed(5, 0));
        const Estimate single = mc_expected_tests(same, ctx, 300, derive_seed(5, 1));
        CHECK(family.mean == doctest::Approx(single.mean).epsilon(1e-15));
    }
    SUBCASE("Poisson-Poisson family mean matches the closed-form undetected-zero count within 3 sigma") {
        const std::int64_t n = 8, m = 3;
        const double k = 2.0, p = 0.25;
        const AnalyticContext ctx(p);

        // Mean test degree K corresponds to edge probability K/N = L/M.
        const double l_mean = k * static_cast<double>(m) / static_cast<double>(n);
        double sum_u0 = 0.0, sum_u0_sq = 0.0;
        const std::int64_t designs = 4000;
        for (std::int64_t d = 0; d < designs; ++d) {
            const PoolDesign design = gen_poisson_poisson(n, m, l_mean, derive_seed(0xFA, static_cast<std::uint64_t>(d)));
            const double u0 = exhaustive_expected_tests(design, ctx).mean_u0;
            sum_u0 += u0;
            sum_u0_sq += u0 * u0;
        }
        const double mean = sum_u0 / static_cast<double>(designs);
        const double var = (sum_u0_sq / static_cast<double>(designs) - mean * mean) /
                           static_cast<double>(designs - 1) * static_cast<double>(designs);
        const double sigma = std::sqrt(var / static_cast<double>(designs));
        CHECK(std::abs(mean - pp_expected_u0(n, ctx, m, k)) <= 3.0 * sigma);
    }
    SUBCASE("regular-Poisson at the optimal parameters sits below the Poisson-Poisson constant e") {
        const std::int64_t n = std::int64_t{1} << 14;
        const double p = 1.0 / 32.0;
        const AnalyticContext ctx(p);
        const DesignParams params = optimal_params(n, p, DesignFamily::RegularPoisson);
        const Estimate estimate = mc_family_expected_tests(params, ctx, 8, 16, 99);
        const double npl = static_cast<double>(n) * p * std::abs(std::log(p));
        const double ratio = estimate.mean / npl;
        CHECK(ratio + 3.0 * estimate.std_error / npl < std::exp(1.0));
    }
}

TEST_CASE("fkg_gap") {
    SUBCASE("zero on a girth-6 design") {
        const PoolDesign d = gen_regular_regular_girth6(9, 2, 6, 1);
        CHECK(std::abs(fkg_gap(d, AnalyticContext(0.4))) <= 1e-12 * 9);
    }
    SUBCASE("duplicate pools give gap 1/4 at p = 1/2") {
        const PoolDesign d(2, {{0, 1}, {0, 1}});
        CHECK(fkg_gap(d, AnalyticContext(0.5)) == doctest::Approx(0.25).epsilon(1e-14));
    }
    SUBCASE("one variable, one pool: no pairs, no gap") {
        const PoolDesign d(1, {{0}});
        CHECK(std::abs(fkg_gap(d, AnalyticContext(0.3))) <= 1e-14);
    }
}
