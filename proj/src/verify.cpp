#include "gt/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "gt/analytics.hpp"
#include "gt/decode.hpp"
#include "gt/design.hpp"
#include "gt/experiment.hpp"
#include "gt/generators.hpp"
#include "gt/rng.hpp"
#include "gt/simulate.hpp"

namespace gt {

namespace {

struct ExactRecord {
    std::int64_t n;
    double p;
    double mean_t;
};

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// Girth-6 battery shapes; every entry was checked to build quickly under
// progressive edge growth at small sizes.
struct Shape {
    std::int64_t n, l, m;
};

const std::vector<Shape> kGirth6Shapes = {
    {6, 1, 2},  {6, 2, 6},   {8, 2, 6},   {9, 2, 6},   {10, 2, 8},  {12, 2, 8},
    {12, 2, 10}, {13, 2, 9}, {14, 2, 10}, {15, 2, 10}, {16, 2, 11}, {12, 3, 12},
    {14, 3, 14}, {16, 3, 16}, {16, 4, 24}, {10, 1, 4},
};

// Random design with test degrees <= 4, optionally with a forced pair of
// tests sharing variables 0 and 1 (a guaranteed 4-cycle).
PoolDesign bounded_degree_design(std::int64_t n, std::int64_t m, bool force_cycle, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::vector<std::int32_t>> pools(static_cast<std::size_t>(m));
    std::vector<std::int32_t> scratch(static_cast<std::size_t>(n));
    for (std::int64_t a = 0; a < m; ++a) {
        for (std::int64_t i = 0; i < n; ++i) scratch[static_cast<std::size_t>(i)] = static_cast<std::int32_t>(i);
        const std::int64_t degree = 2 + static_cast<std::int64_t>(rng.below(3));  // 2..4
        for (std::int64_t k = 0; k < degree; ++k) {
            const std::int64_t j = k + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(n - k)));
            std::swap(scratch[static_cast<std::size_t>(k)], scratch[static_cast<std::size_t>(j)]);
            pools[static_cast<std::size_t>(a)].push_back(scratch[static_cast<std::size_t>(k)]);
        }
    }
    if (force_cycle && m >= 2 && n >= 3) {
        pools[0] = {0, 1, 2};
        pools[1] = {0, 1, static_cast<std::int32_t>(2 + rng.below(static_cast<std::uint64_t>(n - 2)))};
    }
    return PoolDesign(n, std::move(pools));
}

CriterionResult criterion_1(std::vector<ExactRecord>& records) {
    CriterionResult result{1, "girth-6 exactness: exhaustive E|U0| equals the closed-form bound", true, "", 0};
    double worst = 0.0;
    int built = 0;
    for (int idx = 0; idx < 200; ++idx) {
        const Shape shape = kGirth6Shapes[static_cast<std::size_t>(idx) % kGirth6Shapes.size()];
        const std::uint64_t seed = derive_seed(0xC1, static_cast<std::uint64_t>(idx));
        const PoolDesign design = gen_regular_regular_girth6(shape.n, shape.l, shape.m, seed, 20);
        Rng prng(derive_seed(seed, 77));
        const double p = 0.05 + 0.9 * prng.next_double();
        const AnalyticContext ctx(p);
        const Estimate exact = exhaustive_expected_tests(design, ctx);
        const double bound = bound_b(design, ctx);
        const double err = std::abs(exact.mean_u0 - bound);
        worst = std::max(worst, err);
        if (err > 1e-12 * static_cast<double>(shape.n)) result.pass = false;
        records.push_back({shape.n, p, exact.mean});
        ++built;
    }
    result.detail = std::to_string(built) + " designs, worst |E|U0| - B| = " + num(worst);
    return result;
}

CriterionResult criterion_2(std::vector<ExactRecord>& records) {
    CriterionResult result{2, "FKG direction: gap >= 0 always, strictly positive with a 4-cycle", true, "", 0};
    double worst_low = 0.0, smallest_cycle_gap = 1e300;
    for (int idx = 0; idx < 200; ++idx) {
        const std::uint64_t seed = derive_seed(0xC2, static_cast<std::uint64_t>(idx));
        Rng prng(derive_seed(seed, 99));
        const std::int64_t n = 6 + static_cast<std::int64_t>(prng.below(9));  // 6..14
        const std::int64_t m = 3 + static_cast<std::int64_t>(prng.below(5));  // 3..7
        const PoolDesign design = bounded_degree_design(n, m, idx % 2 == 1, seed);
        const double p = 0.1 + 0.8 * prng.next_double();
        const AnalyticContext ctx(p);
        const double gap = fkg_gap(design, ctx);
        worst_low = std::min(worst_low, gap);
        if (gap < -1e-12) result.pass = false;
        if (!girth_at_least_6(design)) {
            smallest_cycle_gap = std::min(smallest_cycle_gap, gap);
            if (gap <= 1e-6) result.pass = false;
        }
        records.push_back({n, p, exhaustive_expected_tests(design, ctx).mean});
    }
    result.detail = "min gap = " + num(worst_low) + ", smallest 4-cycle gap = " + num(smallest_cycle_gap);
    return result;
}

CriterionResult criterion_3(std::vector<ExactRecord>& records) {
    CriterionResult result{3, "hand-example regression: T=2, T=5, duplicate-pool gap 0.25", true, "", 0};
    const PoolDesign chain(3, {{0, 1}, {1, 2}});
    const std::int64_t t1 = decode_two_stage(chain, Assignment{{1, 0, 0}}).total_tests;
    const std::int64_t t2 = decode_two_stage(chain, Assignment{{1, 1, 0}}).total_tests;

    const PoolDesign duplicated(2, {{0, 1}, {0, 1}});
    const AnalyticContext half(0.5);
    const double gap = fkg_gap(duplicated, half);

    result.pass = t1 == 2 && t2 == 5 && std::abs(gap - 0.25) <= 1e-15;
    result.detail = "T(100) = " + std::to_string(t1) + ", T(110) = " + std::to_string(t2) +
                    ", gap = " + num(gap);
    records.push_back({3, 0.5, exhaustive_expected_tests(chain, half).mean});
    records.push_back({2, 0.5, exhaustive_expected_tests(duplicated, half).mean});
    return result;
}

CriterionResult criterion_4() {
    CriterionResult result{4, "U(p)(log 2)^2/p -> 1 with deviations shrinking 5x-20x per decade", true, "", 0};
    const double log2sq = std::log(2.0) * std::log(2.0);
    double dev[3];
    const double ps[3] = {1e-2, 1e-3, 1e-4};
    for (int i = 0; i < 3; ++i) {
        const AnalyticContext ctx(ps[i]);
        dev[i] = std::abs(u_of_p(ctx).value * log2sq / ps[i] - 1.0);
    }
    const double r1 = dev[0] / dev[1], r2 = dev[1] / dev[2];
    result.pass = r1 >= 5.0 && r1 <= 20.0 && r2 >= 5.0 && r2 <= 20.0;
    result.detail = "deviations " + num(dev[0]) + ", " + num(dev[1]) + ", " + num(dev[2]) +
                    "; decade factors " + num(r1) + ", " + num(r2);
    return result;
}

CriterionResult criterion_5() {
    CriterionResult result{5, "c(p) expansion residual shrinks monotonically toward 0", true, "", 0};
    const double log2 = std::log(2.0);
    const double log2sq = log2 * log2;
    const double second_coeff = (1.0 - 2.0 * std::abs(std::log(log2))) / log2sq;
    const double ps[3] = {1e-2, 1e-3, 1e-4};
    double resid[3];
    for (int i = 0; i < 3; ++i) {
        const AnalyticContext ctx(ps[i]);
        const double p = ps[i];
        resid[i] = (c_of_p(ctx) - p * std::abs(std::log(p)) / log2sq - second_coeff * p) / p;
    }
    result.pass = std::abs(resid[0]) > std::abs(resid[1]) && std::abs(resid[1]) > std::abs(resid[2]);
    result.detail = "residuals " + num(resid[0]) + ", " + num(resid[1]) + ", " + num(resid[2]);
    return result;
}

CriterionResult criterion_6() {
    CriterionResult result{6, "regular upper-bound ratio decreases along beta=0.25 into [2.08, 3.0]", true, "", 0};
    const int exps[4] = {12, 16, 20, 24};
    double prev = 1e300, last = 0.0;
    std::string ratios;
    for (int e : exps) {
        const std::int64_t n = std::int64_t{1} << e;
        const double p = std::pow(static_cast<double>(n), -0.25);
        const AnalyticContext ctx(p);
        const double npl = static_cast<double>(n) * p * std::abs(std::log(p));
        const double bound = regular_upper_bound(n, ctx);
        const double ratio = bound / npl;
        if (!(ratio < prev)) result.pass = false;
        prev = ratio;
        last = ratio;
        ratios += (ratios.empty() ? "" : ", ") + num(ratio);

        const DesignParams params = optimal_params(n, p, DesignFamily::RegularRegularGirth6);
        if (params.tests_per_variable >= 4) {
            const CorrectionWindow window = h_correction(n, ctx, bound);
            if (window.h > 2.0) result.pass = false;
        }
    }
    if (!(last >= 2.08 && last <= 3.0)) result.pass = false;
    result.detail = "ratios " + ratios;
    return result;
}

CriterionResult criterion_7() {
    CriterionResult result{7, "girth-6 generator at N=4096, p=2^-4 within 10 restarts", true, "", 0};
    const std::int64_t n = 4096;
    const double p = 1.0 / 16.0;
    const DesignParams params = optimal_params(n, p, DesignFamily::RegularRegularGirth6);
    const Girth6Feasibility feasibility =
        girth6_feasibility(n, params.tests_per_variable, params.n_tests);
    if (!feasibility.satisfied) result.pass = false;
    try {
        const PoolDesign design = gen_regular_regular_girth6(n, params.tests_per_variable, params.n_tests,
                                                             0x6E0501, 10);
        if (!girth_at_least_6(design)) result.pass = false;
        for (std::int64_t i = 0; i < n; ++i)
            if (design.variable_degree(i) != params.tests_per_variable) result.pass = false;
        result.detail = "L = " + std::to_string(params.tests_per_variable) +
                        ", M = " + std::to_string(params.n_tests) + ", girth ok, variable-regular";
    } catch (const GenerationError& e) {
        result.pass = false;
        result.detail = e.what();
    }
    return result;
}

CriterionResult criterion_8() {
    CriterionResult result{8, "Poisson-Poisson closed form matches two-level Monte Carlo within 4 sigma",
                           true, "", 0};
    double worst_sigma = 0.0;
    for (int tuple = 0; tuple < 20; ++tuple) {
        Rng prng(derive_seed(0xC8, static_cast<std::uint64_t>(tuple)));
        const std::int64_t n = tuple < 4 ? 10 : 4 + static_cast<std::int64_t>(prng.below(5));  // mostly 4..8
        const std::int64_t m = 1 + static_cast<std::int64_t>(prng.below(6));
        const double k = 0.5 + (static_cast<double>(n) * 0.8 - 0.5) * prng.next_double();
        const double p = 0.05 + 0.45 * prng.next_double();
        const AnalyticContext ctx(p);
        const double closed = pp_expected_u0(n, ctx, m, k);

        const std::int64_t designs = 100000;
        const double l_mean = k * static_cast<double>(m) / static_cast<double>(n);  // edge prob = K/N
        double sum = 0.0, sum_sq = 0.0;
        for (std::int64_t d = 0; d < designs; ++d) {
            const PoolDesign design =
                gen_poisson_poisson(n, m, l_mean, derive_seed(0xC8D, static_cast<std::uint64_t>(tuple * designs + d)));
            const double u0 = exhaustive_expected_tests(design, ctx).mean_u0;
            sum += u0;
            sum_sq += u0 * u0;
        }
        const double mean = sum / static_cast<double>(designs);
        const double var = std::max(0.0, (sum_sq / static_cast<double>(designs) - mean * mean) *
                                             static_cast<double>(designs) / static_cast<double>(designs - 1));
        const double sigma = std::sqrt(var / static_cast<double>(designs));
        const double sigmas = sigma > 0.0 ? std::abs(mean - closed) / sigma : 0.0;
        worst_sigma = std::max(worst_sigma, sigmas);
        if (sigmas > 4.0) result.pass = false;
    }
    result.detail = "20 tuples x 1e5 designs (exhaustive over X), worst deviation = " + num(worst_sigma) + " sigma";
    return result;
}

CriterionResult criterion_9() {
    CriterionResult result{9, "Poisson-Poisson optimum at p=1e-3, N=1e9 against the asymptotic windows",
                           true, "", 0};
    const std::int64_t n = 1000000000;
    const double p = 1e-3;
    const AnalyticContext ctx(p);
    const double e = std::exp(1.0);
    const double npl = static_cast<double>(n) * p * std::abs(std::log(p));

    const PpOptimum opt = pp_optimize(n, ctx);
    const double m_ratio = static_cast<double>(opt.m) / npl;
    const double kp = opt.k * p;

    const bool ratio_ok = opt.ratio >= 0.95 * e && opt.ratio <= 1.05 * e;
    const bool m_ok = m_ratio >= 0.9 * e && m_ratio <= 1.1 * e;
    const bool k_ok = kp >= 0.9 && kp <= 1.1;

    // Brute 2-D grid around the reported optimum: nothing may beat it.
    bool grid_ok = true;
    double best_grid = 1e300;
    for (int im = 0; im <= 24; ++im) {
        const auto m = static_cast<std::int64_t>(
            std::llround(static_cast<double>(opt.m) * std::exp(-0.7 + 1.4 * im / 24.0)));
        for (int ik = 0; ik <= 24; ++ik) {
            const double k = opt.k * std::exp(-0.7 + 1.4 * ik / 24.0);
            const double value =
                (static_cast<double>(m) + pp_expected_u0(n, ctx, m, k) + static_cast<double>(n) * p) / npl;
            best_grid = std::min(best_grid, value);
            if (value < opt.ratio - 1e-9) grid_ok = false;
        }
    }

    result.pass = ratio_ok && m_ok && k_ok && grid_ok;
    std::ostringstream detail;
    detail << "ratio* = " << num(opt.ratio) << " (=" << num(opt.ratio / e) << "e, window [0.95e,1.05e] "
           << (ratio_ok ? "ok" : "MISS") << "); M*/(Np|log p|) = " << num(m_ratio) << " (="
           << num(m_ratio / e) << "e, window [0.9e,1.1e] " << (m_ok ? "ok" : "MISS")
           << "); K*p = " << num(kp) << " (" << (k_ok ? "ok" : "MISS") << "); grid best = " << num(best_grid)
           << " (" << (grid_ok ? "no grid point beats ratio*" : "GRID BEATS OPTIMUM") << ")";
    result.detail = detail.str();
    return result;
}

CriterionResult criterion_10() {
    CriterionResult result{10, "regular-Poisson family sits below the Poisson-Poisson optimum e by > 3 sigma",
                           true, "", 0};
    const std::int64_t n = std::int64_t{1} << 14;
    const double p = 1.0 / 32.0;
    const AnalyticContext ctx(p);
    const DesignParams params = optimal_params(n, p, DesignFamily::RegularPoisson);
    const double npl = static_cast<double>(n) * p * std::abs(std::log(p));

    const Estimate estimate = mc_family_expected_tests(params, ctx, 24, 48, 0xC10);
    const double ratio = estimate.mean / npl;
    const double sigma_ratio = estimate.std_error / npl;
    const double e = std::exp(1.0);
    const double margin_sigmas = (e - ratio) / sigma_ratio;
    result.pass = margin_sigmas > 3.0;
    result.detail = "ratio = " + num(ratio) + " +- " + num(sigma_ratio) + ", (e - ratio)/sigma = " +
                    num(margin_sigmas);
    return result;
}

CriterionResult criterion_11(const std::vector<ExactRecord>& records) {
    CriterionResult result{11, "information floor: every exhaustive E[T] >= -Np log2 p", true, "", 0};
    double slack = 1e300;
    for (const ExactRecord& record : records) {
        const double floor = -static_cast<double>(record.n) * record.p * std::log2(record.p);
        slack = std::min(slack, record.mean_t - floor);
        if (record.mean_t < floor - 1e-9) result.pass = false;
    }
    result.detail = std::to_string(records.size()) + " exact evaluations, min slack = " + num(slack);
    return result;
}

CriterionResult criterion_12() {
    CriterionResult result{12, "experiment rerun is byte-identical outside the metadata comment", true, "", 0};
    ExperimentSpec spec;
    spec.mode = SweepMode::BetaSweep;
    spec.beta = 0.25;
    spec.n_grid = {1 << 10, 1 << 12};
    spec.family = DesignFamily::RegularRegularGirth6;
    spec.trials = 200;
    spec.seed = 0xC12;

    auto run_to_string = [&spec] {
        std::ostringstream out;
        write_experiment_csv(out, spec, run_experiment(spec));
        std::string body;
        std::istringstream in(out.str());
        std::string line;
        while (std::getline(in, line))
            if (line.empty() || line[0] != '#') body += line + '\n';
        return body;
    };
    const std::string first = run_to_string();
    const std::string second = run_to_string();
    result.pass = first == second && !first.empty();
    result.detail = result.pass ? "identical (" + std::to_string(first.size()) + " bytes)"
                                : "outputs differ";
    return result;
}

} // namespace

std::vector<CriterionResult> run_acceptance(std::ostream& out) {
    std::vector<CriterionResult> results;
    std::vector<ExactRecord> exact_records;

    const struct {
        double limit;  // seconds; 0 = no stated limit
        CriterionResult (*fn)();
    } simple[] = {
        {1.0, criterion_4},  {1.0, criterion_5}, {1.0, criterion_6},  {30.0, criterion_7},
        {300.0, criterion_8}, {60.0, criterion_9}, {600.0, criterion_10}, {0.0, criterion_12},
    };

    auto run = [&](double limit, auto&& fn) {
        const auto start = std::chrono::steady_clock::now();
        CriterionResult result = fn();
        result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (limit > 0.0 && result.seconds > limit) {
            result.pass = false;
            result.detail += " [exceeded " + num(limit) + "s budget]";
        }
        char line[512];
        std::snprintf(line, sizeof line, "criterion %2d [%s] %s (%.2fs): %s\n", result.id,
                      result.pass ? "PASS" : "FAIL", result.name.c_str(), result.seconds,
                      result.detail.c_str());
        out << line;
        out.flush();
        results.push_back(std::move(result));
    };

    run(60.0, [&] { return criterion_1(exact_records); });
    run(60.0, [&] { return criterion_2(exact_records); });
    run(0.0, [&] { return criterion_3(exact_records); });
    for (const auto& entry : simple) {
        if (entry.fn == criterion_12) run(0.0, [&] { return criterion_11(exact_records); });
        run(entry.limit, entry.fn);
    }

    std::sort(results.begin(), results.end(),
              [](const CriterionResult& a, const CriterionResult& b) { return a.id < b.id; });
    int passed = 0;
    for (const auto& r : results) passed += r.pass ? 1 : 0;
    out << passed << "/" << results.size() << " criteria passed\n";
    return results;
}

} // namespace gt
