#include "gt/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "gt/analytics.hpp"
#include "gt/rng.hpp"
#include "gt/simulate.hpp"

namespace gt {

void ExperimentSpec::validate() const {
    if (mode == SweepMode::BetaSweep) {
        if (!(beta > 0.0 && beta < 1.0))
            throw std::invalid_argument("ExperimentSpec: beta sweep needs beta in (0,1); use fixed-p mode for beta = 0");
    } else {
        if (!(fixed_p > 0.0 && fixed_p < 1.0))
            throw std::invalid_argument("ExperimentSpec: fixed p must be in (0,1)");
    }
    if (n_grid.empty()) throw std::invalid_argument("ExperimentSpec: empty n grid");
    for (std::size_t i = 1; i < n_grid.size(); ++i)
        if (n_grid[i] <= n_grid[i - 1])
            throw std::invalid_argument("ExperimentSpec: n grid must be strictly increasing");
    for (std::int64_t n : n_grid) {
        const double p = mode == SweepMode::BetaSweep ? std::pow(static_cast<double>(n), -beta) : fixed_p;
        if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("ExperimentSpec: p = N^-beta falls outside (0,1)");
    }
}

double ExperimentSpec::p_for(std::int64_t n) const {
    return mode == SweepMode::BetaSweep ? std::pow(static_cast<double>(n), -beta) : fixed_p;
}

namespace {

std::int64_t adaptive_trials(double pilot_se, std::int64_t pilot_trials, double npl) {
    // 95% CI half-width <= 1% of Np|log p|: scale the pilot's trial count by
    // the squared ratio of achieved to target half-width.
    const double target = 0.01 * npl / 1.96;
    if (!(pilot_se > 0.0)) return pilot_trials;
    const double factor = (pilot_se / target) * (pilot_se / target);
    const double trials = std::ceil(static_cast<double>(pilot_trials) * std::max(1.0, factor));
    return static_cast<std::int64_t>(std::min(trials, 2.0e6));
}

void run_mc_columns(const ExperimentSpec& spec, const DesignParams& params, const AnalyticContext& ctx,
                    std::uint64_t row_seed, double npl, ExperimentRow& row) {
    constexpr std::int64_t kPilot = 100;
    if (params.family == DesignFamily::RegularRegularGirth6) {
        const PoolDesign design =
            gen_regular_regular_girth6(params.n_variables, params.tests_per_variable, params.n_tests,
                                       derive_seed(row_seed, 1));
        std::int64_t trials = spec.trials;
        if (trials <= 0) {
            const Estimate pilot = mc_expected_tests(design, ctx, kPilot, derive_seed(row_seed, 2));
            trials = adaptive_trials(pilot.std_error, kPilot, npl);
        }
        const Estimate estimate = mc_expected_tests(design, ctx, trials, derive_seed(row_seed, 3));
        row.mc_mean = estimate.mean;
        row.mc_se = estimate.std_error;
        row.mc_u0 = estimate.mean_u0;
        row.mc_u1 = estimate.mean_u1;
        row.trials_used = trials;
    } else {
        std::int64_t per_design = spec.trials > 0 ? spec.trials : 0;
        std::int64_t designs = spec.design_samples;
        if (per_design <= 0) {
            const std::int64_t pilot_per = std::max<std::int64_t>(2, kPilot / designs);
            const Estimate pilot =
                mc_family_expected_tests(params, ctx, designs, pilot_per, derive_seed(row_seed, 2));
            const std::int64_t total = adaptive_trials(pilot.std_error, designs * pilot_per, npl);
            per_design = std::max<std::int64_t>(pilot_per, total / designs);
        }
        const Estimate estimate =
            mc_family_expected_tests(params, ctx, designs, per_design, derive_seed(row_seed, 3));
        row.mc_mean = estimate.mean;
        row.mc_se = estimate.std_error;
        row.mc_u0 = estimate.mean_u0;
        row.mc_u1 = estimate.mean_u1;
        row.trials_used = designs * per_design;
    }
    row.mc_done = true;
    row.ratio_mc = row.mc_mean / npl;
}

} // namespace

std::vector<ExperimentRow> run_experiment(const ExperimentSpec& spec) {
    spec.validate();
    const double nan = std::numeric_limits<double>::quiet_NaN();

    std::vector<ExperimentRow> rows;
    for (std::size_t idx = 0; idx < spec.n_grid.size(); ++idx) {
        const std::int64_t n = spec.n_grid[idx];
        ExperimentRow row;
        row.n = n;
        row.p = spec.p_for(n);
        row.family = family_name(spec.family);
        row.upper_regular = nan;
        row.ratio_upper = nan;
        row.pp_opt_ratio = nan;
        row.h_upper = nan;

        const AnalyticContext ctx(row.p);
        const double npl = static_cast<double>(n) * row.p * (-std::log(row.p));
        const LowerBounds lower = lower_bound_t(n, ctx);
        row.lower_variational = lower.variational;
        row.lower_info = lower.info_theoretic;

        try {
            const DesignParams params = optimal_params(n, row.p, spec.family);
            row.l = params.tests_per_variable;
            row.m = params.n_tests;
            row.k = params.mean_test_degree;

            if (spec.family != DesignFamily::PoissonPoisson) {
                row.upper_regular = regular_upper_bound(n, ctx);
                row.ratio_upper = row.upper_regular / npl;
                const CorrectionWindow window = h_correction(n, ctx, row.upper_regular);
                row.h_upper = window.h;
                row.h_in_window = window.in_window;
            }
            if (npl >= 1.0) {
                try {
                    row.pp_opt_ratio = pp_optimize(n, ctx).ratio;
                } catch (const std::exception&) {
                    // Outside the asymptotic regime the 2-D search may not
                    // bracket an interior optimum; leave the column empty.
                }
            }

            if (n <= spec.mc_max_n)
                run_mc_columns(spec, params, ctx, derive_seed(spec.seed, static_cast<std::uint64_t>(idx)), npl,
                               row);
        } catch (const std::exception& e) {
            row.error = e.what();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

namespace {

std::string fmt(double v) {
    if (std::isnan(v)) return "";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::uint64_t spec_hash(const ExperimentSpec& spec) {
    std::uint64_t h = derive_seed(spec.seed, 0x5eedf00d);
    auto mixin = [&h](std::uint64_t v) { h = derive_seed(h, v); };
    mixin(static_cast<std::uint64_t>(spec.mode));
    mixin(static_cast<std::uint64_t>(spec.beta * 1e9));
    mixin(static_cast<std::uint64_t>(spec.fixed_p * 1e12));
    mixin(static_cast<std::uint64_t>(spec.family));
    mixin(static_cast<std::uint64_t>(spec.trials));
    mixin(static_cast<std::uint64_t>(spec.design_samples));
    for (std::int64_t n : spec.n_grid) mixin(static_cast<std::uint64_t>(n));
    return h;
}

} // namespace

void write_experiment_csv(std::ostream& out, const ExperimentSpec& spec,
                          const std::vector<ExperimentRow>& rows) {
    // The only line allowed to vary between identical runs is this comment.
    const std::time_t now = std::time(nullptr);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    char meta[160];
    std::snprintf(meta, sizeof meta, "# grouptest 1.0 seed=%llu spec=%016llx time=%s",
                  static_cast<unsigned long long>(spec.seed),
                  static_cast<unsigned long long>(spec_hash(spec)), stamp);
    out << meta << '\n';

    out << "n,p,family,l,m,k,trials,mean_T,se,mean_U0,mean_U1,ratio,"
           "lower_var,lower_info,upper_rr,ratio_upper,pp_opt_ratio,h_upper,h_in_window,error\n";
    for (const ExperimentRow& row : rows) {
        out << row.n << ',' << fmt(row.p) << ',' << row.family << ',' << row.l << ',' << row.m << ','
            << fmt(row.k) << ',';
        if (row.mc_done)
            out << row.trials_used << ',' << fmt(row.mc_mean) << ',' << fmt(row.mc_se) << ','
                << fmt(row.mc_u0) << ',' << fmt(row.mc_u1) << ',' << fmt(row.ratio_mc) << ',';
        else
            out << ",,,,,,";
        out << fmt(row.lower_variational) << ',' << fmt(row.lower_info) << ',' << fmt(row.upper_regular)
            << ',' << fmt(row.ratio_upper) << ',' << fmt(row.pp_opt_ratio) << ',' << fmt(row.h_upper) << ','
            << (std::isnan(row.h_upper) ? "" : (row.h_in_window ? "1" : "0")) << ',' << row.error << '\n';
    }
}

} // namespace gt
