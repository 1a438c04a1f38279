#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <sstream>

#include "gt/analytics.hpp"
#include "gt/experiment.hpp"

using namespace gt;

namespace {

ExperimentSpec small_spec() {
    ExperimentSpec spec;
    spec.mode = SweepMode::BetaSweep;
    spec.beta = 0.25;
    spec.n_grid = {1 << 10, 1 << 12};
    spec.family = DesignFamily::RegularRegularGirth6;
    spec.trials = 150;
    spec.seed = 2024;
    return spec;
}

std::string csv_body(const ExperimentSpec& spec) {
    std::ostringstream out;
    write_experiment_csv(out, spec, run_experiment(spec));
    std::istringstream in(out.str());
    std::string line, body;
    while (std::getline(in, line))
        if (line.empty() || line[0] != '#') body += line + '\n';
    return body;
}

} // namespace

TEST_CASE("spec validation") {
    ExperimentSpec spec = small_spec();
    spec.beta = 0.0;
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);

    spec = small_spec();
    spec.n_grid = {4096, 1024};
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);

    spec = small_spec();
    spec.mode = SweepMode::FixedP;
    spec.fixed_p = 0.0;
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);

    spec = small_spec();
    CHECK_NOTHROW(spec.validate());
}

TEST_CASE("rows carry consistent bounds: lower <= upper and lower <= MC + 4 sigma") {
    const std::vector<ExperimentRow> rows = run_experiment(small_spec());
    REQUIRE(rows.size() == 2);
    for (const ExperimentRow& row : rows) {
        CHECK(row.error.empty());
        const double lower = std::max(row.lower_variational, row.lower_info);
        CHECK(lower <= row.upper_regular);
        REQUIRE(row.mc_done);
        CHECK(lower <= row.mc_mean + 4.0 * row.mc_se);
        CHECK(row.mc_mean == doctest::Approx(static_cast<double>(row.m) + row.mc_u0 + row.mc_u1));
        CHECK(row.h_upper <= 2.0);
        const double npl = static_cast<double>(row.n) * row.p * std::abs(std::log(row.p));
        REQUIRE_FALSE(std::isnan(row.pp_opt_ratio));
        CHECK(lower <= row.pp_opt_ratio * npl);
    }
}

TEST_CASE("Poisson-Poisson family rows carry the pp optimum and MC stays above the lower bound") {
    ExperimentSpec spec = small_spec();
    spec.family = DesignFamily::PoissonPoisson;
    spec.n_grid = {1 << 10};
    spec.trials = 40;
    spec.design_samples = 10;
    const std::vector<ExperimentRow> rows = run_experiment(spec);
    REQUIRE(rows.size() == 1);
    const ExperimentRow& row = rows[0];
    CHECK(row.error.empty());
    REQUIRE(row.mc_done);
    CHECK_FALSE(std::isnan(row.pp_opt_ratio));
    const double lower = std::max(row.lower_variational, row.lower_info);
    CHECK(lower <= row.mc_mean + 4.0 * row.mc_se);
    CHECK(std::isnan(row.upper_regular));

    // Sandwich against the closed form at the row's own (M, K):
    // M + E|U0| <= mean T <= M + E|U0| + Np, up to sampling noise.
    const AnalyticContext ctx(row.p);
    const double closed_u0 = pp_expected_u0(row.n, ctx, row.m, row.k);
    const double base = static_cast<double>(row.m) + closed_u0;
    CHECK(row.mc_mean >= base - 4.0 * row.mc_se);
    CHECK(row.mc_mean <= base + static_cast<double>(row.n) * row.p + 4.0 * row.mc_se);
}

TEST_CASE("fixed-p mode uses the same p on every row") {
    ExperimentSpec spec = small_spec();
    spec.mode = SweepMode::FixedP;
    spec.fixed_p = 1.0 / 64.0;
    spec.trials = 50;
    const std::vector<ExperimentRow> rows = run_experiment(spec);
    for (const ExperimentRow& row : rows) CHECK(row.p == 1.0 / 64.0);
}

TEST_CASE("fixed small p at N = 2^16: lower-bound ratio clears the asymptotic constant") {
    ExperimentSpec spec = small_spec();
    spec.mode = SweepMode::FixedP;
    spec.fixed_p = std::ldexp(1.0, -8);
    spec.n_grid = {1 << 16};
    spec.mc_max_n = 1;  // analytic columns only
    const std::vector<ExperimentRow> rows = run_experiment(spec);
    REQUIRE(rows.size() == 1);
    const double npl = static_cast<double>(rows[0].n) * rows[0].p * std::abs(std::log(rows[0].p));
    const double asym = 1.0 / (std::log(2.0) * std::log(2.0));
    CHECK(rows[0].lower_variational / npl >= asym * 0.98);
    CHECK(rows[0].lower_variational / npl <= asym * 1.25);
}

TEST_CASE("rerun with the same spec and seed is byte-identical outside the comment") {
    const ExperimentSpec spec = small_spec();
    CHECK(csv_body(spec) == csv_body(spec));
}

TEST_CASE("adaptive trials hold the CI half-width near the 1% target") {
    ExperimentSpec spec = small_spec();
    spec.trials = 0;  // adaptive
    spec.n_grid = {1 << 10};
    const std::vector<ExperimentRow> rows = run_experiment(spec);
    REQUIRE(rows.size() == 1);
    REQUIRE(rows[0].mc_done);
    const double npl = static_cast<double>(rows[0].n) * rows[0].p * std::abs(std::log(rows[0].p));
    CHECK(1.96 * rows[0].mc_se <= 0.015 * npl);  // pilot noise allows a small overshoot
}

TEST_CASE("infeasible parameters are reported per row and the sweep continues") {
    ExperimentSpec spec = small_spec();
    spec.mode = SweepMode::FixedP;
    spec.fixed_p = 0.45;  // M rounds to 0 at N = 1, fine at N = 4096
    spec.n_grid = {1, 1 << 12};
    spec.trials = 50;
    const std::vector<ExperimentRow> rows = run_experiment(spec);
    REQUIRE(rows.size() == 2);
    CHECK_FALSE(rows[0].error.empty());
    CHECK(rows[1].error.empty());
}
