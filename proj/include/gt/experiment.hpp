#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "gt/generators.hpp"

namespace gt {

enum class SweepMode { BetaSweep, FixedP };

/// One sweep: a grid of N values with p = N^-beta (BetaSweep, beta in (0,1))
/// or a fixed p for every N (FixedP; the beta = 0 regime). trials = 0 lets a
/// 100-trial pilot pick the trial count so the 95% CI half-width stays below
/// 1% of Np|log p|. Rows with N > mc_max_n carry analytic columns only.
struct ExperimentSpec {
    SweepMode mode = SweepMode::BetaSweep;
    double beta = 0.25;
    double fixed_p = 0.0;
    std::vector<std::int64_t> n_grid;
    DesignFamily family = DesignFamily::RegularRegularGirth6;
    std::int64_t trials = 0;
    std::int64_t design_samples = 20;
    std::uint64_t seed = 0;
    std::int64_t mc_max_n = std::int64_t{1} << 16;
    std::string out_path;  // empty = stdout only

    void validate() const;
    double p_for(std::int64_t n) const;
};

struct ExperimentRow {
    std::int64_t n = 0;
    double p = 0.0;
    std::string family;
    std::int64_t l = 0;
    std::int64_t m = 0;
    double k = 0.0;
    double lower_variational = 0.0;
    double lower_info = 0.0;
    double upper_regular = 0.0;      // NaN when params infeasible
    double ratio_upper = 0.0;
    double pp_opt_ratio = 0.0;       // NaN unless family is PoissonPoisson
    bool mc_done = false;
    std::int64_t trials_used = 0;
    double mc_mean = 0.0;
    double mc_se = 0.0;
    double mc_u0 = 0.0;
    double mc_u1 = 0.0;
    double ratio_mc = 0.0;
    double h_upper = 0.0;
    bool h_in_window = false;
    std::string error;  // per-row failure note; the sweep continues
};

std::vector<ExperimentRow> run_experiment(const ExperimentSpec& spec);

/// CSV with one `#` metadata comment line (tool version, seed, spec hash and
/// timestamp), then a header row and one row per grid point. Everything
/// below the comment line is a pure function of (spec, seed).
void write_experiment_csv(std::ostream& out, const ExperimentSpec& spec,
                          const std::vector<ExperimentRow>& rows);

} // namespace gt
