// Command-line front end: pool-design generation, two-stage decoding,
// closed-form analysis, Monte Carlo simulation and sweep experiments.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "gt/analytics.hpp"
#include "gt/decode.hpp"
#include "gt/design.hpp"
#include "gt/experiment.hpp"
#include "gt/generators.hpp"
#include "gt/rng.hpp"
#include "gt/simulate.hpp"
#include "gt/verify.hpp"

namespace {

using nlohmann::json;

// Flat or one-level-nested JSON config mirroring the flags; command-line
// values win over file values (CLI11 default precedence).
class JsonConfig : public CLI::Config {
public:
    std::string to_config(const CLI::App* app, bool default_also, bool, std::string) const override {
        json j;
        for (const CLI::Option* opt : app->get_options({})) {
            if (!opt->get_lnames().empty() && opt->get_configurable()) {
                const std::string name = opt->get_lnames()[0];
                if (opt->count() > 0)
                    j[name] = opt->results().size() == 1 ? json(opt->results()[0]) : json(opt->results());
                else if (default_also && !opt->get_default_str().empty())
                    j[name] = opt->get_default_str();
            }
        }
        return j.dump(2);
    }

    std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
        json j;
        input >> j;
        std::vector<CLI::ConfigItem> items;
        collect(j, {}, items);
        return items;
    }

private:
    static std::string scalar(const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

    static void collect(const json& j, std::vector<std::string> parents, std::vector<CLI::ConfigItem>& out) {
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (it->is_object()) {
                auto nested = parents;
                nested.push_back(it.key());
                collect(*it, nested, out);
                continue;
            }
            CLI::ConfigItem item;
            item.parents = parents;
            item.name = it.key();
            if (it->is_array())
                for (const auto& v : *it) item.inputs.push_back(scalar(v));
            else
                item.inputs.push_back(scalar(*it));
            out.push_back(std::move(item));
        }
    }
};

gt::DesignFileFormat format_for(const std::string& path, const std::string& forced) {
    if (forced == "json") return gt::DesignFileFormat::Json;
    if (forced == "text") return gt::DesignFileFormat::AdjacencyText;
    if (path.size() >= 4 && path.substr(path.size() - 4) == ".txt") return gt::DesignFileFormat::AdjacencyText;
    return gt::DesignFileFormat::Json;
}

json set_to_json(const std::vector<std::int32_t>& v) { return json(v); }

struct DesignArgs {
    std::string family = "rr6";
    std::int64_t n = 0;
    double p = 0.0;
    std::int64_t l = 0;
    std::int64_t m = 0;
    std::uint64_t seed = 0;
    int max_restarts = 10;
    std::string out;
    std::string format = "auto";
};

int cmd_design(const DesignArgs& args) {
    const gt::DesignFamily family = gt::family_from_name(args.family);
    std::int64_t l = args.l, m = args.m;
    if (l <= 0 || m <= 0) {
        if (!(args.p > 0.0))
            throw CLI::ValidationError("--p (or both --l and --m) is required");
        const gt::DesignParams params = gt::optimal_params(args.n, args.p, family);
        l = params.tests_per_variable;
        m = params.n_tests;
    }

    gt::PoolDesign design = [&] {
        switch (family) {
            case gt::DesignFamily::RegularRegularGirth6:
                return gt::gen_regular_regular_girth6(args.n, l, m, args.seed, args.max_restarts);
            case gt::DesignFamily::RegularPoisson:
                return gt::gen_regular_poisson(args.n, m, l, args.seed);
            default:
                return gt::gen_poisson_poisson(args.n, m, static_cast<double>(l), args.seed);
        }
    }();

    gt::save_design(design, args.out, format_for(args.out, args.format));

    const gt::DegreeProfile profile = gt::degree_profile(design);
    const auto [vmin, vmax] = std::minmax_element(profile.variable_degrees.begin(), profile.variable_degrees.end());
    const auto [tmin, tmax] = std::minmax_element(profile.test_degrees.begin(), profile.test_degrees.end());
    const gt::Girth6Feasibility feasibility = gt::girth6_feasibility(args.n, l, m);

    json meta;
    meta["n_variables"] = design.n_variables();
    meta["n_tests"] = design.n_tests();
    meta["family"] = design.provenance().family;
    meta["seed"] = design.provenance().seed;
    meta["edges"] = design.n_edges();
    meta["variable_degree_min"] = *vmin;
    meta["variable_degree_max"] = *vmax;
    meta["test_degree_min"] = *tmin;
    meta["test_degree_max"] = *tmax;
    meta["girth_at_least_6"] = gt::girth_at_least_6(design);
    meta["girth6_feasibility_satisfied"] = feasibility.satisfied;
    meta["girth6_feasibility_required_m"] = feasibility.required_m;

    std::ofstream sidecar(args.out + ".meta.json");
    sidecar << meta.dump(2) << '\n';
    std::cout << meta.dump(2) << '\n';
    return 0;
}

std::string read_assignment_text(const std::string& x_arg) {
    if (!x_arg.empty() && x_arg[0] == '@') {
        std::ifstream in(x_arg.substr(1));
        if (!in) throw CLI::ValidationError("cannot open assignment file " + x_arg.substr(1));
        std::string text;
        in >> text;
        return text;
    }
    return x_arg;
}

int cmd_decode(const std::string& design_path, const std::string& x_arg, const std::string& format) {
    const gt::PoolDesign design = gt::load_design(design_path, format_for(design_path, format));
    const gt::Assignment x = gt::Assignment::parse(read_assignment_text(x_arg), design.n_variables());
    const gt::DecodeResult result = gt::decode_two_stage(design, x);

    json j;
    j["sure_zeros"] = set_to_json(result.sure_zeros);
    j["sure_ones"] = set_to_json(result.sure_ones);
    j["undetermined_zeros"] = set_to_json(result.undetermined_zeros);
    j["undetermined_ones"] = set_to_json(result.undetermined_ones);
    j["total_tests"] = result.total_tests;
    std::cout << j.dump(2) << '\n';
    return 0;
}

struct AnalyzeArgs {
    std::string quantity;
    double p = 0.0;
    std::int64_t n = 0;
    std::int64_t m = 0;
    double k = 0.0;
    std::int64_t l = 0;
    double r_max = 0.0;
    std::string design_path;
    std::string family = "rr6";
    bool csv = false;
};

int cmd_analyze(const AnalyzeArgs& args) {
    json j;
    j["quantity"] = args.quantity;
    j["p"] = args.p;
    const gt::AnalyticContext ctx(args.p);

    if (args.quantity == "B") {
        if (args.design_path.empty()) throw CLI::ValidationError("--design is required for quantity B");
        const gt::PoolDesign design = gt::load_design(args.design_path, format_for(args.design_path, "auto"));
        j["design"] = args.design_path;
        j["B"] = gt::bound_b(design, ctx);
    } else if (args.quantity == "U") {
        const gt::ScalarMin u = gt::u_of_p(ctx, args.r_max);
        j["U"] = u.value;
        j["argmin_r"] = u.arg;
    } else if (args.quantity == "c") {
        j["c"] = gt::c_of_p(ctx);
    } else if (args.quantity == "lower-bound") {
        if (args.n <= 0) throw CLI::ValidationError("--n is required for quantity lower-bound");
        const gt::LowerBounds bounds = gt::lower_bound_t(args.n, ctx);
        j["n"] = args.n;
        j["variational"] = bounds.variational;
        j["info_theoretic"] = bounds.info_theoretic;
        j["best"] = std::max(bounds.variational, bounds.info_theoretic);
    } else if (args.quantity == "Rp") {
        if (args.k > 0.0 && args.l > 0) {
            j["k"] = args.k;
            j["l"] = args.l;
            j["Rp"] = gt::r_p_eval(ctx, args.k, args.l);
        } else {
            if (args.n <= 0) throw CLI::ValidationError("--n (or --k and --l) is required for quantity Rp");
            const gt::DesignParams params =
                gt::optimal_params(args.n, args.p, gt::DesignFamily::RegularRegularGirth6);
            j["n"] = args.n;
            j["k"] = params.mean_test_degree;
            j["l"] = params.tests_per_variable;
            j["Rp"] = gt::r_p_eval(ctx, params.mean_test_degree, params.tests_per_variable);
            j["upper_bound"] = gt::regular_upper_bound(args.n, ctx);
        }
    } else if (args.quantity == "pp-u0") {
        if (args.n <= 0 || args.m <= 0 || !(args.k > 0.0))
            throw CLI::ValidationError("--n, --m and --k are required for quantity pp-u0");
        j["n"] = args.n;
        j["m"] = args.m;
        j["k"] = args.k;
        j["pp_u0"] = gt::pp_expected_u0(args.n, ctx, args.m, args.k);
    } else if (args.quantity == "pp-opt") {
        if (args.n <= 0) throw CLI::ValidationError("--n is required for quantity pp-opt");
        const gt::PpOptimum opt = gt::pp_optimize(args.n, ctx);
        const double npl = static_cast<double>(args.n) * args.p * std::abs(std::log(args.p));
        j["n"] = args.n;
        j["m_star"] = opt.m;
        j["k_star"] = opt.k;
        j["ratio_star"] = opt.ratio;
        j["m_star_over_npl"] = static_cast<double>(opt.m) / npl;
        j["k_star_times_p"] = opt.k * args.p;
    } else if (args.quantity == "params") {
        if (args.n <= 0) throw CLI::ValidationError("--n is required for quantity params");
        const gt::DesignParams params = gt::optimal_params(args.n, args.p, gt::family_from_name(args.family));
        j["n"] = args.n;
        j["family"] = gt::family_name(params.family);
        j["l"] = params.tests_per_variable;
        j["m"] = params.n_tests;
        j["k"] = params.mean_test_degree;
    } else {
        throw CLI::ValidationError("unknown quantity '" + args.quantity + "'");
    }

    if (args.csv) {
        std::string header, row;
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (!header.empty()) {
                header += ',';
                row += ',';
            }
            header += it.key();
            row += it->is_string() ? it->get<std::string>() : it->dump();
        }
        std::cout << header << '\n' << row << '\n';
    } else {
        std::cout << j.dump(2) << '\n';
    }
    return 0;
}

struct SimulateArgs {
    std::string design_path;
    std::string family;
    std::int64_t n = 0;
    double p = 0.0;
    std::int64_t l = 0;
    std::int64_t m = 0;
    std::int64_t trials = 1000;
    std::int64_t design_samples = 1;
    std::uint64_t seed = 0;
    bool exhaustive = false;
    bool as_json = false;
    std::string out;
};

int cmd_simulate(const SimulateArgs& args) {
    if (!(args.p > 0.0 && args.p < 1.0)) throw CLI::ValidationError("--p in (0,1) is required");
    const gt::AnalyticContext ctx(args.p);

    std::optional<gt::PoolDesign> design;
    std::string family = "manual";
    std::int64_t n = args.n, m = args.m, l = args.l;
    gt::Estimate estimate;

    if (!args.design_path.empty()) {
        design = gt::load_design(args.design_path, format_for(args.design_path, "auto"));
        family = design->provenance().family;
        n = design->n_variables();
        m = design->n_tests();
        l = (design->n_edges() + n / 2) / n;  // nearest mean variable degree
        estimate = args.exhaustive ? gt::exhaustive_expected_tests(*design, ctx)
                                   : gt::mc_expected_tests(*design, ctx, args.trials, args.seed);
    } else {
        if (args.family.empty() || args.n <= 0)
            throw CLI::ValidationError("either --design or --family with --n is required");
        const gt::DesignFamily fam = gt::family_from_name(args.family);
        gt::DesignParams params;
        if (l > 0 && m > 0) {
            params.family = fam;
            params.n_variables = n;
            params.defect_prob = args.p;
            params.tests_per_variable = l;
            params.n_tests = m;
            params.mean_test_degree = static_cast<double>(n * l) / static_cast<double>(m);
        } else {
            params = gt::optimal_params(n, args.p, fam);
        }
        l = params.tests_per_variable;
        m = params.n_tests;
        family = gt::family_name(fam);
        if (fam == gt::DesignFamily::RegularRegularGirth6) {
            design = gt::gen_regular_regular_girth6(n, l, m, args.seed);
            estimate = args.exhaustive ? gt::exhaustive_expected_tests(*design, ctx)
                                       : gt::mc_expected_tests(*design, ctx, args.trials, gt::derive_seed(args.seed, 1));
        } else {
            estimate = gt::mc_family_expected_tests(params, ctx, args.design_samples, args.trials, args.seed);
        }
    }

    const double npl = static_cast<double>(n) * args.p * std::abs(std::log(args.p));
    json j;
    j["n"] = n;
    j["p"] = args.p;
    j["m"] = m;
    j["l"] = l;
    j["family"] = family;
    j["seed"] = args.seed;
    j["exact"] = estimate.exact;
    j["trials"] = estimate.n_trials;
    j["mean_T"] = estimate.mean;
    j["se"] = estimate.std_error;
    j["mean_U0"] = estimate.mean_u0;
    j["mean_U1"] = estimate.mean_u1;
    j["ratio"] = estimate.mean / npl;

    std::ostringstream csv;
    csv << "n,p,m,l,family,seed,mean_T,se,mean_U0,mean_U1,ratio\n"
        << n << ',' << args.p << ',' << m << ',' << l << ',' << family << ',' << args.seed << ','
        << estimate.mean << ',' << estimate.std_error << ',' << estimate.mean_u0 << ','
        << estimate.mean_u1 << ',' << estimate.mean / npl << '\n';

    const std::string text = args.as_json ? j.dump(2) + "\n" : csv.str();
    if (!args.out.empty()) {
        std::ofstream out(args.out);
        out << text;
    }
    std::cout << text;
    return 0;
}

struct ExperimentArgs {
    std::string mode = "beta";
    double beta = 0.25;
    double p = 0.0;
    std::vector<std::int64_t> n_grid;
    std::string family = "rr6";
    std::int64_t trials = 0;
    std::int64_t design_samples = 20;
    std::uint64_t seed = 0;
    std::int64_t mc_max_n = std::int64_t{1} << 16;
    std::string out;
    bool as_json = false;
};

int cmd_experiment(const ExperimentArgs& args) {
    gt::ExperimentSpec spec;
    spec.mode = args.mode == "fixed-p" ? gt::SweepMode::FixedP : gt::SweepMode::BetaSweep;
    spec.beta = args.beta;
    spec.fixed_p = args.p;
    spec.n_grid = args.n_grid;
    spec.family = gt::family_from_name(args.family);
    spec.trials = args.trials;
    spec.design_samples = args.design_samples;
    spec.seed = args.seed;
    spec.mc_max_n = args.mc_max_n;
    spec.out_path = args.out;

    const std::vector<gt::ExperimentRow> rows = gt::run_experiment(spec);

    std::ostringstream buffer;
    gt::write_experiment_csv(buffer, spec, rows);

    if (args.as_json) {
        json list = json::array();
        for (const auto& row : rows) {
            json r;
            r["n"] = row.n;
            r["p"] = row.p;
            r["family"] = row.family;
            r["l"] = row.l;
            r["m"] = row.m;
            r["k"] = row.k;
            r["lower_var"] = row.lower_variational;
            r["lower_info"] = row.lower_info;
            if (!std::isnan(row.upper_regular)) {
                r["upper_rr"] = row.upper_regular;
                r["ratio_upper"] = row.ratio_upper;
                r["h_upper"] = row.h_upper;
                r["h_in_window"] = row.h_in_window;
            }
            if (!std::isnan(row.pp_opt_ratio)) r["pp_opt_ratio"] = row.pp_opt_ratio;
            if (row.mc_done) {
                r["trials"] = row.trials_used;
                r["mean_T"] = row.mc_mean;
                r["se"] = row.mc_se;
                r["mean_U0"] = row.mc_u0;
                r["mean_U1"] = row.mc_u1;
                r["ratio"] = row.ratio_mc;
            }
            if (!row.error.empty()) r["error"] = row.error;
            list.push_back(std::move(r));
        }
        std::cout << list.dump(2) << '\n';
    } else {
        std::cout << buffer.str();
    }
    if (!spec.out_path.empty()) {
        std::ofstream out(spec.out_path);
        out << buffer.str();
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"grouptest: two-stage pooled group-testing designs, decoding, analysis and simulation"};
    app.require_subcommand(1);
    app.fallthrough();
    app.config_formatter(std::make_shared<JsonConfig>());
    app.set_config("--config", "", "JSON config file mirroring the flags (flags win)");

    DesignArgs design_args;
    auto* design = app.add_subcommand("design", "generate a pool design and its sidecar metadata");
    design->configurable();
    design->add_option("--family", design_args.family, "rr6 | rp | pp")->capture_default_str();
    design->add_option("--n", design_args.n, "number of variables")->required();
    design->add_option("--p", design_args.p, "defect probability (derives L and M)");
    design->add_option("--l", design_args.l, "tests per variable (with --m)");
    design->add_option("--m", design_args.m, "number of tests (with --l)");
    design->add_option("--seed", design_args.seed)->envname("GT_SEED");
    design->add_option("--max-restarts", design_args.max_restarts);
    design->add_option("--out", design_args.out, "output design file")->required();
    design->add_option("--format", design_args.format, "json | text | auto");

    std::string decode_design, decode_x, decode_format = "auto";
    auto* decode = app.add_subcommand("decode", "run the two-stage decode of an assignment");
    decode->configurable();
    decode->add_option("--design", decode_design)->required();
    decode->add_option("--x", decode_x, "binary string, 0x… hex, or @file")->required();
    decode->add_option("--format", decode_format, "json | text | auto");

    AnalyzeArgs analyze_args;
    auto* analyze = app.add_subcommand("analyze", "closed-form quantities, bounds and optimisations");
    analyze->configurable();
    analyze->add_option("--quantity", analyze_args.quantity, "B | U | c | lower-bound | Rp | pp-u0 | pp-opt | params")
        ->required();
    analyze->add_option("--p", analyze_args.p)->required();
    analyze->add_option("--n", analyze_args.n);
    analyze->add_option("--m", analyze_args.m);
    analyze->add_option("--k", analyze_args.k);
    analyze->add_option("--l", analyze_args.l);
    analyze->add_option("--r-max", analyze_args.r_max);
    analyze->add_option("--design", analyze_args.design_path);
    analyze->add_option("--family", analyze_args.family);
    analyze->add_flag("--csv", analyze_args.csv, "CSV output instead of JSON");

    SimulateArgs simulate_args;
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo / exhaustive expected test counts");
    simulate->configurable();
    simulate->add_option("--design", simulate_args.design_path);
    simulate->add_option("--family", simulate_args.family, "rr6 | rp | pp");
    simulate->add_option("--n", simulate_args.n);
    simulate->add_option("--p", simulate_args.p)->required();
    simulate->add_option("--l", simulate_args.l);
    simulate->add_option("--m", simulate_args.m);
    simulate->add_option("--trials", simulate_args.trials)->capture_default_str();
    simulate->add_option("--design-samples", simulate_args.design_samples)->capture_default_str();
    simulate->add_option("--seed", simulate_args.seed)->envname("GT_SEED");
    simulate->add_flag("--exhaustive", simulate_args.exhaustive, "exact enumeration (N <= 24)");
    simulate->add_flag("--json", simulate_args.as_json);
    simulate->add_option("--out", simulate_args.out);

    ExperimentArgs experiment_args;
    auto* experiment = app.add_subcommand("experiment", "sweep N with p = N^-beta or fixed p, emit CSV");
    experiment->configurable();
    experiment->add_option("--mode", experiment_args.mode, "beta | fixed-p")->capture_default_str();
    experiment->add_option("--beta", experiment_args.beta)->capture_default_str();
    experiment->add_option("--p", experiment_args.p, "defect probability for fixed-p mode");
    experiment->add_option("--n-grid", experiment_args.n_grid, "strictly increasing N values")->required();
    experiment->add_option("--family", experiment_args.family)->capture_default_str();
    experiment->add_option("--trials", experiment_args.trials, "0 = adaptive from a 100-trial pilot");
    experiment->add_option("--design-samples", experiment_args.design_samples)->capture_default_str();
    experiment->add_option("--seed", experiment_args.seed)->envname("GT_SEED");
    experiment->add_option("--mc-max-n", experiment_args.mc_max_n, "skip MC columns above this N");
    experiment->add_option("--out", experiment_args.out);
    experiment->add_flag("--json", experiment_args.as_json);

    auto* verify = app.add_subcommand("verify", "run the acceptance battery and report per-criterion results");

    CLI11_PARSE(app, argc, argv);

    try {
        if (design->parsed()) return cmd_design(design_args);
        if (decode->parsed()) return cmd_decode(decode_design, decode_x, decode_format);
        if (analyze->parsed()) return cmd_analyze(analyze_args);
        if (simulate->parsed()) return cmd_simulate(simulate_args);
        if (experiment->parsed()) return cmd_experiment(experiment_args);
        if (verify->parsed()) {
            const std::vector<gt::CriterionResult> results = gt::run_acceptance(std::cout);
            bool all_pass = true;
            for (const auto& r : results) all_pass = all_pass && r.pass;
            return all_pass ? 0 : 1;
        }
    } catch (const CLI::Error& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
