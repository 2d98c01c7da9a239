#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "cludl/errors.hpp"
#include "cludl/experiment.hpp"

namespace {

struct CliOptions {
    std::string config_path;
    cludl::ExperimentSpec spec;
    std::string method = "encludl";
    std::string dataset_dir;
    std::vector<int> clusters;
    std::vector<std::string> methods;
    bool have_seed = false;
    std::uint64_t seed = 0;
};

void add_common_flags(CLI::App* cmd, CliOptions& opt) {
    cmd->add_option("--config", opt.config_path, "Config file (key = value tables)");
    cmd->add_option("--seed", opt.seed, "Master RNG seed")->each([&](const std::string&) {
        opt.have_seed = true;
    });
    cmd->add_option("--workers", opt.spec.workers, "Worker threads (0 = all cores)");
    cmd->add_option("--out", opt.spec.output_dir, "Output directory");
    cmd->add_option("--alpha", opt.spec.alpha, "Selection level");
    cmd->add_option("--gamma", opt.spec.gamma, "Aggregation quantile level");
    cmd->add_option("--clusters", opt.clusters, "Cluster counts")->delimiter(',');
    cmd->add_option("--bootstraps", opt.spec.bootstraps, "Bootstraps per ensemble");
    cmd->add_option("--seeds", opt.spec.n_seeds, "Monte-Carlo repetitions");
    cmd->add_flag("--keep-pvalues", opt.spec.keep_pvalues,
                  "Write per-seed p-value CSVs");
}

// Flags override whatever the config file set.
void finalize_spec(CliOptions& opt, const CLI::App* cmd) {
    if (!opt.config_path.empty()) {
        cludl::ExperimentSpec from_file =
            cludl::parse_experiment_config(opt.config_path);
        // Start from the file, then reapply any explicit flags.
        const cludl::ExperimentSpec cli_spec = opt.spec;
        opt.spec = from_file;
        if (cmd->count("--workers")) opt.spec.workers = cli_spec.workers;
        if (cmd->count("--out")) opt.spec.output_dir = cli_spec.output_dir;
        if (cmd->count("--alpha")) opt.spec.alpha = cli_spec.alpha;
        if (cmd->count("--gamma")) opt.spec.gamma = cli_spec.gamma;
        if (cmd->count("--bootstraps")) opt.spec.bootstraps = cli_spec.bootstraps;
        if (cmd->count("--seeds")) opt.spec.n_seeds = cli_spec.n_seeds;
        if (cmd->count("--keep-pvalues")) opt.spec.keep_pvalues = cli_spec.keep_pvalues;
    }
    if (opt.have_seed) opt.spec.scenario.seed = opt.seed;
    if (!opt.clusters.empty()) opt.spec.c_grid = opt.clusters;
    if (!opt.methods.empty()) opt.spec.methods = opt.methods;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spatially relaxed inference on high-dimensional linear models"};
    app.require_subcommand(1);

    CliOptions opt;

    CLI::App* central = app.add_subcommand(
        "central", "Monte-Carlo harness on the central 2D scenario");
    add_common_flags(central, opt);
    central->add_option("--methods", opt.methods,
                        "Methods: dlasso-full, cludl, encludl")
        ->delimiter(',');

    CLI::App* sweep = app.add_subcommand(
        "sweep", "One-parameter sweeps around the central scenario");
    add_common_flags(sweep, opt);
    sweep->add_option("--methods", opt.methods, "Methods to run")->delimiter(',');
    std::string sweep_param;
    std::vector<double> sweep_values;
    sweep->add_option("--param", sweep_param, "Swept parameter (sigma_eps|n|rho|h)");
    sweep->add_option("--values", sweep_values, "Swept values")->delimiter(',');

    CLI::App* single = app.add_subcommand("single", "One method on one dataset");
    add_common_flags(single, opt);
    single->add_option("--method", opt.method, "Method to run");
    single->add_option("--data", opt.dataset_dir,
                       "Dataset directory (exported by gen-data); generated when absent");

    CLI::App* gen = app.add_subcommand("gen-data", "Export one synthetic dataset");
    add_common_flags(gen, opt);
    gen->add_option("--H", opt.spec.scenario.H, "Grid edge length");
    gen->add_option("--n", opt.spec.scenario.n, "Sample count");
    gen->add_option("--h", opt.spec.scenario.h, "Active-region width");
    gen->add_option("--rho", opt.spec.scenario.rho, "Target adjacent correlation");
    gen->add_option("--sigma-eps", opt.spec.scenario.sigma_eps, "Noise std");
    gen->add_option("--amplitude", opt.spec.scenario.amplitude, "Weight amplitude");
    gen->add_flag("--signed", opt.spec.scenario.signed_weights,
                  "Two active regions flipped negative");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (central->parsed()) {
            finalize_spec(opt, central);
            auto rows = cludl::run_central_scenario(opt.spec);
            for (const auto& row : rows)
                std::printf("%s\n", row.to_csv().c_str());
            std::printf("summary: %s/summary.csv\n", opt.spec.output_dir.c_str());
        } else if (sweep->parsed()) {
            finalize_spec(opt, sweep);
            if (!sweep_param.empty()) {
                if (!opt.spec.sweep.has_value()) opt.spec.sweep.emplace();
                opt.spec.sweep->parameter = sweep_param;
            }
            if (!sweep_values.empty()) {
                if (!opt.spec.sweep.has_value()) opt.spec.sweep.emplace();
                opt.spec.sweep->values = sweep_values;
            }
            auto rows = cludl::run_sweep(opt.spec);
            std::printf("%zu rows -> %s/sweep_summary.csv\n", rows.size(),
                        opt.spec.output_dir.c_str());
        } else if (single->parsed()) {
            finalize_spec(opt, single);
            cludl::run_single(opt.spec, opt.method, opt.dataset_dir);
            std::printf("p-values and selection written to %s\n",
                        opt.spec.output_dir.c_str());
        } else if (gen->parsed()) {
            finalize_spec(opt, gen);
            cludl::Dataset ds = cludl::generate_scenario(opt.spec.scenario);
            cludl::export_dataset(ds, opt.spec.scenario, opt.spec.output_dir);
            std::printf("dataset written to %s (snr %.3f)\n",
                        opt.spec.output_dir.c_str(), ds.snr);
        }
    } catch (const cludl::ConfigError& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return 2;
    } catch (const cludl::ContractViolation& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
