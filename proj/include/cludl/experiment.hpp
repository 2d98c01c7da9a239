#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cludl/datagen.hpp"
#include "cludl/dlasso.hpp"
#include "cludl/metrics.hpp"
#include "cludl/pipeline.hpp"

namespace cludl {

struct SweepSpec {
    std::string parameter; // one of sigma_eps, n, rho, h
    std::vector<double> values;
};

struct ExperimentSpec {
    ScenarioConfig scenario;
    std::vector<std::string> methods = {"encludl"};
    std::vector<int> c_grid = {200};
    double alpha = 0.1;
    double gamma = 0.5;
    int bootstraps = 25;
    double subsample_fraction = 0.7;
    int n_seeds = 100;
    std::optional<SweepSpec> sweep;
    std::string output_dir = "out";
    int workers = 0; // 0 = all hardware threads
    bool keep_pvalues = false;
    InferenceBackendConfig backend;

    void validate() const;
    // Short config digest used in scenario ids and the manifest.
    std::string config_hash() const;
};

// Result of one method applied to one dataset.
struct MethodRun {
    PValueFamily family;
    double delta = 0.0;            // realized spatial tolerance
    std::vector<double> diameters; // per-bootstrap (encludl) or single (cludl)
};

// Runs `method` ("dlasso-full" | "cludl" | "encludl") on one dataset.
// seed_stream feeds the clustering randomization only; the data are given.
MethodRun run_method(const std::string& method, const Eigen::MatrixXd& X,
                     const Eigen::VectorXd& y, const SpatialDomain& domain,
                     int num_clusters, const ExperimentSpec& spec,
                     std::uint64_t seed_stream);

// Monte-Carlo over n_seeds fresh datasets for every (method, C) pair; writes
// summary.csv and manifest.json under spec.output_dir and returns the rows
// in their CSV order.
std::vector<SummaryRow> run_central_scenario(const ExperimentSpec& spec);

// Clones the scenario for each sweep value, runs the central harness, and
// emits per-value CSVs plus one combined long-format CSV.
std::vector<SummaryRow> run_sweep(const ExperimentSpec& spec);

// One method on one dataset (generated from spec.scenario or loaded from
// dataset_dir); writes p-value and selection CSVs plus a manifest.
void run_single(const ExperimentSpec& spec, const std::string& method,
                const std::string& dataset_dir = {});

// --config file support: a TOML-style key/value table mirroring the
// ExperimentSpec field names. Unknown keys are rejected.
ExperimentSpec parse_experiment_config(const std::string& path);
void apply_config_text(ExperimentSpec& spec, const std::string& text);

void write_pvalue_csv(const std::string& path, const PValueFamily& family);
void write_selection_csv(const std::string& path, const std::vector<int>& selected);
void write_clustering_csv(const std::string& path, const Clustering& c);

} // namespace cludl
