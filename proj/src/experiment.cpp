#include "cludl/experiment.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <utility>

#include "cludl/errors.hpp"
#include "cludl/parallel.hpp"
#include "cludl/rng.hpp"

namespace cludl {

namespace fs = std::filesystem;

namespace {

constexpr const char* kKnownMethods[] = {"cludl", "dlasso-full", "encludl"};

std::uint64_t fnv1a(const std::string& s, std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex8(std::uint64_t h) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%08llx",
                  static_cast<unsigned long long>(h & 0xffffffffULL));
    return buf;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

} // namespace

void ExperimentSpec::validate() const {
    scenario.validate();
    if (methods.empty()) throw ConfigError("at least one method is required");
    for (const auto& m : methods) {
        if (std::find(std::begin(kKnownMethods), std::end(kKnownMethods), m) ==
            std::end(kKnownMethods))
            throw ConfigError("unknown method: " + m);
    }
    const bool clustered =
        std::find(methods.begin(), methods.end(), "cludl") != methods.end() ||
        std::find(methods.begin(), methods.end(), "encludl") != methods.end();
    if (clustered) {
        if (c_grid.empty()) throw ConfigError("clustered methods need a C grid");
        const int p = scenario.H * scenario.H;
        for (int C : c_grid)
            if (C < 2 || C > p)
                throw ConfigError("cluster count " + std::to_string(C) +
                                  " outside [2, p]");
    }
    if (alpha <= 0.0 || alpha >= 1.0) throw ConfigError("alpha must lie in (0, 1)");
    if (gamma <= 0.0 || gamma >= 1.0) throw ConfigError("gamma must lie in (0, 1)");
    if (bootstraps < 1) throw ConfigError("bootstraps must be at least 1");
    if (subsample_fraction <= 0.0 || subsample_fraction > 1.0)
        throw ConfigError("subsample fraction must lie in (0, 1]");
    if (n_seeds < 1) throw ConfigError("n_seeds must be at least 1");
    if (sweep.has_value()) {
        static const std::set<std::string> allowed{"sigma_eps", "n", "rho", "h"};
        if (!allowed.count(sweep->parameter))
            throw ConfigError("sweep parameter must be one of sigma_eps, n, rho, h");
        if (sweep->values.empty()) throw ConfigError("sweep needs at least one value");
    }
}

std::string ExperimentSpec::config_hash() const {
    std::string repr;
    repr += "H=" + std::to_string(scenario.H) + ";n=" + std::to_string(scenario.n);
    repr += ";h=" + std::to_string(scenario.h) + ";rho=" + fmt(scenario.rho);
    repr += ";sig=" + fmt(scenario.sigma_eps) + ";amp=" + fmt(scenario.amplitude);
    repr += ";signed=" + std::to_string(scenario.signed_weights);
    repr += ";seed=" + std::to_string(scenario.seed);
    repr += ";alpha=" + fmt(alpha) + ";gamma=" + fmt(gamma);
    repr += ";B=" + std::to_string(bootstraps) + ";frac=" + fmt(subsample_fraction);
    repr += ";seeds=" + std::to_string(n_seeds);
    repr += ";a=" + fmt(backend.adjustment_a);
    repr += ";bk=" + std::to_string(static_cast<int>(backend.backend));
    return hex8(fnv1a(repr));
}

MethodRun run_method(const std::string& method, const Eigen::MatrixXd& X,
                     const Eigen::VectorXd& y, const SpatialDomain& domain,
                     int num_clusters, const ExperimentSpec& spec,
                     std::uint64_t seed_stream) {
    if (method == "dlasso-full") {
        // Full-design baseline: singleton clustering, so the correction
        // factor is p and the declared tolerance is 0.
        std::vector<int> labels(domain.size());
        std::iota(labels.begin(), labels.end(), 0);
        Clustering singletons = Clustering::from_labels(domain, std::move(labels));
        TransformationMatrix A = transformation_matrix(singletons);
        PValueFamily fam = clustered_inference(X, y, A, singletons, spec.backend);
        fam.provenance = "dlasso-full";
        return MethodRun{std::move(fam), 0.0, {}};
    }
    if (method == "cludl") {
        // Single clustered-inference run: one randomized clustering, built
        // exactly like one bootstrap of the ensemble.
        Eigen::MatrixXd features = standardize_columns(
            subsample_rows(X, spec.subsample_fraction, derive_seed(seed_stream, 1)));
        Clustering clust = ward_constrained(features, domain, num_clusters);
        TransformationMatrix A = transformation_matrix(clust);
        PValueFamily fam = clustered_inference(X, y, A, clust, spec.backend);
        fam.provenance = "cludl";
        const double diam = clustering_diameter(clust);
        return MethodRun{std::move(fam), diam, {diam}};
    }
    if (method == "encludl") {
        EnsembleConfig cfg;
        cfg.num_clusters = num_clusters;
        cfg.bootstraps = spec.bootstraps;
        cfg.gamma = spec.gamma;
        cfg.subsample_fraction = spec.subsample_fraction;
        cfg.backend = spec.backend;
        cfg.seed = seed_stream;
        cfg.workers = 1; // seed-level parallelism happens in the harness
        EnsembleResult res = ensembled_clustered_inference(X, y, domain, cfg);
        return MethodRun{std::move(res.family), res.delta, std::move(res.diameters)};
    }
    throw ConfigError("unknown method: " + method);
}

namespace {

struct RowPlan {
    std::string method;
    int C = 0; // 0 for dlasso-full
};

struct SeedResult {
    std::vector<int> selected;
    double delta = 0.0;
    double seconds = 0.0;
    std::string error;
    bool ok = false;
};

std::vector<RowPlan> plan_rows(const ExperimentSpec& spec) {
    std::vector<std::string> methods = spec.methods;
    std::sort(methods.begin(), methods.end());
    methods.erase(std::unique(methods.begin(), methods.end()), methods.end());
    std::vector<int> grid = spec.c_grid;
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    std::vector<RowPlan> rows;
    for (const auto& m : methods) {
        if (m == "dlasso-full") {
            rows.push_back({m, 0});
        } else {
            for (int C : grid) rows.push_back({m, C});
        }
    }
    return rows;
}

// Stream salt tied to the row content rather than its position, so a row
// rerun in isolation reproduces bit for bit.
std::uint64_t row_salt(const RowPlan& row) {
    return fnv1a(row.method) ^ static_cast<std::uint64_t>(row.C);
}

std::vector<SummaryRow> run_rows(const ExperimentSpec& spec,
                                 const std::string& scenario_label,
                                 const std::string& csv_path,
                                 const std::string& manifest_path) {
    spec.validate();
    const auto t_start = std::chrono::steady_clock::now();
    const std::vector<RowPlan> rows = plan_rows(spec);
    const std::string scenario_id = scenario_label + "-" + spec.config_hash();
    const std::uint64_t master = spec.scenario.seed;

    fs::create_directories(spec.output_dir);
    const fs::path pvdir = fs::path(spec.output_dir) / "pvalues" / scenario_id;
    if (spec.keep_pvalues) fs::create_directories(pvdir);

    std::vector<std::vector<SeedResult>> results(
        rows.size(), std::vector<SeedResult>(spec.n_seeds));

    parallel_for(static_cast<std::size_t>(spec.n_seeds), spec.workers,
                 [&](std::size_t i) {
        ScenarioConfig sc = spec.scenario;
        sc.seed = derive_seed(master, 2 * i);
        std::optional<Dataset> ds;
        try {
            ds = generate_scenario(sc);
        } catch (const std::exception& e) {
            // Data generation failed: every row loses this seed.
            for (std::size_t r = 0; r < rows.size(); ++r)
                results[r][i].error = e.what();
            return;
        }
        const SpatialDomain& domain = ds->weight_map.domain;

        for (std::size_t r = 0; r < rows.size(); ++r) {
            SeedResult& slot = results[r][i];
            const auto t0 = std::chrono::steady_clock::now();
            try {
                const std::uint64_t stream =
                    derive_seed(derive_seed(master, 2 * i + 1), row_salt(rows[r]));
                MethodRun run = run_method(rows[r].method, ds->X, ds->y, domain,
                                           rows[r].C, spec, stream);
                slot.selected = select(run.family, spec.alpha);
                slot.delta = run.delta;
                slot.ok = true;
                if (spec.keep_pvalues) {
                    std::string name = rows[r].method;
                    if (rows[r].C > 0) name += "_C" + std::to_string(rows[r].C);
                    name += "_seed" + std::to_string(i) + ".csv";
                    write_pvalue_csv((pvdir / name).string(), run.family);
                }
            } catch (const std::exception& e) {
                slot.error = e.what();
            }
            slot.seconds = std::chrono::duration<double>(
                               std::chrono::steady_clock::now() - t0)
                               .count();
        }
    });

    // Shared ground truth: the weight map is seed-independent.
    const WeightMap truth = make_weight_map(spec.scenario.H, spec.scenario.h,
                                            spec.scenario.amplitude,
                                            spec.scenario.signed_weights);
    const std::vector<int> truth_support = support(truth);

    std::vector<SummaryRow> out;
    nlohmann::json manifest_rows = nlohmann::json::array();
    for (std::size_t r = 0; r < rows.size(); ++r) {
        SummaryRow row;
        row.scenario_id = scenario_id;
        row.method = rows[r].method;
        row.C = rows[r].C;
        row.B = rows[r].method == "encludl" ? spec.bootstraps
                                            : (rows[r].method == "cludl" ? 1 : 0);
        row.gamma = rows[r].method == "encludl" ? spec.gamma : 0.0;
        row.alpha = spec.alpha;
        row.n_seeds = spec.n_seeds;

        double delta_row = 0.0;
        double seconds = 0.0;
        std::string first_error;
        for (const SeedResult& sr : results[r]) {
            seconds += sr.seconds;
            if (sr.ok)
                delta_row = std::max(delta_row, sr.delta);
            else if (first_error.empty())
                first_error = sr.error;
        }
        row.wall_time_s = seconds;
        row.delta = delta_row;

        nlohmann::json mrow{{"method", row.method}, {"C", row.C},
                            {"scenario_id", scenario_id}};
        if (!first_error.empty()) {
            row.error = first_error;
        } else {
            // Evaluate every seed at the row-level tolerance: the largest
            // clustering diameter realized across the runs.
            const std::vector<int> dnull = delta_null_region(truth, delta_row);
            std::vector<RunOutcome> outcomes(results[r].size());
            for (std::size_t i = 0; i < results[r].size(); ++i)
                outcomes[i] = RunOutcome{results[r][i].selected, truth_support,
                                         dnull, spec.alpha, delta_row};
            const Summary s = summarize(outcomes);
            row.delta_fwer = s.delta_fwer.rate;
            row.ci_lo = s.delta_fwer.lo;
            row.ci_hi = s.delta_fwer.hi;
            row.tpr_median = s.tpr_median;
            row.tpr_d10 = s.tpr_d10;
            row.tpr_d90 = s.tpr_d90;
            if (row.method == "dlasso-full") {
                // delta = 0: the delta-FWER column is the classical FWER.
                row.delta_fwer = s.fwer.rate;
                row.ci_lo = s.fwer.lo;
                row.ci_hi = s.fwer.hi;
            }
            nlohmann::json deltas = nlohmann::json::array();
            for (const SeedResult& sr : results[r]) deltas.push_back(sr.delta);
            mrow["per_seed_delta"] = std::move(deltas);
            mrow["fwer_delta0"] = s.fwer.rate;
        }
        mrow["delta"] = row.delta;
        mrow["error"] = row.error;
        mrow["wall_time_s"] = row.wall_time_s;
        manifest_rows.push_back(std::move(mrow));
        out.push_back(std::move(row));
    }

    {
        std::ofstream csv(csv_path);
        if (!csv) throw std::runtime_error("cannot open " + csv_path + " for writing");
        csv << SummaryRow::csv_header() << "\n";
        for (const auto& row : out) csv << row.to_csv() << "\n";
    }

    nlohmann::json manifest{
        {"scenario_id", scenario_id},
        {"master_seed", master},
        {"config_hash", spec.config_hash()},
        {"n_seeds", spec.n_seeds},
        {"alpha", spec.alpha},
        {"gamma", spec.gamma},
        {"bootstraps", spec.bootstraps},
        {"subsample_fraction", spec.subsample_fraction},
        {"scenario",
         {{"H", spec.scenario.H},
          {"n", spec.scenario.n},
          {"h", spec.scenario.h},
          {"rho", spec.scenario.rho},
          {"sigma_eps", spec.scenario.sigma_eps},
          {"amplitude", spec.scenario.amplitude},
          {"signed_weights", spec.scenario.signed_weights}}},
        {"rows", std::move(manifest_rows)},
        {"total_wall_time_s",
         std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
             .count()}};
    std::ofstream mf(manifest_path);
    if (!mf) throw std::runtime_error("cannot open " + manifest_path + " for writing");
    mf << manifest.dump(2) << "\n";

    return out;
}

} // namespace

std::vector<SummaryRow> run_central_scenario(const ExperimentSpec& spec) {
    const fs::path dir(spec.output_dir);
    fs::create_directories(dir);
    return run_rows(spec, "central", (dir / "summary.csv").string(),
                    (dir / "manifest.json").string());
}

std::vector<SummaryRow> run_sweep(const ExperimentSpec& spec) {
    spec.validate();
    if (!spec.sweep.has_value())
        throw ConfigError("run_sweep requires a sweep specification");

    const fs::path dir(spec.output_dir);
    fs::create_directories(dir);
    const std::string param = spec.sweep->parameter;

    std::vector<SummaryRow> combined;
    for (double value : spec.sweep->values) {
        ExperimentSpec sub = spec;
        sub.sweep.reset();
        if (param == "sigma_eps") {
            sub.scenario.sigma_eps = value;
        } else if (param == "rho") {
            sub.scenario.rho = value;
        } else if (param == "n") {
            sub.scenario.n = static_cast<int>(value);
            if (sub.scenario.n != value)
                throw ConfigError("sweep over n needs integer values");
        } else if (param == "h") {
            sub.scenario.h = static_cast<int>(value);
            if (sub.scenario.h != value)
                throw ConfigError("sweep over h needs integer values");
        }
        const std::string label = param + "=" + fmt(value);
        const std::string stem = param + "_" + fmt(value);
        auto rows = run_rows(sub, label, (dir / ("summary_" + stem + ".csv")).string(),
                             (dir / ("manifest_" + stem + ".json")).string());
        combined.insert(combined.end(), rows.begin(), rows.end());
    }

    std::ofstream csv(dir / "sweep_summary.csv");
    if (!csv) throw std::runtime_error("cannot write combined sweep CSV");
    csv << SummaryRow::csv_header() << "\n";
    for (const auto& row : combined) csv << row.to_csv() << "\n";
    return combined;
}

void run_single(const ExperimentSpec& spec, const std::string& method,
                const std::string& dataset_dir) {
    spec.validate();
    if (std::find(std::begin(kKnownMethods), std::end(kKnownMethods), method) ==
        std::end(kKnownMethods))
        throw ConfigError("unknown method: " + method);

    Dataset ds = dataset_dir.empty() ? generate_scenario(spec.scenario)
                                     : load_dataset(dataset_dir);
    const SpatialDomain& domain = ds.weight_map.domain;
    const int C = spec.c_grid.empty() ? 200 : spec.c_grid.front();

    const std::uint64_t stream = derive_seed(spec.scenario.seed, 1);
    MethodRun run = run_method(method, ds.X, ds.y, domain, C, spec, stream);
    const std::vector<int> selected = select(run.family, spec.alpha);

    const fs::path dir(spec.output_dir);
    fs::create_directories(dir);
    write_pvalue_csv((dir / "pvalues.csv").string(), run.family);
    write_selection_csv((dir / "selection.csv").string(), selected);

    nlohmann::json manifest{
        {"method", method},
        {"C", method == "dlasso-full" ? 0 : C},
        {"alpha", spec.alpha},
        {"delta", run.delta},
        {"bootstrap_diameters", run.diameters},
        {"seed", spec.scenario.seed},
        {"config_hash", spec.config_hash()},
        {"n", ds.X.rows()},
        {"p", ds.X.cols()},
        {"snr", std::isfinite(ds.snr) ? nlohmann::json(ds.snr) : nlohmann::json("inf")},
        {"selected_count", selected.size()}};
    std::ofstream mf(dir / "manifest.json");
    mf << manifest.dump(2) << "\n";
}

void write_pvalue_csv(const std::string& path, const PValueFamily& family) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "covariate_index,p_value\n";
    for (int j = 0; j < family.size(); ++j)
        out << j << "," << fmt(family.values[j]) << "\n";
}

void write_selection_csv(const std::string& path, const std::vector<int>& selected) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "covariate_index\n";
    for (int j : selected) out << j << "\n";
}

void write_clustering_csv(const std::string& path, const Clustering& c) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "covariate_index,cluster_label\n";
    for (int j = 0; j < c.num_covariates(); ++j)
        out << j << "," << c.labels()[j] << "\n";
}

} // namespace cludl
