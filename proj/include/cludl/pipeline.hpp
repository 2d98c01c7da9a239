#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "cludl/cluster.hpp"
#include "cludl/dlasso.hpp"
#include "cludl/grid.hpp"
#include "cludl/pvalue_family.hpp"

namespace cludl {

struct EnsembleConfig {
    int num_clusters = 200;
    int bootstraps = 25;
    double gamma = 0.5;
    double subsample_fraction = 0.7;
    InferenceBackendConfig backend;
    std::uint64_t seed = 0;
    int workers = 1; // threads across bootstraps; output independent of it

    void validate() const;
};

// min(1, C * p) elementwise; input must be a raw cluster-level family.
PValueFamily bonferroni(const PValueFamily& raw);

// Broadcasts cluster-level values to the covariates of each cluster.
PValueFamily degroup(const PValueFamily& corrected, const Clustering& c);

// Clustered inference: Z = X A, backend inference, Bonferroni, de-grouping.
// Returns corrected covariate-level p-values.
PValueFamily clustered_inference(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                   const TransformationMatrix& A, const Clustering& c,
                   const InferenceBackendConfig& backend = {});

// Empirical gamma-quantile: min{ v in V : #(w <= v) / |V| >= gamma }.
double empirical_gamma_quantile(std::vector<double> values, double gamma);

// Ensembles B corrected covariate-level families into
// min(1, gamma-quantile({ q_b / gamma })).
PValueFamily quantile_aggregate(const std::vector<PValueFamily>& families,
                                double gamma);

struct EnsembleResult {
    PValueFamily family;           // aggregated corrected covariate p-values
    std::vector<double> diameters; // per-bootstrap clustering diameters
    double delta = 0.0;            // declared tolerance: max diameter
};

// Ensembled clustered inference: B randomized clusterings built on row
// subsamples, clustered inference on the full data for each, then
// gamma-quantile aggregation. Bootstraps may run on several threads; the
// result is bit-identical regardless of the worker count.
EnsembleResult ensembled_clustered_inference(const Eigen::MatrixXd& X,
                                             const Eigen::VectorXd& y,
                                             const SpatialDomain& domain,
                                             const EnsembleConfig& config);

// Rejection region { j : value_j <= alpha }, sorted ascending.
std::vector<int> select(const PValueFamily& family, double alpha);

} // namespace cludl
