#include "cludl/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "cludl/errors.hpp"
#include "cludl/parallel.hpp"
#include "cludl/rng.hpp"

namespace cludl {

PValueFamily::PValueFamily(Eigen::VectorXd v, FamilyLevel lv, FamilyKind k,
                           std::string prov)
    : values(std::move(v)), level(lv), kind(k), provenance(std::move(prov)) {
    for (Eigen::Index i = 0; i < values.size(); ++i)
        if (!(values[i] >= 0.0 && values[i] <= 1.0))
            throw ContractViolation("p-value outside [0, 1] at index " +
                                    std::to_string(i));
}

void EnsembleConfig::validate() const {
    if (num_clusters < 1) throw ConfigError("cluster count must be positive");
    if (bootstraps < 1) throw ConfigError("bootstrap count must be at least 1");
    if (gamma <= 0.0 || gamma >= 1.0) throw ConfigError("gamma must lie in (0, 1)");
    if (subsample_fraction <= 0.0 || subsample_fraction > 1.0)
        throw ConfigError("subsample fraction must lie in (0, 1]");
}

PValueFamily bonferroni(const PValueFamily& raw) {
    if (raw.level != FamilyLevel::Cluster || raw.kind != FamilyKind::Raw)
        throw ContractViolation("bonferroni expects a raw cluster-level family");
    const double C = static_cast<double>(raw.size());
    Eigen::VectorXd corrected =
        (raw.values.array() * C).min(1.0).matrix();
    return PValueFamily(std::move(corrected), FamilyLevel::Cluster,
                        FamilyKind::Corrected, raw.provenance);
}

PValueFamily degroup(const PValueFamily& corrected, const Clustering& c) {
    if (corrected.level != FamilyLevel::Cluster)
        throw ContractViolation("degroup expects a cluster-level family");
    if (corrected.size() != c.num_clusters())
        throw ContractViolation("family length does not match the cluster count");

    Eigen::VectorXd out(c.num_covariates());
    for (int j = 0; j < c.num_covariates(); ++j)
        out[j] = corrected.values[c.labels()[j]];
    return PValueFamily(std::move(out), FamilyLevel::Covariate, corrected.kind,
                        corrected.provenance);
}

PValueFamily clustered_inference(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                   const TransformationMatrix& A, const Clustering& c,
                   const InferenceBackendConfig& backend) {
    if (X.cols() != static_cast<Eigen::Index>(c.num_covariates()))
        throw ContractViolation("design width does not match the clustering");

    const Eigen::MatrixXd Z = compress(X, A);
    PValueFamily raw = [&] {
        switch (backend.backend) {
            case InferenceBackend::Ols:
                return ols_inference(Z, y);
            case InferenceBackend::DesparsifiedLasso:
            default: {
                DesparsifiedFit fit = desparsified_lasso(Z, y, backend);
                return adjusted_cluster_pvalues(fit, backend.adjustment_a);
            }
        }
    }();
    return degroup(bonferroni(raw), c);
}

double empirical_gamma_quantile(std::vector<double> values, double gamma) {
    if (values.empty()) throw ContractViolation("quantile of an empty set");
    if (gamma <= 0.0 || gamma >= 1.0)
        throw ContractViolation("gamma must lie in (0, 1)");
    std::sort(values.begin(), values.end());
    // Smallest v in the set with mass(<= v) >= gamma: with B sorted values
    // that is element ceil(gamma * B) in 1-based counting.
    const std::size_t B = values.size();
    std::size_t k = static_cast<std::size_t>(
        std::ceil(gamma * static_cast<double>(B)));
    if (k < 1) k = 1;
    return values[k - 1];
}

PValueFamily quantile_aggregate(const std::vector<PValueFamily>& families,
                                double gamma) {
    if (families.empty()) throw ContractViolation("no families to aggregate");
    if (gamma <= 0.0 || gamma >= 1.0)
        throw ContractViolation("gamma must lie in (0, 1)");
    const int p = families.front().size();
    for (const auto& f : families) {
        if (f.size() != p)
            throw ContractViolation("aggregated families must share one length");
        if (f.level != FamilyLevel::Covariate || f.kind != FamilyKind::Corrected)
            throw ContractViolation(
                "quantile_aggregate expects corrected covariate-level families");
    }

    Eigen::VectorXd out(p);
    std::vector<double> scaled(families.size());
    for (int j = 0; j < p; ++j) {
        for (std::size_t b = 0; b < families.size(); ++b)
            scaled[b] = families[b].values[j] / gamma;
        out[j] = std::min(1.0, empirical_gamma_quantile(scaled, gamma));
    }
    return PValueFamily(std::move(out), FamilyLevel::Covariate,
                        FamilyKind::Aggregated, "ensembled");
}

EnsembleResult ensembled_clustered_inference(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                      const SpatialDomain& domain, const EnsembleConfig& config) {
    config.validate();
    if (X.cols() != static_cast<Eigen::Index>(domain.size()))
        throw ContractViolation("design width does not match the domain");
    if (y.size() != X.rows())
        throw ContractViolation("design and response lengths differ");

    const int B = config.bootstraps;
    std::vector<PValueFamily> families(B);
    std::vector<double> diameters(B);

    // Any bootstrap failure aborts the whole ensemble: parallel_for rethrows
    // the first exception after joining.
    parallel_for(static_cast<std::size_t>(B), config.workers, [&](std::size_t b) {
        const std::uint64_t sub_seed = derive_seed(config.seed, 1000 + b);
        Eigen::MatrixXd features = standardize_columns(
            subsample_rows(X, config.subsample_fraction, sub_seed));
        Clustering clust = ward_constrained(features, domain, config.num_clusters);
        TransformationMatrix A = transformation_matrix(clust);
        PValueFamily fam = clustered_inference(X, y, A, clust, config.backend);
        fam.provenance = "b=" + std::to_string(b);
        families[b] = std::move(fam);
        diameters[b] = clustering_diameter(clust);
    });

    EnsembleResult res{quantile_aggregate(families, config.gamma),
                      std::move(diameters), 0.0};
    res.delta = *std::max_element(res.diameters.begin(), res.diameters.end());
    return res;
}

std::vector<int> select(const PValueFamily& family, double alpha) {
    if (alpha <= 0.0 || alpha >= 1.0)
        throw ContractViolation("alpha must lie in (0, 1)");
    std::vector<int> out;
    for (int j = 0; j < family.size(); ++j)
        if (family.values[j] <= alpha) out.push_back(j);
    return out;
}

} // namespace cludl
