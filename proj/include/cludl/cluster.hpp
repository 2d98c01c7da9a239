#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cstdint>
#include <vector>

#include "cludl/grid.hpp"

namespace cludl {

// A partition of the covariates into C clusters, each connected in the
// 4-neighborhood graph of the domain.
class Clustering {
  public:
    // Builds from per-covariate labels in [0, C). Validates that labels are
    // dense and every group is nonempty and connected.
    static Clustering from_labels(SpatialDomain domain, std::vector<int> labels);

    int num_clusters() const { return static_cast<int>(groups_.size()); }
    int num_covariates() const { return domain_.size(); }
    const std::vector<int>& labels() const { return labels_; }
    const std::vector<std::vector<int>>& groups() const { return groups_; }
    const std::vector<int>& group(int c) const { return groups_[c]; }
    int group_size(int c) const { return static_cast<int>(groups_[c].size()); }
    const SpatialDomain& domain() const { return domain_; }

  private:
    Clustering() = default;

    SpatialDomain domain_;
    std::vector<int> labels_;
    std::vector<std::vector<int>> groups_; // sorted members, clusters ordered by smallest member
};

// The p x C averaging map: entry 1/|G_c| at (j, c) iff j belongs to G_c.
struct TransformationMatrix {
    Eigen::SparseMatrix<double> A;
};

// Uniform row subsample without replacement: floor(fraction * n) rows kept
// in their original order. Throws ConfigError when fewer than 2 rows remain.
Eigen::MatrixXd subsample_rows(const Eigen::MatrixXd& X, double fraction,
                               std::uint64_t seed);
std::vector<int> subsample_row_indices(int n, double fraction, std::uint64_t seed);

// Zero mean, unit sample variance per column (columns with zero variance are
// left centered). This is the feature preparation used before Ward.
Eigen::MatrixXd standardize_columns(Eigen::MatrixXd X);

// Spatially constrained agglomerative clustering with the Ward criterion.
// Starts from singletons and only merges clusters adjacent in the
// 4-neighborhood grid graph; stops at num_clusters clusters. Columns of
// `features` (m x p) are the covariates' feature vectors.
Clustering ward_constrained(const Eigen::MatrixXd& features,
                            const SpatialDomain& domain, int num_clusters);

// Largest within-cluster pairwise l1 distance over all clusters.
double clustering_diameter(const Clustering& c);
double cluster_diameter(const Clustering& c, int cluster_index);

TransformationMatrix transformation_matrix(const Clustering& c);

// Z = X A; column c of Z is the mean of X's columns in group c.
Eigen::MatrixXd compress(const Eigen::MatrixXd& X, const TransformationMatrix& A);

// Compressed-model weights computed from the within-group covariance
// weighting formula; valid when distinct groups are uncorrelated and
// within-group covariances are nonnegative. Serves as the independent
// oracle for the population projection Upsilon^{-1} A' Sigma beta.
Eigen::VectorXd compressed_weights_oracle(const Eigen::MatrixXd& sigma,
                                          const Clustering& c,
                                          const WeightMap& beta);

} // namespace cludl
