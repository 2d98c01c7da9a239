#pragma once

#include <Eigen/Dense>
#include <vector>

namespace cludl {

// Discrete spatial domain of the covariates: every index j in [p] sits on an
// integer lattice point and distances are measured with the l1 metric.
class SpatialDomain {
  public:
    SpatialDomain() = default; // empty domain

    // Full rectangular grid; covariate j maps to the row-major cell of
    // `shape`. Works for any dimension count >= 1.
    static SpatialDomain grid(std::vector<int> shape);
    // Convenience: 1D line of p covariates.
    static SpatialDomain line(int p);

    int size() const { return p_; }
    int ndim() const { return ndim_; }
    const std::vector<int>& shape() const { return shape_; }

    int coord(int j, int dim) const { return coords_[static_cast<std::size_t>(j) * ndim_ + dim]; }

    // l1 distance between covariates j and k; throws ContractViolation on
    // out-of-range indexes.
    double distance(int j, int k) const;

    // Largest pairwise distance on the domain.
    double diameter() const;

    // Indexes at l1 distance exactly 1 (the 4-neighborhood on 2D grids).
    std::vector<int> neighbors(int j) const;

  private:
    int p_ = 0;
    int ndim_ = 0;
    std::vector<int> shape_;
    std::vector<int> coords_; // p * ndim, row-major per covariate
};

double distance(const SpatialDomain& domain, int j, int k);

// Parameter vector beta* attached to its spatial domain.
struct WeightMap {
    Eigen::VectorXd beta;
    SpatialDomain domain;

    WeightMap(Eigen::VectorXd b, SpatialDomain d);

    int size() const { return static_cast<int>(beta.size()); }
};

// Indexes with nonzero weight, sorted ascending.
std::vector<int> support(const WeightMap& w);

// Indexes with zero weight, sorted ascending.
std::vector<int> null_region(const WeightMap& w);

// { j : beta_k = 0 for every k with d(j,k) <= delta }, sorted ascending.
// delta = 0 recovers the plain null region.
std::vector<int> delta_null_region(const WeightMap& w, double delta);

// True iff no pair of strictly opposite-sign weights lies within distance
// delta (zero counts as both signs).
bool check_sparse_smooth(const WeightMap& w, double delta);

// True iff sigma_{j,k} >= 0 for every pair with d(j,k) <= delta.
// Throws ContractViolation if sigma is not symmetric of size p x p.
bool check_spatial_homogeneity(const Eigen::MatrixXd& sigma,
                               const SpatialDomain& domain, double delta);

} // namespace cludl
