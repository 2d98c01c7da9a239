#include "cludl/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <string>
#include <utility>

#include "cludl/errors.hpp"

namespace cludl {

SpatialDomain SpatialDomain::grid(std::vector<int> shape) {
    if (shape.empty()) throw ContractViolation("grid shape must have at least one dimension");
    long long p = 1;
    for (int extent : shape) {
        if (extent < 1) throw ContractViolation("grid extents must be positive");
        p *= extent;
        if (p > std::numeric_limits<int>::max())
            throw ContractViolation("grid too large");
    }

    SpatialDomain d;
    d.p_ = static_cast<int>(p);
    d.ndim_ = static_cast<int>(shape.size());
    d.shape_ = std::move(shape);
    d.coords_.resize(static_cast<std::size_t>(d.p_) * d.ndim_);
    for (int j = 0; j < d.p_; ++j) {
        int rest = j;
        // Row-major: last dimension varies fastest.
        for (int dim = d.ndim_ - 1; dim >= 0; --dim) {
            d.coords_[static_cast<std::size_t>(j) * d.ndim_ + dim] = rest % d.shape_[dim];
            rest /= d.shape_[dim];
        }
    }
    return d;
}

SpatialDomain SpatialDomain::line(int p) { return grid({p}); }

double SpatialDomain::distance(int j, int k) const {
    if (j < 0 || j >= p_ || k < 0 || k >= p_)
        throw ContractViolation("covariate index out of range: " + std::to_string(j) +
                                ", " + std::to_string(k) + " on p=" + std::to_string(p_));
    int d = 0;
    for (int dim = 0; dim < ndim_; ++dim)
        d += std::abs(coord(j, dim) - coord(k, dim));
    return static_cast<double>(d);
}

double SpatialDomain::diameter() const {
    int d = 0;
    for (int extent : shape_) d += extent - 1;
    return static_cast<double>(d);
}

std::vector<int> SpatialDomain::neighbors(int j) const {
    if (j < 0 || j >= p_) throw ContractViolation("covariate index out of range");
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(2 * ndim_));
    // Row-major strides.
    int stride = 1;
    for (int dim = ndim_ - 1; dim >= 0; --dim) {
        const int c = coord(j, dim);
        if (c > 0) out.push_back(j - stride);
        if (c + 1 < shape_[dim]) out.push_back(j + stride);
        stride *= shape_[dim];
    }
    std::sort(out.begin(), out.end());
    return out;
}

double distance(const SpatialDomain& domain, int j, int k) {
    return domain.distance(j, k);
}

WeightMap::WeightMap(Eigen::VectorXd b, SpatialDomain d)
    : beta(std::move(b)), domain(std::move(d)) {
    if (beta.size() != domain.size())
        throw ContractViolation("weight map length does not match domain size");
}

std::vector<int> support(const WeightMap& w) {
    std::vector<int> out;
    for (int j = 0; j < w.size(); ++j)
        if (w.beta[j] != 0.0) out.push_back(j);
    return out;
}

std::vector<int> null_region(const WeightMap& w) {
    std::vector<int> out;
    for (int j = 0; j < w.size(); ++j)
        if (w.beta[j] == 0.0) out.push_back(j);
    return out;
}

std::vector<int> delta_null_region(const WeightMap& w, double delta) {
    if (delta < 0.0) throw ContractViolation("delta must be nonnegative");
    const std::vector<int> sup = support(w);
    std::vector<int> out;
    // j is delta-null iff its distance to the nearest support covariate
    // exceeds delta. With empty support everything is delta-null.
    for (int j = 0; j < w.size(); ++j) {
        bool is_null = true;
        for (int k : sup) {
            if (w.domain.distance(j, k) <= delta) {
                is_null = false;
                break;
            }
        }
        if (is_null) out.push_back(j);
    }
    return out;
}

bool check_sparse_smooth(const WeightMap& w, double delta) {
    if (delta < 0.0) throw ContractViolation("delta must be nonnegative");
    std::vector<int> pos, neg;
    for (int j = 0; j < w.size(); ++j) {
        if (w.beta[j] > 0.0) pos.push_back(j);
        else if (w.beta[j] < 0.0) neg.push_back(j);
    }
    for (int j : pos)
        for (int k : neg)
            if (w.domain.distance(j, k) <= delta) return false;
    return true;
}

bool check_spatial_homogeneity(const Eigen::MatrixXd& sigma,
                               const SpatialDomain& domain, double delta) {
    const int p = domain.size();
    if (sigma.rows() != p || sigma.cols() != p)
        throw ContractViolation("covariance dimensions do not match the domain");
    if (!sigma.isApprox(sigma.transpose(), 1e-12))
        throw ContractViolation("covariance matrix must be symmetric");
    if (delta < 0.0) throw ContractViolation("delta must be nonnegative");

    for (int j = 0; j < p; ++j)
        for (int k = j; k < p; ++k)
            if (domain.distance(j, k) <= delta && sigma(j, k) < 0.0) return false;
    return true;
}

} // namespace cludl
