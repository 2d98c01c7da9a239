#include "cludl/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <string>
#include <tuple>
#include <utility>

#include "cludl/errors.hpp"
#include "cludl/rng.hpp"

namespace cludl {

namespace {

// Connected-components check of one group under the domain's unit-distance
// adjacency.
bool group_connected(const SpatialDomain& domain, const std::vector<int>& members,
                     std::vector<int>& scratch_label, int tag) {
    if (members.empty()) return false;
    for (int j : members) scratch_label[j] = tag;
    std::queue<int> frontier;
    frontier.push(members[0]);
    scratch_label[members[0]] = -tag;
    int seen = 1;
    while (!frontier.empty()) {
        const int j = frontier.front();
        frontier.pop();
        for (int k : domain.neighbors(j)) {
            if (scratch_label[k] == tag) {
                scratch_label[k] = -tag;
                frontier.push(k);
                ++seen;
            }
        }
    }
    return seen == static_cast<int>(members.size());
}

} // namespace

Clustering Clustering::from_labels(SpatialDomain domain, std::vector<int> labels) {
    const int p = domain.size();
    if (static_cast<int>(labels.size()) != p)
        throw ContractViolation("label vector length does not match domain size");

    int num_clusters = 0;
    for (int lab : labels) {
        if (lab < 0) throw ContractViolation("cluster labels must be nonnegative");
        num_clusters = std::max(num_clusters, lab + 1);
    }

    std::vector<std::vector<int>> groups(num_clusters);
    for (int j = 0; j < p; ++j) groups[labels[j]].push_back(j);
    for (int c = 0; c < num_clusters; ++c)
        if (groups[c].empty())
            throw ContractViolation("cluster " + std::to_string(c) + " is empty");

    // Relabel clusters by their smallest member for deterministic output.
    std::vector<int> order(num_clusters);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return groups[a][0] < groups[b][0]; });

    Clustering out;
    out.domain_ = std::move(domain);
    out.labels_.assign(p, -1);
    out.groups_.resize(num_clusters);
    for (int c = 0; c < num_clusters; ++c) {
        out.groups_[c] = std::move(groups[order[c]]);
        for (int j : out.groups_[c]) out.labels_[j] = c;
    }

    std::vector<int> scratch(p, 0);
    for (int c = 0; c < num_clusters; ++c)
        if (!group_connected(out.domain_, out.groups_[c], scratch, c + 1))
            throw ContractViolation("cluster " + std::to_string(c) +
                                    " is not connected in the grid graph");
    return out;
}

std::vector<int> subsample_row_indices(int n, double fraction, std::uint64_t seed) {
    if (fraction <= 0.0 || fraction > 1.0)
        throw ConfigError("subsample fraction must lie in (0, 1]");
    const int m = static_cast<int>(std::floor(fraction * n));
    if (m < 2) throw ConfigError("subsample would keep fewer than 2 rows");

    // Partial Fisher-Yates, then restore original row order.
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(seed);
    for (int i = 0; i < m; ++i) {
        const int j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - i)));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(m);
    std::sort(idx.begin(), idx.end());
    return idx;
}

Eigen::MatrixXd subsample_rows(const Eigen::MatrixXd& X, double fraction,
                               std::uint64_t seed) {
    const auto idx = subsample_row_indices(static_cast<int>(X.rows()), fraction, seed);
    Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), X.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) out.row(i) = X.row(idx[i]);
    return out;
}

Eigen::MatrixXd standardize_columns(Eigen::MatrixXd X) {
    const Eigen::Index m = X.rows();
    if (m < 2) throw ContractViolation("standardization needs at least 2 rows");
    Eigen::RowVectorXd mean = X.colwise().mean();
    X.rowwise() -= mean;
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        const double sd = std::sqrt(X.col(j).squaredNorm() / (m - 1));
        if (sd > 0.0) X.col(j) /= sd;
    }
    return X;
}

namespace {

// Ward merge cost between clusters with given sizes and centroids:
// |A||B| / (|A|+|B|) * ||mu_A - mu_B||^2.
double ward_cost(double size_a, double size_b, const Eigen::VectorXd& mu_a,
                 const Eigen::VectorXd& mu_b) {
    return size_a * size_b / (size_a + size_b) * (mu_a - mu_b).squaredNorm();
}

struct HeapEntry {
    double cost;
    int a, b;           // cluster ids, a < b
    int version_a, version_b;

    bool operator>(const HeapEntry& o) const {
        // Ties broken by the smallest (a, b) pair for determinism.
        return std::tie(cost, a, b) > std::tie(o.cost, o.a, o.b);
    }
};

} // namespace

Clustering ward_constrained(const Eigen::MatrixXd& features,
                            const SpatialDomain& domain, int num_clusters) {
    const int p = domain.size();
    if (features.cols() != p)
        throw ContractViolation("feature matrix must have one column per covariate");
    if (num_clusters < 1 || num_clusters > p)
        throw ContractViolation("cluster count must lie in [1, p]");

    // Cluster state, indexed by cluster id. Singletons start as ids 0..p-1;
    // a merge keeps the smaller id.
    std::vector<bool> active(p, true);
    std::vector<int> version(p, 0);
    std::vector<double> size(p, 1.0);
    std::vector<Eigen::VectorXd> centroid(p);
    std::vector<std::vector<int>> members(p);
    std::vector<std::vector<int>> neighbor(p);
    for (int j = 0; j < p; ++j) {
        centroid[j] = features.col(j);
        members[j] = {j};
        neighbor[j] = domain.neighbors(j);
    }

    std::priority_queue<HeapEntry, std::vector<HeapEntry>, std::greater<HeapEntry>> heap;
    for (int j = 0; j < p; ++j)
        for (int k : neighbor[j])
            if (j < k)
                heap.push({ward_cost(1.0, 1.0, centroid[j], centroid[k]), j, k, 0, 0});

    auto merge_neighbors = [&](int keep, int gone) {
        std::vector<int> merged;
        merged.reserve(neighbor[keep].size() + neighbor[gone].size());
        std::set_union(neighbor[keep].begin(), neighbor[keep].end(),
                       neighbor[gone].begin(), neighbor[gone].end(),
                       std::back_inserter(merged));
        merged.erase(std::remove_if(merged.begin(), merged.end(),
                                    [&](int id) { return id == keep || id == gone || !active[id]; }),
                     merged.end());
        return merged;
    };

    int clusters_left = p;
    while (clusters_left > num_clusters) {
        if (heap.empty())
            throw InfeasiblePartitionError(
                "adjacency graph has more connected components than requested clusters");
        const HeapEntry top = heap.top();
        heap.pop();
        const int a = top.a, b = top.b;
        if (!active[a] || !active[b]) continue;
        if (top.version_a != version[a] || top.version_b != version[b]) continue;

        // Merge b into a (a < b by construction).
        const double sa = size[a], sb = size[b];
        centroid[a] = (sa * centroid[a] + sb * centroid[b]) / (sa + sb);
        size[a] = sa + sb;
        members[a].insert(members[a].end(), members[b].begin(), members[b].end());
        members[b].clear();
        members[b].shrink_to_fit();
        neighbor[a] = merge_neighbors(a, b);
        active[b] = false;
        ++version[a];
        --clusters_left;

        for (int k : neighbor[a]) {
            // Keep the other side's neighbor lists consistent.
            auto& nk = neighbor[k];
            if (!std::binary_search(nk.begin(), nk.end(), a)) {
                nk.insert(std::upper_bound(nk.begin(), nk.end(), a), a);
            }
            nk.erase(std::remove(nk.begin(), nk.end(), b), nk.end());

            const int lo = std::min(a, k), hi = std::max(a, k);
            heap.push({ward_cost(size[a], size[k], centroid[a], centroid[k]),
                       lo, hi, version[lo], version[hi]});
        }
    }

    std::vector<int> labels(p, -1);
    int next = 0;
    for (int id = 0; id < p; ++id) {
        if (!active[id]) continue;
        for (int j : members[id]) labels[j] = next;
        ++next;
    }
    return Clustering::from_labels(domain, std::move(labels));
}

double cluster_diameter(const Clustering& c, int cluster_index) {
    const auto& g = c.group(cluster_index);
    double diam = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
        for (std::size_t k = i + 1; k < g.size(); ++k)
            diam = std::max(diam, c.domain().distance(g[i], g[k]));
    return diam;
}

double clustering_diameter(const Clustering& c) {
    double diam = 0.0;
    for (int g = 0; g < c.num_clusters(); ++g)
        diam = std::max(diam, cluster_diameter(c, g));
    return diam;
}

TransformationMatrix transformation_matrix(const Clustering& c) {
    const int p = c.num_covariates();
    const int C = c.num_clusters();
    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(p);
    for (int g = 0; g < C; ++g) {
        const double alpha = 1.0 / c.group_size(g);
        for (int j : c.group(g)) entries.emplace_back(j, g, alpha);
    }
    TransformationMatrix A;
    A.A.resize(p, C);
    A.A.setFromTriplets(entries.begin(), entries.end());
    return A;
}

Eigen::MatrixXd compress(const Eigen::MatrixXd& X, const TransformationMatrix& A) {
    if (X.cols() != A.A.rows())
        throw ContractViolation("design and transformation dimensions do not conform");
    return X * A.A;
}

Eigen::VectorXd compressed_weights_oracle(const Eigen::MatrixXd& sigma,
                                          const Clustering& c,
                                          const WeightMap& beta) {
    const int p = c.num_covariates();
    if (sigma.rows() != p || sigma.cols() != p)
        throw ContractViolation("covariance dimensions do not match the clustering");
    if (beta.size() != p)
        throw ContractViolation("weight map length does not match the clustering");

    Eigen::VectorXd theta(c.num_clusters());
    for (int g = 0; g < c.num_clusters(); ++g) {
        const auto& grp = c.group(g);
        double total = 0.0;
        for (int k : grp)
            for (int k2 : grp) total += sigma(k, k2);
        if (total <= 0.0)
            throw DegenerateDesignError("group " + std::to_string(g) +
                                        " has no within-group covariance mass");
        double acc = 0.0;
        for (int j : grp) {
            double wj = 0.0;
            for (int k : grp) wj += sigma(j, k);
            acc += wj / total * beta.beta[j];
        }
        theta[g] = static_cast<double>(grp.size()) * acc;
    }
    return theta;
}

} // namespace cludl
