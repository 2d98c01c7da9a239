#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <queue>
#include <set>
#include <vector>

#include "cludl/cluster.hpp"
#include "cludl/errors.hpp"
#include "cludl/grid.hpp"
#include "cludl/rng.hpp"

using namespace cludl;

namespace {

Eigen::MatrixXd random_matrix(int rows, int cols, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd out(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) out(i, j) = rng.normal();
    return out;
}

// Within-cluster variance of a partition (total squared deviation from the
// cluster centroids); used by the brute-force Ward oracle.
double partition_cost(const Eigen::MatrixXd& features,
                      const std::vector<std::vector<int>>& groups) {
    double cost = 0.0;
    for (const auto& g : groups) {
        Eigen::VectorXd mu = Eigen::VectorXd::Zero(features.rows());
        for (int j : g) mu += features.col(j);
        mu /= static_cast<double>(g.size());
        for (int j : g) cost += (features.col(j) - mu).squaredNorm();
    }
    return cost;
}

bool connected_in_domain(const SpatialDomain& domain, const std::vector<int>& grp) {
    std::set<int> members(grp.begin(), grp.end());
    std::set<int> seen;
    std::queue<int> frontier;
    frontier.push(grp[0]);
    seen.insert(grp[0]);
    while (!frontier.empty()) {
        int j = frontier.front();
        frontier.pop();
        for (int k : domain.neighbors(j))
            if (members.count(k) && !seen.count(k)) {
                seen.insert(k);
                frontier.push(k);
            }
    }
    return seen.size() == members.size();
}

} // namespace

TEST_SUITE("cluster") {

TEST_CASE("row subsampling") {
    Eigen::MatrixXd X = random_matrix(100, 3, 5);

    SUBCASE("fraction one keeps all rows in order") {
        Eigen::MatrixXd sub = subsample_rows(X, 1.0, 99);
        CHECK(sub.rows() == 100);
        CHECK((sub - X).norm() == 0.0);
    }
    SUBCASE("half fraction keeps exactly 50 distinct rows") {
        auto idx = subsample_row_indices(100, 0.5, 7);
        CHECK(idx.size() == 50);
        CHECK(std::adjacent_find(idx.begin(), idx.end()) == idx.end());
        CHECK(std::is_sorted(idx.begin(), idx.end()));
    }
    SUBCASE("same seed gives the same subsample") {
        CHECK(subsample_row_indices(100, 0.3, 42) == subsample_row_indices(100, 0.3, 42));
        Eigen::MatrixXd a = subsample_rows(X, 0.7, 1);
        Eigen::MatrixXd b = subsample_rows(X, 0.7, 1);
        CHECK((a - b).norm() == 0.0);
    }
    SUBCASE("too small a fraction is a configuration error") {
        CHECK_THROWS_AS(subsample_row_indices(100, 0.01, 0), ConfigError);
        CHECK_THROWS_AS(subsample_row_indices(100, 0.0, 0), ConfigError);
        CHECK_THROWS_AS(subsample_row_indices(100, 1.5, 0), ConfigError);
    }
}

TEST_CASE("ward on a 1D toy instance matches the brute-force optimum") {
    // Features (0, 0.1, 10, 10.1) on a 4-point line, two clusters. The
    // oracle enumerates the three contiguous 2-partitions.
    SpatialDomain line = SpatialDomain::line(4);
    Eigen::MatrixXd features(1, 4);
    features << 0.0, 0.1, 10.0, 10.1;

    double best = 1e300;
    std::vector<std::vector<int>> best_groups;
    for (int cut = 1; cut < 4; ++cut) {
        std::vector<std::vector<int>> groups(2);
        for (int j = 0; j < 4; ++j) groups[j < cut ? 0 : 1].push_back(j);
        const double cost = partition_cost(features, groups);
        if (cost < best) {
            best = cost;
            best_groups = groups;
        }
    }
    REQUIRE(best_groups == std::vector<std::vector<int>>{{0, 1}, {2, 3}});

    Clustering c = ward_constrained(features, line, 2);
    CHECK(c.groups() == best_groups);
}

TEST_CASE("ward degenerate cluster counts") {
    SpatialDomain grid = SpatialDomain::grid({3, 3});
    Eigen::MatrixXd features = random_matrix(6, 9, 17);

    Clustering singletons = ward_constrained(features, grid, 9);
    CHECK(singletons.num_clusters() == 9);
    for (int g = 0; g < 9; ++g) CHECK(singletons.group_size(g) == 1);

    Clustering one = ward_constrained(features, grid, 1);
    CHECK(one.num_clusters() == 1);
    CHECK(one.group_size(0) == 9);

    CHECK_THROWS_AS(ward_constrained(features, grid, 0), ContractViolation);
    CHECK_THROWS_AS(ward_constrained(features, grid, 10), ContractViolation);
}

TEST_CASE("ward clusters are connected and partition the domain") {
    SpatialDomain grid = SpatialDomain::grid({8, 8});
    Eigen::MatrixXd features = random_matrix(30, 64, 23);
    for (int C : {4, 9, 20}) {
        Clustering c = ward_constrained(features, grid, C);
        CHECK(c.num_clusters() == C);
        int total = 0;
        for (int g = 0; g < C; ++g) {
            total += c.group_size(g);
            CHECK(connected_in_domain(grid, c.group(g)));
        }
        CHECK(total == 64);
    }
}

TEST_CASE("clustering diameter") {
    SpatialDomain grid = SpatialDomain::grid({4, 4});

    std::vector<int> labels(16);
    for (int j = 0; j < 16; ++j) labels[j] = j;
    CHECK(clustering_diameter(Clustering::from_labels(grid, labels)) == 0.0);

    // One 2x2 square cluster has l1 diameter 2.
    std::vector<int> two(16, 1);
    two[0] = two[1] = two[4] = two[5] = 0;
    Clustering c = Clustering::from_labels(grid, two);
    CHECK(cluster_diameter(c, 0) == doctest::Approx(2.0));
}

TEST_CASE("transformation matrix structure") {
    SpatialDomain line = SpatialDomain::line(4);
    Clustering c = Clustering::from_labels(line, {0, 0, 1, 1});
    TransformationMatrix A = transformation_matrix(c);

    Eigen::MatrixXd dense = Eigen::MatrixXd(A.A);
    CHECK(dense.rows() == 4);
    CHECK(dense.cols() == 2);
    CHECK(dense(0, 0) == doctest::Approx(0.5));
    CHECK(dense(1, 0) == doctest::Approx(0.5));
    CHECK(dense(2, 1) == doctest::Approx(0.5));
    CHECK(dense(3, 1) == doctest::Approx(0.5));
    CHECK(dense(0, 1) == 0.0);

    // Each row has exactly one nonzero; columns sum to one.
    for (int j = 0; j < 4; ++j)
        CHECK((dense.row(j).array() != 0.0).count() == 1);
    for (int g = 0; g < 2; ++g)
        CHECK(dense.col(g).sum() == doctest::Approx(1.0));

    // Singleton clustering gives the identity.
    Clustering singles = Clustering::from_labels(line, {0, 1, 2, 3});
    Eigen::MatrixXd ident = Eigen::MatrixXd(transformation_matrix(singles).A);
    CHECK((ident - Eigen::MatrixXd::Identity(4, 4)).norm() == 0.0);
}

TEST_CASE("compression averages the group columns") {
    SpatialDomain line = SpatialDomain::line(4);
    Clustering c = Clustering::from_labels(line, {0, 0, 1, 1});
    TransformationMatrix A = transformation_matrix(c);
    Eigen::MatrixXd X = random_matrix(5, 4, 31);

    Eigen::MatrixXd Z = compress(X, A);
    CHECK(Z.cols() == 2);
    CHECK((Z.col(0) - 0.5 * (X.col(0) + X.col(1))).norm() < 1e-14);
    CHECK((Z.col(1) - 0.5 * (X.col(2) + X.col(3))).norm() < 1e-14);

    Eigen::MatrixXd Xdup = X;
    Xdup.col(1) = Xdup.col(0);
    Xdup.col(3) = Xdup.col(2);
    Eigen::MatrixXd Zdup = compress(Xdup, A);
    CHECK((Zdup.col(0) - Xdup.col(0)).norm() < 1e-14);
    CHECK((Zdup.col(1) - Xdup.col(2)).norm() < 1e-14);

    Eigen::MatrixXd wrong = random_matrix(5, 3, 1);
    CHECK_THROWS_AS(compress(wrong, A), ContractViolation);
}

TEST_CASE("compressed weights oracle on identity covariance") {
    SpatialDomain line = SpatialDomain::line(2);
    Clustering c = Clustering::from_labels(line, {0, 0});
    Eigen::VectorXd beta(2);
    beta << 1.0, 0.0;
    Eigen::VectorXd theta = compressed_weights_oracle(
        Eigen::MatrixXd::Identity(2, 2), c, WeightMap(beta, line));
    CHECK(theta.size() == 1);
    CHECK(theta[0] == doctest::Approx(1.0));
}

TEST_CASE("compressed weights oracle matches the population projection") {
    // Random block-independent covariances with nonnegative within-block
    // entries and sign-consistent weights per group; the oracle must agree
    // with Upsilon^{-1} A' Sigma beta and reproduce the sign pattern.
    Rng rng(101);
    for (int trial = 0; trial < 50; ++trial) {
        const int p = 4 + static_cast<int>(rng.below(9)); // 4..12
        SpatialDomain line = SpatialDomain::line(p);

        // Contiguous groups.
        std::vector<int> labels(p);
        int label = 0;
        for (int j = 0; j < p; ++j) {
            labels[j] = label;
            if (j + 1 < p && rng.uniform() < 0.35) ++label;
        }
        Clustering c = Clustering::from_labels(line, labels);

        // Sigma = blockdiag(W W' + d I) with W >= 0 keeps within-block
        // entries nonnegative and the matrix positive definite.
        Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(p, p);
        for (int g = 0; g < c.num_clusters(); ++g) {
            const auto& grp = c.group(g);
            const int m = static_cast<int>(grp.size());
            Eigen::MatrixXd W(m, m);
            for (int a = 0; a < m; ++a)
                for (int b = 0; b < m; ++b) W(a, b) = rng.uniform();
            Eigen::MatrixXd block = W * W.transpose();
            block.diagonal().array() += 0.5 + rng.uniform();
            for (int a = 0; a < m; ++a)
                for (int b = 0; b < m; ++b) sigma(grp[a], grp[b]) = block(a, b);
        }

        Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
        std::vector<int> group_sign(c.num_clusters());
        for (int g = 0; g < c.num_clusters(); ++g) {
            const double u = rng.uniform();
            group_sign[g] = u < 0.4 ? 0 : (u < 0.7 ? 1 : -1);
            if (group_sign[g] == 0) continue;
            bool any = false;
            for (int j : c.group(g)) {
                if (rng.uniform() < 0.7) {
                    beta[j] = group_sign[g] * (0.2 + rng.uniform());
                    any = true;
                }
            }
            if (!any) group_sign[g] = 0;
        }
        WeightMap w(beta, line);

        Eigen::VectorXd oracle = compressed_weights_oracle(sigma, c, w);

        Eigen::MatrixXd A = Eigen::MatrixXd(transformation_matrix(c).A);
        Eigen::MatrixXd upsilon = A.transpose() * sigma * A;
        Eigen::VectorXd projected = upsilon.ldlt().solve(A.transpose() * sigma * beta);

        CHECK((oracle - projected).lpNorm<Eigen::Infinity>() < 1e-10);
        for (int g = 0; g < c.num_clusters(); ++g) {
            if (group_sign[g] == 0) CHECK(oracle[g] == doctest::Approx(0.0));
            else if (group_sign[g] > 0) CHECK(oracle[g] > 0.0);
            else CHECK(oracle[g] < 0.0);
        }
    }
}

TEST_CASE("compressed weights oracle rejects zero covariance mass") {
    SpatialDomain line = SpatialDomain::line(2);
    Clustering c = Clustering::from_labels(line, {0, 1});
    Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(2, 2);
    sigma(0, 0) = 1.0; // group {1} has zero mass
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(2);
    CHECK_THROWS_AS(compressed_weights_oracle(sigma, c, WeightMap(beta, line)),
                    DegenerateDesignError);
}

TEST_CASE("from_labels validates the partition") {
    SpatialDomain grid = SpatialDomain::grid({2, 3});
    CHECK_THROWS_AS(Clustering::from_labels(grid, {0, 0, 0}), ContractViolation);
    // Disconnected group: cells (0,0) and (1,2) share a label.
    CHECK_THROWS_AS(Clustering::from_labels(grid, {0, 1, 1, 1, 1, 0}),
                    ContractViolation);
    // Gap in the label range.
    CHECK_THROWS_AS(Clustering::from_labels(grid, {0, 0, 2, 2, 2, 2}),
                    ContractViolation);
}

} // TEST_SUITE
