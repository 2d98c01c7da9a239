#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <vector>

#include "cludl/errors.hpp"
#include "cludl/grid.hpp"
#include "cludl/rng.hpp"

using namespace cludl;

namespace {

WeightMap line_map(std::initializer_list<double> values) {
    Eigen::VectorXd beta(static_cast<Eigen::Index>(values.size()));
    Eigen::Index i = 0;
    for (double v : values) beta[i++] = v;
    return WeightMap(beta, SpatialDomain::line(static_cast<int>(values.size())));
}

std::vector<int> all_indices(int p) {
    std::vector<int> out(p);
    for (int j = 0; j < p; ++j) out[j] = j;
    return out;
}

} // namespace

TEST_SUITE("grid") {

TEST_CASE("l1 distance on lines and grids") {
    SpatialDomain line = SpatialDomain::line(8);
    CHECK(line.distance(2, 5) == doctest::Approx(3.0));
    CHECK(line.distance(4, 4) == 0.0);

    SpatialDomain grid = SpatialDomain::grid({5, 5});
    // (0,0) vs (3,4)
    CHECK(grid.distance(0, 3 * 5 + 4) == doctest::Approx(7.0));
    CHECK_THROWS_AS(grid.distance(0, 25), ContractViolation);
    CHECK_THROWS_AS(grid.distance(-1, 0), ContractViolation);
}

TEST_CASE("distance is a metric") {
    SpatialDomain grid = SpatialDomain::grid({4, 6});
    Rng rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        const int a = static_cast<int>(rng.below(24));
        const int b = static_cast<int>(rng.below(24));
        const int c = static_cast<int>(rng.below(24));
        CHECK(grid.distance(a, b) >= 0.0);
        CHECK(grid.distance(a, b) == grid.distance(b, a));
        CHECK(grid.distance(a, c) <= grid.distance(a, b) + grid.distance(b, c));
    }
    CHECK(grid.diameter() == doctest::Approx(3 + 5));
}

TEST_CASE("coords are a bijection onto the grid") {
    SpatialDomain grid = SpatialDomain::grid({3, 4});
    std::vector<std::pair<int, int>> seen;
    for (int j = 0; j < grid.size(); ++j)
        seen.emplace_back(grid.coord(j, 0), grid.coord(j, 1));
    std::sort(seen.begin(), seen.end());
    CHECK(std::adjacent_find(seen.begin(), seen.end()) == seen.end());
    CHECK(static_cast<int>(seen.size()) == 12);
}

TEST_CASE("delta null region on a 1D example") {
    WeightMap w = line_map({0, 0, 1, 0, 0});
    // 0-based translation of the spec's 1-based indexes.
    CHECK(delta_null_region(w, 0.0) == std::vector<int>{0, 1, 3, 4});
    CHECK(delta_null_region(w, 1.0) == std::vector<int>{0, 4});
    CHECK(delta_null_region(w, 0.0) == null_region(w));

    WeightMap zero = line_map({0, 0, 0, 0});
    CHECK(delta_null_region(zero, 2.0) == all_indices(4));
}

TEST_CASE("delta null regions are nested in delta") {
    Rng rng(11);
    SpatialDomain grid = SpatialDomain::grid({6, 6});
    for (int trial = 0; trial < 30; ++trial) {
        Eigen::VectorXd beta = Eigen::VectorXd::Zero(36);
        for (int j = 0; j < 36; ++j)
            if (rng.uniform() < 0.15) beta[j] = rng.normal();
        WeightMap w(beta, grid);
        double d1 = rng.uniform() * grid.diameter();
        double d2 = rng.uniform() * grid.diameter();
        if (d1 > d2) std::swap(d1, d2);
        const auto n2 = delta_null_region(w, d2);
        const auto n1 = delta_null_region(w, d1);
        const auto n0 = null_region(w);
        CHECK(std::includes(n1.begin(), n1.end(), n2.begin(), n2.end()));
        CHECK(std::includes(n0.begin(), n0.end(), n1.begin(), n1.end()));
    }
}

TEST_CASE("sparse-smooth check") {
    WeightMap w = line_map({1, 0, -1});
    CHECK_FALSE(check_sparse_smooth(w, 2.0));
    CHECK(check_sparse_smooth(w, 1.0));

    WeightMap pos = line_map({1, 0, 2, 3, 0});
    CHECK(check_sparse_smooth(pos, 4.0));

    // Monotone: true at delta implies true at any smaller delta.
    Rng rng(3);
    SpatialDomain grid = SpatialDomain::grid({5, 5});
    for (int trial = 0; trial < 30; ++trial) {
        Eigen::VectorXd beta = Eigen::VectorXd::Zero(25);
        for (int j = 0; j < 25; ++j)
            if (rng.uniform() < 0.3) beta[j] = rng.normal();
        WeightMap wm(beta, grid);
        double d1 = rng.uniform() * 8.0;
        double d2 = rng.uniform() * 8.0;
        if (d1 > d2) std::swap(d1, d2);
        if (check_sparse_smooth(wm, d2)) CHECK(check_sparse_smooth(wm, d1));
    }
}

TEST_CASE("spatial homogeneity check") {
    SpatialDomain line = SpatialDomain::line(3);
    Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(3, 3);
    CHECK(check_spatial_homogeneity(identity, line, 2.0));

    Eigen::MatrixXd sigma = identity;
    sigma(0, 1) = sigma(1, 0) = -0.1;
    CHECK_FALSE(check_spatial_homogeneity(sigma, line, 1.0));
    CHECK(check_spatial_homogeneity(sigma, line, 0.0));

    Eigen::MatrixXd asym = identity;
    asym(0, 1) = 0.5;
    CHECK_THROWS_AS(check_spatial_homogeneity(asym, line, 1.0), ContractViolation);
}

TEST_CASE("support and null region partition the domain") {
    WeightMap w = line_map({0, 2, 0, -1, 0});
    const auto s = support(w);
    const auto n = null_region(w);
    CHECK(s == std::vector<int>{1, 3});
    CHECK(n == std::vector<int>{0, 2, 4});
    std::vector<int> merged;
    std::merge(s.begin(), s.end(), n.begin(), n.end(), std::back_inserter(merged));
    CHECK(merged == all_indices(5));
}

} // TEST_SUITE
