#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "cludl/errors.hpp"
#include "cludl/lasso.hpp"
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

// Reference solver: proximal gradient (ISTA) with a conservative step size.
// Slow but independent of the coordinate-descent path.
Eigen::VectorXd ista_reference(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y,
                               double lambda, int iters) {
    const int n = static_cast<int>(Z.rows());
    const Eigen::MatrixXd gram = (Z.transpose() * Z) / n;
    const Eigen::VectorXd rho = (Z.transpose() * y) / n;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
    const double step = 1.0 / es.eigenvalues().maxCoeff();

    Eigen::VectorXd b = Eigen::VectorXd::Zero(Z.cols());
    for (int it = 0; it < iters; ++it) {
        Eigen::VectorXd grad = gram * b - rho;
        Eigen::VectorXd u = b - step * grad;
        const double t = step * lambda;
        for (Eigen::Index c = 0; c < u.size(); ++c)
            b[c] = u[c] > t ? u[c] - t : (u[c] < -t ? u[c] + t : 0.0);
    }
    return b;
}

} // namespace

TEST_SUITE("lasso") {

TEST_CASE("lambda at or above lambda_max kills every coordinate") {
    Eigen::MatrixXd Z = random_matrix(30, 6, 2);
    Eigen::VectorXd y = random_matrix(30, 1, 3);
    const double lambda_max = (Z.transpose() * y).lpNorm<Eigen::Infinity>() / 30.0;

    LassoSolution sol = lasso_cd(Z, y, lambda_max * 1.0001);
    CHECK(sol.coef.norm() == 0.0);
    CHECK(sol.converged);
    CHECK(sol.dual_gap <= 1e-6 * y.squaredNorm() / 60.0);
}

TEST_CASE("orthonormal design has the closed-form soft-threshold solution") {
    // Scaled identity block: columns orthogonal with Z'Z/n = I.
    const int n = 8;
    Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(n, 4);
    for (int c = 0; c < 4; ++c) Z(c, c) = std::sqrt(static_cast<double>(n));
    Eigen::VectorXd y(n);
    y << 3, -2, 0.5, 0.05, 1, 0, 0, 0;

    const double lambda = 0.2;
    LassoSolution sol = lasso_cd(Z, y, lambda, 1e-12);
    for (int c = 0; c < 4; ++c) {
        const double corr = Z.col(c).dot(y) / n;
        const double expected =
            corr > lambda ? corr - lambda : (corr < -lambda ? corr + lambda : 0.0);
        CHECK(sol.coef[c] == doctest::Approx(expected).epsilon(1e-9));
    }
}

TEST_CASE("random instances match the reference solver objective") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        Eigen::MatrixXd Z = random_matrix(10, 5, 100 + seed);
        Eigen::VectorXd y = random_matrix(10, 1, 200 + seed);
        const double lambda = 0.1 + 0.05 * static_cast<double>(seed);

        LassoSolution sol = lasso_cd(Z, y, lambda, 1e-12, 100000);
        Eigen::VectorXd ref = ista_reference(Z, y, lambda, 200000);

        const double f_cd = lasso_objective(Z, y, sol.coef, lambda);
        const double f_ref = lasso_objective(Z, y, ref, lambda);
        CHECK(f_cd <= f_ref + 1e-8);
        CHECK(std::abs(f_cd - f_ref) < 1e-8);
    }
}

TEST_CASE("kkt conditions hold at the returned solution") {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        const int n = 20 + static_cast<int>(seed) * 5;
        const int C = 4 + static_cast<int>(seed);
        Eigen::MatrixXd Z = random_matrix(n, C, 300 + seed);
        // Correlate neighboring columns to stress the solver.
        for (int c = 1; c < C; ++c) Z.col(c) = 0.6 * Z.col(c - 1) + 0.8 * Z.col(c);
        Eigen::VectorXd y = Z.col(0) - 0.5 * Z.col(C - 1) +
                            0.3 * random_matrix(n, 1, 400 + seed);

        const double lambda = 0.05;
        LassoSolution sol = lasso_cd(Z, y, lambda, 1e-10);
        CHECK(sol.converged);
        KktReport rep = check_kkt(Z, y, sol.coef, lambda, 1e-5);
        CHECK(rep.ok);
    }
}

TEST_CASE("objective is monotone along coordinate-descent restarts") {
    // Warm starting at a tighter tolerance can only decrease the objective.
    Eigen::MatrixXd Z = random_matrix(40, 12, 7);
    Eigen::VectorXd y = random_matrix(40, 1, 8);
    const double lambda = 0.1;
    LassoSolution rough = lasso_cd(Z, y, lambda, 1e-2);
    const double f_rough = lasso_objective(Z, y, rough.coef, lambda);

    const int n = 40;
    Eigen::MatrixXd gram = (Z.transpose() * Z) / n;
    Eigen::VectorXd rho = (Z.transpose() * y) / n;
    CovLassoProblem prob{gram, rho, y.squaredNorm() / n, n, -1};
    LassoSolution fine = lasso_cd_cov(prob, lambda, 1e-10, 100000, &rough.coef);
    const double f_fine = lasso_objective(Z, y, fine.coef, lambda);
    CHECK(f_fine <= f_rough + 1e-12);
}

TEST_CASE("solution path is continuous in lambda") {
    Eigen::MatrixXd Z = random_matrix(50, 8, 11);
    Eigen::VectorXd y = random_matrix(50, 1, 12);
    const double lambda = 0.2;
    const double f0 = lasso_objective(Z, y, lasso_cd(Z, y, lambda, 1e-10).coef, lambda);
    for (double bump : {0.99, 1.01}) {
        const double lam = lambda * bump;
        const double f = lasso_objective(Z, y, lasso_cd(Z, y, lam, 1e-10).coef, lam);
        CHECK(std::abs(f - f0) / f0 < 0.05);
    }
}

TEST_CASE("lambda_universal") {
    CHECK(lambda_universal(10, 1, 1.0, 1.0) == 0.0);
    // C = e^2, n = 2: sqrt(2 * 2 / 2) = sqrt(2).
    const int C = static_cast<int>(std::round(std::exp(2.0)));
    const double lam = lambda_universal(2, C, 1.0, 1.0);
    CHECK(lam == doctest::Approx(std::sqrt(2.0 * std::log(static_cast<double>(C)) / 2.0)));
    CHECK(lambda_universal(7, 13, 1.5, 2.0) ==
          doctest::Approx(2.0 * lambda_universal(7, 13, 1.5, 1.0)));
}

TEST_CASE("reid noise estimate") {
    SUBCASE("null fit recovers sigma at large n") {
        // Monte-Carlo mean over 100 draws within 10% of the truth.
        const int n = 1000;
        const double sigma = 1.7;
        double acc = 0.0;
        for (std::uint64_t seed = 0; seed < 100; ++seed) {
            Rng rng(900 + seed);
            Eigen::VectorXd y(n);
            for (int i = 0; i < n; ++i) y[i] = sigma * rng.normal();
            Eigen::MatrixXd Z = random_matrix(n, 3, 1900 + seed);
            LassoSolution zero;
            zero.coef = Eigen::VectorXd::Zero(3);
            acc += noise_std_reid(Z, y, zero);
        }
        CHECK(std::abs(acc / 100.0 - sigma) / sigma < 0.1);
    }
    SUBCASE("exact fit gives zero") {
        Eigen::MatrixXd Z = random_matrix(12, 2, 5);
        Eigen::VectorXd coef(2);
        coef << 1.0, -2.0;
        Eigen::VectorXd y = Z * coef;
        LassoSolution sol;
        sol.coef = coef;
        CHECK(noise_std_reid(Z, y, sol) == doctest::Approx(0.0));
    }
    SUBCASE("saturated fit is an estimation error") {
        Eigen::MatrixXd Z = random_matrix(3, 5, 6);
        Eigen::VectorXd y = random_matrix(3, 1, 7);
        LassoSolution sol;
        sol.coef = Eigen::VectorXd::Ones(5);
        CHECK_THROWS_AS(noise_std_reid(Z, y, sol), EstimationError);
    }
}

TEST_CASE("contract violations") {
    Eigen::MatrixXd Z = random_matrix(10, 3, 1);
    Eigen::VectorXd y = random_matrix(10, 1, 2);
    CHECK_THROWS_AS(lasso_cd(Z, y, -0.1), ContractViolation);
    CHECK_THROWS_AS(lasso_cd(Z, random_matrix(9, 1, 3), 0.1), ContractViolation);
}

} // TEST_SUITE
