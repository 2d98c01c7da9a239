#include "cludl/lasso.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "cludl/errors.hpp"

namespace cludl {

namespace {

inline double soft_threshold(double x, double t) {
    if (x > t) return x - t;
    if (x < -t) return x + t;
    return 0.0;
}

struct SolverState {
    Eigen::VectorXd coef;
    Eigen::VectorXd q; // gram * coef, kept incrementally
};

// One coordinate-descent pass over `coords`; returns the largest squared
// coefficient change scaled by the curvature (glmnet-style progress measure).
double cd_pass(const CovLassoProblem& prob, double lambda, SolverState& st,
               const std::vector<int>& coords) {
    double max_delta = 0.0;
    for (int c : coords) {
        const double gcc = prob.gram(c, c);
        if (gcc <= 0.0) continue;
        const double old = st.coef[c];
        const double u = prob.rho[c] - st.q[c] + gcc * old;
        const double next = soft_threshold(u, lambda) / gcc;
        if (next == old) continue;
        const double delta = next - old;
        st.coef[c] = next;
        st.q.noalias() += delta * prob.gram.col(c);
        max_delta = std::max(max_delta, gcc * delta * delta);
    }
    return max_delta;
}

// Duality gap from the covariance summaries; the dual point is the scaled
// residual r/n projected into the feasible set.
double duality_gap(const CovLassoProblem& prob, double lambda,
                   const SolverState& st) {
    const double b_rho = st.coef.dot(prob.rho);
    const double b_q = st.coef.dot(st.q);
    const double resid_sq_n = std::max(0.0, prob.yty_n - 2.0 * b_rho + b_q);
    const double l1 = st.coef.lpNorm<1>();

    double g_inf = 0.0;
    for (Eigen::Index c = 0; c < prob.rho.size(); ++c) {
        if (c == prob.skip) continue;
        g_inf = std::max(g_inf, std::abs(prob.rho[c] - st.q[c]));
    }
    const double scale = (g_inf > lambda && g_inf > 0.0) ? lambda / g_inf : 1.0;

    const double primal = 0.5 * resid_sq_n + lambda * l1;
    const double dual = 0.5 * prob.yty_n -
                        0.5 * (scale * scale * resid_sq_n -
                               2.0 * scale * (prob.yty_n - b_rho) + prob.yty_n);
    return std::max(0.0, primal - dual);
}

} // namespace

LassoSolution lasso_cd_cov(const CovLassoProblem& prob, double lambda,
                           double tol, int max_iter,
                           const Eigen::VectorXd* warm_start) {
    const int C = static_cast<int>(prob.gram.rows());
    if (prob.gram.cols() != C || prob.rho.size() != C)
        throw ContractViolation("gram and correlation dimensions do not conform");
    if (lambda < 0.0) throw ContractViolation("lambda must be nonnegative");
    if (tol <= 0.0) throw ContractViolation("tol must be positive");

    SolverState st;
    if (warm_start != nullptr && warm_start->size() == C) {
        st.coef = *warm_start;
        if (prob.skip >= 0) st.coef[prob.skip] = 0.0;
        st.q.noalias() = prob.gram * st.coef;
    } else {
        st.coef = Eigen::VectorXd::Zero(C);
        st.q = Eigen::VectorXd::Zero(C);
    }

    std::vector<int> all_coords;
    all_coords.reserve(C);
    for (int c = 0; c < C; ++c)
        if (c != prob.skip) all_coords.push_back(c);

    const double gap_target = tol * prob.yty_n / 2.0;
    const double inner_eps = tol * std::max(prob.yty_n, 1e-300);

    LassoSolution sol;
    sol.lambda = lambda;
    int sweeps = 0;
    double gap = duality_gap(prob, lambda, st);

    while (gap > gap_target && sweeps < max_iter) {
        // Full pass picks up coordinates violating KKT.
        cd_pass(prob, lambda, st, all_coords);
        ++sweeps;

        std::vector<int> active;
        active.reserve(all_coords.size());
        for (int c : all_coords)
            if (st.coef[c] != 0.0) active.push_back(c);

        // Inner loop on the active set until its own updates stall.
        while (sweeps < max_iter && !active.empty()) {
            const double delta = cd_pass(prob, lambda, st, active);
            ++sweeps;
            if (delta <= inner_eps) break;
        }
        gap = duality_gap(prob, lambda, st);
    }

    sol.coef = std::move(st.coef);
    sol.n_iter = sweeps;
    sol.dual_gap = gap;
    sol.converged = gap <= gap_target;
    return sol;
}

LassoSolution lasso_cd(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y,
                       double lambda, double tol, int max_iter) {
    const int n = static_cast<int>(Z.rows());
    if (y.size() != n) throw ContractViolation("design and response lengths differ");
    if (n < 1) throw ContractViolation("empty design");
    const double inv_n = 1.0 / n;
    Eigen::MatrixXd gram = (Z.transpose() * Z) * inv_n;
    Eigen::VectorXd rho = (Z.transpose() * y) * inv_n;
    const double yty_n = y.squaredNorm() * inv_n;
    return lasso_cd_cov({gram, rho, yty_n, n, -1}, lambda, tol, max_iter);
}

KktReport check_kkt(const CovLassoProblem& prob, const Eigen::VectorXd& coef,
                    double lambda, double tol) {
    Eigen::VectorXd g = prob.rho - prob.gram * coef;
    KktReport rep;
    for (Eigen::Index c = 0; c < coef.size(); ++c) {
        if (c == prob.skip) continue;
        double violation;
        if (coef[c] != 0.0)
            violation = std::abs(g[c] - lambda * (coef[c] > 0.0 ? 1.0 : -1.0));
        else
            violation = std::max(0.0, std::abs(g[c]) - lambda);
        rep.max_violation = std::max(rep.max_violation, violation);
    }
    rep.ok = rep.max_violation <= tol;
    return rep;
}

KktReport check_kkt(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y,
                    const Eigen::VectorXd& coef, double lambda, double tol) {
    const int n = static_cast<int>(Z.rows());
    const double inv_n = 1.0 / n;
    Eigen::MatrixXd gram = (Z.transpose() * Z) * inv_n;
    Eigen::VectorXd rho = (Z.transpose() * y) * inv_n;
    return check_kkt({gram, rho, y.squaredNorm() * inv_n, n, -1}, coef, lambda, tol);
}

double lasso_objective(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y,
                       const Eigen::VectorXd& coef, double lambda) {
    const double n = static_cast<double>(Z.rows());
    return (y - Z * coef).squaredNorm() / (2.0 * n) + lambda * coef.lpNorm<1>();
}

double lambda_universal(int n, int num_cols, double y_scale, double kappa) {
    if (n < 1 || num_cols < 1) throw ContractViolation("lambda_universal needs n >= 1, C >= 1");
    return kappa * y_scale * std::sqrt(2.0 * std::log(static_cast<double>(num_cols)) / n);
}

double noise_std_reid_cov(double residual_sq_n, int n, int s_hat) {
    if (s_hat >= n)
        throw EstimationError("saturated fit: " + std::to_string(s_hat) +
                              " active coefficients with n = " + std::to_string(n));
    return std::sqrt(std::max(0.0, residual_sq_n) * n / (n - s_hat));
}

double noise_std_reid(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y,
                      const LassoSolution& solution) {
    const int n = static_cast<int>(Z.rows());
    const double rss = (y - Z * solution.coef).squaredNorm();
    return noise_std_reid_cov(rss / n, n, solution.active_count());
}

} // namespace cludl
