#pragma once

#include <Eigen/Dense>

namespace cludl {

// Solution of min_b 1/(2n) ||y - Z b||^2 + lambda ||b||_1.
struct LassoSolution {
    Eigen::VectorXd coef;
    double lambda = 0.0;
    int n_iter = 0;        // coordinate-descent sweeps performed
    double dual_gap = 0.0; // certified duality gap at exit
    bool converged = true; // gap <= tol * ||y||^2 / (2n) at exit

    int active_count() const {
        int s = 0;
        for (Eigen::Index c = 0; c < coef.size(); ++c)
            if (coef[c] != 0.0) ++s;
        return s;
    }
};

// The solver works on second-moment summaries so that many related problems
// (the nodewise regressions of the desparsified Lasso in particular) can
// share one gram matrix. For a response column inside the design, set
// `skip` to its index: that coordinate is pinned to zero and excluded from
// the dual feasibility norm.
struct CovLassoProblem {
    const Eigen::MatrixXd& gram; // Z'Z / n, C x C
    const Eigen::VectorXd& rho;  // Z'y / n
    double yty_n = 0.0;          // y'y / n
    int n = 0;                   // sample count
    int skip = -1;
};

LassoSolution lasso_cd_cov(const CovLassoProblem& prob, double lambda,
                           double tol = 1e-6, int max_iter = 10000,
                           const Eigen::VectorXd* warm_start = nullptr);

// Matrix-facing entry point; builds the gram summaries and calls the
// covariance-mode solver.
LassoSolution lasso_cd(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y,
                       double lambda, double tol = 1e-6, int max_iter = 10000);

struct KktReport {
    double max_violation = 0.0;
    bool ok = false;
};

// Stationarity check at `coef`: inactive coordinates need |g_c| <= lambda +
// tol, active ones g_c = lambda * sign(b_c) up to tol, with g the residual
// correlation Z'(y - Zb)/n.
KktReport check_kkt(const CovLassoProblem& prob, const Eigen::VectorXd& coef,
                    double lambda, double tol);
KktReport check_kkt(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y,
                    const Eigen::VectorXd& coef, double lambda, double tol);

// Lasso objective value, matrix form.
double lasso_objective(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y,
                       const Eigen::VectorXd& coef, double lambda);

// Universal penalty rate kappa * y_scale * sqrt(2 log(C) / n).
double lambda_universal(int n, int num_cols, double y_scale, double kappa);

// Residual noise estimate sqrt(||y - Z b||^2 / (n - s_hat)) with s_hat the
// active-set size; throws EstimationError on a saturated fit (s_hat >= n).
double noise_std_reid(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y,
                      const LassoSolution& solution);

// Covariance-mode variant: residual_sq_n = ||y - Zb||^2 / n.
double noise_std_reid_cov(double residual_sq_n, int n, int s_hat);

} // namespace cludl
