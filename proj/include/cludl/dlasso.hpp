#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>

#include "cludl/lasso.hpp"
#include "cludl/pvalue_family.hpp"

namespace cludl {

// Debiased estimates on a compressed design with C columns.
struct DesparsifiedFit {
    Eigen::VectorXd theta_hat;     // debiased coefficients
    Eigen::VectorXd omega_diag;    // estimated precision diagonal
    double sigma_eta_hat = 0.0;    // residual noise scale (0 = noiseless sentinel)
    int n = 0;
    int C = 0;
};

enum class InferenceBackend { DesparsifiedLasso, Ols };

struct InferenceBackendConfig {
    InferenceBackend backend = InferenceBackend::DesparsifiedLasso;
    std::optional<double> lambda_main;
    std::optional<double> lambda_nodewise;
    double adjustment_a = 0.0; // bias allowance for correlated clusters
    double tol = 1e-6;
    int max_iter = 100000;
};

InferenceBackend parse_backend(const std::string& name);

struct NodewiseResult {
    Eigen::VectorXd gamma; // length C with gamma[c] == 0
    double tau_sq = 0.0;
};

// Lasso regression of column c on the remaining columns, phrased on the
// shared gram matrix (gram = Z'Z/n). tau_sq = Z_c'(Z_c - Z_{-c} gamma)/n.
NodewiseResult nodewise_lasso_gram(const Eigen::MatrixXd& gram, int n, int c,
                                   double lambda_c, double tol = 1e-6,
                                   int max_iter = 100000);
NodewiseResult nodewise_lasso(const Eigen::MatrixXd& Z, int c, double lambda_c,
                              double tol = 1e-6, int max_iter = 100000);

DesparsifiedFit desparsified_lasso(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y,
                                   const InferenceBackendConfig& config = {},
                                   int workers = 1);

// Raw two-sided cluster p-values 2(1 - Phi(sqrt(n)|theta_c| / (sigma sqrt(omega_cc)))).
PValueFamily cluster_pvalues(const DesparsifiedFit& fit);

// Same with the statistic reduced by `a` before the Gaussian tail:
// 2(1 - Phi(sqrt(n) [ |theta_c|/(sigma sqrt(omega_cc)) - a ]_+)). a = 0
// reproduces cluster_pvalues exactly.
PValueFamily adjusted_cluster_pvalues(const DesparsifiedFit& fit, double a);

// Classical OLS t-test p-values; requires C < n and full column rank.
PValueFamily ols_inference(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y);

struct DesignDiagnostics {
    double phi_min_hat = 0.0;      // smallest eigenvalue of Z'Z/n
    double max_upsilon_diag = 0.0; // largest diagonal entry of Z'Z/n
    double condition_number = 0.0;
};

DesignDiagnostics diagnostics(const Eigen::MatrixXd& Z);

} // namespace cludl
