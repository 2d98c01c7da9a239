#include "cludl/dlasso.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <limits>
#include <string>

#include "cludl/errors.hpp"
#include "cludl/parallel.hpp"
#include "cludl/stats.hpp"

namespace cludl {

InferenceBackend parse_backend(const std::string& name) {
    if (name == "desparsified-lasso") return InferenceBackend::DesparsifiedLasso;
    if (name == "ols") return InferenceBackend::Ols;
    throw ConfigError("unknown inference backend: " + name);
}

NodewiseResult nodewise_lasso_gram(const Eigen::MatrixXd& gram, int n, int c,
                                   double lambda_c, double tol, int max_iter) {
    const int C = static_cast<int>(gram.rows());
    if (c < 0 || c >= C) throw ContractViolation("nodewise column index out of range");

    NodewiseResult res;
    if (C == 1) {
        // No other columns to regress on; the residual is the column itself.
        res.gamma = Eigen::VectorXd::Zero(1);
        res.tau_sq = gram(0, 0);
    } else {
        const Eigen::VectorXd rho = gram.col(c);
        CovLassoProblem prob{gram, rho, gram(c, c), n, c};
        LassoSolution sol = lasso_cd_cov(prob, lambda_c, tol, max_iter);
        res.gamma = std::move(sol.coef);
        res.tau_sq = gram(c, c) - gram.col(c).dot(res.gamma);
    }
    if (res.tau_sq <= 1e-12)
        throw DegenerateDesignError("nodewise residual variance vanished for column " +
                                    std::to_string(c) + " (exactly collinear design)");
    return res;
}

NodewiseResult nodewise_lasso(const Eigen::MatrixXd& Z, int c, double lambda_c,
                              double tol, int max_iter) {
    const int n = static_cast<int>(Z.rows());
    if (n < 1) throw ContractViolation("empty design");
    Eigen::MatrixXd gram = (Z.transpose() * Z) / n;
    return nodewise_lasso_gram(gram, n, c, lambda_c, tol, max_iter);
}

namespace {

double sample_std(const Eigen::VectorXd& y) {
    const int n = static_cast<int>(y.size());
    if (n < 2) return 0.0;
    const double mean = y.mean();
    return std::sqrt((y.array() - mean).square().sum() / (n - 1));
}

} // namespace

DesparsifiedFit desparsified_lasso(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y,
                                   const InferenceBackendConfig& config, int workers) {
    const int n = static_cast<int>(Z.rows());
    const int C = static_cast<int>(Z.cols());
    if (n < 8) throw ContractViolation("desparsified lasso needs n >= 8");
    if (C < 1) throw ContractViolation("empty design");
    if (y.size() != n) throw ContractViolation("design and response lengths differ");

    const double inv_n = 1.0 / n;
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(C, C);
    gram.selfadjointView<Eigen::Lower>().rankUpdate(Z.transpose(), inv_n);
    gram.triangularView<Eigen::StrictlyUpper>() = gram.transpose();
    const Eigen::VectorXd rho = (Z.transpose() * y) * inv_n;
    const double yty_n = y.squaredNorm() * inv_n;

    // Main fit: two-stage universal rate unless an override is given. The
    // preliminary fit pins the noise scale, the final penalty doubles the
    // universal rate at that scale.
    CovLassoProblem main_prob{gram, rho, yty_n, n, -1};
    double lambda_main;
    LassoSolution pre;
    if (config.lambda_main.has_value()) {
        lambda_main = *config.lambda_main;
    } else {
        const double lambda_pre = lambda_universal(n, C, sample_std(y), 1.0);
        pre = lasso_cd_cov(main_prob, lambda_pre, config.tol, config.max_iter);
        const double resid_sq_n =
            std::max(0.0, yty_n - 2.0 * pre.coef.dot(rho) + pre.coef.dot(gram * pre.coef));
        const double sigma_pre = noise_std_reid_cov(resid_sq_n, n, pre.active_count());
        lambda_main = lambda_universal(n, C, sigma_pre, 2.0);
    }
    const Eigen::VectorXd* warm = pre.coef.size() == C ? &pre.coef : nullptr;
    LassoSolution fit = lasso_cd_cov(main_prob, lambda_main, config.tol,
                                     config.max_iter, warm);

    const double resid_sq_n =
        std::max(0.0, yty_n - 2.0 * fit.coef.dot(rho) + fit.coef.dot(gram * fit.coef));
    const double sigma_eta = noise_std_reid_cov(resid_sq_n, n, fit.active_count());

    // Nodewise regressions; independent, hence parallelizable.
    const double lambda_node = config.lambda_nodewise.has_value()
                                   ? *config.lambda_nodewise
                                   : lambda_universal(n, C, 1.0, 1.0);
    std::vector<NodewiseResult> nodes(C);
    parallel_for(static_cast<std::size_t>(C), workers, [&](std::size_t c) {
        nodes[c] = nodewise_lasso_gram(gram, n, static_cast<int>(c), lambda_node,
                                       config.tol, config.max_iter);
    });

    // Debias: theta = b + Theta Z'(y - Zb)/n, with row c of Theta equal to
    // (e_c - gamma_c) / tau_sq_c.
    const Eigen::VectorXd g = rho - gram * fit.coef;
    DesparsifiedFit out;
    out.theta_hat.resize(C);
    out.omega_diag.resize(C);
    for (int c = 0; c < C; ++c) {
        out.theta_hat[c] = fit.coef[c] + (g[c] - nodes[c].gamma.dot(g)) / nodes[c].tau_sq;
        out.omega_diag[c] = 1.0 / nodes[c].tau_sq;
    }
    out.sigma_eta_hat = sigma_eta;
    out.n = n;
    out.C = C;
    return out;
}

PValueFamily cluster_pvalues(const DesparsifiedFit& fit) {
    return adjusted_cluster_pvalues(fit, 0.0);
}

PValueFamily adjusted_cluster_pvalues(const DesparsifiedFit& fit, double a) {
    if (a < 0.0) throw ContractViolation("adjustment a must be nonnegative");
    const double sqrt_n = std::sqrt(static_cast<double>(fit.n));
    Eigen::VectorXd p(fit.C);
    for (int c = 0; c < fit.C; ++c) {
        const double scale = fit.sigma_eta_hat * std::sqrt(fit.omega_diag[c]);
        if (scale <= 0.0) {
            // Noiseless sentinel: the statistic degenerates to 0 or infinity.
            p[c] = std::abs(fit.theta_hat[c]) > 0.0 && a <= 0.0 ? 0.0 : 1.0;
            continue;
        }
        const double stat = std::max(std::abs(fit.theta_hat[c]) / scale - a, 0.0);
        p[c] = two_sided_normal_pvalue(sqrt_n * stat);
    }
    return PValueFamily(std::move(p), FamilyLevel::Cluster, FamilyKind::Raw);
}

PValueFamily ols_inference(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y) {
    const int n = static_cast<int>(Z.rows());
    const int C = static_cast<int>(Z.cols());
    if (C >= n) throw ContractViolation("ols backend requires C < n");
    if (y.size() != n) throw ContractViolation("design and response lengths differ");

    Eigen::MatrixXd gram = Z.transpose() * Z;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
    if (ldlt.info() != Eigen::Success ||
        ldlt.vectorD().minCoeff() <= 1e-10 * gram.diagonal().maxCoeff())
        throw DegenerateDesignError("Z'Z is singular (duplicated or collinear columns)");

    const Eigen::VectorXd coef = ldlt.solve(Z.transpose() * y);
    const double rss = (y - Z * coef).squaredNorm();
    const int dof = n - C;
    const double sigma_sq = rss / dof;
    const Eigen::MatrixXd gram_inv = ldlt.solve(Eigen::MatrixXd::Identity(C, C));

    const boost::math::students_t dist(dof);
    Eigen::VectorXd p(C);
    for (int c = 0; c < C; ++c) {
        const double se = std::sqrt(sigma_sq * gram_inv(c, c));
        if (se <= 0.0) {
            p[c] = coef[c] == 0.0 ? 1.0 : 0.0;
            continue;
        }
        const double t = std::abs(coef[c]) / se;
        p[c] = 2.0 * boost::math::cdf(boost::math::complement(dist, t));
    }
    return PValueFamily(std::move(p), FamilyLevel::Cluster, FamilyKind::Raw);
}

DesignDiagnostics diagnostics(const Eigen::MatrixXd& Z) {
    const int n = static_cast<int>(Z.rows());
    Eigen::MatrixXd upsilon = (Z.transpose() * Z) / std::max(n, 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(upsilon, Eigen::EigenvaluesOnly);

    DesignDiagnostics d;
    d.phi_min_hat = es.eigenvalues().minCoeff();
    d.max_upsilon_diag = upsilon.diagonal().maxCoeff();
    const double phi_max = es.eigenvalues().maxCoeff();
    d.condition_number = d.phi_min_hat > 0.0
                             ? phi_max / d.phi_min_hat
                             : std::numeric_limits<double>::infinity();
    return d;
}

} // namespace cludl
