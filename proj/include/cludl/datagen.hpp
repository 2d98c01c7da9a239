#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

#include "cludl/grid.hpp"

namespace cludl {

// Parameters of one synthetic 2D scenario. Defaults are the central
// scenario: 40x40 grid, 100 samples, four 4x4 active squares, local
// correlation 0.75, noise standard deviation 2.
struct ScenarioConfig {
    int H = 40;              // grid edge length, p = H^2
    int n = 100;             // samples
    int h = 4;               // active-region width
    double rho = 0.75;       // target adjacent-covariate correlation
    double sigma_eps = 2.0;  // noise standard deviation
    std::uint64_t seed = 0;  // RNG seed
    double amplitude = 1.0;  // active-weight magnitude
    bool signed_weights = false; // two regions flipped negative when set

    void validate() const;
};

struct Dataset {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    WeightMap weight_map;
    Eigen::VectorXd eps;
    double snr = 0.0;        // realized ||X beta||_2 / ||eps||_2
    double achieved_rho = 0.0;
    double sigma_smooth = 0.0;
};

// Four h x h squares of constant weight `amplitude` centered at the
// quarter-grid positions; everything else zero. With `signed_weights` the
// two off-diagonal squares are negated.
WeightMap make_weight_map(int H, int h, double amplitude, bool signed_weights = false);

struct DesignResult {
    Eigen::MatrixXd X;
    double achieved_rho = 0.0;
    double sigma_smooth = 0.0;
};

// n x H^2 design: iid standard normal fields smoothed with an isotropic 2D
// Gaussian kernel, flattened row-major and column-standardized. The kernel
// width is found by bisection on [0.1, 10] so the average empirical
// correlation between 4-adjacent columns lands within +-0.01 of rho.
DesignResult make_design(int n, int H, double rho, std::uint64_t seed);

// eps ~ N(0, sigma_eps^2 I_n); y = X beta + eps; snr recorded
// (+infinity when sigma_eps = 0).
Dataset make_target(Eigen::MatrixXd X, const WeightMap& w, double sigma_eps,
                    std::uint64_t seed, double achieved_rho = 0.0,
                    double sigma_smooth = 0.0);

// Full scenario: weight map + design + target, with the design and noise
// seeds derived from config.seed.
Dataset generate_scenario(const ScenarioConfig& config);

// Average empirical Pearson correlation over all 4-adjacent column pairs.
double mean_adjacent_correlation(const Eigen::MatrixXd& X, int H);

// Writes X as little-endian float64 row-major binary with a JSON sidecar,
// plus y and beta as single-column CSVs, into `dir`.
void export_dataset(const Dataset& ds, const ScenarioConfig& config,
                    const std::string& dir);
Dataset load_dataset(const std::string& dir);

} // namespace cludl
