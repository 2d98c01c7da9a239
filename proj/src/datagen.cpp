#include "cludl/datagen.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <vector>

#include "cludl/errors.hpp"
#include "cludl/rng.hpp"

namespace cludl {

void ScenarioConfig::validate() const {
    if (H < 2) throw ConfigError("grid edge length H must be at least 2");
    if (n < 2) throw ConfigError("sample count n must be at least 2");
    if (h < 1 || 2 * h >= H)
        throw ConfigError("active-region width h must satisfy 0 < h < H/2");
    if (rho <= 0.0 || rho >= 1.0) throw ConfigError("rho must lie in (0, 1)");
    if (sigma_eps < 0.0) throw ConfigError("sigma_eps must be nonnegative");
}

WeightMap make_weight_map(int H, int h, double amplitude, bool signed_weights) {
    if (h < 1 || 2 * h >= H)
        throw ConfigError("active-region width h must satisfy 0 < h < H/2");

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(H) * H);
    const int lo = H / 4, hi = 3 * H / 4;
    const int centers[4][2] = {{lo, lo}, {lo, hi}, {hi, lo}, {hi, hi}};
    for (int r = 0; r < 4; ++r) {
        // Square of width h centered at the quarter-grid position; the two
        // off-diagonal squares carry negative weights in the signed variant.
        const double value =
            (signed_weights && (r == 1 || r == 2)) ? -amplitude : amplitude;
        const int row0 = centers[r][0] - h / 2;
        const int col0 = centers[r][1] - h / 2;
        for (int i = row0; i < row0 + h; ++i)
            for (int j = col0; j < col0 + h; ++j)
                beta[static_cast<Eigen::Index>(i) * H + j] = value;
    }
    return WeightMap(std::move(beta), SpatialDomain::grid({H, H}));
}

namespace {

// Separable Gaussian blur of one H x H field, truncated at radius
// ceil(4 sigma), reflect boundary (edge sample repeated).
void smooth_field(const Eigen::VectorXd& in, Eigen::VectorXd& out, int H,
                  const std::vector<double>& kernel) {
    const int r = static_cast<int>(kernel.size()) / 2;
    static thread_local Eigen::VectorXd tmp;
    tmp.resize(in.size());

    auto reflect = [H](int i) {
        // Fold repeatedly so radii larger than the grid stay in range.
        while (i < 0 || i >= H) {
            if (i < 0) i = -i - 1;
            if (i >= H) i = 2 * H - 1 - i;
        }
        return i;
    };

    // Horizontal pass.
    for (int row = 0; row < H; ++row) {
        const double* src = in.data() + static_cast<std::size_t>(row) * H;
        double* dst = tmp.data() + static_cast<std::size_t>(row) * H;
        for (int col = 0; col < H; ++col) {
            double acc = 0.0;
            for (int t = -r; t <= r; ++t)
                acc += kernel[t + r] * src[reflect(col + t)];
            dst[col] = acc;
        }
    }
    // Vertical pass.
    for (int col = 0; col < H; ++col) {
        for (int row = 0; row < H; ++row) {
            double acc = 0.0;
            for (int t = -r; t <= r; ++t)
                acc += kernel[t + r] * tmp[static_cast<std::size_t>(reflect(row + t)) * H + col];
            out[static_cast<std::size_t>(row) * H + col] = acc;
        }
    }
}

std::vector<double> gaussian_kernel(double sigma) {
    const int r = std::max(1, static_cast<int>(std::ceil(4.0 * sigma)));
    std::vector<double> k(static_cast<std::size_t>(2 * r + 1));
    double total = 0.0;
    for (int t = -r; t <= r; ++t) {
        k[t + r] = std::exp(-0.5 * t * t / (sigma * sigma));
        total += k[t + r];
    }
    for (double& v : k) v /= total;
    return k;
}

void smooth_all(const Eigen::MatrixXd& noise, Eigen::MatrixXd& out, int H,
                double sigma) {
    const auto kernel = gaussian_kernel(sigma);
    Eigen::VectorXd row_in(noise.cols()), row_out(noise.cols());
    for (Eigen::Index i = 0; i < noise.rows(); ++i) {
        row_in = noise.row(i);
        smooth_field(row_in, row_out, H, kernel);
        out.row(i) = row_out;
    }
}

} // namespace

double mean_adjacent_correlation(const Eigen::MatrixXd& X, int H) {
    if (X.cols() != static_cast<Eigen::Index>(H) * H)
        throw ContractViolation("design width does not match H^2");

    Eigen::RowVectorXd mean = X.colwise().mean();
    Eigen::MatrixXd centered = X.rowwise() - mean;
    Eigen::RowVectorXd norm = centered.colwise().norm();

    auto corr = [&](int a, int b) {
        const double denom = norm[a] * norm[b];
        return denom > 0.0 ? centered.col(a).dot(centered.col(b)) / denom : 0.0;
    };

    double acc = 0.0;
    long count = 0;
    for (int row = 0; row < H; ++row) {
        for (int col = 0; col < H; ++col) {
            const int j = row * H + col;
            if (col + 1 < H) { acc += corr(j, j + 1); ++count; }
            if (row + 1 < H) { acc += corr(j, j + H); ++count; }
        }
    }
    return acc / static_cast<double>(count);
}

DesignResult make_design(int n, int H, double rho, std::uint64_t seed) {
    if (n < 2) throw ConfigError("sample count n must be at least 2");
    if (H < 2) throw ConfigError("grid edge length H must be at least 2");
    if (rho <= 0.0 || rho >= 1.0) throw ConfigError("rho must lie in (0, 1)");

    const Eigen::Index p = static_cast<Eigen::Index>(H) * H;
    Eigen::MatrixXd noise(n, p);
    Rng rng(seed);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < p; ++j) noise(i, j) = rng.normal();

    // Bisection on the kernel width: the mean adjacent correlation of the
    // smoothed field increases with sigma.
    double lo = 0.1, hi = 10.0;
    Eigen::MatrixXd smoothed(n, p);
    smooth_all(noise, smoothed, H, lo);
    const double corr_lo = mean_adjacent_correlation(smoothed, H);
    smooth_all(noise, smoothed, H, hi);
    const double corr_hi = mean_adjacent_correlation(smoothed, H);
    if (corr_lo > rho || corr_hi < rho)
        throw CalibrationError(
            "target correlation " + std::to_string(rho) +
            " is not bracketed by kernel widths [0.1, 10] (achieved " +
            std::to_string(corr_lo) + " .. " + std::to_string(corr_hi) + ")");

    double sigma = hi, achieved = corr_hi;
    while (hi - lo > 1e-3) {
        sigma = 0.5 * (lo + hi);
        smooth_all(noise, smoothed, H, sigma);
        achieved = mean_adjacent_correlation(smoothed, H);
        if (std::abs(achieved - rho) <= 0.002) break;
        (achieved < rho ? lo : hi) = sigma;
    }
    if (std::abs(achieved - rho) > 0.01)
        throw CalibrationError("bisection stalled at adjacent correlation " +
                               std::to_string(achieved) + " for target " +
                               std::to_string(rho));

    // Column standardization: zero mean, unit sample variance.
    Eigen::RowVectorXd mean = smoothed.colwise().mean();
    smoothed.rowwise() -= mean;
    for (Eigen::Index j = 0; j < p; ++j) {
        const double sd = std::sqrt(smoothed.col(j).squaredNorm() / (n - 1));
        if (sd > 0.0) smoothed.col(j) /= sd;
    }

    DesignResult res;
    res.X = std::move(smoothed);
    res.achieved_rho = achieved;
    res.sigma_smooth = sigma;
    return res;
}

Dataset make_target(Eigen::MatrixXd X, const WeightMap& w, double sigma_eps,
                    std::uint64_t seed, double achieved_rho, double sigma_smooth) {
    if (X.cols() != w.size())
        throw ContractViolation("design width does not match the weight map");
    if (sigma_eps < 0.0) throw ConfigError("sigma_eps must be nonnegative");

    const Eigen::Index n = X.rows();
    Eigen::VectorXd eps(n);
    Rng rng(seed);
    for (Eigen::Index i = 0; i < n; ++i) eps[i] = sigma_eps * rng.normal();

    Eigen::VectorXd signal = X * w.beta;
    Eigen::VectorXd y = signal + eps;
    const double signal_norm = signal.norm();
    const double eps_norm = eps.norm();

    Dataset ds{std::move(X), std::move(y), w, std::move(eps), 0.0,
               achieved_rho, sigma_smooth};
    ds.snr = eps_norm > 0.0 ? signal_norm / eps_norm
                            : std::numeric_limits<double>::infinity();
    return ds;
}

Dataset generate_scenario(const ScenarioConfig& config) {
    config.validate();
    WeightMap w = make_weight_map(config.H, config.h, config.amplitude,
                                  config.signed_weights);
    DesignResult design =
        make_design(config.n, config.H, config.rho, derive_seed(config.seed, 1));
    return make_target(std::move(design.X), w, config.sigma_eps,
                       derive_seed(config.seed, 2), design.achieved_rho,
                       design.sigma_smooth);
}

// ---------------------------------------------------------------------------
// Dataset export / import
// ---------------------------------------------------------------------------

namespace {

void write_csv_column(const std::string& path, const std::string& header,
                      const Eigen::VectorXd& v) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << header << "\n";
    char buf[40];
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", v[i]);
        out << buf << "\n";
    }
}

Eigen::VectorXd read_csv_column(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty CSV: " + path);
    std::vector<double> vals;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        vals.push_back(std::stod(line));
    }
    return Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

} // namespace

void export_dataset(const Dataset& ds, const ScenarioConfig& config,
                    const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);

    {
        std::ofstream bin(fs::path(dir) / "X.bin", std::ios::binary);
        if (!bin) throw std::runtime_error("cannot open X.bin for writing");
        // Row-major little-endian float64.
        for (Eigen::Index i = 0; i < ds.X.rows(); ++i)
            for (Eigen::Index j = 0; j < ds.X.cols(); ++j) {
                const double v = ds.X(i, j);
                bin.write(reinterpret_cast<const char*>(&v), sizeof(v));
            }
    }

    nlohmann::json sidecar{
        {"rows", ds.X.rows()},
        {"cols", ds.X.cols()},
        {"dtype", "float64-le"},
        {"layout", "row-major"},
        {"seed", config.seed},
        {"snr", std::isfinite(ds.snr) ? nlohmann::json(ds.snr) : nlohmann::json("inf")},
        {"achieved_rho", ds.achieved_rho},
        {"sigma_smooth", ds.sigma_smooth},
        {"config",
         {{"H", config.H},
          {"n", config.n},
          {"h", config.h},
          {"rho", config.rho},
          {"sigma_eps", config.sigma_eps},
          {"amplitude", config.amplitude},
          {"signed_weights", config.signed_weights}}}};
    std::ofstream meta(fs::path(dir) / "X.json");
    meta << sidecar.dump(2) << "\n";

    write_csv_column((fs::path(dir) / "y.csv").string(), "y", ds.y);
    write_csv_column((fs::path(dir) / "beta.csv").string(), "beta", ds.weight_map.beta);
}

Dataset load_dataset(const std::string& dir) {
    namespace fs = std::filesystem;
    std::ifstream meta(fs::path(dir) / "X.json");
    if (!meta) throw std::runtime_error("cannot open " + dir + "/X.json");
    nlohmann::json sidecar;
    meta >> sidecar;
    const Eigen::Index rows = sidecar.at("rows").get<Eigen::Index>();
    const Eigen::Index cols = sidecar.at("cols").get<Eigen::Index>();

    Eigen::MatrixXd X(rows, cols);
    std::ifstream bin(fs::path(dir) / "X.bin", std::ios::binary);
    if (!bin) throw std::runtime_error("cannot open " + dir + "/X.bin");
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) {
            double v;
            bin.read(reinterpret_cast<char*>(&v), sizeof(v));
            if (!bin) throw std::runtime_error("X.bin truncated");
            X(i, j) = v;
        }

    Eigen::VectorXd y = read_csv_column((fs::path(dir) / "y.csv").string());
    Eigen::VectorXd beta = read_csv_column((fs::path(dir) / "beta.csv").string());
    if (y.size() != rows || beta.size() != cols)
        throw std::runtime_error("dataset components in " + dir + " do not conform");

    const int H = static_cast<int>(std::lround(std::sqrt(static_cast<double>(cols))));
    if (static_cast<Eigen::Index>(H) * H != cols)
        throw std::runtime_error("dataset is not a square grid");

    WeightMap w(std::move(beta), SpatialDomain::grid({H, H}));
    Eigen::VectorXd eps = y - X * w.beta;
    const double signal_norm = (X * w.beta).norm();
    const double eps_norm = eps.norm();
    Dataset ds{std::move(X), std::move(y), std::move(w), std::move(eps), 0.0,
               sidecar.value("achieved_rho", 0.0), sidecar.value("sigma_smooth", 0.0)};
    ds.snr = eps_norm > 0.0 ? signal_norm / eps_norm
                            : std::numeric_limits<double>::infinity();
    return ds;
}

} // namespace cludl
