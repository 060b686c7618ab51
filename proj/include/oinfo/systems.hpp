#pragma once

#include "oinfo/linalg.hpp"
#include "oinfo/partition.hpp"
#include "oinfo/rng.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace oinfo {

enum class SystemKind { Redundant, Synergistic, Mixed, Independent };
enum class TransformKind { None, HalfCube, Cdf };

/// A synthetic Gaussian benchmark. Mixed systems are block-diagonal
/// assemblies of independent sub-systems listed in `blocks`.
struct SystemSpec {
    SystemKind kind = SystemKind::Redundant;
    std::size_t n_vars = 3;
    std::size_t dim = 1;
    double sigma = 1.0;
    TransformKind transform = TransformKind::None;
    std::vector<SystemSpec> blocks;

    static SystemSpec redundant(std::size_t n_vars, std::size_t dim, double sigma);
    static SystemSpec synergistic(std::size_t n_vars, std::size_t dim, double sigma);
    static SystemSpec mixed(std::vector<SystemSpec> blocks);
    static SystemSpec independent(std::size_t n_vars, std::size_t dim);

    /// Total number of variables (summed over blocks for mixed systems).
    std::size_t total_vars() const;
};

/// Compact text form used on the command line, e.g.
///   redundant:n=3,dim=1,sigma=1
///   synergistic:n=4,sigma=0.5,transform=cdf
///   mixed(redundant:n=3,sigma=1;synergistic:n=3,sigma=0.5)
///   independent:n=6,dim=2        (identity covariance)
SystemSpec parse_system_spec(const std::string& text);
std::string to_string(const SystemSpec& spec);
nlohmann::json to_json(const SystemSpec& spec);

std::string to_string(TransformKind kind);
TransformKind parse_transform(const std::string& text);

struct CovarianceMatrix {
    Matrix cov;
    VariablePartition partition;
};

struct Standardization {
    Vector mean;
    Vector scale;
};

struct Dataset {
    Matrix samples;  // M x D, one sample per row
    VariablePartition partition;
    std::optional<Standardization> standardization;

    std::size_t n_samples() const { return static_cast<std::size_t>(samples.rows()); }
};

struct SynergyCouplings {
    double first_second;   // X1 <-> X2
    double second_others;  // X2 <-> Xi, i >= 3
};

/// Correlation between X1 and X2 (1/sqrt(N-1)) and between X2 and each later
/// variable (rho/sqrt(N-1), rho = 1/sqrt(1+sigma^2)).
SynergyCouplings synergistic_couplings(std::size_t n_vars, double sigma);

CovarianceMatrix build_redundant_cov(std::size_t n_vars, std::size_t dim, double sigma);
CovarianceMatrix build_synergistic_cov(std::size_t n_vars, std::size_t dim, double sigma);
CovarianceMatrix build_mixed_cov(const std::vector<SystemSpec>& blocks);
CovarianceMatrix build_cov(const SystemSpec& spec);

/// Throws NumericError reporting the smallest eigenvalue when `cov` is not
/// symmetric positive definite.
void verify_covariance(const Matrix& cov);

/// x = L z with z standard normal; deterministic in the stream state.
Dataset sample(const CovarianceMatrix& cov, std::size_t n_samples, RngStream& rng);

double half_cube(double x);
double normal_cdf(double x);

/// Elementwise strictly monotone map; leaves the information measures unchanged.
Dataset apply_transform(Dataset data, TransformKind kind);

/// Log-spaced grid of `points` values between lo and hi (inclusive).
std::vector<double> log_grid(double lo, double hi, std::size_t points);

}  // namespace oinfo
