#pragma once

#include "oinfo/linalg.hpp"
#include "oinfo/rng.hpp"

#include <nlohmann/json.hpp>

#include <vector>

namespace oinfo {

/// Variance-preserving SDE with linear beta(t) = beta_min + t (beta_max - beta_min).
struct DiffusionSchedule {
    double beta_min = 0.1;
    double beta_max = 20.0;
    double t_max = 1.0;
    double t_min = 1e-5;

    void validate() const;
    /// Integral of beta from 0 to t.
    double integrated_beta(double t) const;
    double beta(double t) const { return beta_min + t * (beta_max - beta_min); }
};

nlohmann::json to_json(const DiffusionSchedule& s);
DiffusionSchedule schedule_from_json(const nlohmann::json& j);

/// Perturbation kernel p_0t(x_t | x) = N(alpha x, sigma^2 I) and squared diffusion g^2.
struct KernelCoeffs {
    double alpha;
    double sigma;
    double g2;
};

/// Throws ConfigError when t lies outside [t_min, t_max].
KernelCoeffs coeffs(const DiffusionSchedule& schedule, double t);

struct Perturbed {
    Matrix x_t;
    Matrix dsm_target;  // -eps / sigma_t, the kernel score
};

/// Column b of `x` is noised at time t(b): x_t = alpha x + sigma eps.
Perturbed perturb(const Matrix& x, const Vector& t, const Matrix& eps, const DiffusionSchedule& schedule);

enum class TimeSampling { Uniform, Importance };

const char* to_string(TimeSampling mode);
TimeSampling parse_time_sampling(const std::string& text);

struct TimeDraw {
    double t;
    double weight;  // 1 / (sampling density at t)
};

/// Draws integration times on [t_min, T]. Importance mode samples from a
/// tabulated proposal proportional to g^2(t) / sigma^2(t): the exact CDF is
/// evaluated on a 1024-point log-spaced grid and inverted with linear
/// interpolation, so the realized density is piecewise constant and the
/// returned weight is exactly its reciprocal.
class TimeSampler {
public:
    static constexpr std::size_t kTablePoints = 1024;

    TimeSampler(const DiffusionSchedule& schedule, TimeSampling mode);

    TimeDraw sample(RngStream& rng) const;
    /// Density of the distribution `sample` actually draws from.
    double density(double t) const;
    TimeSampling mode() const { return mode_; }

private:
    DiffusionSchedule schedule_;
    TimeSampling mode_;
    std::vector<double> grid_;
    std::vector<double> cdf_;  // normalized, cdf_.front() == 0, cdf_.back() == 1
    double mass_ = 0.0;        // unnormalized integral of g^2/sigma^2 over [t_min, T]
};

}  // namespace oinfo
