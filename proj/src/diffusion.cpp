#include "oinfo/diffusion.hpp"

#include "oinfo/errors.hpp"

#include <algorithm>
#include <cmath>

namespace oinfo {

void DiffusionSchedule::validate() const {
    if (!(t_min > 0.0 && t_min < t_max)) throw ConfigError("schedule requires 0 < t_min < t_max");
    if (!(beta_min > 0.0 && beta_max >= beta_min)) throw ConfigError("schedule requires beta_max >= beta_min > 0");
}

double DiffusionSchedule::integrated_beta(double t) const {
    return beta_min * t + 0.5 * t * t * (beta_max - beta_min);
}

nlohmann::json to_json(const DiffusionSchedule& s) {
    return {{"beta_min", s.beta_min}, {"beta_max", s.beta_max}, {"t_max", s.t_max}, {"t_min", s.t_min}};
}

DiffusionSchedule schedule_from_json(const nlohmann::json& j) {
    DiffusionSchedule s;
    s.beta_min = j.at("beta_min").get<double>();
    s.beta_max = j.at("beta_max").get<double>();
    s.t_max = j.at("t_max").get<double>();
    s.t_min = j.at("t_min").get<double>();
    s.validate();
    return s;
}

KernelCoeffs coeffs(const DiffusionSchedule& schedule, double t) {
    if (!(t >= schedule.t_min && t <= schedule.t_max)) {
        throw ConfigError("diffusion time " + std::to_string(t) + " outside [" + std::to_string(schedule.t_min) +
                          ", " + std::to_string(schedule.t_max) + "]");
    }
    const double b = schedule.integrated_beta(t);
    return {std::exp(-0.5 * b), std::sqrt(-std::expm1(-b)), schedule.beta(t)};
}

Perturbed perturb(const Matrix& x, const Vector& t, const Matrix& eps, const DiffusionSchedule& schedule) {
    if (x.rows() != eps.rows() || x.cols() != eps.cols() || x.cols() != t.size())
        throw ConfigError("perturb: shape mismatch between data, noise and times");
    Perturbed out{Matrix(x.rows(), x.cols()), Matrix(x.rows(), x.cols())};
    for (Eigen::Index b = 0; b < x.cols(); ++b) {
        const auto k = coeffs(schedule, t(b));
        out.x_t.col(b) = k.alpha * x.col(b) + k.sigma * eps.col(b);
        out.dsm_target.col(b) = -eps.col(b) / k.sigma;
    }
    return out;
}

const char* to_string(TimeSampling mode) {
    return mode == TimeSampling::Uniform ? "uniform" : "importance";
}

TimeSampling parse_time_sampling(const std::string& text) {
    if (text == "uniform") return TimeSampling::Uniform;
    if (text == "importance") return TimeSampling::Importance;
    throw ConfigError("unknown time sampling mode '" + text + "' (expected uniform|importance)");
}

TimeSampler::TimeSampler(const DiffusionSchedule& schedule, TimeSampling mode) : schedule_(schedule), mode_(mode) {
    schedule_.validate();
    if (mode_ == TimeSampling::Uniform) return;

    // Antiderivative of beta / sigma^2 is B(t) + log sigma^2(t).
    auto antiderivative = [&](double t) {
        const double b = schedule_.integrated_beta(t);
        return b + std::log(-std::expm1(-b));
    };
    const double lo = std::log(schedule_.t_min);
    const double hi = std::log(schedule_.t_max);
    grid_.resize(kTablePoints);
    for (std::size_t i = 0; i < kTablePoints; ++i)
        grid_[i] = std::exp(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(kTablePoints - 1));
    grid_.front() = schedule_.t_min;
    grid_.back() = schedule_.t_max;

    cdf_.resize(kTablePoints);
    const double f0 = antiderivative(grid_.front());
    for (std::size_t i = 0; i < kTablePoints; ++i) cdf_[i] = antiderivative(grid_[i]) - f0;
    mass_ = cdf_.back();
    for (auto& c : cdf_) c /= mass_;
    cdf_.back() = 1.0;
}

TimeDraw TimeSampler::sample(RngStream& rng) const {
    const double u = rng.uniform();
    const double span = schedule_.t_max - schedule_.t_min;
    if (mode_ == TimeSampling::Uniform) return {schedule_.t_min + u * span, span};

    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    std::size_t k = static_cast<std::size_t>(std::distance(cdf_.begin(), it));
    k = std::clamp<std::size_t>(k, 1, kTablePoints - 1) - 1;
    const double dc = cdf_[k + 1] - cdf_[k];
    const double dt = grid_[k + 1] - grid_[k];
    const double frac = dc > 0.0 ? (u - cdf_[k]) / dc : 0.0;
    const double t = std::clamp(grid_[k] + frac * dt, schedule_.t_min, schedule_.t_max);
    return {t, dt / dc};
}

double TimeSampler::density(double t) const {
    if (t < schedule_.t_min || t > schedule_.t_max) return 0.0;
    if (mode_ == TimeSampling::Uniform) return 1.0 / (schedule_.t_max - schedule_.t_min);
    auto it = std::upper_bound(grid_.begin(), grid_.end(), t);
    std::size_t k = static_cast<std::size_t>(std::distance(grid_.begin(), it));
    k = std::clamp<std::size_t>(k, 1, kTablePoints - 1) - 1;
    return (cdf_[k + 1] - cdf_[k]) / (grid_[k + 1] - grid_[k]);
}

}  // namespace oinfo
