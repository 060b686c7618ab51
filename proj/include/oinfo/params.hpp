#pragma once

#include "oinfo/errors.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

namespace oinfo {

template <typename Scalar>
using MatrixT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
struct ParamArray {
    std::string name;
    MatrixT<Scalar> value;
    MatrixT<Scalar> grad;
};

/// Named trainable arrays, each with a gradient slot of the same shape.
template <typename Scalar>
class ParamStore {
public:
    std::size_t add(std::string name, Eigen::Index rows, Eigen::Index cols) {
        if (find(name) != npos) throw ConfigError("duplicate parameter name: " + name);
        arrays_.push_back({std::move(name), MatrixT<Scalar>::Zero(rows, cols), MatrixT<Scalar>::Zero(rows, cols)});
        return arrays_.size() - 1;
    }

    std::size_t size() const { return arrays_.size(); }
    ParamArray<Scalar>& operator[](std::size_t i) { return arrays_[i]; }
    const ParamArray<Scalar>& operator[](std::size_t i) const { return arrays_[i]; }

    auto begin() { return arrays_.begin(); }
    auto end() { return arrays_.end(); }
    auto begin() const { return arrays_.begin(); }
    auto end() const { return arrays_.end(); }

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    std::size_t find(const std::string& name) const {
        for (std::size_t i = 0; i < arrays_.size(); ++i)
            if (arrays_[i].name == name) return i;
        return npos;
    }

    std::size_t total_count() const {
        std::size_t n = 0;
        for (const auto& a : arrays_) n += static_cast<std::size_t>(a.value.size());
        return n;
    }

    void zero_grad() {
        for (auto& a : arrays_) a.grad.setZero();
    }

    /// Same names and shapes, values copied, gradients zeroed.
    ParamStore snapshot() const {
        ParamStore out = *this;
        out.zero_grad();
        return out;
    }

    template <typename Other>
    ParamStore<Other> cast() const {
        ParamStore<Other> out;
        for (const auto& a : arrays_) {
            const auto i = out.add(a.name, a.value.rows(), a.value.cols());
            out[i].value = a.value.template cast<Other>();
        }
        return out;
    }

private:
    std::vector<ParamArray<Scalar>> arrays_;
};

struct AdamConfig {
    double learning_rate = 1e-2;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double ema_decay = 0.999;
};

template <typename Scalar>
struct AdamState {
    std::vector<MatrixT<Scalar>> first_moment;
    std::vector<MatrixT<Scalar>> second_moment;
    ParamStore<Scalar> ema;
    long long step = 0;

    explicit AdamState(const ParamStore<Scalar>& params) : ema(params.snapshot()) {
        for (const auto& a : params) {
            first_moment.push_back(MatrixT<Scalar>::Zero(a.value.rows(), a.value.cols()));
            second_moment.push_back(MatrixT<Scalar>::Zero(a.value.rows(), a.value.cols()));
        }
    }
};

/// One Adam update from the gradients stored in `params`, followed by the EMA
/// shadow update ema <- decay * ema + (1 - decay) * params.
template <typename Scalar>
void grad_step(ParamStore<Scalar>& params, AdamState<Scalar>& state, const AdamConfig& cfg) {
    if (!(cfg.learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
    if (state.first_moment.size() != params.size()) throw ConfigError("optimizer state does not match parameters");
    for (const auto& a : params) {
        if (!a.grad.allFinite()) throw NumericError("non-finite gradient in parameter '" + a.name + "'");
    }
    ++state.step;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
    const auto b1 = static_cast<Scalar>(cfg.beta1);
    const auto b2 = static_cast<Scalar>(cfg.beta2);
    const auto step_size = static_cast<Scalar>(cfg.learning_rate / bc1);
    const auto inv_sqrt_bc2 = static_cast<Scalar>(1.0 / std::sqrt(bc2));
    const auto eps = static_cast<Scalar>(cfg.epsilon);
    const auto decay = static_cast<Scalar>(cfg.ema_decay);

    for (std::size_t i = 0; i < params.size(); ++i) {
        auto& p = params[i];
        auto& m = state.first_moment[i];
        auto& v = state.second_moment[i];
        m = b1 * m + (Scalar(1) - b1) * p.grad;
        v = b2 * v + (Scalar(1) - b2) * p.grad.cwiseAbs2();
        p.value.array() -= step_size * m.array() / (v.array().sqrt() * inv_sqrt_bc2 + eps);
        if (!p.value.allFinite()) throw NumericError("non-finite value in parameter '" + p.name + "' after update");
        auto& e = state.ema[i].value;
        e = decay * e + (Scalar(1) - decay) * p.value;
    }
}

}  // namespace oinfo
