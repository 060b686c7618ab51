#include "oinfo/score_task.hpp"

#include "oinfo/errors.hpp"

#include <algorithm>

namespace oinfo {

ScoreTask ScoreTask::joint() { return {Kind::Joint, 0, {}}; }

ScoreTask ScoreTask::conditional(std::size_t target, std::vector<std::size_t> given) {
    std::sort(given.begin(), given.end());
    given.erase(std::unique(given.begin(), given.end()), given.end());
    if (given.empty()) return marginal(target);
    return {Kind::Conditional, target, std::move(given)};
}

ScoreTask ScoreTask::marginal(std::size_t target) { return {Kind::Marginal, target, {}}; }

ScoreTask ScoreTask::full_conditional(std::size_t target, std::size_t n_vars) {
    std::vector<std::size_t> given;
    for (std::size_t j = 0; j < n_vars; ++j)
        if (j != target) given.push_back(j);
    return conditional(target, std::move(given));
}

void ScoreTask::validate(std::size_t n_vars) const {
    if (kind == Kind::Joint) return;
    if (target >= n_vars) throw ConfigError("task target " + std::to_string(target) + " out of range");
    for (auto g : given) {
        if (g >= n_vars) throw ConfigError("task conditioning index " + std::to_string(g) + " out of range");
        if (g == target) throw ConfigError("task target " + std::to_string(target) + " is also conditioned on");
    }
}

std::string ScoreTask::name() const {
    switch (kind) {
        case Kind::Joint: return "joint";
        case Kind::Marginal: return "marginal(" + std::to_string(target) + ")";
        case Kind::Conditional: {
            std::string s = "conditional(" + std::to_string(target) + "|";
            for (std::size_t k = 0; k < given.size(); ++k) {
                if (k) s += ",";
                s += std::to_string(given[k]);
            }
            return s + ")";
        }
    }
    return "?";
}

std::vector<VarRole> roles(const ScoreTask& task, std::size_t n_vars) {
    task.validate(n_vars);
    if (task.kind == ScoreTask::Kind::Joint) return std::vector<VarRole>(n_vars, VarRole::Perturbed);
    std::vector<VarRole> out(n_vars, VarRole::Dropped);
    for (auto g : task.given) out[g] = VarRole::Clean;
    out[task.target] = VarRole::Perturbed;
    return out;
}

TauVector encode_task(const ScoreTask& task, double t, std::size_t n_vars, const DiffusionSchedule& schedule) {
    if (!(t >= schedule.t_min && t <= schedule.t_max)) throw ConfigError("encode_task: t outside [t_min, T]");
    TauVector tau(n_vars);
    const auto r = roles(task, n_vars);
    for (std::size_t j = 0; j < n_vars; ++j) {
        switch (r[j]) {
            case VarRole::Clean: tau[j] = 0.0; break;
            case VarRole::Perturbed: tau[j] = t; break;
            case VarRole::Dropped: tau[j] = schedule.t_max; break;
        }
    }
    return tau;
}

IndexList target_indices(const ScoreTask& task, const VariablePartition& partition) {
    if (task.kind == ScoreTask::Kind::Joint) {
        IndexList all(partition.total_dim());
        for (std::size_t k = 0; k < all.size(); ++k) all[k] = static_cast<Eigen::Index>(k);
        return all;
    }
    return partition.indices(task.target);
}

Matrix assemble_input(const VariablePartition& partition, const ScoreTask& task, const Matrix& clean,
                      const Matrix& perturbed, RngStream& rng) {
    const auto d = static_cast<Eigen::Index>(partition.total_dim());
    if (clean.rows() != d || perturbed.rows() != d || clean.cols() != perturbed.cols())
        throw ConfigError("assemble_input: inputs do not match the partition");
    const auto r = roles(task, partition.n_vars());
    Matrix out(d, clean.cols());
    for (std::size_t v = 0; v < partition.n_vars(); ++v) {
        const auto off = static_cast<Eigen::Index>(partition.offset(v));
        const auto len = static_cast<Eigen::Index>(partition.dim(v));
        switch (r[v]) {
            case VarRole::Clean: out.middleRows(off, len) = clean.middleRows(off, len); break;
            case VarRole::Perturbed: out.middleRows(off, len) = perturbed.middleRows(off, len); break;
            case VarRole::Dropped: break;
        }
    }
    // Noise fill column by column so the draw order does not depend on the block layout.
    for (Eigen::Index b = 0; b < out.cols(); ++b) {
        for (std::size_t v = 0; v < partition.n_vars(); ++v) {
            if (r[v] != VarRole::Dropped) continue;
            const auto off = static_cast<Eigen::Index>(partition.offset(v));
            for (std::size_t k = 0; k < partition.dim(v); ++k) out(off + static_cast<Eigen::Index>(k), b) = rng.normal();
        }
    }
    return out;
}

}  // namespace oinfo
