#pragma once

#include "oinfo/diffusion.hpp"
#include "oinfo/linalg.hpp"
#include "oinfo/partition.hpp"
#include "oinfo/rng.hpp"

#include <string>
#include <vector>

namespace oinfo {

/// Which score the shared denoiser is asked for.
///   Joint                 all variables noised at t
///   Conditional{i, S}     variable i noised at t, variables in S clean,
///                         every other variable dropped (replaced by pure noise)
///   Marginal{i}           variable i noised at t, everything else dropped
/// A conditional with an empty conditioning set is the marginal, and the
/// factory returns it as such so each score has exactly one encoding.
struct ScoreTask {
    enum class Kind { Joint, Conditional, Marginal };

    Kind kind = Kind::Joint;
    std::size_t target = 0;
    std::vector<std::size_t> given;  // sorted, unique

    static ScoreTask joint();
    static ScoreTask conditional(std::size_t target, std::vector<std::size_t> given);
    static ScoreTask marginal(std::size_t target);
    /// Conditional on every other variable.
    static ScoreTask full_conditional(std::size_t target, std::size_t n_vars);

    /// Throws ConfigError if indices fall outside [0, n_vars) or target is in `given`.
    void validate(std::size_t n_vars) const;

    std::string name() const;
    bool operator==(const ScoreTask&) const = default;
};

enum class VarRole { Clean, Perturbed, Dropped };

std::vector<VarRole> roles(const ScoreTask& task, std::size_t n_vars);

using TauVector = std::vector<double>;

/// Per-variable noise times: perturbed -> t, clean -> 0, dropped -> T.
TauVector encode_task(const ScoreTask& task, double t, std::size_t n_vars, const DiffusionSchedule& schedule);

/// Flat coordinates whose score the task produces (all of them for Joint).
IndexList target_indices(const ScoreTask& task, const VariablePartition& partition);

/// Network input for a batch (D x B): clean values where the role is Clean,
/// the perturbed values where Perturbed, and fresh N(0, 1) draws where Dropped.
Matrix assemble_input(const VariablePartition& partition, const ScoreTask& task, const Matrix& clean,
                      const Matrix& perturbed, RngStream& rng);

}  // namespace oinfo
