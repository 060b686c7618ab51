#pragma once

#include "oinfo/diffusion.hpp"
#include "oinfo/linalg.hpp"
#include "oinfo/partition.hpp"
#include "oinfo/score_task.hpp"

#include <string>

namespace oinfo {

/// Anything that can evaluate time-t scores for the tasks of a partitioned
/// system. Estimators are written once against this interface and run both
/// on trained denoisers and on exact Gaussian scores.
class ScoreSource {
public:
    virtual ~ScoreSource() = default;

    virtual const VariablePartition& partition() const = 0;
    virtual const DiffusionSchedule& schedule() const = 0;
    virtual bool supports(const ScoreTask& task) const = 0;

    /// `input` is the assembled D x B batch (see assemble_input) and `t` the
    /// per-column times. Returns the scores of the task's target coordinates,
    /// |target| x B.
    virtual Matrix score(const ScoreTask& task, const Matrix& input, const Vector& t) const = 0;

    /// "exact" or "network"; recorded in reports.
    virtual std::string kind() const = 0;
};

}  // namespace oinfo
