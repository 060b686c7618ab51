#pragma once

#include "oinfo/diffusion.hpp"
#include "oinfo/linalg.hpp"
#include "oinfo/partition.hpp"
#include "oinfo/score_source.hpp"
#include "oinfo/score_task.hpp"

#include <nlohmann/json.hpp>

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace oinfo {

/// Closed-form information measures of a Gaussian system, in nats.
struct MeasureSet {
    double tc = 0.0;      // total correlation
    double dtc = 0.0;     // dual total correlation
    double s_info = 0.0;  // S-information, tc + dtc
    double o_info = 0.0;  // O-information, tc - dtc
};

nlohmann::json to_json(const MeasureSet& m);

/// (D/2)(1 + log 2 pi) + 1/2 log det(cov).
double gaussian_entropy(const Matrix& cov);

/// I(A; B | C) for coordinate sets of a Gaussian vector.
double gaussian_mutual_information(const Matrix& cov, const IndexList& a, const IndexList& b,
                                   const IndexList& c = {});

MeasureSet measures(const Matrix& cov, const VariablePartition& partition);

/// Omega(X) - Omega(X without variable i). Requires at least 3 variables.
double gradient(const Matrix& cov, const VariablePartition& partition, std::size_t i);

/// All per-variable gradients; marginal block entropies are computed once.
std::vector<double> gradients(const Matrix& cov, const VariablePartition& partition);

/// Exact time-t scores of a Gaussian system N(mean, cov) noised by the VP kernel.
/// For every task the target block given its clean conditioning set is
/// Gaussian N(mu_c, S_c), so the noised law is N(alpha mu_c, alpha^2 S_c + sigma^2 I)
/// and its score is -(alpha^2 S_c + sigma^2 I)^{-1} (x_t - alpha mu_c).
/// Per-task eigendecompositions of S_c are cached.
class GaussianScoreSource : public ScoreSource {
public:
    GaussianScoreSource(Matrix cov, VariablePartition partition, DiffusionSchedule schedule,
                        Vector mean = Vector());

    const VariablePartition& partition() const override { return partition_; }
    const DiffusionSchedule& schedule() const override { return schedule_; }
    bool supports(const ScoreTask& task) const override;
    Matrix score(const ScoreTask& task, const Matrix& input, const Vector& t) const override;
    std::string kind() const override { return "exact"; }

    const Matrix& covariance() const { return cov_; }

private:
    struct TaskModel {
        IndexList target;
        IndexList given;
        Matrix weights;  // |target| x |given|
        Matrix eigvecs;
        Vector eigvals;
    };

    const TaskModel& model_for(const ScoreTask& task) const;

    Matrix cov_;
    VariablePartition partition_;
    DiffusionSchedule schedule_;
    Vector mean_;
    mutable std::mutex mutex_;
    mutable std::map<std::string, std::unique_ptr<TaskModel>> cache_;
};

/// Single-sample convenience wrapper around GaussianScoreSource.
Vector exact_score(const Matrix& cov, const VariablePartition& partition, const ScoreTask& task,
                   const Vector& x_input, double t, const DiffusionSchedule& schedule);

}  // namespace oinfo
