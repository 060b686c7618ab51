#pragma once

#include "oinfo/diffusion.hpp"
#include "oinfo/score_source.hpp"
#include "oinfo/score_task.hpp"
#include "oinfo/systems.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <span>
#include <vector>

namespace oinfo {

struct EstimateConfig {
    std::size_t mc_steps = 10;
    std::size_t n_seeds = 5;
    std::uint64_t seed = 0;
    TimeSampling time_sampling = TimeSampling::Importance;
    std::size_t chunk_size = 1024;  // samples per score batch; part of the RNG layout

    void validate() const;
};

nlohmann::json to_json(const EstimateConfig& c);

struct MeasureEstimate {
    double value = 0.0;      // nats
    double std_error = 0.0;  // across seeds; within-run when only one seed is used
    std::size_t n_samples = 0;
    std::size_t mc_steps = 0;
    std::size_t n_seeds = 0;
    TimeSampling time_sampling = TimeSampling::Importance;
    std::vector<double> per_seed;
};

nlohmann::json to_json(const MeasureEstimate& m);

struct OInfoEstimate {
    MeasureEstimate tc;
    MeasureEstimate dtc;
    MeasureEstimate s_info;
    MeasureEstimate o_info;  // value is exactly tc.value - dtc.value
};

nlohmann::json to_json(const OInfoEstimate& e);

enum class GradientForm {
    MutualInfo,  // (2 - N) I(Xi; X\i) + sum_j I(Xi; X\{i,j})
    Subsystem,   // Omega(X) - Omega(X\i) = I(Xi; X\i) - sum_j I(Xj; Xi | X\{i,j})
};

const char* to_string(GradientForm form);
GradientForm parse_gradient_form(const std::string& text);

// Every estimator accepts either one dataset, reused by all seeds (only the
// Monte-Carlo draws change), or one dataset per seed.
//
// Within a seed the samples are processed in chunks; chunk c and MC step k
// draw from their own substream, so the first k steps of a run with more
// steps reproduce a run with k steps exactly.

OInfoEstimate estimate_oinfo(const ScoreSource& source, const Dataset& data, const EstimateConfig& config);
OInfoEstimate estimate_oinfo(const ScoreSource& source, std::span<const Dataset> per_seed,
                             const EstimateConfig& config);

MeasureEstimate estimate_tc(const ScoreSource& source, const Dataset& data, const EstimateConfig& config);
MeasureEstimate estimate_dtc(const ScoreSource& source, const Dataset& data, const EstimateConfig& config);
MeasureEstimate estimate_s(const ScoreSource& source, const Dataset& data, const EstimateConfig& config);

/// I(Xi; X^S) from the conditional and marginal scores of block i. Zero when S is empty.
MeasureEstimate estimate_mi(const ScoreSource& source, std::size_t target, std::vector<std::size_t> given,
                            const Dataset& data, const EstimateConfig& config);
MeasureEstimate estimate_mi(const ScoreSource& source, std::size_t target, std::vector<std::size_t> given,
                            std::span<const Dataset> per_seed, const EstimateConfig& config);

/// Integral over [t_min, T] of (g^2/2) E||s_p - s_q||^2 on the shared target
/// block, with data drawn from p. Equals KL(p || q) up to the divergence left
/// at time T.
MeasureEstimate estimate_divergence(const ScoreSource& p, const ScoreTask& task_p, const ScoreSource& q,
                                    const ScoreTask& task_q, const Dataset& data, const EstimateConfig& config);
MeasureEstimate estimate_divergence(const ScoreSource& p, const ScoreTask& task_p, const ScoreSource& q,
                                    const ScoreTask& task_q, std::span<const Dataset> per_seed,
                                    const EstimateConfig& config);

/// Per-variable O-information gradient. Requires N >= 3 and the subset
/// conditional tasks.
MeasureEstimate estimate_gradient(const ScoreSource& source, std::size_t i, const Dataset& data,
                                  const EstimateConfig& config, GradientForm form = GradientForm::MutualInfo);
std::vector<MeasureEstimate> estimate_gradients(const ScoreSource& source, std::span<const Dataset> per_seed,
                                                const EstimateConfig& config,
                                                GradientForm form = GradientForm::MutualInfo);

}  // namespace oinfo
