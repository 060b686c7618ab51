#pragma once

#include "oinfo/diffusion.hpp"
#include "oinfo/params.hpp"
#include "oinfo/score_net.hpp"
#include "oinfo/score_task.hpp"
#include "oinfo/systems.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace oinfo {

enum class TaskMode {
    Standard,       // joint + N full conditionals + N marginals
    WithGradients,  // adds conditionals on all-but-{i, j} for every ordered pair
};

const char* to_string(TaskMode mode);
TaskMode parse_task_mode(const std::string& text);

struct TrainConfig {
    std::size_t batch_size = 256;
    double learning_rate = 1e-2;
    std::size_t n_iterations = 20000;
    double ema_decay = 0.999;
    TaskMode task_mode = TaskMode::Standard;
    TimeSampling time_sampling = TimeSampling::Importance;
    std::uint64_t seed = 0;

    void validate() const;
    /// Stable 64-bit FNV-1a hash of the canonical JSON form, as 16 hex digits.
    std::string fingerprint() const;
};

nlohmann::json to_json(const TrainConfig& c);
TrainConfig train_config_from_json(const nlohmann::json& j);

/// Tasks the model must learn: 2N + 1 in standard mode, plus N (N - 1)
/// subset conditionals with gradients.
std::vector<ScoreTask> required_tasks(std::size_t n_vars, TaskMode mode);

struct TrainedModel {
    ScoreNet<float> net;     // raw parameters after the last step
    ParamStore<float> ema;   // EMA shadow, used for inference
    DiffusionSchedule schedule;
    TrainConfig train_config;
    std::optional<Standardization> standardization;  // applied to data before training
    bool use_ema = true;

    const VariablePartition& partition() const { return net.partition(); }
    std::vector<ScoreTask> tasks() const { return required_tasks(partition().n_vars(), train_config.task_mode); }
    /// Score source over the inference parameters (EMA unless use_ema is false).
    NetworkScoreSource score_source() const;
};

/// One task's worth of denoising inputs for a batch of clean samples.
struct TrainingBatch {
    ScoreTask task;
    MatrixT<float> input;  // D x B
    MatrixT<float> tau;    // N x B
    MatrixT<float> eps;    // D x B true noise
    Eigen::Index row_begin = 0;
    Eigen::Index row_count = 0;
    std::vector<double> t;
};

/// Samples per-column times, perturbs the task's target block, and assembles
/// the network input (clean / perturbed / pure-noise positions by role).
TrainingBatch make_training_batch(const Matrix& clean, const ScoreTask& task, const VariablePartition& partition,
                                  const DiffusionSchedule& schedule, const TimeSampler& sampler, RngStream& rng);

/// Mean squared error over rows [row_begin, row_begin + row_count).
double masked_mse(const MatrixT<float>& prediction, const MatrixT<float>& target, Eigen::Index row_begin,
                  Eigen::Index row_count);

/// Noise-prediction loss and gradient on `batch`, followed by one Adam + EMA update.
double training_step(ScoreNet<float>& net, AdamState<float>& optimizer, const AdamConfig& adam,
                     const TrainingBatch& batch);

struct TrainLogRow {
    std::size_t iteration;
    std::string task;
    double loss;
    double wall_time;  // seconds since the start of training
};

/// Randomized multi-task training. Tasks are visited in shuffled round-robin
/// order (each consecutive block of |tasks| steps covers every task once);
/// every step draws its batch, times and noise from its own RNG substream.
class Trainer {
public:
    Trainer(const Dataset& train_data, NetConfig net_config, TrainConfig train_config,
            DiffusionSchedule schedule = {});

    /// Runs one step and returns its loss. Non-finite values raise
    /// NumericError naming the task, time range and iteration.
    double step();
    std::size_t iteration() const { return iteration_; }
    const std::vector<ScoreTask>& tasks() const { return tasks_; }
    const ScoreTask& task_for_iteration(std::size_t iteration);

    /// Runs the remaining iterations. `log` receives one row per step.
    TrainedModel fit(std::vector<TrainLogRow>* log = nullptr);

    TrainedModel snapshot() const;

private:
    const Dataset& data_;
    TrainConfig config_;
    DiffusionSchedule schedule_;
    AdamConfig adam_;
    ScoreNet<float> net_;
    AdamState<float> optimizer_;
    TimeSampler sampler_;
    std::vector<ScoreTask> tasks_;
    std::vector<std::size_t> epoch_order_;
    std::size_t epoch_ = static_cast<std::size_t>(-1);
    std::size_t iteration_ = 0;
    RngStream master_;
};

/// Convenience wrapper: build a Trainer and run all iterations.
TrainedModel fit(const Dataset& train_data, const NetConfig& net_config, const TrainConfig& train_config,
                 const DiffusionSchedule& schedule = {}, std::vector<TrainLogRow>* log = nullptr);

void write_train_log_csv(const std::string& path, const std::vector<TrainLogRow>& rows);

/// Checkpoint: magic line, 8-byte little-endian header length, JSON header
/// (net config, schedule, partition, training config + hash, EMA flag,
/// standardization, array table), then little-endian float32 arrays.
void save_checkpoint(const std::string& path, const TrainedModel& model);
TrainedModel load_checkpoint(const std::string& path);

}  // namespace oinfo
