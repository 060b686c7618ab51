#pragma once

#include "oinfo/diffusion.hpp"
#include "oinfo/params.hpp"
#include "oinfo/partition.hpp"
#include "oinfo/rng.hpp"
#include "oinfo/score_source.hpp"
#include "oinfo/score_task.hpp"

#include <nlohmann/json.hpp>

#include <vector>

namespace oinfo {

struct NetConfig {
    std::size_t width = 128;
    std::size_t n_blocks = 4;
    std::size_t time_embed_dim = 128;

    /// Width/embedding by total dimension: 128 up to D = 50, 192 up to 100,
    /// 256 above. Gradient-mode models are twice as wide.
    static NetConfig for_dimension(std::size_t total_dim, bool gradient_mode = false);
    void validate() const;
};

nlohmann::json to_json(const NetConfig& c);
NetConfig net_config_from_json(const nlohmann::json& j);

/// Noise-prediction network eps_theta(x, tau).
///
///   h   = W_in x + b_in
///   c   = W_t [emb(tau_1/T); ...; emb(tau_N/T)] + b_t    (one projection per variable, summed)
///   for each block:  h += W_2 silu(W_1 silu(h + c) + b_1) + b_2
///   out = W_out silu(h) + b_out
///
/// emb is a sinusoidal embedding of size time_embed_dim. Gradients are
/// propagated by hand through exactly these operations.
template <typename Scalar>
class ScoreNet {
public:
    using Mat = MatrixT<Scalar>;

    ScoreNet(NetConfig config, VariablePartition partition, double t_max);

    /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights and biases; the output
    /// layer starts at zero unless `zero_output` is false.
    void init(RngStream& rng, bool zero_output = true);

    const NetConfig& config() const { return config_; }
    const VariablePartition& partition() const { return partition_; }
    double t_max() const { return t_max_; }

    ParamStore<Scalar>& params() { return params_; }
    const ParamStore<Scalar>& params() const { return params_; }
    void set_params(ParamStore<Scalar> p);

    /// input: D x B, tau: N x B. Returns the D x B noise prediction.
    Mat forward(const Mat& input, const Mat& tau) const;

    /// Mean squared error between the prediction and `target_eps` over rows
    /// [row_begin, row_begin + row_count), averaged over those coordinates and
    /// the batch. Accumulates d(loss)/d(theta) into the parameter gradients
    /// (which are zeroed first) and returns the loss in double precision.
    double loss_and_grad(const Mat& input, const Mat& tau, const Mat& target_eps, Eigen::Index row_begin,
                         Eigen::Index row_count);

    /// Loss only, no gradient.
    double loss(const Mat& input, const Mat& tau, const Mat& target_eps, Eigen::Index row_begin,
                Eigen::Index row_count) const;

private:
    struct Cache;
    Mat embed(const Mat& tau) const;
    Mat run(const Mat& input, const Mat& tau, Cache* cache) const;

    NetConfig config_;
    VariablePartition partition_;
    double t_max_;
    ParamStore<Scalar> params_;
    std::vector<double> freqs_;
    std::size_t in_w_, in_b_, time_w_, time_b_, out_w_, out_b_;
    std::vector<std::size_t> block_w1_, block_b1_, block_w2_, block_b2_;
};

extern template class ScoreNet<float>;
extern template class ScoreNet<double>;

/// s = -eps_hat / sigma_t.
Matrix score_from_eps(const Matrix& eps_hat, double sigma_t);

/// Scores from a trained network (float parameters, usually the EMA shadow).
class NetworkScoreSource : public ScoreSource {
public:
    NetworkScoreSource(ScoreNet<float> net, DiffusionSchedule schedule, std::vector<ScoreTask> tasks);

    const VariablePartition& partition() const override { return net_.partition(); }
    const DiffusionSchedule& schedule() const override { return schedule_; }
    bool supports(const ScoreTask& task) const override;
    Matrix score(const ScoreTask& task, const Matrix& input, const Vector& t) const override;
    std::string kind() const override { return "network"; }

    const ScoreNet<float>& net() const { return net_; }

private:
    ScoreNet<float> net_;
    DiffusionSchedule schedule_;
    std::vector<ScoreTask> tasks_;
};

}  // namespace oinfo
