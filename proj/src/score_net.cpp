#include "oinfo/score_net.hpp"

#include "oinfo/errors.hpp"

#include <algorithm>
#include <cmath>

namespace oinfo {

NetConfig NetConfig::for_dimension(std::size_t total_dim, bool gradient_mode) {
    std::size_t w = 128;
    if (total_dim > 100) {
        w = 256;
    } else if (total_dim > 50) {
        w = 192;
    }
    NetConfig c;
    c.width = gradient_mode ? 2 * w : w;
    c.time_embed_dim = w;
    c.n_blocks = 4;
    return c;
}

void NetConfig::validate() const {
    if (width < 1 || n_blocks < 1 || time_embed_dim < 1) throw ConfigError("network sizes must be at least 1");
}

nlohmann::json to_json(const NetConfig& c) {
    return {{"width", c.width}, {"n_blocks", c.n_blocks}, {"time_embed_dim", c.time_embed_dim}};
}

NetConfig net_config_from_json(const nlohmann::json& j) {
    NetConfig c;
    c.width = j.at("width").get<std::size_t>();
    c.n_blocks = j.at("n_blocks").get<std::size_t>();
    c.time_embed_dim = j.at("time_embed_dim").get<std::size_t>();
    c.validate();
    return c;
}

namespace {

template <typename Derived>
auto sigmoid(const Eigen::ArrayBase<Derived>& x) {
    using S = typename Derived::Scalar;
    return (S(1) + (-x).exp()).inverse();
}

template <typename Scalar>
MatrixT<Scalar> silu(const MatrixT<Scalar>& x) {
    return (x.array() * sigmoid(x.array())).matrix();
}

template <typename Scalar>
MatrixT<Scalar> silu_grad(const MatrixT<Scalar>& x) {
    const auto s = sigmoid(x.array()).eval();
    return (s * (Scalar(1) + x.array() * (Scalar(1) - s))).matrix();
}

}  // namespace

template <typename Scalar>
struct ScoreNet<Scalar>::Cache {
    Mat x, emb, h_final, a_out;
    std::vector<Mat> u, a1, z1, a2;
};

template <typename Scalar>
ScoreNet<Scalar>::ScoreNet(NetConfig config, VariablePartition partition, double t_max)
    : config_(config), partition_(std::move(partition)), t_max_(t_max) {
    config_.validate();
    if (partition_.n_vars() == 0) throw ConfigError("network needs at least one variable");
    if (!(t_max_ > 0.0)) throw ConfigError("network t_max must be positive");
    const auto d = static_cast<Eigen::Index>(partition_.total_dim());
    const auto w = static_cast<Eigen::Index>(config_.width);
    const auto e = static_cast<Eigen::Index>(config_.time_embed_dim * partition_.n_vars());
    in_w_ = params_.add("in.w", w, d);
    in_b_ = params_.add("in.b", w, 1);
    time_w_ = params_.add("time.w", w, e);
    time_b_ = params_.add("time.b", w, 1);
    for (std::size_t k = 0; k < config_.n_blocks; ++k) {
        const std::string p = "block" + std::to_string(k);
        block_w1_.push_back(params_.add(p + ".fc1.w", w, w));
        block_b1_.push_back(params_.add(p + ".fc1.b", w, 1));
        block_w2_.push_back(params_.add(p + ".fc2.w", w, w));
        block_b2_.push_back(params_.add(p + ".fc2.b", w, 1));
    }
    out_w_ = params_.add("out.w", d, w);
    out_b_ = params_.add("out.b", d, 1);
    const std::size_t half = config_.time_embed_dim / 2;
    for (std::size_t k = 0; k < half; ++k)
        freqs_.push_back(std::exp(-std::log(10000.0) * static_cast<double>(k) / static_cast<double>(half)));
}

template <typename Scalar>
void ScoreNet<Scalar>::init(RngStream& rng, bool zero_output) {
    auto fill = [&](std::size_t w_idx, std::size_t b_idx) {
        auto& w = params_[w_idx].value;
        const double bound = 1.0 / std::sqrt(static_cast<double>(w.cols()));
        for (Eigen::Index c = 0; c < w.cols(); ++c)
            for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = static_cast<Scalar>((2.0 * rng.uniform() - 1.0) * bound);
        auto& b = params_[b_idx].value;
        for (Eigen::Index r = 0; r < b.rows(); ++r) b(r, 0) = static_cast<Scalar>((2.0 * rng.uniform() - 1.0) * bound);
    };
    fill(in_w_, in_b_);
    fill(time_w_, time_b_);
    for (std::size_t k = 0; k < config_.n_blocks; ++k) {
        fill(block_w1_[k], block_b1_[k]);
        fill(block_w2_[k], block_b2_[k]);
    }
    fill(out_w_, out_b_);
    if (zero_output) {
        params_[out_w_].value.setZero();
        params_[out_b_].value.setZero();
    }
    params_.zero_grad();
}

template <typename Scalar>
void ScoreNet<Scalar>::set_params(ParamStore<Scalar> p) {
    if (p.size() != params_.size()) throw ConfigError("parameter set does not match the network layout");
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i].name != params_[i].name || p[i].value.rows() != params_[i].value.rows() ||
            p[i].value.cols() != params_[i].value.cols())
            throw ConfigError("parameter '" + p[i].name + "' does not match the network layout");
    }
    params_ = std::move(p);
}

template <typename Scalar>
typename ScoreNet<Scalar>::Mat ScoreNet<Scalar>::embed(const Mat& tau) const {
    const auto n = static_cast<Eigen::Index>(partition_.n_vars());
    const auto e = static_cast<Eigen::Index>(config_.time_embed_dim);
    const auto half = static_cast<Eigen::Index>(freqs_.size());
    auto fill = [&](auto&& dst, double tau_value) {
        const double s = 1000.0 * tau_value / t_max_;
        for (Eigen::Index k = 0; k < half; ++k) {
            dst(k) = static_cast<Scalar>(std::sin(s * freqs_[static_cast<std::size_t>(k)]));
            dst(half + k) = static_cast<Scalar>(std::cos(s * freqs_[static_cast<std::size_t>(k)]));
        }
    };
    // tau takes at most three distinct values per column (0, t, T); reuse blocks that repeat.
    MatrixT<Scalar> at_zero = MatrixT<Scalar>::Zero(e, 1);
    MatrixT<Scalar> at_max = MatrixT<Scalar>::Zero(e, 1);
    fill(at_zero.col(0), 0.0);
    fill(at_max.col(0), static_cast<double>(static_cast<Scalar>(t_max_)));
    Mat out = Mat::Zero(n * e, tau.cols());
    for (Eigen::Index b = 0; b < tau.cols(); ++b) {
        for (Eigen::Index v = 0; v < n; ++v) {
            auto dst = out.col(b).segment(v * e, e);
            const Scalar value = tau(v, b);
            if (value == Scalar(0)) {
                dst = at_zero.col(0);
                continue;
            }
            if (value == static_cast<Scalar>(t_max_)) {
                dst = at_max.col(0);
                continue;
            }
            Eigen::Index same = -1;
            for (Eigen::Index u = 0; u < v && same < 0; ++u)
                if (tau(u, b) == value) same = u;
            if (same >= 0) {
                dst = out.col(b).segment(same * e, e);
            } else {
                fill(dst, static_cast<double>(value));
            }
        }
    }
    return out;
}

template <typename Scalar>
typename ScoreNet<Scalar>::Mat ScoreNet<Scalar>::run(const Mat& input, const Mat& tau, Cache* cache) const {
    const auto d = static_cast<Eigen::Index>(partition_.total_dim());
    const auto n = static_cast<Eigen::Index>(partition_.n_vars());
    if (input.rows() != d || tau.rows() != n || input.cols() != tau.cols())
        throw ConfigError("network input/tau shapes do not match the partition");

    Mat emb = embed(tau);
    Mat c = params_[time_w_].value * emb;
    c.colwise() += params_[time_b_].value.col(0);
    Mat h = params_[in_w_].value * input;
    h.colwise() += params_[in_b_].value.col(0);

    if (cache) {
        cache->x = input;
        cache->u.clear();
        cache->a1.clear();
        cache->z1.clear();
        cache->a2.clear();
    }
    for (std::size_t k = 0; k < config_.n_blocks; ++k) {
        Mat u = h + c;
        Mat a1 = silu<Scalar>(u);
        Mat z1 = params_[block_w1_[k]].value * a1;
        z1.colwise() += params_[block_b1_[k]].value.col(0);
        Mat a2 = silu<Scalar>(z1);
        h.noalias() += params_[block_w2_[k]].value * a2;
        h.colwise() += params_[block_b2_[k]].value.col(0);
        if (cache) {
            cache->u.push_back(std::move(u));
            cache->a1.push_back(std::move(a1));
            cache->z1.push_back(std::move(z1));
            cache->a2.push_back(std::move(a2));
        }
    }
    Mat a_out = silu<Scalar>(h);
    Mat out = params_[out_w_].value * a_out;
    out.colwise() += params_[out_b_].value.col(0);
    if (!out.allFinite()) throw NumericError("non-finite network output");
    if (cache) {
        cache->emb = std::move(emb);
        cache->h_final = std::move(h);
        cache->a_out = std::move(a_out);
    }
    return out;
}

template <typename Scalar>
typename ScoreNet<Scalar>::Mat ScoreNet<Scalar>::forward(const Mat& input, const Mat& tau) const {
    return run(input, tau, nullptr);
}

template <typename Scalar>
double ScoreNet<Scalar>::loss(const Mat& input, const Mat& tau, const Mat& target_eps, Eigen::Index row_begin,
                              Eigen::Index row_count) const {
    const Mat out = run(input, tau, nullptr);
    const Eigen::MatrixXd diff =
        (out.middleRows(row_begin, row_count) - target_eps.middleRows(row_begin, row_count)).template cast<double>();
    return diff.squaredNorm() / static_cast<double>(row_count * input.cols());
}

template <typename Scalar>
double ScoreNet<Scalar>::loss_and_grad(const Mat& input, const Mat& tau, const Mat& target_eps,
                                       Eigen::Index row_begin, Eigen::Index row_count) {
    if (target_eps.rows() != input.rows() || target_eps.cols() != input.cols())
        throw ConfigError("target shape does not match the input");
    if (row_begin < 0 || row_count < 1 || row_begin + row_count > input.rows())
        throw ConfigError("loss row range outside the input");
    Cache cache;
    const Mat out = run(input, tau, &cache);
    const auto batch = input.cols();
    const double norm = static_cast<double>(row_count * batch);

    Mat diff = out.middleRows(row_begin, row_count) - target_eps.middleRows(row_begin, row_count);
    const double value = diff.template cast<double>().squaredNorm() / norm;

    params_.zero_grad();
    Mat dout = Mat::Zero(out.rows(), batch);
    dout.middleRows(row_begin, row_count) = diff * static_cast<Scalar>(2.0 / norm);

    params_[out_w_].grad.noalias() += dout * cache.a_out.transpose();
    params_[out_b_].grad.col(0) += dout.rowwise().sum();
    Mat dh = (params_[out_w_].value.transpose() * dout).cwiseProduct(silu_grad<Scalar>(cache.h_final));
    Mat dc = Mat::Zero(dh.rows(), batch);

    for (std::size_t kk = config_.n_blocks; kk-- > 0;) {
        // dz2 == dh (residual branch output feeds h additively)
        params_[block_w2_[kk]].grad.noalias() += dh * cache.a2[kk].transpose();
        params_[block_b2_[kk]].grad.col(0) += dh.rowwise().sum();
        Mat dz1 = (params_[block_w2_[kk]].value.transpose() * dh).cwiseProduct(silu_grad<Scalar>(cache.z1[kk]));
        params_[block_w1_[kk]].grad.noalias() += dz1 * cache.a1[kk].transpose();
        params_[block_b1_[kk]].grad.col(0) += dz1.rowwise().sum();
        Mat du = (params_[block_w1_[kk]].value.transpose() * dz1).cwiseProduct(silu_grad<Scalar>(cache.u[kk]));
        dh += du;
        dc += du;
    }
    params_[in_w_].grad.noalias() += dh * cache.x.transpose();
    params_[in_b_].grad.col(0) += dh.rowwise().sum();
    params_[time_w_].grad.noalias() += dc * cache.emb.transpose();
    params_[time_b_].grad.col(0) += dc.rowwise().sum();
    return value;
}

template class ScoreNet<float>;
template class ScoreNet<double>;

Matrix score_from_eps(const Matrix& eps_hat, double sigma_t) {
    if (!(sigma_t > 0.0)) throw ConfigError("score_from_eps: sigma_t must be positive");
    return -eps_hat / sigma_t;
}

NetworkScoreSource::NetworkScoreSource(ScoreNet<float> net, DiffusionSchedule schedule, std::vector<ScoreTask> tasks)
    : net_(std::move(net)), schedule_(schedule), tasks_(std::move(tasks)) {
    schedule_.validate();
}

bool NetworkScoreSource::supports(const ScoreTask& task) const {
    return std::find(tasks_.begin(), tasks_.end(), task) != tasks_.end();
}

Matrix NetworkScoreSource::score(const ScoreTask& task, const Matrix& input, const Vector& t) const {
    if (!supports(task)) throw ConfigError("score task " + task.name() + " was not trained into this model");
    const auto& part = net_.partition();
    const auto n = part.n_vars();
    const auto batch = input.cols();
    MatrixT<float> tau(static_cast<Eigen::Index>(n), batch);
    for (Eigen::Index b = 0; b < batch; ++b) {
        const auto enc = encode_task(task, t(b), n, schedule_);
        for (std::size_t v = 0; v < n; ++v) tau(static_cast<Eigen::Index>(v), b) = static_cast<float>(enc[v]);
    }
    const MatrixT<float> eps = net_.forward(input.cast<float>(), tau);
    const auto idx = target_indices(task, part);
    Matrix out(static_cast<Eigen::Index>(idx.size()), batch);
    for (Eigen::Index b = 0; b < batch; ++b) {
        const double sigma = coeffs(schedule_, t(b)).sigma;
        for (std::size_t k = 0; k < idx.size(); ++k)
            out(static_cast<Eigen::Index>(k), b) = -static_cast<double>(eps(idx[k], b)) / sigma;
    }
    return out;
}

}  // namespace oinfo
