#include "oinfo/trainer.hpp"

#include "oinfo/errors.hpp"
#include "oinfo/hash.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

namespace oinfo {

const char* to_string(TaskMode mode) { return mode == TaskMode::Standard ? "standard" : "with_gradients"; }

TaskMode parse_task_mode(const std::string& text) {
    if (text == "standard") return TaskMode::Standard;
    if (text == "with_gradients" || text == "gradients") return TaskMode::WithGradients;
    throw ConfigError("unknown task mode '" + text + "' (expected standard|with_gradients)");
}

void TrainConfig::validate() const {
    if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
    if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
    if (!(ema_decay >= 0.0 && ema_decay < 1.0)) throw ConfigError("ema_decay must lie in [0, 1)");
}

nlohmann::json to_json(const TrainConfig& c) {
    return {{"batch_size", c.batch_size},       {"learning_rate", c.learning_rate},
            {"n_iterations", c.n_iterations},   {"ema_decay", c.ema_decay},
            {"task_mode", to_string(c.task_mode)}, {"time_sampling", to_string(c.time_sampling)},
            {"seed", c.seed}};
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
    TrainConfig c;
    c.batch_size = j.at("batch_size").get<std::size_t>();
    c.learning_rate = j.at("learning_rate").get<double>();
    c.n_iterations = j.at("n_iterations").get<std::size_t>();
    c.ema_decay = j.at("ema_decay").get<double>();
    c.task_mode = parse_task_mode(j.at("task_mode").get<std::string>());
    c.time_sampling = parse_time_sampling(j.at("time_sampling").get<std::string>());
    c.seed = j.at("seed").get<std::uint64_t>();
    return c;
}

std::string TrainConfig::fingerprint() const { return fnv1a_hex(to_json(*this).dump()); }

std::vector<ScoreTask> required_tasks(std::size_t n_vars, TaskMode mode) {
    if (n_vars < 2) throw ConfigError("at least 2 variables are required");
    std::vector<ScoreTask> out{ScoreTask::joint()};
    for (std::size_t i = 0; i < n_vars; ++i) out.push_back(ScoreTask::full_conditional(i, n_vars));
    for (std::size_t i = 0; i < n_vars; ++i) out.push_back(ScoreTask::marginal(i));
    if (mode == TaskMode::WithGradients) {
        for (std::size_t i = 0; i < n_vars; ++i) {
            for (std::size_t j = 0; j < n_vars; ++j) {
                if (i == j) continue;
                std::vector<std::size_t> given;
                for (std::size_t k = 0; k < n_vars; ++k)
                    if (k != i && k != j) given.push_back(k);
                auto task = ScoreTask::conditional(i, given);
                if (std::find(out.begin(), out.end(), task) == out.end()) out.push_back(std::move(task));
            }
        }
    }
    return out;
}

NetworkScoreSource TrainedModel::score_source() const {
    ScoreNet<float> inference = net;
    if (use_ema) inference.set_params(ema.snapshot());
    return NetworkScoreSource(std::move(inference), schedule, tasks());
}

TrainingBatch make_training_batch(const Matrix& clean, const ScoreTask& task, const VariablePartition& partition,
                                  const DiffusionSchedule& schedule, const TimeSampler& sampler, RngStream& rng) {
    const auto batch = clean.cols();
    const auto n = partition.n_vars();
    TrainingBatch out;
    out.task = task;
    Vector t(batch);
    for (Eigen::Index b = 0; b < batch; ++b) t(b) = sampler.sample(rng).t;
    Matrix eps(clean.rows(), batch);
    rng.fill_normal(eps);
    const Perturbed p = perturb(clean, t, eps, schedule);
    const Matrix input = assemble_input(partition, task, clean, p.x_t, rng);

    out.input = input.cast<float>();
    out.eps = eps.cast<float>();
    out.tau.resize(static_cast<Eigen::Index>(n), batch);
    out.t.assign(t.data(), t.data() + batch);
    for (Eigen::Index b = 0; b < batch; ++b) {
        const auto tau = encode_task(task, t(b), n, schedule);
        for (std::size_t v = 0; v < n; ++v) out.tau(static_cast<Eigen::Index>(v), b) = static_cast<float>(tau[v]);
    }
    if (task.kind == ScoreTask::Kind::Joint) {
        out.row_begin = 0;
        out.row_count = static_cast<Eigen::Index>(partition.total_dim());
    } else {
        out.row_begin = static_cast<Eigen::Index>(partition.offset(task.target));
        out.row_count = static_cast<Eigen::Index>(partition.dim(task.target));
    }
    return out;
}

double masked_mse(const MatrixT<float>& prediction, const MatrixT<float>& target, Eigen::Index row_begin,
                  Eigen::Index row_count) {
    const Eigen::MatrixXd diff =
        (prediction.middleRows(row_begin, row_count) - target.middleRows(row_begin, row_count)).cast<double>();
    return diff.squaredNorm() / static_cast<double>(row_count * prediction.cols());
}

double training_step(ScoreNet<float>& net, AdamState<float>& optimizer, const AdamConfig& adam,
                     const TrainingBatch& batch) {
    const double loss = net.loss_and_grad(batch.input, batch.tau, batch.eps, batch.row_begin, batch.row_count);
    if (!std::isfinite(loss)) throw NumericError("non-finite loss");
    grad_step(net.params(), optimizer, adam);
    return loss;
}

Trainer::Trainer(const Dataset& train_data, NetConfig net_config, TrainConfig train_config,
                 DiffusionSchedule schedule)
    : data_(train_data),
      config_(train_config),
      schedule_(schedule),
      net_(net_config, train_data.partition, schedule.t_max),
      optimizer_(net_.params()),
      sampler_(schedule, train_config.time_sampling),
      tasks_(required_tasks(train_data.partition.n_vars(), train_config.task_mode)),
      master_(train_config.seed, 0) {
    config_.validate();
    schedule_.validate();
    if (train_data.n_samples() == 0) throw ConfigError("training dataset is empty");
    if (!train_data.samples.allFinite()) throw NumericError("training dataset contains non-finite values");
    adam_.learning_rate = config_.learning_rate;
    adam_.ema_decay = config_.ema_decay;
    RngStream init_rng = master_.substream(1);
    net_.init(init_rng);
    optimizer_ = AdamState<float>(net_.params());
}

const ScoreTask& Trainer::task_for_iteration(std::size_t iteration) {
    const std::size_t epoch = iteration / tasks_.size();
    if (epoch != epoch_) {
        epoch_order_.resize(tasks_.size());
        std::iota(epoch_order_.begin(), epoch_order_.end(), std::size_t{0});
        RngStream rng = master_.substream(2).substream(epoch);
        for (std::size_t k = epoch_order_.size(); k > 1; --k)
            std::swap(epoch_order_[k - 1], epoch_order_[rng.uniform_index(k)]);
        epoch_ = epoch;
    }
    return tasks_[epoch_order_[iteration % tasks_.size()]];
}

double Trainer::step() {
    const ScoreTask task = task_for_iteration(iteration_);
    RngStream rng = master_.substream(3).substream(iteration_);
    const auto n = static_cast<std::uint64_t>(data_.n_samples());
    Matrix clean(data_.samples.cols(), static_cast<Eigen::Index>(config_.batch_size));
    for (Eigen::Index b = 0; b < clean.cols(); ++b)
        clean.col(b) = data_.samples.row(static_cast<Eigen::Index>(rng.uniform_index(n))).transpose();
    const TrainingBatch batch = make_training_batch(clean, task, data_.partition, schedule_, sampler_, rng);
    double loss = 0.0;
    try {
        loss = training_step(net_, optimizer_, adam_, batch);
    } catch (const NumericError& e) {
        const auto [lo, hi] = std::minmax_element(batch.t.begin(), batch.t.end());
        throw NumericError(std::string(e.what()) + " [task " + task.name() + ", t in [" + std::to_string(*lo) + ", " +
                           std::to_string(*hi) + "], iteration " + std::to_string(iteration_) + "]");
    }
    ++iteration_;
    return loss;
}

TrainedModel Trainer::snapshot() const {
    return TrainedModel{net_, optimizer_.ema.snapshot(), schedule_, config_, std::nullopt, true};
}

TrainedModel Trainer::fit(std::vector<TrainLogRow>* log) {
    const auto start = std::chrono::steady_clock::now();
    while (iteration_ < config_.n_iterations) {
        const std::string task = task_for_iteration(iteration_).name();
        const double loss = step();
        if (log) {
            const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            log->push_back({iteration_ - 1, task, loss, wall});
        }
    }
    return snapshot();
}

TrainedModel fit(const Dataset& train_data, const NetConfig& net_config, const TrainConfig& train_config,
                 const DiffusionSchedule& schedule, std::vector<TrainLogRow>* log) {
    Trainer trainer(train_data, net_config, train_config, schedule);
    return trainer.fit(log);
}

void write_train_log_csv(const std::string& path, const std::vector<TrainLogRow>& rows) {
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot write training log " + path);
    os << "iteration,task,loss,wall_time\n";
    os << std::setprecision(9);
    for (const auto& r : rows) os << r.iteration << ",\"" << r.task << "\"," << r.loss << "," << r.wall_time << "\n";
}

namespace {

constexpr char kMagic[] = "OINFOCKPT1\n";

void write_u64_le(std::ostream& os, std::uint64_t v) {
    unsigned char bytes[8];
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFF);
    os.write(reinterpret_cast<const char*>(bytes), 8);
}

std::uint64_t read_u64_le(std::istream& is) {
    unsigned char bytes[8];
    is.read(reinterpret_cast<char*>(bytes), 8);
    if (!is) throw ConfigError("checkpoint truncated");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
    return v;
}

void write_f32_le(std::ostream& os, float f) {
    std::uint32_t u;
    std::memcpy(&u, &f, 4);
    unsigned char bytes[4];
    for (int i = 0; i < 4; ++i) bytes[i] = static_cast<unsigned char>((u >> (8 * i)) & 0xFF);
    os.write(reinterpret_cast<const char*>(bytes), 4);
}

float read_f32_le(const unsigned char* p) {
    std::uint32_t u = 0;
    for (int i = 0; i < 4; ++i) u |= static_cast<std::uint32_t>(p[i]) << (8 * i);
    float f;
    std::memcpy(&f, &u, 4);
    return f;
}

}  // namespace

void save_checkpoint(const std::string& path, const TrainedModel& model) {
    nlohmann::json header;
    header["format_version"] = 1;
    header["net_config"] = to_json(model.net.config());
    header["schedule"] = to_json(model.schedule);
    header["partition"] = model.partition().dims();
    header["train_config"] = to_json(model.train_config);
    header["train_config_hash"] = model.train_config.fingerprint();
    header["ema"] = model.use_ema;
    if (model.standardization) {
        header["standardization"] = {
            {"mean", std::vector<double>(model.standardization->mean.data(),
                                         model.standardization->mean.data() + model.standardization->mean.size())},
            {"scale", std::vector<double>(model.standardization->scale.data(),
                                          model.standardization->scale.data() + model.standardization->scale.size())}};
    } else {
        header["standardization"] = nullptr;
    }
    nlohmann::json arrays = nlohmann::json::array();
    std::uint64_t offset = 0;
    auto describe = [&](const ParamStore<float>& store, const std::string& group) {
        for (const auto& a : store) {
            arrays.push_back({{"group", group}, {"name", a.name}, {"rows", a.value.rows()}, {"cols", a.value.cols()},
                              {"offset", offset}});
            offset += static_cast<std::uint64_t>(a.value.size()) * 4;
        }
    };
    describe(model.net.params(), "params");
    describe(model.ema, "ema");
    header["arrays"] = arrays;
    header["blob_bytes"] = offset;

    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("cannot write checkpoint " + path);
    const std::string text = header.dump();
    os.write(kMagic, sizeof(kMagic) - 1);
    write_u64_le(os, text.size());
    os.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (const auto* store : {&model.net.params(), &model.ema})
        for (const auto& a : *store)
            for (Eigen::Index k = 0; k < a.value.size(); ++k) write_f32_le(os, a.value.data()[k]);
    if (!os) throw ConfigError("failed writing checkpoint " + path);
}

TrainedModel load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("cannot open checkpoint " + path);
    std::string magic(sizeof(kMagic) - 1, '\0');
    is.read(magic.data(), static_cast<std::streamsize>(magic.size()));
    if (!is || magic != kMagic) throw ConfigError("not a checkpoint file: " + path);
    const std::uint64_t header_len = read_u64_le(is);
    std::string text(header_len, '\0');
    is.read(text.data(), static_cast<std::streamsize>(header_len));
    if (!is) throw ConfigError("checkpoint header truncated");
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed checkpoint header: ") + e.what());
    }
    const std::uint64_t blob_bytes = header.at("blob_bytes").get<std::uint64_t>();
    std::vector<unsigned char> blob(blob_bytes);
    is.read(reinterpret_cast<char*>(blob.data()), static_cast<std::streamsize>(blob_bytes));
    if (!is) throw ConfigError("checkpoint payload truncated");

    const NetConfig net_config = net_config_from_json(header.at("net_config"));
    const DiffusionSchedule schedule = schedule_from_json(header.at("schedule"));
    const VariablePartition partition(header.at("partition").get<std::vector<std::size_t>>());
    ScoreNet<float> net(net_config, partition, schedule.t_max);
    ParamStore<float> ema = net.params().snapshot();
    ParamStore<float> params = net.params().snapshot();
    for (const auto& a : header.at("arrays")) {
        auto& store = a.at("group").get<std::string>() == "ema" ? ema : params;
        const auto idx = store.find(a.at("name").get<std::string>());
        if (idx == ParamStore<float>::npos) throw ConfigError("checkpoint has unknown array " + a.at("name").dump());
        auto& value = store[idx].value;
        if (value.rows() != a.at("rows").get<Eigen::Index>() || value.cols() != a.at("cols").get<Eigen::Index>())
            throw ConfigError("checkpoint array shape mismatch for " + a.at("name").dump());
        const std::uint64_t off = a.at("offset").get<std::uint64_t>();
        if (off + static_cast<std::uint64_t>(value.size()) * 4 > blob_bytes) throw ConfigError("checkpoint array out of range");
        for (Eigen::Index k = 0; k < value.size(); ++k) value.data()[k] = read_f32_le(blob.data() + off + 4 * k);
    }
    net.set_params(std::move(params));

    TrainedModel model{std::move(net), std::move(ema), schedule, train_config_from_json(header.at("train_config")),
                       std::nullopt, header.at("ema").get<bool>()};
    if (!header.at("standardization").is_null()) {
        const auto mean = header["standardization"].at("mean").get<std::vector<double>>();
        const auto scale = header["standardization"].at("scale").get<std::vector<double>>();
        model.standardization = Standardization{Eigen::Map<const Vector>(mean.data(), static_cast<Eigen::Index>(mean.size())),
                                                Eigen::Map<const Vector>(scale.data(), static_cast<Eigen::Index>(scale.size()))};
    }
    return model;
}

}  // namespace oinfo
