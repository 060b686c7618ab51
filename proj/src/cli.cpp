#include "oinfo/cli.hpp"

#include "oinfo/data_io.hpp"
#include "oinfo/errors.hpp"
#include "oinfo/estimators.hpp"
#include "oinfo/hash.hpp"
#include "oinfo/oracle.hpp"
#include "oinfo/systems.hpp"
#include "oinfo/trainer.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace oinfo::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// RNG stream ids for data generated inside commands.
constexpr std::uint64_t kGenStream = 11;
constexpr std::uint64_t kTrainDataStream = 12;
constexpr std::uint64_t kTestDataStream = 13;

struct Common {
    std::string out_dir;
};

struct OracleOpts {
    std::string system;
    std::string out;
};

struct GenOpts {
    std::string system;
    std::size_t samples = 100000;
    std::uint64_t seed = 0;
    std::string format = "f32";
    std::string out;
};

struct TrainOpts {
    std::string system;
    std::string data;
    std::string partition;
    std::size_t samples = 100000;
    std::size_t iterations = 20000;
    std::size_t batch = 256;
    double lr = 1e-2;
    double ema = 0.999;
    std::string task_mode = "standard";
    std::string time_sampling = "importance";
    std::uint64_t seed = 0;
    std::size_t width = 0;  // 0: chosen from the total dimension
    std::size_t blocks = 4;
    std::size_t embed = 0;
    double beta_min = 0.1;
    double beta_max = 20.0;
    double t_max = 1.0;
    double t_min = 1e-5;
    std::string checkpoint;
    std::string log;
};

struct EstimateOpts {
    std::string system;
    std::string data;
    std::string partition;
    std::string checkpoint;
    bool exact = false;
    std::size_t samples = 10000;
    std::size_t mc_steps = 10;
    std::size_t seeds = 5;
    std::uint64_t seed = 0;
    std::string time_sampling = "uniform";
    std::size_t chunk = 1024;
    bool gradients = false;
    std::string gradient_form = "mutual_info";
    double beta_min = 0.1;
    double beta_max = 20.0;
    double t_max = 1.0;
    double t_min = 1e-5;
    std::string out;
};

struct SweepOpts {
    std::string kind = "redundant";
    std::size_t n_vars = 3;
    std::string dims = "1";
    std::string sigmas;
    double sigma_min = 0.1;
    double sigma_max = 10.0;
    std::size_t sigma_points = 8;
    std::size_t seeds = 5;
    std::uint64_t seed = 0;
    std::string estimators = "exact";
    std::size_t samples = 10000;
    std::size_t train_samples = 100000;
    std::size_t iterations = 20000;
    double lr = 1e-2;
    std::size_t mc_steps = 10;
    std::string time_sampling = "uniform";
    std::string out;
};

template <typename T>
std::vector<T> parse_list(const std::string& text, const std::string& what) {
    std::vector<T> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        std::istringstream is(item);
        T value;
        if (!(is >> value) || !is.eof()) throw ConfigError(what + ": cannot parse '" + item + "'");
        out.push_back(value);
    }
    if (out.empty()) throw ConfigError(what + ": empty list");
    return out;
}

std::string resolve_path(const std::string& given, const Common& common, const std::string& fallback) {
    if (!given.empty()) return given;
    fs::create_directories(common.out_dir);
    return (fs::path(common.out_dir) / fallback).string();
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    const fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream os(p);
    if (!os) throw ConfigError("cannot write " + path);
    os << text;
}

void write_report(const std::string& path, json report) {
    report["meta"]["config_hash"] = fnv1a_hex(report.at("config").dump());
    write_text(path, report.dump(2) + "\n");
}

DiffusionSchedule make_schedule(double beta_min, double beta_max, double t_max, double t_min) {
    DiffusionSchedule s{beta_min, beta_max, t_max, t_min};
    s.validate();
    return s;
}

std::optional<std::vector<std::size_t>> partition_override(const std::string& text) {
    if (text.empty()) return std::nullopt;
    return parse_list<std::size_t>(text, "partition");
}

Dataset generate(const SystemSpec& spec, const CovarianceMatrix& cov, std::size_t m, RngStream rng) {
    return apply_transform(sample(cov, m, rng), spec.transform);
}

json oracle_json(const CovarianceMatrix& cov) {
    json j;
    j["measures"] = to_json(measures(cov.cov, cov.partition));
    if (cov.partition.n_vars() >= 3) j["gradients"] = gradients(cov.cov, cov.partition);
    return j;
}

// ---------------------------------------------------------------- oracle

int cmd_oracle(const OracleOpts& o) {
    const SystemSpec spec = parse_system_spec(o.system);
    const CovarianceMatrix cov = build_cov(spec);
    json r;
    r["command"] = "oracle";
    r["config"] = {{"system", to_string(spec)}};
    r["system"] = to_json(spec);
    r["partition"] = cov.partition.dims();
    const json truth = oracle_json(cov);
    r["measures"] = truth["measures"];
    if (truth.contains("gradients")) r["gradients"] = truth["gradients"];
    if (spec.kind == SystemKind::Mixed) {
        r["blocks"] = json::array();
        for (const auto& b : spec.blocks) {
            json jb = oracle_json(build_cov(b));
            jb["system"] = to_string(b);
            r["blocks"].push_back(jb);
        }
    }
    write_report(o.out, r);
    return kExitOk;
}

// ---------------------------------------------------------------- gen

int cmd_gen(const GenOpts& o, const Common& common) {
    const SystemSpec spec = parse_system_spec(o.system);
    const PayloadFormat format = parse_payload_format(o.format);
    const CovarianceMatrix cov = build_cov(spec);
    const Dataset data = generate(spec, cov, o.samples, RngStream(o.seed, kGenStream));
    const std::string path = resolve_path(o.out, common, "dataset.json");
    save_dataset(path, data, format);
    std::cout << path << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------- train

struct TrainingData {
    Dataset data;
    json source;
};

TrainingData training_data(const TrainOpts& o) {
    if (o.system.empty() == o.data.empty()) throw ConfigError("train: give exactly one of --system or --data");
    if (!o.system.empty()) {
        const SystemSpec spec = parse_system_spec(o.system);
        const CovarianceMatrix cov = build_cov(spec);
        Dataset data = generate(spec, cov, o.samples, RngStream(o.seed, kTrainDataStream));
        return {standardize(data), {{"system", to_string(spec)}, {"samples", o.samples}}};
    }
    Dataset data = load_dataset(o.data, partition_override(o.partition));
    if (data.standardization) data = unstandardize(data);
    return {standardize(data), {{"data", o.data}, {"partition", data.partition.dims()}}};
}

int cmd_train(const TrainOpts& o, const Common& common) {
    TrainConfig tc;
    tc.batch_size = o.batch;
    tc.learning_rate = o.lr;
    tc.n_iterations = o.iterations;
    tc.ema_decay = o.ema;
    tc.task_mode = parse_task_mode(o.task_mode);
    tc.time_sampling = parse_time_sampling(o.time_sampling);
    tc.seed = o.seed;
    tc.validate();
    const DiffusionSchedule schedule = make_schedule(o.beta_min, o.beta_max, o.t_max, o.t_min);
    TrainingData td = training_data(o);

    NetConfig nc = NetConfig::for_dimension(td.data.partition.total_dim(), tc.task_mode == TaskMode::WithGradients);
    if (o.width) nc.width = o.width;
    if (o.embed) nc.time_embed_dim = o.embed;
    nc.n_blocks = o.blocks;
    nc.validate();

    std::vector<TrainLogRow> log;
    TrainedModel model = fit(td.data, nc, tc, schedule, &log);
    model.standardization = td.data.standardization;

    const std::string ckpt = resolve_path(o.checkpoint, common, "model.ckpt");
    const std::string log_path = resolve_path(o.log, common, "train_log.csv");
    save_checkpoint(ckpt, model);
    write_train_log_csv(log_path, log);
    std::cout << ckpt << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------- estimate / grad

struct EvalSetup {
    std::unique_ptr<ScoreSource> source;
    std::vector<Dataset> per_seed;
    std::optional<CovarianceMatrix> cov;
    json config;
};

EvalSetup evaluation_setup(const EstimateOpts& o, const std::string& command) {
    if (o.exact == !o.checkpoint.empty())
        throw ConfigError(command + ": give exactly one of --checkpoint or --exact-scores");
    if (o.system.empty() == o.data.empty()) throw ConfigError(command + ": give exactly one of --system or --data");
    EvalSetup s;
    s.config = {{"mc_steps", o.mc_steps},  {"seeds", o.seeds},   {"seed", o.seed},
                {"time_sampling", o.time_sampling}, {"chunk", o.chunk}};

    std::optional<SystemSpec> spec;
    if (!o.system.empty()) {
        spec = parse_system_spec(o.system);
        s.cov = build_cov(*spec);
        s.config["system"] = to_string(*spec);
        s.config["samples"] = o.samples;
        for (std::size_t k = 0; k < o.seeds; ++k)
            s.per_seed.push_back(generate(*spec, *s.cov, o.samples, RngStream(o.seed, kTestDataStream).substream(k)));
    } else {
        Dataset data = load_dataset(o.data, partition_override(o.partition));
        if (data.standardization) data = unstandardize(data);
        s.config["data"] = o.data;
        s.per_seed.assign(o.seeds, data);
    }

    if (o.exact) {
        if (!s.cov) throw ConfigError(command + ": --exact-scores needs --system");
        if (spec->transform != TransformKind::None)
            throw ConfigError(command + ": exact scores describe the untransformed Gaussian system");
        const DiffusionSchedule schedule = make_schedule(o.beta_min, o.beta_max, o.t_max, o.t_min);
        s.source = std::make_unique<GaussianScoreSource>(s.cov->cov, s.cov->partition, schedule);
        s.config["source"] = "exact";
        s.config["schedule"] = to_json(schedule);
    } else {
        if (!fs::exists(o.checkpoint)) throw ConfigError(command + ": checkpoint not found: " + o.checkpoint);
        const TrainedModel model = load_checkpoint(o.checkpoint);
        for (auto& d : s.per_seed) {
            if (!(d.partition == model.partition()))
                throw ConfigError(command + ": data partition does not match the checkpoint");
            d = model.standardization ? apply_standardization(d, *model.standardization) : standardize(d);
        }
        s.source = std::make_unique<NetworkScoreSource>(model.score_source());
        s.config["source"] = "network";
        s.config["checkpoint"] = fs::path(o.checkpoint).filename().string();
        s.config["train_config_hash"] = model.train_config.fingerprint();
        s.config["schedule"] = to_json(model.schedule);
    }
    return s;
}

EstimateConfig estimate_config(const EstimateOpts& o) {
    EstimateConfig c;
    c.mc_steps = o.mc_steps;
    c.n_seeds = o.seeds;
    c.seed = o.seed;
    c.time_sampling = parse_time_sampling(o.time_sampling);
    c.chunk_size = o.chunk;
    c.validate();
    return c;
}

json meta(const EvalSetup& s, const EstimateConfig& c) {
    return {{"n_samples", s.per_seed.front().n_samples()},
            {"mc_steps", c.mc_steps},
            {"seeds", c.n_seeds},
            {"time_sampling", to_string(c.time_sampling)},
            {"schedule", s.config["schedule"]},
            {"source", s.source->kind()}};
}

json gradient_json(const EvalSetup& s, const EstimateConfig& c, GradientForm form) {
    json out = json::array();
    for (const auto& g : estimate_gradients(*s.source, s.per_seed, c, form)) out.push_back(to_json(g));
    return out;
}

int cmd_estimate(const EstimateOpts& o, const Common& common) {
    const EstimateConfig c = estimate_config(o);
    EvalSetup s = evaluation_setup(o, "estimate");
    const GradientForm form = parse_gradient_form(o.gradient_form);
    s.config["gradients"] = o.gradients;
    if (o.gradients) s.config["gradient_form"] = to_string(form);

    json r;
    r["command"] = "estimate";
    r["config"] = s.config;
    r["measures"] = to_json(estimate_oinfo(*s.source, s.per_seed, c));
    if (o.gradients) r["gradients"] = gradient_json(s, c, form);
    if (s.cov) r["truth"] = oracle_json(*s.cov);
    r["meta"] = meta(s, c);
    write_report(resolve_path(o.out, common, "report.json"), r);
    return kExitOk;
}

int cmd_grad(const EstimateOpts& o, const Common& common) {
    const EstimateConfig c = estimate_config(o);
    EvalSetup s = evaluation_setup(o, "grad");
    const GradientForm form = parse_gradient_form(o.gradient_form);
    s.config["gradient_form"] = to_string(form);

    json r;
    r["command"] = "grad";
    r["config"] = s.config;
    r["gradients"] = gradient_json(s, c, form);
    if (s.cov) r["truth"] = oracle_json(*s.cov);
    r["meta"] = meta(s, c);
    write_report(resolve_path(o.out, common, "gradients.json"), r);
    return kExitOk;
}

// ---------------------------------------------------------------- sweep

int cmd_sweep(const SweepOpts& o, const Common& common) {
    if (o.kind != "redundant" && o.kind != "synergistic")
        throw ConfigError("sweep: --kind must be redundant or synergistic");
    const auto dims = parse_list<std::size_t>(o.dims, "dims");
    const auto sigmas =
        o.sigmas.empty() ? log_grid(o.sigma_min, o.sigma_max, o.sigma_points) : parse_list<double>(o.sigmas, "sigmas");
    std::vector<std::string> estimators;
    {
        std::stringstream ss(o.estimators);
        std::string item;
        while (std::getline(ss, item, ','))
            if (!item.empty()) estimators.push_back(item);
    }
    for (const auto& e : estimators)
        if (e != "exact" && e != "trained") throw ConfigError("sweep: unknown estimator '" + e + "'");

    EstimateConfig ec;
    ec.mc_steps = o.mc_steps;
    ec.n_seeds = 1;
    ec.time_sampling = parse_time_sampling(o.time_sampling);
    ec.validate();
    const DiffusionSchedule schedule;

    std::ostringstream csv;
    csv << "benchmark,n_vars,dim,sigma,seed,estimator,tc_hat,dtc_hat,s_hat,o_hat,tc_true,dtc_true,o_true,wall_time\n";
    csv << std::setprecision(10);
    std::uint64_t cell = 0;
    for (const std::size_t dim : dims) {
        for (const double sigma : sigmas) {
            SystemSpec spec = o.kind == "redundant" ? SystemSpec::redundant(o.n_vars, dim, sigma)
                                                    : SystemSpec::synergistic(o.n_vars, dim, sigma);
            const CovarianceMatrix cov = build_cov(spec);
            const MeasureSet truth = measures(cov.cov, cov.partition);
            for (std::size_t seed = 0; seed < o.seeds; ++seed, ++cell) {
                // Each cell owns a substream.
                const RngStream cell_rng = RngStream(o.seed, cell);
                RngStream test_rng = cell_rng.substream(kTestDataStream);
                const Dataset test = sample(cov, o.samples, test_rng);
                ec.seed = cell_rng.substream(1).engine()();
                for (const auto& est : estimators) {
                    const auto start = std::chrono::steady_clock::now();
                    OInfoEstimate e;
                    if (est == "exact") {
                        const GaussianScoreSource src(cov.cov, cov.partition, schedule);
                        e = estimate_oinfo(src, test, ec);
                    } else {
                        RngStream train_rng = cell_rng.substream(kTrainDataStream);
                        const Dataset train = standardize(sample(cov, o.train_samples, train_rng));
                        TrainConfig tc;
                        tc.n_iterations = o.iterations;
                        tc.learning_rate = o.lr;
                        tc.seed = cell_rng.substream(2).engine()();
                        TrainedModel model =
                            fit(train, NetConfig::for_dimension(cov.partition.total_dim()), tc, schedule);
                        const Dataset scaled = apply_standardization(test, *train.standardization);
                        e = estimate_oinfo(model.score_source(), scaled, ec);
                    }
                    const double wall =
                        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
                    csv << o.kind << "," << o.n_vars << "," << dim << "," << sigma << "," << seed << "," << est << ","
                        << e.tc.value << "," << e.dtc.value << "," << e.s_info.value << "," << e.o_info.value << ","
                        << truth.tc << "," << truth.dtc << "," << truth.o_info << "," << wall << "\n";
                }
            }
        }
    }
    write_text(resolve_path(o.out, common, "sweep.csv"), csv.str());
    return kExitOk;
}

void add_schedule_options(CLI::App* sub, double& beta_min, double& beta_max, double& t_max, double& t_min) {
    sub->add_option("--beta-min", beta_min, "VP-SDE beta_min")->capture_default_str();
    sub->add_option("--beta-max", beta_max, "VP-SDE beta_max")->capture_default_str();
    sub->add_option("--t-max", t_max, "Final diffusion time T")->capture_default_str();
    sub->add_option("--t-min", t_min, "Smallest integration time")->capture_default_str();
}

void add_estimate_options(CLI::App* sub, EstimateOpts& o) {
    sub->add_option("--system", o.system, "Benchmark system; fresh test data is drawn for every seed");
    sub->add_option("--data", o.data, "Dataset file (header .json or bare .csv)");
    sub->add_option("--partition", o.partition, "Comma-separated variable dims overriding the file's partition");
    sub->add_option("--checkpoint", o.checkpoint, "Trained model checkpoint");
    sub->add_flag("--exact-scores", o.exact, "Use exact Gaussian scores of --system instead of a trained model");
    sub->add_option("--samples", o.samples, "Test samples per seed when --system is given")->capture_default_str();
    sub->add_option("--mc-steps", o.mc_steps, "Time draws per sample")->capture_default_str();
    sub->add_option("--seeds", o.seeds, "Independent repetitions used for the standard error")->capture_default_str();
    sub->add_option("--seed", o.seed, "Base seed")->capture_default_str();
    sub->add_option("--time-sampling", o.time_sampling, "uniform | importance")->capture_default_str();
    sub->add_option("--chunk", o.chunk, "Samples per score batch")->capture_default_str();
    sub->add_option("--gradient-form", o.gradient_form, "mutual_info | subsystem")->capture_default_str();
    sub->add_option("--out", o.out, "Report path (default <out-dir>/report.json)");
    add_schedule_options(sub, o.beta_min, o.beta_max, o.t_max, o.t_min);
}

}  // namespace

int run(int argc, const char* const* argv) {
    CLI::App app{"Score-based estimators of TC, DTC, S-information and O-information", "oinfo"};
    app.set_config("--config", "", "Config file (TOML/INI; one section per subcommand)");
    app.require_subcommand(1);
    app.fallthrough();

    Common common;
    const char* env_dir = std::getenv(kOutputDirEnv);
    common.out_dir = env_dir && *env_dir ? env_dir : ".";
    app.add_option("--out-dir", common.out_dir, std::string("Default output directory (env ") + kOutputDirEnv + ")")
        ->capture_default_str();

    OracleOpts oracle_o;
    auto* oracle = app.add_subcommand("oracle", "Closed-form Gaussian measures and gradients as JSON");
    oracle->add_option("--system", oracle_o.system, "Benchmark system, e.g. redundant:n=3,dim=1,sigma=1")->required();
    oracle->add_option("--out", oracle_o.out, "Output path (default stdout)");

    GenOpts gen_o;
    auto* gen = app.add_subcommand("gen", "Sample a benchmark dataset");
    gen->add_option("--system", gen_o.system, "Benchmark system")->required();
    gen->add_option("--samples", gen_o.samples, "Number of samples")->capture_default_str();
    gen->add_option("--seed", gen_o.seed, "Seed")->capture_default_str();
    gen->add_option("--format", gen_o.format, "Payload: f32 | f64 | csv")->capture_default_str();
    gen->add_option("--out", gen_o.out, "Header path (default <out-dir>/dataset.json)");

    TrainOpts train_o;
    auto* train = app.add_subcommand("train", "Train the denoising network");
    train->add_option("--system", train_o.system, "Benchmark system to sample training data from");
    train->add_option("--data", train_o.data, "Training dataset file");
    train->add_option("--partition", train_o.partition, "Comma-separated variable dims");
    train->add_option("--samples", train_o.samples, "Training samples when --system is given")->capture_default_str();
    train->add_option("--iterations", train_o.iterations, "Training steps")->capture_default_str();
    train->add_option("--batch", train_o.batch, "Batch size")->capture_default_str();
    train->add_option("--lr", train_o.lr, "Adam learning rate")->capture_default_str();
    train->add_option("--ema", train_o.ema, "EMA decay")->capture_default_str();
    train->add_option("--task-mode", train_o.task_mode, "standard | with_gradients")->capture_default_str();
    train->add_option("--time-sampling", train_o.time_sampling, "uniform | importance")->capture_default_str();
    train->add_option("--seed", train_o.seed, "Seed")->capture_default_str();
    train->add_option("--width", train_o.width, "Hidden width (0: by dimension)")->capture_default_str();
    train->add_option("--blocks", train_o.blocks, "Residual blocks")->capture_default_str();
    train->add_option("--embed", train_o.embed, "Time embedding size (0: by dimension)")->capture_default_str();
    train->add_option("--checkpoint", train_o.checkpoint, "Checkpoint path (default <out-dir>/model.ckpt)");
    train->add_option("--log", train_o.log, "Training log CSV (default <out-dir>/train_log.csv)");
    add_schedule_options(train, train_o.beta_min, train_o.beta_max, train_o.t_max, train_o.t_min);

    EstimateOpts est_o;
    auto* estimate = app.add_subcommand("estimate", "Estimate TC, DTC, S and O-information");
    add_estimate_options(estimate, est_o);
    estimate->add_flag("--gradients", est_o.gradients, "Also estimate per-variable gradients");

    EstimateOpts grad_o;
    auto* grad = app.add_subcommand("grad", "Estimate per-variable O-information gradients");
    add_estimate_options(grad, grad_o);

    SweepOpts sweep_o;
    auto* sweep = app.add_subcommand("sweep", "Benchmark sweep over sigma and dims as long-format CSV");
    sweep->add_option("--kind", sweep_o.kind, "redundant | synergistic")->capture_default_str();
    sweep->add_option("--n-vars", sweep_o.n_vars, "Number of variables")->capture_default_str();
    sweep->add_option("--dims", sweep_o.dims, "Comma-separated per-variable dims")->capture_default_str();
    sweep->add_option("--sigmas", sweep_o.sigmas, "Comma-separated sigma values (default: log grid)");
    sweep->add_option("--sigma-min", sweep_o.sigma_min, "Log grid start")->capture_default_str();
    sweep->add_option("--sigma-max", sweep_o.sigma_max, "Log grid end")->capture_default_str();
    sweep->add_option("--sigma-points", sweep_o.sigma_points, "Log grid size")->capture_default_str();
    sweep->add_option("--seeds", sweep_o.seeds, "Seeds per cell")->capture_default_str();
    sweep->add_option("--seed", sweep_o.seed, "Base seed")->capture_default_str();
    sweep->add_option("--estimators", sweep_o.estimators, "exact,trained")->capture_default_str();
    sweep->add_option("--samples", sweep_o.samples, "Test samples per cell")->capture_default_str();
    sweep->add_option("--train-samples", sweep_o.train_samples, "Training samples (trained)")->capture_default_str();
    sweep->add_option("--iterations", sweep_o.iterations, "Training steps (trained)")->capture_default_str();
    sweep->add_option("--lr", sweep_o.lr, "Learning rate (trained)")->capture_default_str();
    sweep->add_option("--mc-steps", sweep_o.mc_steps, "Time draws per sample")->capture_default_str();
    sweep->add_option("--time-sampling", sweep_o.time_sampling, "uniform | importance")->capture_default_str();
    sweep->add_option("--out", sweep_o.out, "CSV path (default <out-dir>/sweep.csv)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (oracle->parsed()) return cmd_oracle(oracle_o);
        if (gen->parsed()) return cmd_gen(gen_o, common);
        if (train->parsed()) return cmd_train(train_o, common);
        if (estimate->parsed()) return cmd_estimate(est_o, common);
        if (grad->parsed()) return cmd_grad(grad_o, common);
        if (sweep->parsed()) return cmd_sweep(sweep_o, common);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    return kExitConfig;
}

int run(const std::vector<std::string>& args) {
    std::vector<const char*> argv{"oinfo"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace oinfo::cli
