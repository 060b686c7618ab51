#include "oinfo/estimators.hpp"

#include "oinfo/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace oinfo {

void EstimateConfig::validate() const {
    if (mc_steps < 1) throw ConfigError("mc_steps must be at least 1");
    if (n_seeds < 1) throw ConfigError("seeds must be at least 1");
    if (chunk_size < 1) throw ConfigError("chunk_size must be at least 1");
}

nlohmann::json to_json(const EstimateConfig& c) {
    return {{"mc_steps", c.mc_steps},
            {"seeds", c.n_seeds},
            {"seed", c.seed},
            {"time_sampling", to_string(c.time_sampling)},
            {"chunk_size", c.chunk_size}};
}

nlohmann::json to_json(const MeasureEstimate& m) {
    return {{"value", m.value},
            {"std_error", m.std_error},
            {"n_samples", m.n_samples},
            {"mc_steps", m.mc_steps},
            {"seeds", m.n_seeds},
            {"time_sampling", to_string(m.time_sampling)},
            {"per_seed", m.per_seed}};
}

nlohmann::json to_json(const OInfoEstimate& e) {
    return {{"tc", to_json(e.tc)}, {"dtc", to_json(e.dtc)}, {"s", to_json(e.s_info)}, {"o_info", to_json(e.o_info)}};
}

const char* to_string(GradientForm form) { return form == GradientForm::MutualInfo ? "mutual_info" : "subsystem"; }

GradientForm parse_gradient_form(const std::string& text) {
    if (text == "mutual_info" || text == "mi") return GradientForm::MutualInfo;
    if (text == "subsystem") return GradientForm::Subsystem;
    throw ConfigError("unknown gradient form '" + text + "' (expected mutual_info|subsystem)");
}

namespace {

constexpr std::size_t kWhole = std::numeric_limits<std::size_t>::max();

struct Eval {
    const ScoreSource* source;
    ScoreTask task;
};

// quantity[q] += coef * ||eval_a - eval_b||^2 restricted to `block` (kWhole: every output row)
struct Term {
    std::size_t a;
    std::size_t b;
    std::size_t block;
    std::size_t quantity;
    double coef;
};

struct Plan {
    std::vector<Eval> evals;
    std::vector<Term> terms;
    std::size_t n_quantities = 0;

    std::size_t eval(const ScoreSource& source, const ScoreTask& task) {
        for (std::size_t e = 0; e < evals.size(); ++e)
            if (evals[e].source == &source && evals[e].task == task) return e;
        if (!source.supports(task))
            throw ConfigError("score task " + task.name() + " is not available from the " + source.kind() +
                              " score source");
        evals.push_back({&source, task});
        return evals.size() - 1;
    }
};

struct SeedResult {
    std::vector<double> mean;
    std::vector<double> within_se;
};

std::vector<std::size_t> complement(std::size_t n, std::initializer_list<std::size_t> skip) {
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < n; ++k)
        if (std::find(skip.begin(), skip.end(), k) == skip.end()) out.push_back(k);
    return out;
}

auto block_rows(const Matrix& out, const ScoreTask& task, std::size_t block, const VariablePartition& part) {
    if (block == kWhole || task.kind != ScoreTask::Kind::Joint) return out.middleRows(0, out.rows());
    return out.middleRows(static_cast<Eigen::Index>(part.offset(block)), static_cast<Eigen::Index>(part.dim(block)));
}

double mean_of(std::vector<double>& v) { return pairwise_sum(v) / static_cast<double>(v.size()); }

SeedResult run_seed(const Plan& plan, const Dataset& data, const EstimateConfig& config, std::size_t seed_index) {
    const VariablePartition& part = plan.evals.front().source->partition();
    if (!(data.partition == part)) throw ConfigError("dataset partition does not match the score source");
    if (data.n_samples() == 0) throw ConfigError("cannot estimate on an empty dataset");
    if (!data.samples.allFinite()) throw NumericError("dataset contains non-finite values");

    const DiffusionSchedule& schedule = plan.evals.front().source->schedule();
    const TimeSampler sampler(schedule, config.time_sampling);
    const RngStream seed_rng = RngStream(config.seed, 0).substream(seed_index);
    const auto m = static_cast<Eigen::Index>(data.n_samples());
    const auto d = data.samples.cols();
    const auto chunk = static_cast<Eigen::Index>(config.chunk_size);

    std::vector<std::vector<double>> columns(plan.n_quantities);
    for (auto& c : columns) c.reserve(static_cast<std::size_t>(m) * config.mc_steps);

    std::vector<Matrix> outputs(plan.evals.size());
    for (Eigen::Index r0 = 0, c = 0; r0 < m; r0 += chunk, ++c) {
        const Eigen::Index n = std::min(chunk, m - r0);
        const Matrix clean = data.samples.middleRows(r0, n).transpose();
        const RngStream chunk_rng = seed_rng.substream(static_cast<std::uint64_t>(c));
        for (std::size_t k = 0; k < config.mc_steps; ++k) {
            RngStream rng = chunk_rng.substream(k);
            Vector t(n), scale(n);
            for (Eigen::Index b = 0; b < n; ++b) {
                const TimeDraw draw = sampler.sample(rng);
                t(b) = draw.t;
                scale(b) = 0.5 * coeffs(schedule, draw.t).g2 * draw.weight;
            }
            Matrix eps(d, n);
            rng.fill_normal(eps);
            const Matrix x_t = perturb(clean, t, eps, schedule).x_t;
            for (std::size_t e = 0; e < plan.evals.size(); ++e) {
                RngStream fill = rng.substream(e + 1);
                const Eval& ev = plan.evals[e];
                outputs[e] = ev.source->score(ev.task, assemble_input(part, ev.task, clean, x_t, fill), t);
                if (!outputs[e].allFinite())
                    throw NumericError("non-finite score from task " + ev.task.name());
            }
            std::vector<Vector> acc(plan.n_quantities, Vector::Zero(n));
            for (const Term& term : plan.terms) {
                const auto lhs = block_rows(outputs[term.a], plan.evals[term.a].task, term.block, part);
                const auto rhs = block_rows(outputs[term.b], plan.evals[term.b].task, term.block, part);
                acc[term.quantity] += term.coef * (lhs - rhs).colwise().squaredNorm().transpose();
            }
            for (std::size_t q = 0; q < plan.n_quantities; ++q) {
                const Vector v = acc[q].cwiseProduct(scale);
                columns[q].insert(columns[q].end(), v.data(), v.data() + n);
            }
        }
    }

    SeedResult result;
    for (auto& col : columns) {
        const double mu = mean_of(col);
        std::vector<double> sq(col.size());
        for (std::size_t j = 0; j < col.size(); ++j) sq[j] = (col[j] - mu) * (col[j] - mu);
        const double var = col.size() > 1 ? pairwise_sum(sq) / static_cast<double>(col.size() - 1) : 0.0;
        result.mean.push_back(mu);
        result.within_se.push_back(std::sqrt(var / static_cast<double>(col.size())));
    }
    return result;
}

std::vector<SeedResult> run(const Plan& plan, const std::vector<const Dataset*>& seeds, const EstimateConfig& config) {
    std::vector<SeedResult> out;
    for (std::size_t s = 0; s < seeds.size(); ++s) out.push_back(run_seed(plan, *seeds[s], config, s));
    return out;
}

MeasureEstimate combine(const std::vector<SeedResult>& results, std::size_t q, const EstimateConfig& config,
                        std::size_t n_samples) {
    MeasureEstimate m;
    m.n_samples = n_samples;
    m.mc_steps = config.mc_steps;
    m.n_seeds = results.size();
    m.time_sampling = config.time_sampling;
    for (const auto& r : results) m.per_seed.push_back(r.mean[q]);
    const double n = static_cast<double>(m.per_seed.size());
    m.value = pairwise_sum(m.per_seed) / n;
    if (m.per_seed.size() == 1) {
        m.std_error = results.front().within_se[q];
    } else {
        std::vector<double> sq;
        for (double v : m.per_seed) sq.push_back((v - m.value) * (v - m.value));
        m.std_error = std::sqrt(pairwise_sum(sq) / (n - 1.0) / n);
    }
    return m;
}

MeasureEstimate zero_estimate(const EstimateConfig& config, std::size_t n_seeds, std::size_t n_samples) {
    MeasureEstimate m;
    m.n_samples = n_samples;
    m.mc_steps = config.mc_steps;
    m.n_seeds = n_seeds;
    m.time_sampling = config.time_sampling;
    m.per_seed.assign(n_seeds, 0.0);
    return m;
}

std::vector<const Dataset*> per_seed_views(std::span<const Dataset> per_seed, const EstimateConfig& config) {
    config.validate();
    if (per_seed.size() != config.n_seeds)
        throw ConfigError("expected one dataset per seed (" + std::to_string(config.n_seeds) + "), got " +
                          std::to_string(per_seed.size()));
    std::vector<const Dataset*> out;
    for (const auto& d : per_seed) out.push_back(&d);
    return out;
}

std::vector<const Dataset*> repeated_view(const Dataset& data, const EstimateConfig& config) {
    config.validate();
    return std::vector<const Dataset*>(config.n_seeds, &data);
}

// Quantities: 0 TC, 1 DTC, 2 S, 3 TC - DTC.
enum Measures : unsigned { kTc = 1, kDtc = 2, kS = 4 };

Plan measure_plan(const ScoreSource& source, unsigned which) {
    const std::size_t n = source.partition().n_vars();
    Plan plan;
    plan.n_quantities = 4;
    const bool need_joint = which & (kTc | kDtc);
    const bool need_marg = which & (kTc | kS);
    const bool need_cond = which & (kDtc | kS);
    const std::size_t joint = need_joint ? plan.eval(source, ScoreTask::joint()) : 0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t marg = need_marg ? plan.eval(source, ScoreTask::marginal(i)) : 0;
        const std::size_t cond = need_cond ? plan.eval(source, ScoreTask::full_conditional(i, n)) : 0;
        if (which & kTc) {
            plan.terms.push_back({joint, marg, i, 0, 1.0});
            if (which & kDtc) plan.terms.push_back({joint, marg, i, 3, 1.0});
        }
        if (which & kDtc) {
            plan.terms.push_back({joint, cond, i, 1, 1.0});
            if (which & kTc) plan.terms.push_back({joint, cond, i, 3, -1.0});
        }
        if (which & kS) plan.terms.push_back({marg, cond, i, 2, 1.0});
    }
    return plan;
}

OInfoEstimate estimate_all(const ScoreSource& source, const std::vector<const Dataset*>& seeds,
                           const EstimateConfig& config) {
    const Plan plan = measure_plan(source, kTc | kDtc | kS);
    const auto results = run(plan, seeds, config);
    const std::size_t m = seeds.front()->n_samples();
    OInfoEstimate e;
    e.tc = combine(results, 0, config, m);
    e.dtc = combine(results, 1, config, m);
    e.s_info = combine(results, 2, config, m);
    e.o_info = combine(results, 3, config, m);
    // Exact identity on the reported numbers, not only up to summation order.
    e.o_info.value = e.tc.value - e.dtc.value;
    for (std::size_t s = 0; s < results.size(); ++s) e.o_info.per_seed[s] = e.tc.per_seed[s] - e.dtc.per_seed[s];
    return e;
}

MeasureEstimate estimate_single(const ScoreSource& source, const Dataset& data, const EstimateConfig& config,
                                unsigned which, std::size_t quantity) {
    const Plan plan = measure_plan(source, which);
    const auto seeds = repeated_view(data, config);
    return combine(run(plan, seeds, config), quantity, config, data.n_samples());
}

Plan gradient_plan(const ScoreSource& source, const std::vector<std::size_t>& vars, GradientForm form) {
    const std::size_t n = source.partition().n_vars();
    if (n < 3) throw ConfigError("O-information gradient needs at least 3 variables");
    Plan plan;
    plan.n_quantities = vars.size();
    for (std::size_t q = 0; q < vars.size(); ++q) {
        const std::size_t i = vars[q];
        if (i >= n) throw ConfigError("gradient variable index out of range");
        const std::size_t marg = plan.eval(source, ScoreTask::marginal(i));
        const std::size_t cond = plan.eval(source, ScoreTask::full_conditional(i, n));
        if (form == GradientForm::MutualInfo) {
            plan.terms.push_back({cond, marg, i, q, 2.0 - static_cast<double>(n)});
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                const std::size_t sub = plan.eval(source, ScoreTask::conditional(i, complement(n, {i, j})));
                plan.terms.push_back({sub, marg, i, q, 1.0});
            }
        } else {
            plan.terms.push_back({cond, marg, i, q, 1.0});
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                const std::size_t full_j = plan.eval(source, ScoreTask::full_conditional(j, n));
                const std::size_t sub_j = plan.eval(source, ScoreTask::conditional(j, complement(n, {i, j})));
                plan.terms.push_back({full_j, sub_j, j, q, -1.0});
            }
        }
    }
    return plan;
}

MeasureEstimate mi_impl(const ScoreSource& source, std::size_t target, std::vector<std::size_t> given,
                        const std::vector<const Dataset*>& seeds, const EstimateConfig& config) {
    const std::size_t n = source.partition().n_vars();
    ScoreTask cond = ScoreTask::conditional(target, std::move(given));
    cond.validate(n);
    if (cond.kind == ScoreTask::Kind::Marginal) return zero_estimate(config, seeds.size(), seeds.front()->n_samples());
    Plan plan;
    plan.n_quantities = 1;
    const std::size_t a = plan.eval(source, cond);
    const std::size_t b = plan.eval(source, ScoreTask::marginal(target));
    plan.terms.push_back({a, b, target, 0, 1.0});
    return combine(run(plan, seeds, config), 0, config, seeds.front()->n_samples());
}

MeasureEstimate divergence_impl(const ScoreSource& p, const ScoreTask& task_p, const ScoreSource& q,
                                const ScoreTask& task_q, const std::vector<const Dataset*>& seeds,
                                const EstimateConfig& config) {
    if (!(p.partition() == q.partition())) throw ConfigError("score sources have different partitions");
    const std::size_t n = p.partition().n_vars();
    task_p.validate(n);
    task_q.validate(n);
    const bool p_joint = task_p.kind == ScoreTask::Kind::Joint;
    const bool q_joint = task_q.kind == ScoreTask::Kind::Joint;
    if (p_joint != q_joint || (!p_joint && task_p.target != task_q.target))
        throw ConfigError("divergence tasks must score the same block: " + task_p.name() + " vs " + task_q.name());
    Plan plan;
    plan.n_quantities = 1;
    const std::size_t a = plan.eval(p, task_p);
    const std::size_t b = plan.eval(q, task_q);
    plan.terms.push_back({a, b, p_joint ? kWhole : task_p.target, 0, 1.0});
    return combine(run(plan, seeds, config), 0, config, seeds.front()->n_samples());
}

}  // namespace

OInfoEstimate estimate_oinfo(const ScoreSource& source, const Dataset& data, const EstimateConfig& config) {
    return estimate_all(source, repeated_view(data, config), config);
}

OInfoEstimate estimate_oinfo(const ScoreSource& source, std::span<const Dataset> per_seed,
                             const EstimateConfig& config) {
    return estimate_all(source, per_seed_views(per_seed, config), config);
}

MeasureEstimate estimate_tc(const ScoreSource& source, const Dataset& data, const EstimateConfig& config) {
    return estimate_single(source, data, config, kTc, 0);
}

MeasureEstimate estimate_dtc(const ScoreSource& source, const Dataset& data, const EstimateConfig& config) {
    return estimate_single(source, data, config, kDtc, 1);
}

MeasureEstimate estimate_s(const ScoreSource& source, const Dataset& data, const EstimateConfig& config) {
    return estimate_single(source, data, config, kS, 2);
}

MeasureEstimate estimate_mi(const ScoreSource& source, std::size_t target, std::vector<std::size_t> given,
                            const Dataset& data, const EstimateConfig& config) {
    return mi_impl(source, target, std::move(given), repeated_view(data, config), config);
}

MeasureEstimate estimate_mi(const ScoreSource& source, std::size_t target, std::vector<std::size_t> given,
                            std::span<const Dataset> per_seed, const EstimateConfig& config) {
    return mi_impl(source, target, std::move(given), per_seed_views(per_seed, config), config);
}

MeasureEstimate estimate_divergence(const ScoreSource& p, const ScoreTask& task_p, const ScoreSource& q,
                                    const ScoreTask& task_q, const Dataset& data, const EstimateConfig& config) {
    return divergence_impl(p, task_p, q, task_q, repeated_view(data, config), config);
}

MeasureEstimate estimate_divergence(const ScoreSource& p, const ScoreTask& task_p, const ScoreSource& q,
                                    const ScoreTask& task_q, std::span<const Dataset> per_seed,
                                    const EstimateConfig& config) {
    return divergence_impl(p, task_p, q, task_q, per_seed_views(per_seed, config), config);
}

MeasureEstimate estimate_gradient(const ScoreSource& source, std::size_t i, const Dataset& data,
                                  const EstimateConfig& config, GradientForm form) {
    const Plan plan = gradient_plan(source, {i}, form);
    return combine(run(plan, repeated_view(data, config), config), 0, config, data.n_samples());
}

std::vector<MeasureEstimate> estimate_gradients(const ScoreSource& source, std::span<const Dataset> per_seed,
                                                const EstimateConfig& config, GradientForm form) {
    const auto seeds = per_seed_views(per_seed, config);
    std::vector<std::size_t> vars(source.partition().n_vars());
    for (std::size_t i = 0; i < vars.size(); ++i) vars[i] = i;
    const Plan plan = gradient_plan(source, vars, form);
    const auto results = run(plan, seeds, config);
    std::vector<MeasureEstimate> out;
    for (std::size_t q = 0; q < vars.size(); ++q) out.push_back(combine(results, q, config, seeds.front()->n_samples()));
    return out;
}

}  // namespace oinfo
