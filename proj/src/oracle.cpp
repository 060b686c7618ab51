#include "oinfo/oracle.hpp"

#include "oinfo/errors.hpp"

#include <cmath>
#include <numbers>

namespace oinfo {

nlohmann::json to_json(const MeasureSet& m) {
    return {{"tc", m.tc}, {"dtc", m.dtc}, {"s_info", m.s_info}, {"o_info", m.o_info}};
}

double gaussian_entropy(const Matrix& cov) {
    const auto d = static_cast<double>(cov.rows());
    return 0.5 * d * (1.0 + std::log(2.0 * std::numbers::pi)) + 0.5 * logdet(cov);
}

namespace {

IndexList join(const IndexList& a, const IndexList& b) {
    IndexList out = a;
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

double logdet_of(const Matrix& cov, const IndexList& idx) {
    return idx.empty() ? 0.0 : logdet(submatrix(cov, idx, idx));
}

std::vector<std::size_t> all_but(std::size_t n, std::size_t skip) {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < n; ++j)
        if (j != skip) out.push_back(j);
    return out;
}

/// Measures with the per-block marginal entropies supplied by the caller.
MeasureSet measures_with(const Matrix& cov, const VariablePartition& partition,
                         const std::vector<double>& marginal_entropy) {
    const double joint = gaussian_entropy(cov);
    double sum_marginal = 0.0;
    double sum_conditional = 0.0;
    for (std::size_t i = 0; i < partition.n_vars(); ++i) {
        sum_marginal += marginal_entropy[i];
        if (partition.n_vars() == 1) {
            sum_conditional += marginal_entropy[i];
        } else {
            const auto rest = partition.indices(all_but(partition.n_vars(), i));
            sum_conditional += gaussian_entropy(schur_conditional(cov, partition.indices(i), rest));
        }
    }
    MeasureSet m;
    m.tc = sum_marginal - joint;
    m.dtc = joint - sum_conditional;
    m.s_info = m.tc + m.dtc;
    m.o_info = m.tc - m.dtc;
    return m;
}

std::vector<double> marginal_entropies(const Matrix& cov, const VariablePartition& partition) {
    std::vector<double> out;
    for (std::size_t i = 0; i < partition.n_vars(); ++i) {
        const auto idx = partition.indices(i);
        out.push_back(gaussian_entropy(submatrix(cov, idx, idx)));
    }
    return out;
}

void check_system(const Matrix& cov, const VariablePartition& partition) {
    if (cov.rows() != cov.cols() || static_cast<std::size_t>(cov.rows()) != partition.total_dim())
        throw ConfigError("covariance size does not match the partition");
}

double omega_without(const Matrix& cov, const VariablePartition& partition, std::size_t i,
                     const std::vector<double>& marginal_entropy) {
    const auto keep = all_but(partition.n_vars(), i);
    const auto idx = partition.indices(keep);
    std::vector<double> sub_marginals;
    for (auto j : keep) sub_marginals.push_back(marginal_entropy[j]);
    return measures_with(submatrix(cov, idx, idx), partition.select(keep), sub_marginals).o_info;
}

}  // namespace

double gaussian_mutual_information(const Matrix& cov, const IndexList& a, const IndexList& b, const IndexList& c) {
    return 0.5 * (logdet_of(cov, join(a, c)) + logdet_of(cov, join(b, c)) - logdet_of(cov, c) -
                  logdet_of(cov, join(join(a, b), c)));
}

MeasureSet measures(const Matrix& cov, const VariablePartition& partition) {
    check_system(cov, partition);
    return measures_with(cov, partition, marginal_entropies(cov, partition));
}

double gradient(const Matrix& cov, const VariablePartition& partition, std::size_t i) {
    check_system(cov, partition);
    if (partition.n_vars() < 3) throw ConfigError("O-information gradient needs at least 3 variables");
    if (i >= partition.n_vars()) throw ConfigError("gradient variable index out of range");
    const auto h = marginal_entropies(cov, partition);
    return measures_with(cov, partition, h).o_info - omega_without(cov, partition, i, h);
}

std::vector<double> gradients(const Matrix& cov, const VariablePartition& partition) {
    check_system(cov, partition);
    if (partition.n_vars() < 3) throw ConfigError("O-information gradient needs at least 3 variables");
    const auto h = marginal_entropies(cov, partition);
    const double omega = measures_with(cov, partition, h).o_info;
    std::vector<double> out;
    for (std::size_t i = 0; i < partition.n_vars(); ++i) out.push_back(omega - omega_without(cov, partition, i, h));
    return out;
}

GaussianScoreSource::GaussianScoreSource(Matrix cov, VariablePartition partition, DiffusionSchedule schedule,
                                         Vector mean)
    : cov_(std::move(cov)), partition_(std::move(partition)), schedule_(schedule), mean_(std::move(mean)) {
    check_system(cov_, partition_);
    schedule_.validate();
    if (mean_.size() == 0) mean_ = Vector::Zero(cov_.rows());
    if (mean_.size() != cov_.rows()) throw ConfigError("mean size does not match the covariance");
    cholesky(cov_);  // fail early on a non-PD system
}

bool GaussianScoreSource::supports(const ScoreTask& task) const {
    try {
        task.validate(partition_.n_vars());
        return true;
    } catch (const ConfigError&) {
        return false;
    }
}

const GaussianScoreSource::TaskModel& GaussianScoreSource::model_for(const ScoreTask& task) const {
    std::lock_guard lock(mutex_);
    const std::string key = task.name();
    if (auto it = cache_.find(key); it != cache_.end()) return *it->second;

    auto m = std::make_unique<TaskModel>();
    m->target = target_indices(task, partition_);
    if (task.kind == ScoreTask::Kind::Conditional) m->given = partition_.indices(task.given);
    m->weights = conditional_weights(cov_, m->target, m->given);
    const Matrix cond_cov = schur_conditional(cov_, m->target, m->given);
    Eigen::SelfAdjointEigenSolver<Matrix> es(cond_cov);
    m->eigvecs = es.eigenvectors();
    m->eigvals = es.eigenvalues().cwiseMax(0.0);
    const auto& ref = *m;
    cache_.emplace(key, std::move(m));
    return ref;
}

Matrix GaussianScoreSource::score(const ScoreTask& task, const Matrix& input, const Vector& t) const {
    task.validate(partition_.n_vars());
    if (input.rows() != cov_.rows() || input.cols() != t.size())
        throw ConfigError("score: input shape does not match the system");
    const TaskModel& m = model_for(task);
    const auto nt = static_cast<Eigen::Index>(m.target.size());
    const auto batch = input.cols();

    Matrix resid(nt, batch);
    Vector mean_t(nt);
    for (Eigen::Index k = 0; k < nt; ++k) mean_t(k) = mean_[m.target[k]];
    Matrix given_centered(static_cast<Eigen::Index>(m.given.size()), batch);
    for (std::size_t k = 0; k < m.given.size(); ++k)
        given_centered.row(static_cast<Eigen::Index>(k)) = input.row(m.given[k]).array() - mean_[m.given[k]];
    Matrix cond_mean = m.weights * given_centered;
    cond_mean.colwise() += mean_t;

    Vector alpha(batch), var_noise(batch);
    for (Eigen::Index b = 0; b < batch; ++b) {
        const auto c = coeffs(schedule_, t(b));
        alpha(b) = c.alpha;
        var_noise(b) = c.sigma * c.sigma;
    }
    for (Eigen::Index k = 0; k < nt; ++k)
        resid.row(k) = input.row(m.target[k]).array() - alpha.transpose().array() * cond_mean.row(k).array();

    Matrix y = m.eigvecs.transpose() * resid;
    for (Eigen::Index b = 0; b < batch; ++b) {
        const double a2 = alpha(b) * alpha(b);
        for (Eigen::Index k = 0; k < nt; ++k) y(k, b) /= a2 * m.eigvals(k) + var_noise(b);
    }
    return -(m.eigvecs * y);
}

Vector exact_score(const Matrix& cov, const VariablePartition& partition, const ScoreTask& task,
                   const Vector& x_input, double t, const DiffusionSchedule& schedule) {
    GaussianScoreSource src(cov, partition, schedule);
    Vector tv(1);
    tv(0) = t;
    return src.score(task, x_input, tv).col(0);
}

}  // namespace oinfo
