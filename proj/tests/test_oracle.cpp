#include "oinfo/errors.hpp"
#include "oinfo/oracle.hpp"
#include "oinfo/systems.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace oinfo;

// Reference numbers come from tests/reference/gaussian_reference.py (numpy/scipy).

namespace {

Matrix equicorrelated(Eigen::Index n, double rho) {
    Matrix m = Matrix::Constant(n, n, rho);
    m.diagonal().setOnes();
    return m;
}

}  // namespace

TEST_CASE("gaussian entropy closed forms") {
    const double h1 = 0.5 * (1.0 + std::log(2.0 * std::numbers::pi));
    CHECK(gaussian_entropy(Matrix::Identity(1, 1)) == doctest::Approx(1.4189385332046727));
    CHECK(gaussian_entropy(Matrix::Identity(5, 5)) == doctest::Approx(5 * h1));
    CHECK(gaussian_entropy(Matrix::Constant(1, 1, 4.0)) == doctest::Approx(h1 + 0.5 * std::log(4.0)));
}

TEST_CASE("measures of the identity are zero") {
    const auto m = measures(Matrix::Identity(4, 4), VariablePartition::uniform(4, 1));
    CHECK(std::abs(m.tc) < 1e-14);
    CHECK(std::abs(m.dtc) < 1e-14);
    CHECK(std::abs(m.s_info) < 1e-14);
    CHECK(std::abs(m.o_info) < 1e-14);
}

TEST_CASE("equicorrelated N=3 measures") {
    const auto m = measures(equicorrelated(3, 0.5), VariablePartition::uniform(3, 1));
    CHECK(m.tc == doctest::Approx(0.3465735902799727).epsilon(1e-13));
    CHECK(m.dtc == doctest::Approx(0.26162407188227377).epsilon(1e-13));
    CHECK(m.s_info == doctest::Approx(0.6081976621622465).epsilon(1e-13));
    CHECK(m.o_info == doctest::Approx(0.08494951839769893).epsilon(1e-12));
}

TEST_CASE("two variables: TC = DTC = MI and Omega = 0") {
    for (double rho : {0.1, 0.5, 0.9}) {
        const auto m = measures(equicorrelated(2, rho), VariablePartition::uniform(2, 1));
        const double mi = -0.5 * std::log(1 - rho * rho);
        CHECK(m.tc == doctest::Approx(mi));
        CHECK(m.dtc == doctest::Approx(mi));
        CHECK(std::abs(m.o_info) < 1e-12);
    }
}

TEST_CASE("benchmark reference values") {
    struct Row {
        std::size_t n, dim;
        double sigma, omega;
    };
    for (const Row& r : {Row{3, 1, 0.5, 0.40079468137758845}, Row{3, 5, 1.0, 0.42474759198849554},
                         Row{6, 1, 1.0, 0.5959834321062942}, Row{6, 5, 2.0, 0.3461073452097594}}) {
        const auto c = build_redundant_cov(r.n, r.dim, r.sigma);
        CHECK(measures(c.cov, c.partition).o_info == doctest::Approx(r.omega).epsilon(1e-11));
    }
    const auto s = build_synergistic_cov(4, 1, 0.1);
    CHECK(measures(s.cov, s.partition).o_info == doctest::Approx(-3.3923237240844926).epsilon(1e-11));
    const auto s1 = build_synergistic_cov(4, 1, 1.0);
    CHECK(measures(s1.cov, s1.partition).o_info == doctest::Approx(-0.20273255405408186).epsilon(1e-11));
}

TEST_CASE("N=3 Omega equals co-information") {
    RngStream rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        Matrix a(3, 3);
        rng.fill_normal(a);
        const Matrix cov = a * a.transpose() + 0.2 * Matrix::Identity(3, 3);
        const double co = gaussian_mutual_information(cov, {0}, {1}) - gaussian_mutual_information(cov, {0}, {1}, {2});
        CHECK(std::abs(measures(cov, VariablePartition::uniform(3, 1)).o_info - co) < 1e-10);
    }
}

TEST_CASE("gradients") {
    const VariablePartition p3 = VariablePartition::uniform(3, 1);
    const Matrix eq3 = equicorrelated(3, 0.5);
    const double omega = measures(eq3, p3).o_info;
    for (double g : gradients(eq3, p3)) CHECK(g == doctest::Approx(omega).epsilon(1e-12));

    const auto g4 = gradients(equicorrelated(4, 0.5), VariablePartition::uniform(4, 1));
    for (double g : g4) CHECK(g == doctest::Approx(0.1381940329165099).epsilon(1e-11));

    // A variable independent of the rest has zero gradient.
    Matrix with_free = Matrix::Identity(4, 4);
    with_free.topLeftCorner(3, 3) = eq3;
    CHECK(std::abs(gradient(with_free, VariablePartition::uniform(4, 1), 3)) < 1e-12);

    const auto mixed = build_mixed_cov({SystemSpec::redundant(3, 1, 1.0), SystemSpec::synergistic(3, 1, 0.5)});
    const auto gm = gradients(mixed.cov, mixed.partition);
    for (int i = 0; i < 3; ++i) CHECK(gm[i] == doctest::Approx(0.08494951839769715).epsilon(1e-10));
    for (int i = 3; i < 6; ++i) CHECK(gm[i] == doctest::Approx(-0.5493061443340581).epsilon(1e-10));

    CHECK_THROWS_AS(gradients(equicorrelated(2, 0.5), VariablePartition::uniform(2, 1)), ConfigError);
}

TEST_CASE("invariants over random benchmark systems") {
    RngStream rng(5);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = 3 + rng.uniform_index(4);
        const std::size_t dim = 1 + rng.uniform_index(3);
        const double sigma = std::exp(-2.0 + 4.0 * rng.uniform());
        const auto c = rng.uniform() < 0.5 ? build_redundant_cov(n, dim, sigma) : build_synergistic_cov(n, dim, sigma);
        const auto m = measures(c.cov, c.partition);
        CHECK(std::abs(m.s_info - (m.tc + m.dtc)) < 1e-10);
        CHECK(m.tc >= -1e-10);
        CHECK(m.dtc >= -1e-10);
    }
}

TEST_CASE("exact score limits") {
    const DiffusionSchedule sch;
    const VariablePartition p = VariablePartition::uniform(3, 1);
    Vector x(3);
    x << 0.3, -1.2, 2.0;
    const Vector s_id = exact_score(Matrix::Identity(3, 3), p, ScoreTask::joint(), x, 0.37, sch);
    CHECK((s_id + x).cwiseAbs().maxCoeff() < 1e-12);

    const Vector s_t = exact_score(equicorrelated(3, 0.5), p, ScoreTask::joint(), x, 1.0, sch);
    CHECK((s_t + x).cwiseAbs().maxCoeff() < 1e-2);
}

namespace {

// Log density of the target block of `task`, noised at time t, evaluated from
// scratch with the Schur complement and the VP kernel coefficients.
double noised_log_density(const Matrix& cov, const VariablePartition& p, const ScoreTask& task, const Vector& input,
                          double t, const DiffusionSchedule& sch) {
    const IndexList target = target_indices(task, p);
    IndexList given;
    if (task.kind == ScoreTask::Kind::Conditional) given = p.indices(task.given);
    Vector mu = Vector::Zero(static_cast<Eigen::Index>(target.size()));
    if (!given.empty()) {
        Vector xg(static_cast<Eigen::Index>(given.size()));
        for (std::size_t k = 0; k < given.size(); ++k) xg(k) = input(given[k]);
        mu = submatrix(cov, target, given) * submatrix(cov, given, given).inverse() * xg;
    }
    const Matrix sc = schur_conditional(cov, target, given);
    const auto c = coeffs(sch, t);
    const Matrix var = c.alpha * c.alpha * sc + c.sigma * c.sigma * Matrix::Identity(sc.rows(), sc.cols());
    Vector r(static_cast<Eigen::Index>(target.size()));
    for (std::size_t k = 0; k < target.size(); ++k) r(k) = input(target[k]) - c.alpha * mu(k);
    return -0.5 * r.dot(var.inverse() * r) - 0.5 * std::log(var.determinant());
}

}  // namespace

TEST_CASE("exact conditional score matches finite differences of the noised log density") {
    const DiffusionSchedule sch;
    const auto c = build_synergistic_cov(4, 2, 0.5);
    const auto& p = c.partition;
    RngStream rng(8);
    for (const ScoreTask& task : {ScoreTask::full_conditional(1, 4), ScoreTask::conditional(2, {0, 3}),
                                  ScoreTask::marginal(0), ScoreTask::joint()}) {
        for (double t : {0.01, 0.2, 0.8}) {
            Vector x(8);
            for (Eigen::Index k = 0; k < 8; ++k) x(k) = rng.normal();
            const Vector s = exact_score(c.cov, p, task, x, t, sch);
            const IndexList target = target_indices(task, p);
            const double h = 1e-5;
            for (std::size_t k = 0; k < target.size(); ++k) {
                Vector xp = x, xm = x;
                xp(target[k]) += h;
                xm(target[k]) -= h;
                const double fd = (noised_log_density(c.cov, p, task, xp, t, sch) -
                                   noised_log_density(c.cov, p, task, xm, t, sch)) / (2 * h);
                CHECK(std::abs(fd - s(static_cast<Eigen::Index>(k))) <= 1e-5);
            }
        }
    }
}

TEST_CASE("exact score is continuous in t") {
    const DiffusionSchedule sch;
    const auto c = build_redundant_cov(3, 1, 1.0);
    Vector x(3);
    x << 0.5, -0.3, 1.1;
    const double dt = 1e-6;
    for (double t : {0.05, 0.3, 0.7}) {
        const Vector a = exact_score(c.cov, c.partition, ScoreTask::full_conditional(0, 3), x, t, sch);
        const Vector b = exact_score(c.cov, c.partition, ScoreTask::full_conditional(0, 3), x, t + dt, sch);
        CHECK((a - b).cwiseAbs().maxCoeff() < 1e3 * dt);
    }
}

TEST_CASE("exact score source checks shapes and tasks") {
    const DiffusionSchedule sch;
    const auto c = build_redundant_cov(3, 1, 1.0);
    GaussianScoreSource src(c.cov, c.partition, sch);
    CHECK(src.supports(ScoreTask::conditional(0, {1})));
    CHECK_FALSE(src.supports(ScoreTask::conditional(0, {7})));
    CHECK_THROWS_AS(src.score(ScoreTask::joint(), Matrix::Zero(2, 4), Vector::Constant(4, 0.5)), ConfigError);
    CHECK_THROWS_AS(GaussianScoreSource(Matrix::Ones(3, 3), c.partition, sch), NumericError);
}
