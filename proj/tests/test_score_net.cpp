#include "oinfo/errors.hpp"
#include "oinfo/score_net.hpp"
#include "oinfo/trainer.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace oinfo;

TEST_CASE("encode_task examples") {
    const DiffusionSchedule s;
    CHECK(encode_task(ScoreTask::joint(), 0.4, 3, s) == TauVector{0.4, 0.4, 0.4});
    CHECK(encode_task(ScoreTask::conditional(1, {0, 2}), 0.4, 3, s) == TauVector{0.0, 0.4, 0.0});
    CHECK(encode_task(ScoreTask::marginal(1), 0.4, 3, s) == TauVector{1.0, 0.4, 1.0});
    CHECK(encode_task(ScoreTask::conditional(0, {2}), 0.4, 3, s) == TauVector{0.4, 1.0, 0.0});
    CHECK(ScoreTask::conditional(2, {}) == ScoreTask::marginal(2));
    CHECK_THROWS_AS(encode_task(ScoreTask::conditional(1, {1, 2}), 0.4, 3, s), ConfigError);
    CHECK_THROWS_AS(encode_task(ScoreTask::marginal(5), 0.4, 3, s), ConfigError);
    CHECK_THROWS_AS(encode_task(ScoreTask::joint(), 0.0, 3, s), ConfigError);
}

TEST_CASE("encode_task is injective over tasks and times") {
    const DiffusionSchedule s;
    const auto tasks = required_tasks(4, TaskMode::WithGradients);
    std::vector<TauVector> seen;
    for (const auto& task : tasks)
        for (double t : {0.01, 0.3, 0.99}) seen.push_back(encode_task(task, t, 4, s));
    std::sort(seen.begin(), seen.end());
    CHECK(std::adjacent_find(seen.begin(), seen.end()) == seen.end());
}

TEST_CASE("assemble_input places clean, perturbed and dropped blocks") {
    const VariablePartition p({2, 1, 1});
    Matrix clean = Matrix::Constant(4, 3, 5.0);
    Matrix noisy = Matrix::Constant(4, 3, -5.0);
    RngStream rng(1);

    const Matrix joint = assemble_input(p, ScoreTask::joint(), clean, noisy, rng);
    CHECK(joint == noisy);

    const Matrix cond = assemble_input(p, ScoreTask::full_conditional(0, 3), clean, noisy, rng);
    CHECK(cond.topRows(2) == noisy.topRows(2));
    CHECK(cond.bottomRows(2) == clean.bottomRows(2));

    const Matrix m1 = assemble_input(p, ScoreTask::marginal(1), clean, noisy, rng);
    const Matrix m2 = assemble_input(p, ScoreTask::marginal(1), clean, noisy, rng);
    CHECK(m1.row(2) == noisy.row(2));
    CHECK((m1.array().abs() < 5.0).topRows(2).all());
    CHECK(m1.topRows(2) != m2.topRows(2));

    CHECK_THROWS_AS(assemble_input(p, ScoreTask::joint(), Matrix::Zero(3, 3), noisy, rng), ConfigError);
}

TEST_CASE("marginal noise fill is standard normal") {
    const VariablePartition p({1, 1});
    RngStream rng(3);
    const Eigen::Index n = 100000;
    const Matrix fill = assemble_input(p, ScoreTask::marginal(0), Matrix::Zero(2, n), Matrix::Zero(2, n), rng);
    const double mean = fill.row(1).mean();
    const double var = (fill.row(1).array() - mean).square().mean();
    CHECK(std::abs(mean) < 0.01);
    CHECK(std::abs(var - 1.0) < 0.02);
}

namespace {

NetConfig small_config() { return NetConfig{8, 2, 6}; }

}  // namespace

TEST_CASE("forward is deterministic and shaped like the data") {
    ScoreNet<float> net(small_config(), VariablePartition({2, 1}), 1.0);
    RngStream init(4);
    net.init(init, false);
    MatrixT<float> x = MatrixT<float>::Random(3, 5);
    MatrixT<float> tau = MatrixT<float>::Constant(2, 5, 0.3f);
    const auto a = net.forward(x, tau);
    const auto b = net.forward(x, tau);
    CHECK(a.rows() == 3);
    CHECK(a.cols() == 5);
    CHECK(a == b);
    CHECK_THROWS_AS(net.forward(MatrixT<float>::Zero(2, 5), tau), ConfigError);
}

TEST_CASE("zero output layer predicts zero noise") {
    ScoreNet<float> net(small_config(), VariablePartition({1, 1}), 1.0);
    RngStream init(4);
    net.init(init);
    const auto out = net.forward(MatrixT<float>::Random(2, 4), MatrixT<float>::Constant(2, 4, 0.5f));
    CHECK(out.cwiseAbs().maxCoeff() == 0.0f);
}

TEST_CASE("forward output is finite on bounded inputs") {
    ScoreNet<float> net(NetConfig{32, 4, 16}, VariablePartition({2, 3, 1}), 1.0);
    RngStream init(5);
    net.init(init, false);
    RngStream rng(6);
    for (int trial = 0; trial < 20; ++trial) {
        MatrixT<float> x(6, 64), tau(3, 64);
        for (Eigen::Index c = 0; c < 64; ++c) {
            for (Eigen::Index r = 0; r < 6; ++r) x(r, c) = static_cast<float>(-10.0 + 20.0 * rng.uniform());
            for (Eigen::Index r = 0; r < 3; ++r) tau(r, c) = static_cast<float>(rng.uniform());
        }
        CHECK(net.forward(x, tau).allFinite());
    }
}

TEST_CASE("loss gradient matches central differences") {
    ScoreNet<double> net(small_config(), VariablePartition({2, 1}), 1.0);
    RngStream init(7);
    net.init(init, false);
    RngStream rng(8);
    MatrixT<double> x(3, 6), eps(3, 6), tau(2, 6);
    rng.fill_normal(x);
    rng.fill_normal(eps);
    for (Eigen::Index c = 0; c < 6; ++c)
        for (Eigen::Index r = 0; r < 2; ++r) tau(r, c) = rng.uniform();

    for (auto [begin, count] : {std::pair<Eigen::Index, Eigen::Index>{0, 3}, {0, 2}, {2, 1}}) {
        net.loss_and_grad(x, tau, eps, begin, count);
        auto& params = net.params();
        std::size_t checked = 0;
        double worst = 0.0;
        for (std::size_t a = 0; a < params.size(); ++a) {
            const Eigen::Index size = params[a].value.size();
            // Up to 12 entries per array, spread across it.
            const Eigen::Index stride = std::max<Eigen::Index>(1, size / 12);
            for (Eigen::Index k = 0; k < size; k += stride) {
                double& w = params[a].value.data()[k];
                const double analytic = params[a].grad.data()[k];
                const double saved = w;
                const double h = 1e-6;
                w = saved + h;
                const double up = net.loss(x, tau, eps, begin, count);
                w = saved - h;
                const double down = net.loss(x, tau, eps, begin, count);
                w = saved;
                const double fd = (up - down) / (2 * h);
                const double scale = std::max({std::abs(fd), std::abs(analytic), 1e-6});
                worst = std::max(worst, std::abs(fd - analytic) / scale);
                ++checked;
            }
        }
        CHECK(checked >= 100);
        CHECK(worst <= 1e-3);
    }
}

TEST_CASE("score_from_eps") {
    CHECK(score_from_eps(Matrix::Zero(2, 2), 0.5) == Matrix::Zero(2, 2));
    CHECK(score_from_eps(Matrix::Constant(1, 1, 0.5), 0.25)(0, 0) == -2.0);
    CHECK_THROWS_AS(score_from_eps(Matrix::Zero(1, 1), 0.0), ConfigError);

    // With the true noise of standard-normal data at t = T, -eps/sigma is close to -x_t.
    const DiffusionSchedule s;
    const auto c = coeffs(s, s.t_max);
    RngStream rng(2);
    Matrix x(1, 1000), eps(1, 1000);
    rng.fill_normal(x);
    rng.fill_normal(eps);
    const Perturbed p = perturb(x, Vector::Constant(1000, s.t_max), eps, s);
    const Matrix score = score_from_eps(eps, c.sigma);
    CHECK((score + p.x_t).cwiseAbs().maxCoeff() < 0.05);
}

TEST_CASE("network score source reads the target block") {
    const DiffusionSchedule s;
    ScoreNet<float> net(small_config(), VariablePartition({2, 1}), s.t_max);
    RngStream init(9);
    net.init(init, false);
    const NetworkScoreSource src(net, s, required_tasks(2, TaskMode::Standard));
    Matrix input = Matrix::Random(3, 4);
    const Vector t = Vector::Constant(4, 0.5);
    const Matrix cond = src.score(ScoreTask::full_conditional(1, 2), input, t);
    CHECK(cond.rows() == 1);
    MatrixT<float> tau(2, 4);
    tau.row(0).setZero();
    tau.row(1).setConstant(0.5f);
    const auto eps = net.forward(input.cast<float>(), tau);
    const double sigma = coeffs(s, 0.5).sigma;
    for (Eigen::Index b = 0; b < 4; ++b) CHECK(cond(0, b) == doctest::Approx(-eps(2, b) / sigma));
    CHECK(src.score(ScoreTask::joint(), input, t).rows() == 3);
    const NetworkScoreSource joint_only(net, s, {ScoreTask::joint()});
    CHECK_FALSE(joint_only.supports(ScoreTask::marginal(0)));
    CHECK_THROWS_AS(joint_only.score(ScoreTask::marginal(0), input, t), ConfigError);
}

TEST_CASE("trained network recovers the score of 1-d standard normal data") {
    // Score of N(0, 1) noised by the VP kernel is -x_t / (alpha^2 + sigma^2) = -x_t.
    const DiffusionSchedule s;
    const VariablePartition p({1});
    ScoreNet<float> net(NetConfig{32, 2, 32}, p, s.t_max);
    RngStream init(1);
    net.init(init);
    AdamConfig adam;
    adam.learning_rate = 1e-3;
    AdamState<float> opt(net.params());
    const TimeSampler sampler(s, TimeSampling::Uniform);
    RngStream rng(7);
    for (int k = 0; k < 10000; ++k) {
        Matrix x(1, 256);
        rng.fill_normal(x);
        training_step(net, opt, adam, make_training_batch(x, ScoreTask::joint(), p, s, sampler, rng));
    }
    ScoreNet<float> ema = net;
    ema.set_params(opt.ema.snapshot());

    // Evaluated on t in [0.05, 1].
    double sq = 0.0;
    const int n = 2000;
    for (int k = 0; k < n; ++k) {
        const double t = 0.05 + 0.95 * (k + 0.5) / n;
        const double xt = rng.normal();
        MatrixT<float> in(1, 1), tau(1, 1);
        in(0, 0) = static_cast<float>(xt);
        tau(0, 0) = static_cast<float>(t);
        const double score = -ema.forward(in, tau)(0, 0) / coeffs(s, t).sigma;
        sq += (score + xt) * (score + xt);
    }
    const double rms = std::sqrt(sq / n);
    MESSAGE("1-d score RMS error: " << rms);
    CHECK(rms <= 0.05);
}
