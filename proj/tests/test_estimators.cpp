#include "oinfo/data_io.hpp"
#include "oinfo/errors.hpp"
#include "oinfo/estimators.hpp"
#include "oinfo/oracle.hpp"
#include "oinfo/trainer.hpp"

#include <doctest.h>

#include <cmath>

using namespace oinfo;

namespace {

std::vector<Dataset> per_seed_data(const CovarianceMatrix& c, std::size_t m, std::size_t seeds, std::uint64_t seed) {
    std::vector<Dataset> out;
    for (std::size_t k = 0; k < seeds; ++k) {
        RngStream rng(seed, k);
        out.push_back(sample(c, m, rng));
    }
    return out;
}

CovarianceMatrix equicorrelated(std::size_t n, double rho) {
    Matrix m = Matrix::Constant(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n), rho);
    m.diagonal().setOnes();
    return {m, VariablePartition::uniform(n, 1)};
}

EstimateConfig default_config() {
    EstimateConfig c;
    c.mc_steps = 10;
    c.n_seeds = 5;
    c.seed = 1;
    c.time_sampling = TimeSampling::Uniform;
    return c;
}

bool within_se(const MeasureEstimate& e, double truth, double k = 3.0) {
    return std::abs(e.value - truth) <= k * e.std_error + 1e-12;
}

double combined(std::initializer_list<double> ses) {
    double s = 0.0;
    for (double v : ses) s += v * v;
    return std::sqrt(s);
}

}  // namespace

TEST_CASE("identity covariance gives zero") {
    const auto c = equicorrelated(3, 0.0);
    const GaussianScoreSource src(c.cov, c.partition, {});
    const auto data = per_seed_data(c, 10000, 5, 1);
    const auto e = estimate_oinfo(src, data, default_config());
    CHECK(std::abs(e.tc.value) <= 0.01);
    CHECK(std::abs(e.dtc.value) <= 0.01);
    CHECK(std::abs(e.s_info.value) <= 0.01);
    CHECK(std::abs(e.o_info.value) <= 0.01);
}

TEST_CASE("two variables: TC, DTC and MI all equal the closed form") {
    const double mi = -0.5 * std::log(1 - 0.25);
    CHECK(mi == doctest::Approx(0.14384103622589045));
    const auto c = equicorrelated(2, 0.5);
    const GaussianScoreSource src(c.cov, c.partition, {});
    const auto data = per_seed_data(c, 10000, 5, 2);
    const auto e = estimate_oinfo(src, data, default_config());
    CHECK(within_se(e.tc, mi));
    CHECK(within_se(e.dtc, mi));
    CHECK(std::abs(e.tc.value - e.dtc.value) <= 3 * combined({e.tc.std_error, e.dtc.std_error}));
    const auto i01 = estimate_mi(src, 0, {1}, std::span<const Dataset>(data), default_config());
    CHECK(within_se(i01, mi));
}

TEST_CASE("equicorrelated N=3 measures") {
    const auto c = equicorrelated(3, 0.5);
    const GaussianScoreSource src(c.cov, c.partition, {});
    const auto data = per_seed_data(c, 10000, 5, 3);
    const auto e = estimate_oinfo(src, data, default_config());
    CHECK(within_se(e.tc, 0.3465735902799727));
    CHECK(within_se(e.dtc, 0.26162407188227377));
    CHECK(within_se(e.s_info, 0.6081976621622465));
    CHECK(std::abs(e.s_info.value - (e.tc.value + e.dtc.value)) <=
          3 * combined({e.s_info.std_error, e.tc.std_error, e.dtc.std_error}));
    CHECK(e.o_info.value == e.tc.value - e.dtc.value);
    REQUIRE(e.o_info.per_seed.size() == 5);
    for (std::size_t k = 0; k < 5; ++k) CHECK(e.o_info.per_seed[k] == e.tc.per_seed[k] - e.dtc.per_seed[k]);
    CHECK(e.tc.n_seeds == 5);
    CHECK(e.tc.mc_steps == 10);
    CHECK(e.tc.n_samples == 10000);
    CHECK(e.tc.std_error > 0.0);
}

TEST_CASE("single-measure entry points agree with the joint estimate") {
    const auto c = equicorrelated(3, 0.5);
    const GaussianScoreSource src(c.cov, c.partition, {});
    RngStream rng(4);
    const Dataset d = sample(c, 2000, rng);
    EstimateConfig cfg = default_config();
    cfg.n_seeds = 2;
    const auto e = estimate_oinfo(src, d, cfg);
    CHECK(estimate_tc(src, d, cfg).value == doctest::Approx(e.tc.value).epsilon(1e-12));
    CHECK(estimate_dtc(src, d, cfg).value == doctest::Approx(e.dtc.value).epsilon(1e-12));
    CHECK(estimate_s(src, d, cfg).value == doctest::Approx(e.s_info.value).epsilon(1e-12));
}

TEST_CASE("estimates are deterministic and one seed reports a within-run error") {
    const auto c = equicorrelated(3, 0.5);
    const GaussianScoreSource src(c.cov, c.partition, {});
    RngStream rng(5);
    const Dataset d = sample(c, 3000, rng);
    EstimateConfig cfg = default_config();
    cfg.n_seeds = 1;
    const auto a = estimate_oinfo(src, d, cfg);
    const auto b = estimate_oinfo(src, d, cfg);
    CHECK(a.o_info.value == b.o_info.value);
    CHECK(a.s_info.value == b.s_info.value);
    CHECK(a.tc.std_error > 0.0);
    CHECK(a.tc.per_seed.size() == 1);
    cfg.seed = 2;
    CHECK(estimate_oinfo(src, d, cfg).o_info.value != a.o_info.value);
    cfg.time_sampling = TimeSampling::Importance;
    CHECK(std::isfinite(estimate_oinfo(src, d, cfg).o_info.value));
}

TEST_CASE("benchmark signs") {
    {
        const auto c = build_redundant_cov(6, 1, 1.0);
        const GaussianScoreSource src(c.cov, c.partition, {});
        const auto e = estimate_oinfo(src, per_seed_data(c, 10000, 5, 6), default_config());
        CHECK(e.o_info.value > 0.0);
        CHECK(within_se(e.o_info, 0.5959834321062942));
    }
    {
        const auto c = build_synergistic_cov(4, 1, 0.1);
        const GaussianScoreSource src(c.cov, c.partition, {});
        const auto e = estimate_oinfo(src, per_seed_data(c, 10000, 5, 7), default_config());
        CHECK(e.o_info.value < 0.0);
    }
}

TEST_CASE("mutual information with an empty conditioning set is zero") {
    const auto c = equicorrelated(3, 0.5);
    const GaussianScoreSource src(c.cov, c.partition, {});
    RngStream rng(1);
    const auto e = estimate_mi(src, 1, {}, sample(c, 100, rng), default_config());
    CHECK(e.value == 0.0);
    CHECK(e.std_error == 0.0);
}

TEST_CASE("KL between shifted unit Gaussians") {
    // KL(N(0,1) || N(1,1)) = 1/2.
    const VariablePartition p({1});
    const Matrix one = Matrix::Identity(1, 1);
    const GaussianScoreSource p_src(one, p, {});
    const GaussianScoreSource q_src(one, p, {}, Vector::Constant(1, 1.0));
    const auto data = per_seed_data({one, p}, 10000, 5, 8);
    const auto e = estimate_divergence(p_src, ScoreTask::joint(), q_src, ScoreTask::joint(),
                                       std::span<const Dataset>(data), default_config());
    CHECK(within_se(e, 0.5));
    CHECK(e.value == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("gradients") {
    SUBCASE("N=3 gradient equals Omega") {
        const auto c = equicorrelated(3, 0.5);
        const GaussianScoreSource src(c.cov, c.partition, {});
        const auto data = per_seed_data(c, 10000, 5, 9);
        const auto e = estimate_oinfo(src, data, default_config());
        const auto g = estimate_gradients(src, data, default_config());
        REQUIRE(g.size() == 3);
        for (const auto& gi : g) {
            CHECK(std::abs(gi.value - e.o_info.value) <= 3 * combined({gi.std_error, e.o_info.std_error}));
            CHECK(within_se(gi, 0.08494951839769893));
        }
    }
    SUBCASE("an independent variable has zero gradient, and both forms agree") {
        Matrix cov = Matrix::Identity(4, 4);
        cov.topLeftCorner(3, 3) = equicorrelated(3, 0.5).cov;
        const CovarianceMatrix c{cov, VariablePartition::uniform(4, 1)};
        const GaussianScoreSource src(c.cov, c.partition, {});
        const auto data = per_seed_data(c, 10000, 5, 10);
        const auto mi = estimate_gradients(src, data, default_config(), GradientForm::MutualInfo);
        const auto sub = estimate_gradients(src, data, default_config(), GradientForm::Subsystem);
        CHECK(within_se(mi[3], 0.0));
        CHECK(within_se(sub[3], 0.0));
        const auto truth = gradients(c.cov, c.partition);
        for (std::size_t i = 0; i < 4; ++i) {
            CHECK(std::abs(mi[i].value - sub[i].value) <= 3 * combined({mi[i].std_error, sub[i].std_error}));
            INFO("variable " << i << ": " << mi[i].value << " +- " << mi[i].std_error << " vs " << truth[i]
                              << "; subsystem " << sub[i].value << " +- " << sub[i].std_error);
            CHECK(within_se(mi[i], truth[i]));
        }
        EstimateConfig one = default_config();
        one.n_seeds = 1;
        CHECK(estimate_gradient(src, 0, data[0], one).value ==
              doctest::Approx(estimate_gradients(src, std::span<const Dataset>(data.data(), 1), one)[0].value));
    }
    SUBCASE("mixed system signs") {
        const auto c = build_mixed_cov({SystemSpec::redundant(3, 1, 1.0), SystemSpec::synergistic(3, 1, 0.5)});
        const GaussianScoreSource src(c.cov, c.partition, {});
        const auto g = estimate_gradients(src, per_seed_data(c, 10000, 5, 11), default_config());
        for (int i = 0; i < 3; ++i) CHECK(g[i].value > 0.0);
        for (int i = 3; i < 6; ++i) CHECK(g[i].value < 0.0);
    }
    CHECK(parse_gradient_form("mi") == GradientForm::MutualInfo);
    CHECK(parse_gradient_form("subsystem") == GradientForm::Subsystem);
    CHECK_THROWS_AS(parse_gradient_form("other"), ConfigError);
}

TEST_CASE("estimator errors") {
    const auto c = equicorrelated(3, 0.5);
    const GaussianScoreSource src(c.cov, c.partition, {});
    RngStream rng(1);
    const Dataset d = sample(c, 50, rng);

    SUBCASE("missing task is named") {
        ScoreNet<float> net(NetConfig{8, 1, 4}, c.partition, 1.0);
        RngStream init(1);
        net.init(init);
        const NetworkScoreSource standard(net, {}, required_tasks(3, TaskMode::Standard));
        CHECK_NOTHROW(estimate_oinfo(standard, d, default_config()));
        try {
            estimate_gradient(standard, 0, d, default_config());
            FAIL("expected a config error");
        } catch (const ConfigError& e) {
            const std::string what = e.what();
            CHECK(what.find("is not available") != std::string::npos);
            CHECK((what.find(ScoreTask::conditional(0, {1}).name()) != std::string::npos ||
                   what.find(ScoreTask::conditional(0, {2}).name()) != std::string::npos));
        }
    }
    SUBCASE("gradients need three variables") {
        const auto c2 = equicorrelated(2, 0.5);
        const GaussianScoreSource s2(c2.cov, c2.partition, {});
        RngStream r2(1);
        CHECK_THROWS_AS(estimate_gradient(s2, 0, sample(c2, 10, r2), default_config()), ConfigError);
    }
    SUBCASE("empty or mismatched data") {
        RngStream r(2);
        CHECK_THROWS_AS(estimate_oinfo(src, sample(c, 0, r), default_config()), ConfigError);
        const auto c4 = equicorrelated(4, 0.5);
        CHECK_THROWS_AS(estimate_oinfo(src, sample(c4, 10, r), default_config()), ConfigError);
        std::vector<Dataset> two{d, d};
        CHECK_THROWS_AS(estimate_oinfo(src, two, default_config()), ConfigError);
    }
    SUBCASE("non-finite data") {
        Dataset bad = d;
        bad.samples(2, 1) = INFINITY;
        CHECK_THROWS_AS(estimate_oinfo(src, bad, default_config()), NumericError);
    }
    SUBCASE("bad config") {
        EstimateConfig cfg = default_config();
        cfg.mc_steps = 0;
        CHECK_THROWS_AS(estimate_oinfo(src, d, cfg), ConfigError);
    }
}

TEST_CASE("estimates are invariant under relabeling the variables") {
    const auto c = build_synergistic_cov(4, 1, 0.5);
    const std::vector<Eigen::Index> perm{2, 0, 3, 1};
    Matrix permuted(4, 4);
    for (Eigen::Index a = 0; a < 4; ++a)
        for (Eigen::Index b = 0; b < 4; ++b) permuted(a, b) = c.cov(perm[a], perm[b]);
    const CovarianceMatrix cp{permuted, c.partition};
    const GaussianScoreSource s1(c.cov, c.partition, {});
    const GaussianScoreSource s2(cp.cov, cp.partition, {});
    const auto e1 = estimate_oinfo(s1, per_seed_data(c, 10000, 5, 12), default_config());
    const auto e2 = estimate_oinfo(s2, per_seed_data(cp, 10000, 5, 13), default_config());
    CHECK(std::abs(e1.o_info.value - e2.o_info.value) <= 3 * combined({e1.o_info.std_error, e2.o_info.std_error}));
    CHECK(std::abs(e1.tc.value - e2.tc.value) <= 3 * combined({e1.tc.std_error, e2.tc.std_error}));
}

TEST_CASE("estimates are invariant under affine rescaling through standardization") {
    const auto c = build_redundant_cov(3, 1, 0.5);
    const GaussianScoreSource src(c.cov, c.partition, {});
    auto data = per_seed_data(c, 10000, 5, 14);
    std::vector<Dataset> rescaled;
    std::vector<Dataset> direct;
    for (const auto& d : data) {
        Dataset r = d;
        r.samples.col(0) = r.samples.col(0) * 3.0 + Vector::Constant(r.samples.rows(), 5.0);
        r.samples.col(2) = r.samples.col(2) * 0.2 - Vector::Constant(r.samples.rows(), 1.0);
        rescaled.push_back(standardize(r));
        direct.push_back(standardize(d));
    }
    for (std::size_t k = 0; k < data.size(); ++k)
        CHECK((rescaled[k].samples - direct[k].samples).cwiseAbs().maxCoeff() < 1e-9);
    const auto a = estimate_oinfo(src, rescaled, default_config());
    const auto b = estimate_oinfo(src, direct, default_config());
    CHECK(std::abs(a.o_info.value - b.o_info.value) < 1e-6);
    CHECK(within_se(a.o_info, 0.40079468137758845));
}
