#include "oinfo/errors.hpp"
#include "oinfo/oracle.hpp"
#include "oinfo/systems.hpp"

#include <doctest.h>

#include <cmath>

using namespace oinfo;

TEST_CASE("variable partition offsets and indices") {
    const VariablePartition p({2, 1, 3});
    CHECK(p.n_vars() == 3);
    CHECK(p.total_dim() == 6);
    CHECK(p.offsets() == std::vector<std::size_t>{0, 2, 3, 6});
    CHECK(p.indices(2) == IndexList{3, 4, 5});
    CHECK(p.indices(std::vector<std::size_t>{2, 0}) == IndexList{3, 4, 5, 0, 1});
    CHECK(p.select({0, 2}).dims() == std::vector<std::size_t>{2, 3});
    CHECK(p.concat(VariablePartition({4})).dims() == std::vector<std::size_t>{2, 1, 3, 4});
    CHECK_THROWS_AS(VariablePartition({1, 0}), ConfigError);
}

TEST_CASE("redundant covariance") {
    const auto c = build_redundant_cov(3, 1, 1.0);
    CHECK(c.cov(0, 1) == doctest::Approx(0.5));
    CHECK(c.cov(0, 0) == 1.0);
    CHECK(min_eigenvalue(c.cov) == doctest::Approx(0.5));
    CHECK(is_symmetric(c.cov, 1e-12));

    const auto wide = build_redundant_cov(3, 2, 1.0);
    CHECK(wide.cov.rows() == 6);
    CHECK(wide.cov(0, 2) == doctest::Approx(0.5));
    CHECK(wide.cov(0, 3) == 0.0);
    CHECK(wide.cov(0, 1) == 0.0);

    const auto loose = build_redundant_cov(3, 1, 1e6);
    CHECK((loose.cov - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-11);
    CHECK(std::abs(measures(loose.cov, loose.partition).o_info) < 1e-10);

    CHECK_THROWS_AS(build_redundant_cov(3, 1, 0.0), NumericError);
}

TEST_CASE("redundant O-information decreases with sigma") {
    double previous = INFINITY;
    for (double sigma : log_grid(0.1, 10.0, 8)) {
        const auto c = build_redundant_cov(4, 1, sigma);
        const double omega = measures(c.cov, c.partition).o_info;
        CHECK(omega < previous);
        previous = omega;
    }
}

TEST_CASE("synergistic couplings") {
    const auto k = synergistic_couplings(3, 0.0);
    CHECK(k.first_second == doctest::Approx(0.7071067811865475));
    CHECK(k.second_others == doctest::Approx(0.7071067811865475));
    const auto k4 = synergistic_couplings(4, 1.0);
    CHECK(k4.first_second == doctest::Approx(1.0 / std::sqrt(3.0)));
    CHECK(k4.second_others == doctest::Approx(1.0 / std::sqrt(2.0) / std::sqrt(3.0)));
    CHECK_THROWS_AS(synergistic_couplings(2, 1.0), ConfigError);
}

TEST_CASE("synergistic covariance") {
    const auto c = build_synergistic_cov(4, 1, 1.0);
    CHECK(min_eigenvalue(c.cov) > 0.0);
    CHECK(c.cov(0, 1) == doctest::Approx(1.0 / std::sqrt(3.0)));
    CHECK(c.cov(1, 3) == doctest::Approx(1.0 / std::sqrt(6.0)));
    CHECK(c.cov(0, 2) == 0.0);
    CHECK(c.cov(2, 3) == 0.0);
    // sigma = 0 makes X2 a deterministic function of the others.
    CHECK_THROWS_AS(build_synergistic_cov(3, 1, 0.0), NumericError);
    const auto loose = build_synergistic_cov(4, 1, 1e6);
    CHECK(loose.cov(1, 2) < 1e-6);
    CHECK(std::abs(measures(loose.cov, loose.partition).o_info) < 1e-6);
}

TEST_CASE("mixed covariance") {
    const auto single = build_mixed_cov({SystemSpec::redundant(3, 1, 1.0)});
    CHECK(single.cov == build_redundant_cov(3, 1, 1.0).cov);

    const auto r = SystemSpec::redundant(3, 1, 1.0);
    const auto s = SystemSpec::synergistic(3, 1, 0.5);
    const auto m = build_mixed_cov({r, s});
    CHECK(m.cov.rows() == 6);
    CHECK(m.cov.block(0, 3, 3, 3).cwiseAbs().maxCoeff() == 0.0);
    const auto total = measures(m.cov, m.partition);
    const auto cr = build_cov(r);
    const auto cs = build_cov(s);
    const auto mr = measures(cr.cov, cr.partition);
    const auto ms = measures(cs.cov, cs.partition);
    CHECK(std::abs(total.tc - (mr.tc + ms.tc)) < 1e-10);
    CHECK(std::abs(total.dtc - (mr.dtc + ms.dtc)) < 1e-10);
    CHECK(std::abs(total.o_info - (mr.o_info + ms.o_info)) < 1e-10);
    CHECK(total.o_info == doctest::Approx(-0.4643566259363583).epsilon(1e-12));
}

TEST_CASE("every benchmark covariance is symmetric and PD") {
    for (std::size_t n : {3, 4, 6})
        for (std::size_t dim : {1, 3})
            for (double sigma : log_grid(0.1, 10.0, 8)) {
                for (const auto& c : {build_redundant_cov(n, dim, sigma), build_synergistic_cov(n, dim, sigma)}) {
                    CHECK(is_symmetric(c.cov, 1e-12));
                    CHECK(min_eigenvalue(c.cov) > 0.0);
                }
            }
}

TEST_CASE("sampling") {
    const CovarianceMatrix id{Matrix::Identity(3, 3), VariablePartition::uniform(3, 1)};
    RngStream rng(3);
    const Dataset big = sample(id, 100000, rng);
    const Matrix centered = big.samples.rowwise() - big.samples.colwise().mean();
    const Matrix emp = centered.transpose() * centered / 100000.0;
    CHECK((emp - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 0.02);

    RngStream a(5), b(5);
    CHECK(sample(id, 50, a).samples == sample(id, 50, b).samples);

    RngStream e(1);
    const Dataset empty = sample(id, 0, e);
    CHECK(empty.n_samples() == 0);
    CHECK(empty.partition.total_dim() == 3);
}

TEST_CASE("transforms") {
    CHECK(half_cube(4.0) == 8.0);
    CHECK(half_cube(0.0) == 0.0);
    CHECK(half_cube(-1.0) == -1.0);
    CHECK(normal_cdf(0.0) == 0.5);
    double prev_h = -INFINITY, prev_c = -INFINITY;
    for (int k = -400; k <= 400; ++k) {
        const double x = k / 50.0;
        CHECK(half_cube(x) > prev_h);
        CHECK(normal_cdf(x) > prev_c);
        prev_h = half_cube(x);
        prev_c = normal_cdf(x);
    }
    Dataset d{Matrix::Constant(2, 2, 4.0), VariablePartition::uniform(2, 1), std::nullopt};
    CHECK(apply_transform(d, TransformKind::HalfCube).samples(1, 1) == 8.0);
    CHECK(apply_transform(d, TransformKind::None).samples == d.samples);
}

TEST_CASE("log grid") {
    const auto g = log_grid(0.1, 10.0, 8);
    REQUIRE(g.size() == 8);
    CHECK(g.front() == doctest::Approx(0.1));
    CHECK(g[1] == doctest::Approx(0.19306977288832497));
    CHECK(g.back() == doctest::Approx(10.0));
}

TEST_CASE("system spec text form") {
    const auto r = parse_system_spec("redundant:n=3,dim=2,sigma=0.5");
    CHECK(r.kind == SystemKind::Redundant);
    CHECK(r.n_vars == 3);
    CHECK(r.dim == 2);
    CHECK(r.sigma == 0.5);
    const auto m = parse_system_spec("mixed(redundant:n=3,sigma=1;synergistic:n=3,sigma=0.5),transform=cdf");
    CHECK(m.kind == SystemKind::Mixed);
    CHECK(m.total_vars() == 6);
    CHECK(m.transform == TransformKind::Cdf);
    CHECK(parse_system_spec(to_string(m)).total_vars() == 6);
    const auto ind = parse_system_spec("independent:n=6,dim=2");
    CHECK(build_cov(ind).cov == Matrix::Identity(12, 12));
    CHECK_THROWS_AS(parse_system_spec("weird:n=3"), ConfigError);
    CHECK_THROWS_AS(parse_system_spec("redundant:n=3,color=red"), ConfigError);
}
