#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cudvine/bench.hpp>

#include <cmath>
#include <vector>

using namespace cudvine;

TEST_CASE("garch simulation matches the unconditional variance") {
    const GarchSpec spec{0.05, 0.85, 0.1, 0.0};
    const auto y = simulate_garch(spec, 100000, 12);
    double var = 0.0, mean = 0.0;
    for (double x : y) mean += x;
    mean /= y.size();
    for (double x : y) var += (x - mean) * (x - mean);
    var /= (y.size() - 1);
    CHECK(var == doctest::Approx(1.0).epsilon(0.10));
}

TEST_CASE("degenerate garch is iid gaussian noise") {
    const GarchSpec spec{0.25, 0.0, 0.0, 0.0};
    const auto y = simulate_garch(spec, 50000, 3);
    double var = 0.0;
    for (double x : y) var += x * x;
    var /= y.size();
    CHECK(var == doctest::Approx(0.25).epsilon(0.05));
    // lag-1 autocorrelation vanishes
    double acf = 0.0;
    for (std::size_t t = 1; t < y.size(); ++t) acf += y[t] * y[t - 1];
    CHECK(std::fabs(acf / y.size() / var) < 0.02);
}

TEST_CASE("gjr garch has heavy tails and reproducible paths") {
    const GarchSpec spec{0.05, 0.85, 0.1, 0.05};
    const auto y = simulate_garch(spec, 50000, 4);
    double m2 = 0.0, m4 = 0.0;
    for (double x : y) {
        m2 += x * x;
        m4 += x * x * x * x;
    }
    m2 /= y.size();
    m4 /= y.size();
    CHECK(m4 / (m2 * m2) > 3.1);  // excess kurtosis of GARCH-type dynamics
    const auto y2 = simulate_garch(spec, 100, 4);
    for (int i = 0; i < 100; ++i) CHECK(y[i] == y2[i]);
}

TEST_CASE("garch validation") {
    CHECK_THROWS_AS(simulate_garch(GarchSpec{0.05, 0.95, 0.1, 0.0}, 10, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(simulate_garch(GarchSpec{-0.1, 0.2, 0.1, 0.0}, 10, 1),
                    std::invalid_argument);
}

TEST_CASE("experiment_var guards and small smoke run") {
    const GarchSpec spec{0.05, 0.85, 0.1, 0.0};
    VarExperimentConfig bad;
    bad.q_levels = {1.0};
    CHECK_THROWS_AS(experiment_var(spec, bad), std::invalid_argument);

    VarExperimentConfig cfg;
    cfg.t_train = 400;
    cfg.t_test = 25;
    cfg.q_levels = {0.10};
    cfg.replications = 1;
    cfg.draws = 200;
    cfg.pool = {Family::gaussian};
    cfg.max_order = 1;
    cfg.threads = 2;
    const auto res = experiment_var(spec, cfg);
    REQUIRE(res.levels.size() == 1);
    CHECK(!res.levels[0].z_p.has_value());  // single replication: no z test
    CHECK(res.levels[0].mean_rate >= 0.0);
    CHECK(res.levels[0].mean_rate <= 1.0);
}

TEST_CASE("experiment_selection on an independence truth finds order zero") {
    UDvineSpec truth;  // order 0
    SelectionExperimentConfig cfg;
    cfg.t = 600;
    cfg.replications = 4;
    cfg.pool = {Family::gaussian, Family::clayton};
    cfg.max_order = 2;
    cfg.threads = 2;
    const auto res = experiment_selection(truth, cfg);
    CHECK(res.order_rate == doctest::Approx(1.0));
    // deterministic across runs with the same seed
    const auto res2 = experiment_selection(truth, cfg);
    CHECK(res2.order_rate == res.order_rate);
}

TEST_CASE("experiment_mle smoke: recovers parameters and reports sds") {
    const std::vector<UDvineSpec> specs = {
        UDvineSpec({BivariateCopula(Family::gaussian, {0.7})}),
        UDvineSpec({BivariateCopula(Family::gaussian, {0.3})}),
    };
    CrossCopulaSpec cross;
    cross.kind = CrossKind::gaussian_full;
    cross.correlation = math::Matrix::identity(2);
    cross.correlation(0, 1) = cross.correlation(1, 0) = 0.5;

    MleExperimentConfig cfg;
    cfg.t = 500;
    cfg.replications = 6;
    cfg.threads = 2;
    const auto res = experiment_mle(specs, cross, cfg);
    REQUIRE(res.names.size() == 3);
    CHECK(res.names[0] == "s1.tree1.rho");
    CHECK(res.mean[0] == doctest::Approx(0.7).epsilon(0.15));
    CHECK(res.mean[1] == doctest::Approx(0.3).epsilon(0.5));
    CHECK(res.mean[2] == doctest::Approx(0.5).epsilon(0.2));
    for (double s : res.sd) CHECK(s > 0.0);
    CHECK(res.failures == 0);
}

TEST_CASE("estimator dispersion shrinks as T grows") {
    const std::vector<UDvineSpec> specs = {
        UDvineSpec({BivariateCopula(Family::gaussian, {0.7})}),
        UDvineSpec({BivariateCopula(Family::gaussian, {0.3})}),
    };
    CrossCopulaSpec cross;
    cross.kind = CrossKind::gaussian_full;
    cross.correlation = math::Matrix::identity(2);
    cross.correlation(0, 1) = cross.correlation(1, 0) = 0.5;

    MleExperimentConfig small, large;
    small.t = 300;
    large.t = 2400;
    small.replications = large.replications = 10;
    small.seed = large.seed = 99;
    small.threads = large.threads = 2;
    const auto rs = experiment_mle(specs, cross, small);
    const auto rl = experiment_mle(specs, cross, large);
    // every parameter's replication sd shrinks with an 8x larger sample
    for (std::size_t j = 0; j < rs.names.size(); ++j) {
        CHECK(rl.sd[j] < rs.sd[j]);
    }
}
