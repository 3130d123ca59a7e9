#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cudvine/copulas.hpp>
#include <cudvine/math/quadrature.hpp>
#include <cudvine/math/rng.hpp>
#include <cudvine/math/stats.hpp>

#include <cmath>
#include <vector>

using namespace cudvine;

namespace {

const std::vector<BivariateCopula> kGrid = {
    BivariateCopula(Family::independence, {}),
    BivariateCopula(Family::gaussian, {-0.5}),
    BivariateCopula(Family::gaussian, {0.3}),
    BivariateCopula(Family::gaussian, {0.7}),
    BivariateCopula(Family::student_t, {0.5, 4.0}),
    BivariateCopula(Family::student_t, {-0.3, 8.0}),
    BivariateCopula(Family::clayton, {0.5}),
    BivariateCopula(Family::clayton, {2.0}),
    BivariateCopula(Family::gumbel, {1.25}),
    BivariateCopula(Family::gumbel, {2.0}),
    BivariateCopula(Family::frank, {4.0}),
    BivariateCopula(Family::frank, {-8.0}),
    BivariateCopula(Family::joe, {1.5}),
    BivariateCopula(Family::joe, {3.0}),
};

const std::vector<double> kInterior = {0.1, 0.3, 0.5, 0.7, 0.9};

// Moderate-dependence subset for quadrature normalization: a 64x64 rule
// cannot resolve the corner mass of strongly tail-dependent copulas.
const std::vector<BivariateCopula> kNormGrid = {
    BivariateCopula(Family::independence, {}),
    BivariateCopula(Family::gaussian, {-0.5}),
    BivariateCopula(Family::gaussian, {0.7}),
    BivariateCopula(Family::student_t, {0.5, 4.0}),
    BivariateCopula(Family::student_t, {-0.3, 8.0}),
    BivariateCopula(Family::clayton, {0.5}),
    BivariateCopula(Family::gumbel, {1.25}),
    BivariateCopula(Family::frank, {4.0}),
    BivariateCopula(Family::frank, {-8.0}),
    BivariateCopula(Family::joe, {1.5}),
};

}  // namespace

TEST_CASE("density closed-form values") {
    CHECK(density(0.3, 0.7, BivariateCopula(Family::independence, {})) == doctest::Approx(1.0));
    CHECK(density(0.2, 0.9, BivariateCopula(Family::gaussian, {0.0})) == doctest::Approx(1.0));
    // Gaussian at the median point: 1/sqrt(1 - rho^2)
    CHECK(density(0.5, 0.5, BivariateCopula(Family::gaussian, {0.5})) ==
          doctest::Approx(1.1547005383792515).epsilon(1e-10));
}

TEST_CASE("density agrees with 2-d finite differences of the cdf") {
    const BivariateCopula g(Family::gaussian, {0.5});
    const double d = 1e-4;
    for (double u : {0.3, 0.6}) {
        for (double v : {0.4, 0.8}) {
            const double mixed = (cdf(u + d, v + d, g) - cdf(u + d, v - d, g) -
                                  cdf(u - d, v + d, g) + cdf(u - d, v - d, g)) /
                                 (4.0 * d * d);
            CHECK(density(u, v, g) == doctest::Approx(mixed).epsilon(1e-5));
        }
    }
}

TEST_CASE("cdf boundary behaviour and closed forms") {
    for (const auto& c : kGrid) {
        for (double t : kInterior) {
            CHECK(cdf(t, 1.0, c) == doctest::Approx(t).epsilon(1e-9));
            CHECK(cdf(1.0, t, c) == doctest::Approx(t).epsilon(1e-9));
            CHECK(cdf(0.0, t, c) == doctest::Approx(0.0));
            CHECK(cdf(t, 0.0, c) == doctest::Approx(0.0));
        }
    }
    CHECK(cdf(0.5, 0.5, BivariateCopula(Family::clayton, {1.0})) ==
          doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("clayton cdf agrees with monte carlo") {
    const BivariateCopula c(Family::clayton, {1.0});
    const auto pairs = sample_pair(200000, c, 2024);
    int count = 0;
    for (const auto& [u, v] : pairs) count += (u <= 0.5 && v <= 0.5);
    const double mc = static_cast<double>(count) / pairs.size();
    CHECK(mc == doctest::Approx(1.0 / 3.0).epsilon(0.02));
}

TEST_CASE("student t cdf agrees with 2-d quadrature of the density") {
    const BivariateCopula c(Family::student_t, {0.5, 4.0});
    for (double u : {0.35, 0.7}) {
        for (double v : {0.4, 0.85}) {
            const double byquad = math::integrate_gl(
                [&](double a) {
                    return math::integrate_gl(
                        [&](double b) { return density(a, b, c); }, 0.0, v, 64);
                },
                0.0, u, 64);
            CHECK(cdf(u, v, c) == doctest::Approx(byquad).epsilon(2e-5));
        }
    }
}

TEST_CASE("hfun boundary, closed values, and finite-difference agreement") {
    for (const auto& c : kGrid) {
        for (double v : kInterior) {
            CHECK(hfun(1.0, v, c) == doctest::Approx(1.0));
            CHECK(hfun(0.0, v, c) == doctest::Approx(0.0));
        }
    }
    CHECK(hfun(0.5, 0.5, BivariateCopula(Family::independence, {})) == doctest::Approx(0.5));
    CHECK(hfun(0.5, 0.5, BivariateCopula(Family::clayton, {1.0})) ==
          doctest::Approx(4.0 / 9.0).epsilon(1e-12));

    // h = dC/dv by central differences, step 1e-6, tolerance 1e-5
    const double d = 1e-6;
    for (const auto& c : kGrid) {
        for (double u : kInterior) {
            for (double v : kInterior) {
                const double fd = (cdf(u, v + d, c) - cdf(u, v - d, c)) / (2.0 * d);
                CHECK(std::fabs(hfun(u, v, c) - fd) <= 1e-5);
            }
        }
    }
}

TEST_CASE("hinv round trips") {
    CHECK(hinv(0.42, 0.77, BivariateCopula(Family::independence, {})) == doctest::Approx(0.42));
    CHECK(hinv(4.0 / 9.0, 0.5, BivariateCopula(Family::clayton, {1.0})) ==
          doctest::Approx(0.5).epsilon(1e-10));
    for (const auto& c : kGrid) {
        for (double u : kInterior) {
            for (double v : kInterior) {
                const double q = hfun(u, v, c);
                if (q <= 1e-9 || q >= 1.0 - 1e-9) continue;
                CHECK(std::fabs(hinv(q, v, c) - u) <= 1e-8);
            }
        }
    }
}

TEST_CASE("density normalizes to one by 64x64 quadrature") {
    for (const auto& c : kNormGrid) {
        const double total = math::integrate_gl(
            [&](double u) {
                return math::integrate_gl(
                    [&](double v) { return density(u, v, c); }, 0.0, 1.0, 64);
            },
            0.0, 1.0, 64);
        INFO(std::string(family_name(c.family)));
        CHECK(total == doctest::Approx(1.0).epsilon(1e-4));
    }
}

TEST_CASE("density is exchangeable") {
    for (const auto& c : kGrid) {
        for (double u : kInterior) {
            for (double v : kInterior) {
                CHECK(density(u, v, c) == doctest::Approx(density(v, u, c)).epsilon(1e-10));
            }
        }
    }
}

TEST_CASE("kendall tau closed maps") {
    CHECK(tau(BivariateCopula(Family::gumbel, {1.25})) == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(tau(BivariateCopula(Family::clayton, {0.5})) == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(tau(BivariateCopula(Family::gaussian, {0.7})) ==
          doctest::Approx(0.49363337778673).epsilon(1e-10));
    CHECK(tau(BivariateCopula(Family::frank, {4.0})) ==
          doctest::Approx(0.38814802129794534).epsilon(1e-8));
    CHECK(tau(BivariateCopula(Family::frank, {-4.0})) ==
          doctest::Approx(-0.38814802129794534).epsilon(1e-8));
    CHECK(tau(BivariateCopula(Family::joe, {2.0})) ==
          doctest::Approx(0.35506593315761603).epsilon(1e-7));
}

TEST_CASE("tau_to_param is the inverse of tau") {
    for (const auto& c : kGrid) {
        if (c.family == Family::independence) continue;
        const double t = tau(c);
        const auto back = copula_from_tau(c.family, t);
        const double tol =
            (c.family == Family::frank || c.family == Family::joe) ? 1e-5 : 1e-8;
        CHECK(std::fabs(tau(back) - t) <= tol);
        if (c.family != Family::frank && c.family != Family::joe)
            CHECK(back.params[0] == doctest::Approx(c.params[0]).epsilon(1e-8));
    }
    CHECK_THROWS_AS(copula_from_tau(Family::clayton, -0.2), std::domain_error);
    CHECK_THROWS_AS(copula_from_tau(Family::gumbel, 0.99), std::domain_error);
}

TEST_CASE("sample_pair empirical tau and determinism") {
    const int n = 10000;
    {
        const auto pairs = sample_pair(n, BivariateCopula(Family::independence, {}), 11);
        std::vector<double> a, b;
        for (const auto& [u, v] : pairs) {
            a.push_back(u);
            b.push_back(v);
        }
        CHECK(std::fabs(math::kendall_tau(a, b)) < 0.03);
    }
    {
        const auto pairs = sample_pair(n, BivariateCopula(Family::gaussian, {0.7}), 12);
        std::vector<double> a, b;
        for (const auto& [u, v] : pairs) {
            a.push_back(u);
            b.push_back(v);
        }
        CHECK(math::kendall_tau(a, b) == doctest::Approx(0.49363337778673).epsilon(0.06));
    }
    const auto p1 = sample_pair(100, BivariateCopula(Family::clayton, {2.0}), 99);
    const auto p2 = sample_pair(100, BivariateCopula(Family::clayton, {2.0}), 99);
    for (int i = 0; i < 100; ++i) {
        CHECK(p1[i].first == p2[i].first);
        CHECK(p1[i].second == p2[i].second);
    }
}

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(BivariateCopula(Family::gaussian, {1.5}), std::invalid_argument);
    CHECK_THROWS_AS(BivariateCopula(Family::gaussian, {}), std::invalid_argument);
    CHECK_THROWS_AS(BivariateCopula(Family::student_t, {0.5, 1.5}), std::invalid_argument);
    CHECK_THROWS_AS(BivariateCopula(Family::clayton, {-1.0}), std::invalid_argument);
    CHECK_THROWS_AS(BivariateCopula(Family::clayton, {30.0}), std::invalid_argument);
    CHECK_THROWS_AS(BivariateCopula(Family::gumbel, {0.8}), std::invalid_argument);
    CHECK_THROWS_AS(BivariateCopula(Family::frank, {0.0}), std::invalid_argument);
    CHECK_THROWS_AS(BivariateCopula(Family::frank, {40.0}), std::invalid_argument);
    CHECK_THROWS_AS(BivariateCopula(Family::joe, {1.0}), std::invalid_argument);
    CHECK_THROWS_AS(density(1.2, 0.5, BivariateCopula(Family::gaussian, {0.3})),
                    std::domain_error);
}
