// Acceptance suite: replication studies at desk scale (100 replications)
// plus the numerical property checks. Prints one PASS/FAIL line per
// criterion; exits nonzero if any criterion fails.

#include <cudvine/bench.hpp>
#include <cudvine/copulas.hpp>
#include <cudvine/crosscopula.hpp>
#include <cudvine/estimation.hpp>
#include <cudvine/forecast.hpp>
#include <cudvine/math/quadrature.hpp>
#include <cudvine/math/stats.hpp>
#include <cudvine/model.hpp>
#include <cudvine/udvine.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

using namespace cudvine;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(int criterion, bool ok, const std::string& detail) {
    if (!ok) ++failures;
    std::printf("%s criterion %d: %s\n", ok ? "PASS" : "FAIL", criterion, detail.c_str());
    std::fflush(stdout);
}

double elapsed_s(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct SelectionDesign {
    std::string name;
    UDvineSpec truth;
};

// ---------- criterion 1: tree-by-tree selection rates ----------

void criterion1() {
    const auto t0 = Clock::now();
    const std::vector<SelectionDesign> designs = {
        {"gaussian+gumbel", UDvineSpec({BivariateCopula(Family::gaussian, {0.7}),
                                        BivariateCopula(Family::gumbel, {1.25})})},
        {"t3+clayton", UDvineSpec({BivariateCopula(Family::student_t, {0.7, 3.0}),
                                   BivariateCopula(Family::clayton, {0.5})})},
        {"gaussian+gaussian", UDvineSpec({BivariateCopula(Family::gaussian, {0.7}),
                                          BivariateCopula(Family::gaussian, {0.3})})},
    };
    bool all_ok = true;
    std::string detail = "selection rates at T=2000, 100 replications:";
    for (std::size_t di = 0; di < designs.size(); ++di) {
        SelectionExperimentConfig cfg;
        cfg.t = 2000;
        cfg.replications = 100;
        cfg.seed = 42000 + 1000 * di;
        cfg.max_order = 3;
        cfg.threads = 0;
        const auto res = experiment_selection(designs[di].truth, cfg);
        const bool ok = res.order_rate >= 0.90 && res.tree_family_rates[0] >= 0.90 &&
                        res.tree_family_rates[1] >= 0.85;
        all_ok = all_ok && ok;
        char buf[160];
        std::snprintf(buf, sizeof(buf), " [%s order %.2f tree1 %.2f tree2 %.2f]",
                      designs[di].name.c_str(), res.order_rate, res.tree_family_rates[0],
                      res.tree_family_rates[1]);
        detail += buf;
    }
    char t[48];
    std::snprintf(t, sizeof(t), " (%.0f s)", elapsed_s(t0));
    report(1, all_ok, detail + t);
}

// ---------- criterion 2: two-stage MLE parameter recovery ----------

void criterion2() {
    const auto t0 = Clock::now();
    const std::vector<UDvineSpec> specs = {
        UDvineSpec({BivariateCopula(Family::gaussian, {0.7}),
                    BivariateCopula(Family::gumbel, {1.25})}),
        UDvineSpec({BivariateCopula(Family::student_t, {0.7, 3.0}),
                    BivariateCopula(Family::clayton, {0.5})}),
        UDvineSpec({BivariateCopula(Family::gaussian, {0.7}),
                    BivariateCopula(Family::gaussian, {0.3})}),
    };
    CrossCopulaSpec cross;
    cross.kind = CrossKind::gaussian_full;
    cross.correlation = math::Matrix::identity(3);
    cross.correlation(0, 1) = cross.correlation(1, 0) = 0.2;
    cross.correlation(0, 2) = cross.correlation(2, 0) = 0.5;
    cross.correlation(1, 2) = cross.correlation(2, 1) = 0.8;

    MleExperimentConfig cfg;
    cfg.t = 2000;
    cfg.replications = 100;
    cfg.seed = 77000;
    cfg.threads = 0;
    const auto res = experiment_mle(specs, cross, cfg);

    // truth +- 3x the reported replication sd at T=2000; the t copula's
    // degrees of freedom carry a wider bracket; rho_23 is checked against
    // its reported mean band.
    struct Check {
        std::string name;
        double lo, hi;
    };
    const std::vector<Check> checks = {
        {"s1.tree1.rho", 0.700 - 3 * 0.024, 0.700 + 3 * 0.024},
        {"s1.tree2.alpha", 1.250 - 3 * 0.024, 1.250 + 3 * 0.024},
        {"s2.tree1.rho", 0.700 - 3 * 0.022, 0.700 + 3 * 0.022},
        {"s2.tree1.nu", 2.7, 3.7},
        {"s2.tree2.theta", 0.500 - 3 * 0.068, 0.500 + 3 * 0.068},
        {"s3.tree1.rho", 0.700 - 3 * 0.021, 0.700 + 3 * 0.021},
        {"s3.tree2.rho", 0.300 - 3 * 0.019, 0.300 + 3 * 0.019},
        {"cross.rho_12", 0.200 - 3 * 0.024, 0.200 + 3 * 0.024},
        {"cross.rho_13", 0.500 - 3 * 0.018, 0.500 + 3 * 0.018},
        {"cross.rho_23", 0.796 - 0.03, 0.796 + 0.03},
    };
    bool all_ok = (res.failures == 0);
    std::string detail = "two-stage MLE means at T=2000, 100 replications:";
    for (const auto& check : checks) {
        double mean = 0.0;
        bool found = false;
        for (std::size_t j = 0; j < res.names.size(); ++j) {
            if (res.names[j] == check.name) {
                mean = res.mean[j];
                found = true;
            }
        }
        const bool ok = found && mean >= check.lo && mean <= check.hi;
        all_ok = all_ok && ok;
        char buf[96];
        std::snprintf(buf, sizeof(buf), " %s=%.3f%s", check.name.c_str(), mean,
                      ok ? "" : "(!)");
        detail += buf;
    }
    char t[48];
    std::snprintf(t, sizeof(t), " (%.0f s)", elapsed_s(t0));
    report(2, all_ok, detail + t);
}

// ---------- criterion 3: VaR violation rates on GARCH data ----------

void criterion3() {
    const auto t0 = Clock::now();
    struct Variant {
        std::string name;
        GarchSpec spec;
    };
    const std::vector<Variant> variants = {
        {"garch", {0.05, 0.85, 0.1, 0.0}},
        {"gjr", {0.05, 0.85, 0.1, 0.05}},
    };
    bool all_ok = true;
    std::string detail = "VaR violation rates, T1=2000 T2=100, 100 replications:";
    for (std::size_t vi = 0; vi < variants.size(); ++vi) {
        VarExperimentConfig cfg;
        cfg.t_train = 2000;
        cfg.t_test = 100;
        cfg.q_levels = {0.10, 0.05};
        cfg.replications = 100;
        cfg.seed = 31000 + 1000 * vi;
        cfg.max_order = 2;
        cfg.draws = 1000;
        cfg.threads = 0;
        const auto res = experiment_var(variants[vi].spec, cfg);
        for (const auto& level : res.levels) {
            const double lo = (level.q0 == 0.10) ? 0.085 : 0.040;
            const double hi = (level.q0 == 0.10) ? 0.115 : 0.065;
            const bool in_band = level.mean_rate >= lo && level.mean_rate <= hi;
            const bool z_ok = level.z_p.has_value() && *level.z_p >= 0.01;
            all_ok = all_ok && in_band && z_ok;
            char buf[112];
            std::snprintf(buf, sizeof(buf), " [%s q0=%.2f mean %.3f z_p %.3f%s]",
                          variants[vi].name.c_str(), level.q0, level.mean_rate,
                          level.z_p.value_or(-1.0), (in_band && z_ok) ? "" : "(!)");
            detail += buf;
        }
    }
    char t[48];
    std::snprintf(t, sizeof(t), " (%.0f s)", elapsed_s(t0));
    report(3, all_ok, detail + t);
}

// ---------- criterion 4: numerical property suite ----------

void criterion4() {
    const auto t0 = Clock::now();
    bool ok = true;
    std::string bad;

    const std::vector<BivariateCopula> grid = {
        BivariateCopula(Family::gaussian, {-0.5}),
        BivariateCopula(Family::gaussian, {0.7}),
        BivariateCopula(Family::student_t, {0.5, 4.0}),
        BivariateCopula(Family::clayton, {0.5}),
        BivariateCopula(Family::gumbel, {1.25}),
        BivariateCopula(Family::frank, {4.0}),
        BivariateCopula(Family::joe, {1.5}),
    };
    const std::vector<double> interior = {0.1, 0.3, 0.5, 0.7, 0.9};

    // h-function vs central finite differences of the cdf
    double worst_h = 0.0;
    for (const auto& c : grid) {
        for (double u : interior) {
            for (double v : interior) {
                const double fd = (cdf(u, v + 1e-6, c) - cdf(u, v - 1e-6, c)) / 2e-6;
                worst_h = std::max(worst_h, std::fabs(hfun(u, v, c) - fd));
            }
        }
    }
    if (worst_h > 1e-5) {
        ok = false;
        bad += " hfun-fd";
    }

    // dg/du = w on random interior points
    const std::vector<UDvineSpec> specs = {
        UDvineSpec({BivariateCopula(Family::gaussian, {0.7})}),
        UDvineSpec({BivariateCopula(Family::gaussian, {0.7}),
                    BivariateCopula(Family::gumbel, {1.25})}),
        UDvineSpec({BivariateCopula(Family::student_t, {0.7, 3.0}),
                    BivariateCopula(Family::clayton, {0.5}),
                    BivariateCopula(Family::frank, {2.0})}),
    };
    double worst_g = 0.0;
    math::Rng rng(2024);
    for (const auto& spec : specs) {
        for (int rep = 0; rep < 25; ++rep) {
            std::vector<double> w(spec.order() + 1);
            for (auto& x : w) x = 0.1 + 0.8 * rng.uniform();
            auto wp = w, wm = w;
            wp[0] += 1e-6;
            wm[0] -= 1e-6;
            const double fd = (g_condcdf(wp, spec) - g_condcdf(wm, spec)) / 2e-6;
            worst_g = std::max(worst_g, std::fabs(fd - w_density(w, spec)));
        }
    }
    if (worst_g > 1e-4) {
        ok = false;
        bad += " dg/du-w";
    }

    // hinv round trips
    double worst_rt = 0.0;
    for (const auto& c : grid) {
        for (double u : interior) {
            for (double v : interior) {
                const double q = hfun(u, v, c);
                if (q <= 1e-9 || q >= 1.0 - 1e-9) continue;
                worst_rt = std::max(worst_rt, std::fabs(hinv(q, v, c) - u));
            }
        }
    }
    if (worst_rt > 1e-8) {
        ok = false;
        bad += " hinv-roundtrip";
    }

    // density normalization by 64x64 Gauss-Legendre
    double worst_norm = 0.0;
    for (const auto& c : grid) {
        const double total = math::integrate_gl(
            [&](double u) {
                return math::integrate_gl([&](double v) { return density(u, v, c); }, 0.0,
                                          1.0, 64);
            },
            0.0, 1.0, 64);
        worst_norm = std::max(worst_norm, std::fabs(total - 1.0));
    }
    if (worst_norm > 1e-4) {
        ok = false;
        bad += " normalization";
    }

    // CRPS closed case
    if (std::fabs(crps(std::vector<double>{0.0, 1.0}, 0.0) - 0.25) > 1e-12) {
        ok = false;
        bad += " crps";
    }

    // DCC constancy at a = b = 0
    {
        math::Matrix qbar = math::Matrix::identity(2);
        qbar(0, 1) = qbar(1, 0) = 0.4;
        const std::vector<double> eps = {1.7, -0.3};
        const auto st = dcc_step(qbar, eps, 0.0, 0.0, qbar);
        if (std::fabs(st.r(0, 1) - 0.4) > 1e-14 || std::fabs(st.q(0, 0) - 1.0) > 1e-14) {
            ok = false;
            bad += " dcc";
        }
    }

    // Matern smoothness 1/2 is the exponential kernel
    double worst_matern = 0.0;
    for (double h : {0.05, 0.7, 2.0, 5.5}) {
        worst_matern =
            std::max(worst_matern, std::fabs(matern_rho(h, 1.3, 0.5) - std::exp(-h / 1.3)));
    }
    if (worst_matern > 1e-12) {
        ok = false;
        bad += " matern";
    }

    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "properties: hfun-fd %.1e, dg/du-w %.1e, roundtrip %.1e, norm %.1e, "
                  "matern %.1e%s%s (%.0f s)",
                  worst_h, worst_g, worst_rt, worst_norm, worst_matern,
                  bad.empty() ? "" : " failing:", bad.c_str(), elapsed_s(t0));
    report(4, ok, buf);
}

// ---------- criterion 5: coverage test arithmetic ----------

void criterion5() {
    std::vector<bool> viol(365, false);
    for (int i = 0; i < 25; ++i) viol[i] = true;
    const auto c = coverage_tests(viol, 0.95);
    const bool ok = std::fabs(c.rate - 0.93150684931506844) < 1e-12 &&
                    std::fabs(c.binomial_p - 0.117) <= 0.005;
    char buf[128];
    std::snprintf(buf, sizeof(buf), "coverage arithmetic: rate %.4f binomial_p %.4f", c.rate,
                  c.binomial_p);
    report(5, ok, buf);
}

// ---------- criterion 6: true-model calibration ----------

void criterion6() {
    const auto t0 = Clock::now();
    const std::vector<UDvineSpec> specs = {
        UDvineSpec({BivariateCopula(Family::gaussian, {0.7}),
                    BivariateCopula(Family::gumbel, {1.25})}),
        UDvineSpec({BivariateCopula(Family::student_t, {0.7, 3.0}),
                    BivariateCopula(Family::clayton, {0.5})}),
        UDvineSpec({BivariateCopula(Family::gaussian, {0.7}),
                    BivariateCopula(Family::gaussian, {0.3})}),
    };
    CrossCopulaSpec cross;
    cross.kind = CrossKind::gaussian_full;
    cross.correlation = math::Matrix::identity(3);
    cross.correlation(0, 1) = cross.correlation(1, 0) = 0.2;
    cross.correlation(0, 2) = cross.correlation(2, 0) = 0.5;
    cross.correlation(1, 2) = cross.correlation(2, 1) = 0.8;

    const int t_train = 2000, t_test = 365;
    const auto pits = simulate_panel_pits(specs, cross, t_train + t_test, std::uint64_t{60601});
    math::Matrix panel(pits.rows(), 3);
    for (int t = 0; t < pits.rows(); ++t)
        for (int i = 0; i < 3; ++i) panel(t, i) = math::norm_quantile(pits(t, i));

    CuDvineModel truth;
    for (int i = 0; i < 3; ++i) {
        std::vector<double> train;
        for (int t = 0; t < t_train; ++t) train.push_back(panel(t, i));
        truth.series.push_back(UDvineModel{specs[i], EmpiricalMarginal::fit(train)});
    }
    truth.cross = cross;

    BacktestConfig cfg;
    cfg.draws = 1000;
    cfg.pi_level = 0.95;
    cfg.seed = 424242;
    cfg.threads = 0;
    const auto table = backtest(truth, panel, t_train, t_test, cfg);

    // exact central 99% band of Binomial(365, 0.95) coverage counts
    auto binom_cdf = [](int k, int n, double p) {
        double acc = 0.0;
        for (int j = 0; j <= k; ++j) {
            acc += std::exp(std::lgamma(n + 1.0) - std::lgamma(j + 1.0) -
                            std::lgamma(n - j + 1.0) + j * std::log(p) +
                            (n - j) * std::log1p(-p));
        }
        return acc;
    };
    int k_lo = 0, k_hi = 365;
    while (binom_cdf(k_lo, 365, 0.95) < 0.005) ++k_lo;
    while (binom_cdf(k_hi - 1, 365, 0.95) >= 0.995) --k_hi;
    const double lo = static_cast<double>(k_lo) / 365.0;
    const double hi = static_cast<double>(k_hi) / 365.0;

    const bool ok = table.pi_coverage >= lo && table.pi_coverage <= hi;
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "true-model 95%% P.I. coverage %.4f inside exact binomial 99%% band "
                  "[%.4f, %.4f] (%.0f s)",
                  table.pi_coverage, lo, hi, elapsed_s(t0));
    report(6, ok, buf);
}

}  // namespace

int main() {
    const auto t0 = Clock::now();
    criterion1();
    criterion2();
    criterion3();
    criterion4();
    criterion5();
    criterion6();
    std::printf("%s: %d criterion(s) failing, total %.0f s\n",
                failures == 0 ? "ACCEPTANCE PASS" : "ACCEPTANCE FAIL", failures,
                elapsed_s(t0));
    return failures == 0 ? 0 : 1;
}
