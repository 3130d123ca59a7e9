#pragma once

// Data generators and experiment drivers: GARCH / GJR-GARCH simulation,
// the VaR backtest study, the sequential-selection study, and the
// two-stage-MLE study, each parallel over replications with derived seeds.

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "estimation.hpp"
#include "forecast.hpp"
#include "math/rng.hpp"
#include "math/stats.hpp"
#include "model.hpp"
#include "parallel.hpp"

namespace cudvine {

// sigma^2_t = w0 + w1 sigma^2_{t-1} + w2 Y^2_{t-1} + w3 1{Y_{t-1} > 0},
// Y_t = sigma_t eta_t with standard normal innovations.
struct GarchSpec {
    double omega0 = 0.0;
    double omega1 = 0.0;
    double omega2 = 0.0;
    double omega3 = 0.0;

    void validate() const {
        if (omega0 < 0.0 || omega1 < 0.0 || omega2 < 0.0 || omega3 < 0.0)
            throw std::invalid_argument("GarchSpec: coefficients must be nonnegative");
        if (omega1 + omega2 >= 1.0)
            throw std::invalid_argument("GarchSpec: omega1 + omega2 must be < 1 (stationarity)");
    }

    // E sigma^2 under symmetry of the innovations: P(Y > 0) = 1/2.
    double unconditional_variance() const {
        return (omega0 + 0.5 * omega3) / (1.0 - omega1 - omega2);
    }
};

inline std::vector<double> simulate_garch(const GarchSpec& spec, int n, std::uint64_t seed,
                                          int burn_in = 500) {
    spec.validate();
    if (n < 1) throw std::invalid_argument("simulate_garch: n must be >= 1");
    math::Rng rng(seed);
    double sigma2 = spec.unconditional_variance();
    double y_prev = 0.0;
    bool first = true;
    std::vector<double> out;
    out.reserve(n);
    for (int t = 0; t < n + burn_in; ++t) {
        if (!first) {
            sigma2 = spec.omega0 + spec.omega1 * sigma2 + spec.omega2 * y_prev * y_prev +
                     spec.omega3 * (y_prev > 0.0 ? 1.0 : 0.0);
        }
        first = false;
        const double y = std::sqrt(sigma2) * rng.normal();
        y_prev = y;
        if (t >= burn_in) out.push_back(y);
    }
    return out;
}

// --- VaR backtest study ---

struct VarExperimentConfig {
    int t_train = 2000;
    int t_test = 100;
    std::vector<double> q_levels = {0.10, 0.05};  // violation targets
    int replications = 100;
    std::uint64_t seed = 1;
    std::vector<Family> pool = {Family::gaussian, Family::student_t, Family::clayton,
                                Family::gumbel,   Family::frank,     Family::joe};
    int max_order = 2;
    int draws = 1000;
    int threads = 0;
};

struct VarExperimentLevel {
    double q0 = 0.0;
    double mean_rate = 0.0;
    std::optional<double> z_p;
    std::vector<double> rates;  // one per replication
};

struct VarExperimentResult {
    std::vector<VarExperimentLevel> levels;
    std::map<std::string, int> selected_orders;  // order -> count
};

// Per replication: simulate T1+T2, select + fit a uDvine on the first T1,
// then roll one-step ensembles over the last T2 recording violations of
// the (1-q) ensemble quantile for every q level.
inline VarExperimentResult experiment_var(const GarchSpec& garch,
                                          const VarExperimentConfig& config) {
    for (double q : config.q_levels) {
        if (!(q > 0.0 && q < 1.0))
            throw std::invalid_argument("experiment_var: q levels must be inside (0,1)");
    }
    if (config.replications < 1)
        throw std::invalid_argument("experiment_var: need at least one replication");

    const int nq = static_cast<int>(config.q_levels.size());
    std::vector<std::vector<double>> rates(nq, std::vector<double>(config.replications));
    std::vector<int> orders(config.replications);

    parallel_for(config.replications, config.threads, [&](int rep) {
        const std::uint64_t rep_seed = config.seed + 6151ULL * (rep + 1);
        const auto series =
            simulate_garch(garch, config.t_train + config.t_test, rep_seed);
        const std::vector<double> train(series.begin(), series.begin() + config.t_train);

        auto sel = select_udvine(train, config.pool, config.max_order);
        auto fit = fit_udvine_stage1(train, sel.spec);
        orders[rep] = fit.model.spec.order();

        CuDvineModel model;
        model.series.push_back(std::move(fit.model));
        model.cross.kind = CrossKind::gaussian_full;
        model.cross.correlation = math::Matrix::identity(1);
        const int maxp = std::max(model.max_order(), 1);

        std::vector<int> violations(nq, 0);
        for (int k = 0; k < config.t_test; ++k) {
            const int t = config.t_train + k;
            math::Matrix history(maxp, 1);
            for (int j = 0; j < maxp; ++j) history(j, 0) = series[t - maxp + j];
            const auto ens = forecast_one_step(model, history, config.draws,
                                               rep_seed + 99991ULL * (k + 1));
            auto agg = aggregate_draws(ens);
            std::sort(agg.begin(), agg.end());
            for (int iq = 0; iq < nq; ++iq) {
                const double var = math::quantile_type7_sorted(agg, 1.0 - config.q_levels[iq]);
                violations[iq] += (series[t] > var);
            }
        }
        for (int iq = 0; iq < nq; ++iq)
            rates[iq][rep] = static_cast<double>(violations[iq]) / config.t_test;
    });

    VarExperimentResult out;
    for (int iq = 0; iq < nq; ++iq) {
        VarExperimentLevel level;
        level.q0 = config.q_levels[iq];
        level.rates = rates[iq];
        level.mean_rate = math::mean(rates[iq]);
        if (config.replications >= 2)
            level.z_p = math::z_test_two_sided(rates[iq], level.q0);
        out.levels.push_back(std::move(level));
    }
    for (int o : orders) out.selected_orders["order" + std::to_string(o)]++;
    return out;
}

// --- sequential selection study ---

struct SelectionExperimentConfig {
    int t = 2000;
    int replications = 100;
    std::uint64_t seed = 1;
    std::vector<Family> pool = {Family::gaussian, Family::student_t, Family::clayton,
                                Family::gumbel,   Family::frank,     Family::joe};
    int max_order = 3;
    int threads = 0;
};

struct SelectionExperimentResult {
    double order_rate = 0.0;                 // correct order selected
    std::vector<double> tree_family_rates;   // per true tree, correct family
    int replications = 0;
};

// Simulates the true uDvine with standard normal margins, reselects, and
// tallies order and per-tree family recovery.
inline SelectionExperimentResult experiment_selection(const UDvineSpec& truth,
                                                      const SelectionExperimentConfig& config) {
    truth.validate();
    const int p = truth.order();
    if (config.replications < 1)
        throw std::invalid_argument("experiment_selection: need at least one replication");

    std::vector<int> order_ok(config.replications, 0);
    std::vector<std::vector<int>> tree_ok(p, std::vector<int>(config.replications, 0));

    parallel_for(config.replications, config.threads, [&](int rep) {
        math::Rng rng = math::replicate_rng(config.seed, rep);
        const auto pits = simulate_pits(config.t, truth, rng);
        std::vector<double> series(pits.size());
        for (std::size_t i = 0; i < pits.size(); ++i) series[i] = math::norm_quantile(pits[i]);
        const auto sel = select_udvine(series, config.pool, config.max_order);
        order_ok[rep] = (sel.spec.order() == p);
        for (int k = 0; k < p && k < sel.spec.order(); ++k)
            tree_ok[k][rep] = (sel.spec.trees[k].family == truth.trees[k].family);
    });

    SelectionExperimentResult out;
    out.replications = config.replications;
    int n_order = 0;
    for (int v : order_ok) n_order += v;
    out.order_rate = static_cast<double>(n_order) / config.replications;
    for (int k = 0; k < p; ++k) {
        int n = 0;
        for (int v : tree_ok[k]) n += v;
        out.tree_family_rates.push_back(static_cast<double>(n) / config.replications);
    }
    return out;
}

// --- two-stage MLE study ---

struct MleExperimentConfig {
    int t = 2000;
    int replications = 100;
    std::uint64_t seed = 1;
    int threads = 0;
};

struct MleExperimentResult {
    std::vector<std::string> names;
    std::vector<double> mean;
    std::vector<double> sd;
    int replications = 0;
    int failures = 0;
};

// Simulates d-variate panels from the true model (standard normal margins)
// and refits with the known parametric form, tabulating the estimates.
inline MleExperimentResult experiment_mle(const std::vector<UDvineSpec>& true_specs,
                                          const CrossCopulaSpec& true_cross,
                                          const MleExperimentConfig& config) {
    const int d = static_cast<int>(true_specs.size());
    if (d < 1) throw std::invalid_argument("experiment_mle: no series specs");

    EstimationConfig fitcfg;
    fitcfg.auto_select = false;
    fitcfg.templates = true_specs;
    fitcfg.cross_template = true_cross;
    fitcfg.threads = 1;
    std::vector<std::string> names;
    for (int i = 0; i < d; ++i) names.push_back("s" + std::to_string(i + 1));

    std::vector<std::vector<double>> draws(config.replications);
    std::vector<int> failed(config.replications, 0);
    std::vector<std::string> param_names;

    parallel_for(config.replications, config.threads, [&](int rep) {
        try {
            math::Rng rng = math::replicate_rng(config.seed, rep);
            const auto pits = simulate_panel_pits(true_specs, true_cross, config.t, rng);
            math::Matrix panel(pits.rows(), d);
            for (int t = 0; t < pits.rows(); ++t)
                for (int i = 0; i < d; ++i) panel(t, i) = math::norm_quantile(pits(t, i));
            const auto report = fit_cudvine(panel, names, fitcfg);
            std::vector<double> vals;
            for (const auto& [nm, val] : report.parameters()) vals.push_back(val);
            draws[rep] = std::move(vals);
        } catch (const std::exception&) {
            failed[rep] = 1;
        }
    });

    {
        FitReport proto;
        proto.model.series.resize(d);
        for (int i = 0; i < d; ++i) proto.model.series[i].spec = true_specs[i];
        proto.series.resize(d);
        if (d >= 2) proto.cross = Stage2Fit{true_cross, 0.0, 0};
        for (const auto& [nm, val] : proto.parameters()) param_names.push_back(nm);
    }

    MleExperimentResult out;
    out.replications = config.replications;
    out.names = param_names;
    for (std::size_t j = 0; j < param_names.size(); ++j) {
        std::vector<double> col;
        for (int rep = 0; rep < config.replications; ++rep)
            if (!failed[rep] && draws[rep].size() == param_names.size())
                col.push_back(draws[rep][j]);
        if (col.size() < 2) throw std::runtime_error("experiment_mle: too many failed replications");
        out.mean.push_back(math::mean(col));
        out.sd.push_back(math::sample_sd(col));
    }
    for (int f : failed) out.failures += f;
    return out;
}

}  // namespace cudvine
