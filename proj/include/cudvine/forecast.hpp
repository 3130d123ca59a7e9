#pragma once

// One-step-ahead bootstrap predictive distributions and probabilistic
// scores: ensemble VaR quantiles, CRPS, the single-level quantile score,
// coverage tests, and a rolling backtest over a fixed model.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "estimation.hpp"
#include "math/matrix.hpp"
#include "math/rng.hpp"
#include "math/stats.hpp"
#include "model.hpp"
#include "parallel.hpp"

namespace cudvine {

struct ForecastEnsemble {
    math::Matrix draws;  // m x d
    long origin = -1;    // time index the forecast is made for

    int size() const { return draws.rows(); }
    int dim() const { return draws.cols(); }
};

// Scenario selector: either forecast from each series' own history alone,
// or additionally condition on contemporaneous observations of a subset of
// the series (their indices and observed values).
struct ForecastMode {
    bool conditional = false;
    std::vector<int> observed_idx;
    std::vector<double> observed_values;

    static ForecastMode own_history() { return {}; }
    static ForecastMode conditional_on(std::vector<int> idx, std::vector<double> values) {
        ForecastMode m;
        m.conditional = true;
        m.observed_idx = std::move(idx);
        m.observed_values = std::move(values);
        return m;
    }
};

namespace forecast_detail {

// PIT history per series, most recent first, from the trailing rows.
inline std::vector<std::vector<double>> history_pits(const CuDvineModel& model,
                                                     const math::Matrix& history) {
    const int d = model.dim();
    if (history.cols() != d)
        throw std::invalid_argument("forecast: history column count mismatch");
    std::vector<std::vector<double>> out(d);
    for (int i = 0; i < d; ++i) {
        const int p = model.series[i].spec.order();
        if (history.rows() < p) throw std::invalid_argument("forecast: history shorter than order");
        out[i].resize(p);
        for (int j = 0; j < p; ++j)
            out[i][j] = clip_unit(model.series[i].marginal.cdf(history(history.rows() - 1 - j, i)));
    }
    return out;
}

inline double invert_to_data(const CuDvineModel& model, int i, double v,
                             const std::vector<double>& hist) {
    const auto& s = model.series[i];
    const double u = s.spec.order() == 0 ? v : cond_quantile(v, hist, s.spec);
    return s.marginal.quantile(clip_unit(u));
}

}  // namespace forecast_detail

// m bootstrap draws of the next observation vector. The cross copula
// supplies the joint conditional PITs, each series' conditional quantile
// inverts them given its own history, and the marginal quantile maps back
// to the data scale. With a conditional mode, the unobserved coordinates
// are drawn from the latent-score conditional law given the observed
// coordinates' conditional PITs; observed columns carry their actual value.
inline ForecastEnsemble forecast_one_step(const CuDvineModel& model, const math::Matrix& history,
                                          int m, std::uint64_t seed,
                                          const ForecastMode& mode = ForecastMode::own_history(),
                                          const math::Matrix* state = nullptr) {
    if (m < 1) throw std::invalid_argument("forecast_one_step: need at least one draw");
    const int d = model.dim();
    const auto hpits = forecast_detail::history_pits(model, history);
    math::Rng rng(seed);

    ForecastEnsemble ens;
    ens.draws = math::Matrix(m, d);

    if (!mode.conditional || d == 1) {
        for (int rep = 0; rep < m; ++rep) {
            std::vector<double> v;
            if (d == 1) {
                v = {rng.uniform()};
            } else {
                v = sample(model.cross, rng, state);
            }
            for (int i = 0; i < d; ++i)
                ens.draws(rep, i) = forecast_detail::invert_to_data(model, i, v[i], hpits[i]);
        }
        return ens;
    }

    // Scenario with contemporaneous observations: compute the observed
    // coordinates' conditional PITs and scores, then draw the rest.
    const auto& idx = mode.observed_idx;
    if (idx.empty() || idx.size() != mode.observed_values.size())
        throw std::invalid_argument("forecast_one_step: observed indices/values mismatch");
    std::vector<double> z_obs(idx.size());
    for (std::size_t j = 0; j < idx.size(); ++j) {
        const int i = idx[j];
        if (i < 0 || i >= d) throw std::invalid_argument("forecast_one_step: unknown series index");
        const auto& s = model.series[i];
        const double u = clip_unit(s.marginal.cdf(mode.observed_values[j]));
        double v;
        if (s.spec.order() == 0) {
            v = u;
        } else {
            std::vector<double> window(s.spec.order() + 1);
            window[0] = u;
            std::copy(hpits[i].begin(), hpits[i].end(), window.begin() + 1);
            v = clip_unit(g_condcdf(window, s.spec));
        }
        z_obs[j] = model.cross.is_student() ? math::student_t_quantile(v, model.cross.nu)
                                            : math::norm_quantile(v);
    }
    for (int rep = 0; rep < m; ++rep) {
        const auto v = sample_conditional(model.cross, idx, z_obs, rng, state);
        for (int i = 0; i < d; ++i) {
            bool observed = false;
            for (std::size_t j = 0; j < idx.size(); ++j) {
                if (idx[j] == i) {
                    ens.draws(rep, i) = mode.observed_values[j];
                    observed = true;
                    break;
                }
            }
            if (!observed)
                ens.draws(rep, i) = forecast_detail::invert_to_data(model, i, v[i], hpits[i]);
        }
    }
    return ens;
}

// Weight-aggregated draw vector: (sum_i w_i y_i) / (sum_i w_i); defaults to
// the first column for d = 1 and equal weights otherwise.
inline std::vector<double> aggregate_draws(const ForecastEnsemble& ens,
                                           const std::vector<double>& weights = {}) {
    const int d = ens.dim();
    std::vector<double> w = weights;
    if (w.empty()) w.assign(d, 1.0);
    if (static_cast<int>(w.size()) != d)
        throw std::invalid_argument("aggregate_draws: weight length mismatch");
    double wsum = 0.0;
    for (double x : w) wsum += x;
    if (wsum <= 0.0) throw std::invalid_argument("aggregate_draws: weights must sum positive");
    std::vector<double> out(ens.size());
    for (int r = 0; r < ens.size(); ++r) {
        double s = 0.0;
        for (int i = 0; i < d; ++i) s += w[i] * ens.draws(r, i);
        out[r] = s / wsum;
    }
    return out;
}

inline double var_quantile(const ForecastEnsemble& ens, double level,
                           const std::vector<double>& weights = {}) {
    return math::quantile_type7(aggregate_draws(ens, weights), level);
}

// Empirical CRPS: mean |x_i - y| - (1/(2 m^2)) sum_ij |x_i - x_j|, computed
// in O(m log m) through the sorted order.
inline double crps(std::vector<double> draws, double y) {
    if (draws.empty()) throw std::invalid_argument("crps: empty ensemble");
    const double m = static_cast<double>(draws.size());
    double abs_err = 0.0;
    for (double x : draws) abs_err += std::fabs(x - y);
    abs_err /= m;
    if (draws.size() == 1) return abs_err;
    std::sort(draws.begin(), draws.end());
    double spread = 0.0;
    for (std::size_t i = 0; i < draws.size(); ++i)
        spread += (2.0 * (static_cast<double>(i) + 1.0) - m - 1.0) * draws[i];
    return abs_err - spread / (m * m);
}

inline double crps(const ForecastEnsemble& ens, double y, const std::vector<double>& weights = {}) {
    return crps(aggregate_draws(ens, weights), y);
}

// Single-level quantile score: (1{y < q} - level) (q - y); zero iff q = y.
inline double qrps(double quantile_hat, double y, double level) {
    const double indicator = (y < quantile_hat) ? 1.0 : 0.0;
    return (indicator - level) * (quantile_hat - y);
}

inline double qrps(const ForecastEnsemble& ens, double y, double level,
                   const std::vector<double>& weights = {}) {
    return qrps(var_quantile(ens, level, weights), y, level);
}

struct CoverageTest {
    double rate = 0.0;
    double binomial_p = 1.0;
    std::optional<double> z_p;
};

// Coverage of a per-day violation record against a target coverage rate.
// rate is the fraction of covered days; the exact binomial test compares
// the violation count with 1 - target.
inline CoverageTest coverage_tests(const std::vector<bool>& violations, double target) {
    if (violations.empty()) throw std::invalid_argument("coverage_tests: empty record");
    int k = 0;
    for (bool v : violations) k += v;
    const int n = static_cast<int>(violations.size());
    CoverageTest out;
    out.rate = 1.0 - static_cast<double>(k) / n;
    out.binomial_p = math::binom_test_two_sided(k, n, 1.0 - target);
    return out;
}

// Replication-level overload: one-sample z-test of per-replication rates
// against the target rate.
inline CoverageTest coverage_tests(const std::vector<double>& rates, double target) {
    if (rates.empty()) throw std::invalid_argument("coverage_tests: empty record");
    CoverageTest out;
    out.rate = math::mean(rates);
    out.binomial_p = 1.0;
    if (rates.size() >= 2) out.z_p = math::z_test_two_sided(rates, target);
    return out;
}

// --- rolling backtest ---

struct BacktestConfig {
    int draws = 1000;
    double var_level = 0.95;     // VaR reported at this quantile
    double qrps_level = 0.95;
    double pi_level = 0.95;      // equal-tailed prediction interval
    std::vector<double> weights; // aggregation weights; empty = equal
    std::uint64_t seed = 1;
    int threads = 0;
};

struct BacktestRow {
    long day = 0;
    double observed = 0.0;
    double crps = 0.0;
    double qrps = 0.0;
    double var_quantile = 0.0;
    bool var_violation = false;
    bool pi_hit = false;
};

struct BacktestTable {
    std::vector<BacktestRow> rows;
    double avg_crps = 0.0;
    double avg_qrps = 0.0;
    double var_violation_rate = 0.0;
    double pi_coverage = 0.0;
    CoverageTest var_test;
    CoverageTest pi_test;
};

// One-step forecasts rolled over [test_start, test_start + test_len) with
// the model fixed and the observed history advancing day by day.
inline BacktestTable backtest(const CuDvineModel& model, const math::Matrix& panel,
                              int test_start, int test_len, const BacktestConfig& config) {
    const int d = model.dim();
    const int maxp = model.max_order();
    if (panel.cols() != d) throw std::invalid_argument("backtest: panel dimension mismatch");
    if (test_start < maxp || test_start + test_len > panel.rows() || test_len < 1)
        throw std::invalid_argument("backtest: test range outside panel");

    BacktestTable table;
    table.rows.resize(test_len);
    const double pi_lo = 0.5 * (1.0 - config.pi_level);
    const double pi_hi = 1.0 - pi_lo;

    parallel_for(test_len, config.threads, [&](int k) {
        const int t = test_start + k;
        math::Matrix history(maxp, d);
        for (int j = 0; j < maxp; ++j)
            for (int i = 0; i < d; ++i) history(j, i) = panel(t - maxp + j, i);
        const auto ens = forecast_one_step(model, history, config.draws,
                                           config.seed + 104729ULL * (k + 1));
        auto agg = aggregate_draws(ens, config.weights);
        std::sort(agg.begin(), agg.end());

        double target = 0.0;
        {
            std::vector<double> w = config.weights;
            if (w.empty()) w.assign(d, 1.0);
            double wsum = 0.0;
            for (double x : w) wsum += x;
            for (int i = 0; i < d; ++i) target += w[i] * panel(t, i);
            target /= wsum;
        }

        BacktestRow row;
        row.day = t;
        row.observed = target;
        row.crps = crps(agg, target);
        const double q_var = math::quantile_type7_sorted(agg, config.var_level);
        row.var_quantile = q_var;
        row.qrps = qrps(math::quantile_type7_sorted(agg, config.qrps_level), target,
                        config.qrps_level);
        row.var_violation = target > q_var;
        const double lo = math::quantile_type7_sorted(agg, pi_lo);
        const double hi = math::quantile_type7_sorted(agg, pi_hi);
        row.pi_hit = (target >= lo && target <= hi);
        table.rows[k] = row;
    });

    std::vector<bool> var_viol, pi_hits;
    for (const auto& row : table.rows) {
        table.avg_crps += row.crps;
        table.avg_qrps += row.qrps;
        var_viol.push_back(row.var_violation);
        pi_hits.push_back(!row.pi_hit);
    }
    table.avg_crps /= test_len;
    table.avg_qrps /= test_len;
    table.var_test = coverage_tests(var_viol, config.var_level);
    table.pi_test = coverage_tests(pi_hits, config.pi_level);
    table.var_violation_rate = 1.0 - table.var_test.rate;
    table.pi_coverage = table.pi_test.rate;
    return table;
}

// Fraction of days model A scores strictly better (lower CRPS) than model
// B; ties within 1e-12 count half to each.
inline double head_to_head_percentage(const BacktestTable& a, const BacktestTable& b) {
    if (a.rows.size() != b.rows.size() || a.rows.empty())
        throw std::invalid_argument("head_to_head_percentage: mismatched tables");
    double wins = 0.0;
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        const double diff = a.rows[i].crps - b.rows[i].crps;
        if (std::fabs(diff) <= 1e-12)
            wins += 0.5;
        else if (diff < 0.0)
            wins += 1.0;
    }
    return wins / static_cast<double>(a.rows.size());
}

}  // namespace cudvine
