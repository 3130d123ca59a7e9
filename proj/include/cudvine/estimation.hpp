#pragma once

// Model fitting: tree-by-tree sequential copula selection with BIC and the
// two-stage maximum likelihood estimator — stage 1 fits each series'
// D-vine against its rescaled empirical margin, stage 2 fits the
// cross-sectional copula on the conditional PITs from stage 1. Parametric
// bootstrap supplies standard errors.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "copulas.hpp"
#include "marginals.hpp"
#include "math/matrix.hpp"
#include "math/optimize.hpp"
#include "math/stats.hpp"
#include "model.hpp"
#include "parallel.hpp"
#include "udvine.hpp"

namespace cudvine {

inline constexpr double kObjectiveSentinel = 1e15;

// --- single-copula fit on fixed pseudo-observation pairs ---

namespace est_detail {

// Pseudo-observation pairs with per-family cached transforms. The Gaussian
// likelihood reduces to three cross moments of the normal scores, so its
// objective is O(1) per iterate.
class PairSample {
public:
    PairSample(std::vector<double> a, std::vector<double> b)
        : a_(std::move(a)), b_(std::move(b)) {
        if (a_.size() != b_.size() || a_.size() < 10)
            throw std::invalid_argument("PairSample: need matched samples of size >= 10");
        for (std::size_t i = 0; i < a_.size(); ++i) {
            a_[i] = clip_unit(a_[i]);
            b_[i] = clip_unit(b_[i]);
        }
    }

    std::size_t size() const { return a_.size(); }

    double tau() const {
        if (!tau_) tau_ = math::kendall_tau(a_, b_);
        return *tau_;
    }

    double loglik(const BivariateCopula& c) const {
        switch (c.family) {
            case Family::independence:
                return 0.0;
            case Family::gaussian: {
                ensure_normal_moments();
                const double rho = c.params[0];
                const double r2 = 1.0 - rho * rho;
                const double n = static_cast<double>(size());
                return -0.5 * n * std::log(r2) -
                       (rho * rho * (sxx_ + syy_) - 2.0 * rho * sxy_) / (2.0 * r2);
            }
            case Family::student_t:
                return student_loglik(c.params[0], c.params[1]);
            default: {
                double total = 0.0;
                for (std::size_t i = 0; i < a_.size(); ++i) {
                    const double lf = log_density(a_[i], b_[i], c);
                    if (!std::isfinite(lf)) return -kObjectiveSentinel;
                    total += lf;
                }
                return total;
            }
        }
    }

private:
    void ensure_normal_moments() const {
        if (have_moments_) return;
        sxx_ = syy_ = sxy_ = 0.0;
        for (std::size_t i = 0; i < a_.size(); ++i) {
            const double x = math::norm_quantile(a_[i]);
            const double y = math::norm_quantile(b_[i]);
            sxx_ += x * x;
            syy_ += y * y;
            sxy_ += x * y;
        }
        have_moments_ = true;
    }

    double student_loglik(double rho, double nu) const {
        const double r2 = 1.0 - rho * rho;
        const double n = static_cast<double>(size());
        const double c0 = std::lgamma(0.5 * (nu + 2.0)) + std::lgamma(0.5 * nu) -
                          2.0 * std::lgamma(0.5 * (nu + 1.0)) - 0.5 * std::log(r2);
        double total = n * c0;
        for (std::size_t i = 0; i < a_.size(); ++i) {
            const double x = math::student_t_quantile(a_[i], nu);
            const double y = math::student_t_quantile(b_[i], nu);
            total += 0.5 * (nu + 1.0) * (std::log1p(x * x / nu) + std::log1p(y * y / nu)) -
                     0.5 * (nu + 2.0) * std::log1p((x * x - 2.0 * rho * x * y + y * y) / (nu * r2));
            if (!std::isfinite(total)) return -kObjectiveSentinel;
        }
        return total;
    }

    std::vector<double> a_, b_;
    mutable std::optional<double> tau_;
    mutable bool have_moments_ = false;
    mutable double sxx_ = 0.0, syy_ = 0.0, sxy_ = 0.0;
};

// Tau-inversion starting point clamped into the family's box.
inline std::vector<double> tau_init_params(Family fam, double tau_hat) {
    const auto boxes = family_param_boxes(fam);
    std::vector<double> init;
    try {
        init = copula_from_tau(fam, tau_hat).params;
    } catch (const std::domain_error&) {
        init.assign(boxes.size(), 0.0);
        for (std::size_t i = 0; i < boxes.size(); ++i) {
            init[i] = boxes[i].log_scale ? std::sqrt(boxes[i].lo * boxes[i].hi)
                                         : 0.5 * (boxes[i].lo + boxes[i].hi);
        }
        if (fam == Family::student_t) init[1] = 5.0;
    }
    for (std::size_t i = 0; i < boxes.size(); ++i) {
        const double span = boxes[i].hi - boxes[i].lo;
        init[i] = std::min(std::max(init[i], boxes[i].lo + 1e-6 * span),
                           boxes[i].hi - 1e-6 * span);
    }
    return init;
}

}  // namespace est_detail

struct BivariateFit {
    BivariateCopula copula;
    double loglik = 0.0;
    double bic = 0.0;
    int evaluations = 0;
};

// MLE of one copula family on fixed pairs (the tree-k subproblem of the
// sequential procedure).
inline BivariateFit fit_bivariate_copula(const est_detail::PairSample& pairs, Family fam,
                                         double tol = 1e-8) {
    BivariateFit out;
    if (fam == Family::independence) {
        out.copula = BivariateCopula(Family::independence, {});
        return out;
    }
    const auto boxes = family_param_boxes(fam);
    const auto init = est_detail::tau_init_params(fam, pairs.tau());
    const auto res = math::minimize_boxed(
        [&](const std::vector<double>& p) {
            BivariateCopula c;
            c.family = fam;
            c.params = p;
            return -pairs.loglik(c);
        },
        init, boxes, tol);
    out.copula = BivariateCopula(fam, res.params);
    out.loglik = -res.fmin;
    out.evaluations = res.evaluations;
    return out;
}

// --- sequential tree-by-tree selection ---

struct CandidateScore {
    std::string family;
    double loglik = 0.0;
    double bic = 0.0;
};

struct LevelSelection {
    int tree = 0;
    std::vector<CandidateScore> candidates;  // includes the independence baseline
    std::string chosen;
};

struct SelectionResult {
    UDvineSpec spec;  // fitted parameters from the sequential stage
    std::vector<LevelSelection> trail;
};

// For tree k, holding trees 1..k-1 fixed at their fitted values, each
// candidate family is fitted to the level-k conditional pairs and scored by
// BIC = -2 loglik + #params log(T - k); independence scores 0 and triggers
// truncation when it wins.
inline SelectionResult select_udvine_from_pits(const std::vector<double>& pits,
                                               const std::vector<Family>& pool, int max_order,
                                               double tol = 1e-8) {
    if (pool.empty()) throw std::invalid_argument("select_udvine: empty candidate pool");
    if (max_order < 1) throw std::invalid_argument("select_udvine: max_order must be >= 1");
    const int n = static_cast<int>(pits.size());
    if (n < max_order + 20) throw std::invalid_argument("select_udvine: series too short");

    udvine_detail::WindowRecursion rec(pits);
    SelectionResult out;
    for (int k = 1; k <= max_order; ++k) {
        std::vector<double> a, b;
        a.reserve(n - k);
        b.reserve(n - k);
        for (int j = k; j < n; ++j) {
            a.push_back(rec.bwd[j - 1]);
            b.push_back(rec.fwd[j]);
        }
        est_detail::PairSample pairs(std::move(a), std::move(b));

        LevelSelection level;
        level.tree = k;
        level.candidates.push_back({"independence", 0.0, 0.0});
        BivariateFit best;  // independence baseline, bic 0
        best.copula = BivariateCopula(Family::independence, {});
        const double logn = std::log(static_cast<double>(n - k));
        for (Family fam : pool) {
            if (fam == Family::independence) continue;
            auto fit = fit_bivariate_copula(pairs, fam, tol);
            fit.bic = -2.0 * fit.loglik + family_param_count(fam) * logn;
            level.candidates.push_back({family_name(fam), fit.loglik, fit.bic});
            if (fit.bic < best.bic - 1e-9) best = fit;
        }
        level.chosen = family_name(best.copula.family);
        out.trail.push_back(std::move(level));

        if (best.copula.family == Family::independence) break;  // truncate at p = k-1
        out.spec.trees.push_back(best.copula);
        if (k < max_order) rec.apply_level(k, best.copula);
    }
    return out;
}

inline SelectionResult select_udvine(const std::vector<double>& series,
                                     const std::vector<Family>& pool, int max_order,
                                     double tol = 1e-8) {
    const auto marginal = EmpiricalMarginal::fit(series);
    return select_udvine_from_pits(marginal.pit(series), pool, max_order, tol);
}

// --- stage 1: joint MLE of one series' tree parameters ---

struct Stage1Fit {
    UDvineModel model;
    double loglik = 0.0;
    int evaluations = 0;
    double init_loglik = 0.0;  // at the tau-inversion (or template) initializer
};

namespace est_detail {

// Sequential tau-inversion initializer: tree by tree, invert the sample tau
// of the current level pairs and transform with that copula.
inline std::vector<BivariateCopula> tau_sequential_init(const std::vector<double>& pits,
                                                        const UDvineSpec& templ) {
    const int p = templ.order();
    udvine_detail::WindowRecursion rec(pits);
    const int n = static_cast<int>(pits.size());
    std::vector<BivariateCopula> init;
    for (int k = 1; k <= p; ++k) {
        const Family fam = templ.trees[k - 1].family;
        if (fam == Family::independence) {
            init.emplace_back(Family::independence, std::vector<double>{});
        } else {
            std::vector<double> a, b;
            for (int j = k; j < n; ++j) {
                a.push_back(rec.bwd[j - 1]);
                b.push_back(rec.fwd[j]);
            }
            const double tau_hat = math::kendall_tau(a, b);
            init.emplace_back(fam, tau_init_params(fam, tau_hat));
        }
        if (k < p) rec.apply_level(k, init.back());
    }
    return init;
}

struct FlatParams {
    std::vector<double> values;
    std::vector<math::ParamBox> boxes;
    std::vector<std::string> names;
};

inline FlatParams flatten_trees(const std::vector<BivariateCopula>& trees,
                                const std::string& prefix) {
    FlatParams flat;
    for (std::size_t k = 0; k < trees.size(); ++k) {
        const auto boxes = family_param_boxes(trees[k].family);
        const auto names = family_param_names(trees[k].family);
        for (std::size_t j = 0; j < boxes.size(); ++j) {
            flat.values.push_back(trees[k].params[j]);
            flat.boxes.push_back(boxes[j]);
            flat.names.push_back(prefix + "tree" + std::to_string(k + 1) + "." + names[j]);
        }
    }
    return flat;
}

inline UDvineSpec unflatten_trees(const UDvineSpec& templ, const std::vector<double>& values) {
    UDvineSpec spec;
    std::size_t pos = 0;
    for (const auto& tree : templ.trees) {
        const int np = family_param_count(tree.family);
        BivariateCopula c;
        c.family = tree.family;
        c.params.assign(values.begin() + pos, values.begin() + pos + np);
        pos += np;
        spec.trees.push_back(std::move(c));
    }
    return spec;
}

}  // namespace est_detail

// Maximizes the sum of log w over the series' PITs for the template's tree
// families. Template parameters (when valid for their boxes) seed the
// optimizer; the tau-inversion initializer is the fallback and the
// reference point for the objective-improvement invariant.
inline Stage1Fit fit_udvine_stage1(const std::vector<double>& series, const UDvineSpec& templ,
                                   double tol = 1e-8) {
    const int p = templ.order();
    if (static_cast<int>(series.size()) <= p + 20)
        throw std::invalid_argument("fit_udvine_stage1: series too short for the template order");

    Stage1Fit out;
    out.model.marginal = EmpiricalMarginal::fit(series);
    const auto pits = out.model.marginal.pit(series);

    const auto tau_init = est_detail::tau_sequential_init(pits, templ);
    auto flat_init = est_detail::flatten_trees(tau_init, "");
    if (flat_init.values.empty()) {
        out.model.spec = templ;
        out.loglik = loglik(pits, templ);
        out.init_loglik = out.loglik;
        return out;
    }

    // seed from the template's own parameters when they are usable
    bool template_usable = true;
    try {
        for (const auto& t : templ.trees) t.validate();
    } catch (const std::exception&) {
        template_usable = false;
    }
    std::vector<double> start = flat_init.values;
    if (template_usable) {
        const auto templ_flat = est_detail::flatten_trees(templ.trees, "");
        const double ll_templ = loglik(pits, templ);
        const double ll_tau = loglik(pits, est_detail::unflatten_trees(templ, flat_init.values));
        if (ll_templ > ll_tau) start = templ_flat.values;
    }
    out.init_loglik = loglik(pits, est_detail::unflatten_trees(templ, flat_init.values));

    const auto res = math::minimize_boxed(
        [&](const std::vector<double>& vals) {
            const auto spec = est_detail::unflatten_trees(templ, vals);
            const double ll = loglik(pits, spec);
            return std::isfinite(ll) ? -ll : kObjectiveSentinel;
        },
        start, flat_init.boxes, tol);

    out.model.spec = est_detail::unflatten_trees(templ, res.params);
    out.loglik = -res.fmin;
    out.evaluations = res.evaluations;
    if (out.loglik + 1e-9 < out.init_loglik)
        throw std::runtime_error("fit_udvine_stage1: optimizer ended below its initializer");
    return out;
}

// --- conditional PITs feeding stage 2 ---

// V_ti = g_i(F_i(y_ti), ..., F_i(y_{t-p_i,i})) for t = max_p+1 .. T, the
// common rows where every series has a complete conditioning set.
inline math::Matrix conditional_pits(const std::vector<UDvineModel>& models,
                                     const math::Matrix& panel) {
    const int d = static_cast<int>(models.size());
    if (panel.cols() != d) throw std::invalid_argument("conditional_pits: dimension mismatch");
    int maxp = 0;
    for (const auto& m : models) maxp = std::max(maxp, m.spec.order());
    const int t0 = maxp;
    if (panel.rows() <= t0) throw std::invalid_argument("conditional_pits: panel too short");

    math::Matrix v(panel.rows() - t0, d);
    for (int i = 0; i < d; ++i) {
        const auto& m = models[i];
        const int p = m.spec.order();
        std::vector<double> pits(panel.rows());
        for (int t = 0; t < panel.rows(); ++t) pits[t] = m.marginal.cdf(panel(t, i));
        std::vector<double> window(p + 1);
        for (int t = t0; t < panel.rows(); ++t) {
            for (int j = 0; j <= p; ++j) window[j] = pits[t - j];
            v(t - t0, i) = clip_unit(p == 0 ? window[0] : g_condcdf(window, m.spec));
        }
    }
    return v;
}

// --- stage 2: cross-sectional copula MLE on the conditional PITs ---

struct Stage2Fit {
    CrossCopulaSpec spec;
    double loglik = 0.0;
    int evaluations = 0;
};

namespace est_detail {

inline math::Matrix normal_scores_correlation(const math::Matrix& v) {
    const int n = v.rows(), d = v.cols();
    math::Matrix m(d, d);
    std::vector<double> z(d);
    for (int t = 0; t < n; ++t) {
        for (int i = 0; i < d; ++i) z[i] = math::norm_quantile(clip_unit(v(t, i)));
        for (int i = 0; i < d; ++i)
            for (int j = 0; j <= i; ++j) m(i, j) += z[i] * z[j];
    }
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < i; ++j) m(j, i) = m(i, j);
    return math::make_positive_definite(math::to_correlation(m));
}

inline math::Matrix kendall_correlation(const math::Matrix& v) {
    const int d = v.cols();
    math::Matrix r = math::Matrix::identity(d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < i; ++j) {
            const double t = math::kendall_tau(v.col(i), v.col(j));
            r(i, j) = r(j, i) = std::sin(0.5 * math::kPi * t);
        }
    }
    return math::make_positive_definite(r);
}

inline double static_cross_loglik(const math::Matrix& v, const CrossCopulaSpec& spec) {
    double total = 0.0;
    std::vector<double> row(v.cols());
    for (int t = 0; t < v.rows(); ++t) {
        for (int i = 0; i < v.cols(); ++i) row[i] = v(t, i);
        const double l = log_density(row, spec);
        if (!std::isfinite(l)) return -kObjectiveSentinel;
        total += l;
    }
    return total;
}

// DCC filter log-likelihood; Qbar is the sample correlation of the
// standardized scores at the current nu.
inline double dcc_loglik(const math::Matrix& v, double a, double b, double nu,
                         math::Matrix* qbar_out = nullptr) {
    const int n = v.rows(), d = v.cols();
    std::vector<std::vector<double>> eps(n);
    math::Matrix qbar(d, d);
    for (int t = 0; t < n; ++t) {
        eps[t] = dcc_epsilon(v.row(t), nu);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j <= i; ++j) qbar(i, j) += eps[t][i] * eps[t][j];
    }
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < i; ++j) qbar(j, i) = qbar(i, j);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) qbar(i, j) /= n;
    qbar = math::make_positive_definite(qbar);
    if (qbar_out) *qbar_out = qbar;

    CrossCopulaSpec tv;
    tv.kind = CrossKind::time_varying_t;
    tv.nu = nu;

    math::Matrix q = qbar;
    double total = 0.0;
    for (int t = 0; t < n; ++t) {
        math::Matrix r = math::to_correlation(q);
        if (!math::is_positive_definite(r)) r = math::make_positive_definite(r);
        const double l = log_density(v.row(t), tv, &r);
        if (!std::isfinite(l)) return -kObjectiveSentinel;
        total += l;
        q = dcc_step(q, eps[t], a, b, qbar).q;
    }
    return total;
}

}  // namespace est_detail

inline Stage2Fit fit_cross_stage2(const math::Matrix& v, const CrossCopulaSpec& templ,
                                  double tol = 1e-8) {
    const int d = v.cols();
    if (d < 2) throw std::invalid_argument("fit_cross_stage2: need at least two series");
    if (v.rows() < 30) throw std::invalid_argument("fit_cross_stage2: too few rows");

    Stage2Fit out;
    out.spec = templ;
    switch (templ.kind) {
        case CrossKind::gaussian_full: {
            out.spec.correlation = est_detail::normal_scores_correlation(v);
            out.loglik = est_detail::static_cross_loglik(v, out.spec);
            break;
        }
        case CrossKind::student_t_full: {
            out.spec.correlation = est_detail::kendall_correlation(v);
            const std::vector<math::ParamBox> boxes = {{2.001, 200.0, true}};
            const auto res = math::minimize_boxed(
                [&](const std::vector<double>& p) {
                    CrossCopulaSpec s = out.spec;
                    s.nu = p[0];
                    return -est_detail::static_cross_loglik(v, s);
                },
                {8.0}, boxes, tol);
            out.spec.nu = res.params[0];
            out.loglik = -res.fmin;
            out.evaluations = res.evaluations;
            break;
        }
        case CrossKind::gaussian_matern: {
            if (!templ.matern) throw std::invalid_argument("fit_cross_stage2: missing matern block");
            const auto& dist = templ.matern->distances;
            double dmax = 0.0, dmin = 1e300;
            for (int i = 0; i < dist.rows(); ++i)
                for (int j = 0; j < i; ++j) {
                    dmax = std::max(dmax, dist(i, j));
                    dmin = std::min(dmin, dist(i, j));
                }
            const std::vector<math::ParamBox> boxes = {{1e-3 * dmin, 1e3 * dmax, true},
                                                       {0.05, 10.0, true}};
            const auto res = math::minimize_boxed(
                [&](const std::vector<double>& p) {
                    CrossCopulaSpec s = templ;
                    try {
                        s.correlation = matern_correlation(dist, p[0], p[1]);
                    } catch (const std::exception&) {
                        return kObjectiveSentinel;
                    }
                    return -est_detail::static_cross_loglik(v, s);
                },
                {templ.matern->range > 0 ? templ.matern->range : 0.3 * dmax,
                 templ.matern->smoothness > 0 ? templ.matern->smoothness : 0.5},
                boxes, tol);
            out.spec.matern->range = res.params[0];
            out.spec.matern->smoothness = res.params[1];
            out.spec.correlation = matern_correlation(dist, res.params[0], res.params[1]);
            out.loglik = -res.fmin;
            out.evaluations = res.evaluations;
            break;
        }
        case CrossKind::time_varying_t: {
            const std::vector<math::ParamBox> boxes = {
                {1e-6, 0.4, true}, {1e-4, 0.999, false}, {2.001, 200.0, true}};
            const auto res = math::minimize_boxed(
                [&](const std::vector<double>& p) {
                    if (p[0] + p[1] >= 0.999) return kObjectiveSentinel;
                    return -est_detail::dcc_loglik(v, p[0], p[1], p[2]);
                },
                {0.05, 0.9, 8.0}, boxes, tol);
            out.spec.nu = res.params[2];
            math::Matrix qbar;
            out.loglik = est_detail::dcc_loglik(v, res.params[0], res.params[1], res.params[2], &qbar);
            out.spec.dcc = DccParams{res.params[0], res.params[1], qbar};
            out.evaluations = res.evaluations;
            break;
        }
    }
    if (out.loglik <= -kObjectiveSentinel / 2)
        throw std::runtime_error("fit_cross_stage2: degenerate likelihood");
    return out;
}

// --- the full two-stage pipeline ---

struct EstimationConfig {
    bool auto_select = true;
    std::vector<UDvineSpec> templates;  // one per series when auto_select is off
    std::vector<Family> pool = {Family::gaussian, Family::student_t, Family::clayton,
                                Family::gumbel,   Family::frank,     Family::joe};
    int max_order = 3;
    CrossCopulaSpec cross_template;  // kind + structural inputs (distances)
    double tol = 1e-8;
    int threads = 0;
};

struct SeriesFitSummary {
    std::string name;
    double loglik = 0.0;  // L_1i
    double init_loglik = 0.0;
    int evaluations = 0;
    std::vector<LevelSelection> selection_trail;
};

struct FitReport {
    CuDvineModel model;
    std::vector<SeriesFitSummary> series;
    std::optional<Stage2Fit> cross;
    std::uint64_t seed = 0;
    std::map<std::string, double> bootstrap_se;

    // named parameter vector, flattened in report order
    std::vector<std::pair<std::string, double>> parameters() const {
        std::vector<std::pair<std::string, double>> out;
        for (std::size_t i = 0; i < model.series.size(); ++i) {
            const std::string prefix =
                (series.size() == model.series.size() && !series[i].name.empty())
                    ? series[i].name + "."
                    : "s" + std::to_string(i + 1) + ".";
            const auto flat = est_detail::flatten_trees(model.series[i].spec.trees, prefix);
            for (std::size_t j = 0; j < flat.values.size(); ++j)
                out.emplace_back(flat.names[j], flat.values[j]);
        }
        if (cross) {
            const auto& s = cross->spec;
            if (s.kind == CrossKind::gaussian_full || s.kind == CrossKind::student_t_full) {
                for (int i = 0; i < s.correlation.rows(); ++i)
                    for (int j = i + 1; j < s.correlation.cols(); ++j)
                        out.emplace_back("cross.rho_" + std::to_string(i + 1) +
                                             std::to_string(j + 1),
                                         s.correlation(i, j));
            }
            if (s.kind == CrossKind::student_t_full || s.kind == CrossKind::time_varying_t)
                out.emplace_back("cross.nu", s.nu);
            if (s.kind == CrossKind::gaussian_matern) {
                out.emplace_back("cross.range", s.matern->range);
                out.emplace_back("cross.smoothness", s.matern->smoothness);
            }
            if (s.kind == CrossKind::time_varying_t) {
                out.emplace_back("cross.a", s.dcc->a);
                out.emplace_back("cross.b", s.dcc->b);
            }
        }
        return out;
    }
};

inline FitReport fit_cudvine(const math::Matrix& panel, const std::vector<std::string>& names,
                             const EstimationConfig& config) {
    const int d = panel.cols();
    if (d < 1) throw std::invalid_argument("fit_cudvine: empty panel");
    if (!config.auto_select && static_cast<int>(config.templates.size()) != d)
        throw std::invalid_argument("fit_cudvine: one template per series required");

    FitReport report;
    report.model.series.resize(d);
    report.series.resize(d);

    std::vector<std::vector<double>> columns(d);
    for (int i = 0; i < d; ++i) columns[i] = panel.col(i);

    parallel_for(d, config.threads, [&](int i) {
        SeriesFitSummary& summary = report.series[i];
        summary.name = (static_cast<int>(names.size()) == d) ? names[i] : "";
        UDvineSpec templ;
        if (config.auto_select) {
            auto sel = select_udvine(columns[i], config.pool, config.max_order, config.tol);
            summary.selection_trail = std::move(sel.trail);
            templ = std::move(sel.spec);
        } else {
            templ = config.templates[i];
        }
        auto fit = fit_udvine_stage1(columns[i], templ, config.tol);
        report.model.series[i] = std::move(fit.model);
        summary.loglik = fit.loglik;
        summary.init_loglik = fit.init_loglik;
        summary.evaluations = fit.evaluations;
    });

    if (d >= 2) {
        const auto v = conditional_pits(report.model.series, panel);
        report.cross = fit_cross_stage2(v, config.cross_template, config.tol);
        report.model.cross = report.cross->spec;
    } else {
        report.model.cross.kind = CrossKind::gaussian_full;
        report.model.cross.correlation = math::Matrix::identity(1);
    }
    return report;
}

// --- parametric bootstrap standard errors ---

struct BootstrapResult {
    std::map<std::string, double> se;
    int failures = 0;
    int total = 0;
};

inline BootstrapResult bootstrap_se(const CuDvineModel& model, int b, int t, std::uint64_t seed,
                                    int threads = 0) {
    if (b < 50) throw std::invalid_argument("bootstrap_se: need at least 50 replications");
    if (t < 50) throw std::invalid_argument("bootstrap_se: need at least 50 observations");
    const int d = model.dim();

    EstimationConfig config;
    config.auto_select = false;
    for (const auto& s : model.series) config.templates.push_back(s.spec);
    config.cross_template = model.cross;
    config.threads = 1;  // parallelism is across replicates

    std::vector<std::string> names;
    for (int i = 0; i < d; ++i) names.push_back("s" + std::to_string(i + 1));

    std::vector<std::vector<double>> draws(b);
    std::vector<int> failed(b, 0);
    std::vector<std::string> param_names;
    {
        FitReport proto;
        proto.model = model;
        proto.series.resize(d);
        if (d >= 2) proto.cross = Stage2Fit{model.cross, 0.0, 0};
        for (const auto& [nm, val] : proto.parameters()) param_names.push_back(nm);
    }

    parallel_for(b, threads, [&](int rep) {
        try {
            const auto panel = simulate_panel(model, t, seed + 7919ULL * (rep + 1));
            auto refit = fit_cudvine(panel, names, config);
            std::vector<double> vals;
            for (const auto& [nm, val] : refit.parameters()) vals.push_back(val);
            draws[rep] = std::move(vals);
        } catch (const std::exception&) {
            failed[rep] = 1;
        }
    });

    BootstrapResult out;
    out.total = b;
    for (int rep = 0; rep < b; ++rep) out.failures += failed[rep];
    if (out.failures * 10 > b)
        throw std::runtime_error("bootstrap_se: more than 10% of replications failed");

    const std::size_t np = param_names.size();
    for (std::size_t j = 0; j < np; ++j) {
        std::vector<double> col;
        for (int rep = 0; rep < b; ++rep)
            if (!failed[rep] && draws[rep].size() == np) col.push_back(draws[rep][j]);
        out.se[param_names[j]] = math::sample_sd(col);
    }
    return out;
}

}  // namespace cudvine
