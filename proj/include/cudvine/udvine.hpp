#pragma once

// Truncated univariate D-vine time-series model. With one copula per tree
// (homogeneity) and truncation at tree p, the model is a p-order Markov
// chain. The two workhorses are
//   w(u_t, ..., u_{t-p})  - product of tree-copula densities, equal to
//                           f(y_t | past) / f(y_t),
//   g(u_t, ..., u_{t-p})  - conditional cdf of the current PIT given the
//                           last p PITs,
// both built from h-functions by the recursion of Aas et al. (2009).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "copulas.hpp"
#include "marginals.hpp"
#include "math/optimize.hpp"
#include "math/rng.hpp"

namespace cudvine {

inline constexpr double kLogFactorFloor = -1e10;
inline constexpr double kLoglikSentinel = -1e15;

struct UDvineSpec {
    std::vector<BivariateCopula> trees;  // trees[k-1] couples variables k steps apart

    UDvineSpec() = default;
    explicit UDvineSpec(std::vector<BivariateCopula> t) : trees(std::move(t)) { validate(); }

    int order() const { return static_cast<int>(trees.size()); }

    void validate() const {
        for (const auto& c : trees) c.validate();
    }
};

namespace udvine_detail {

// Fused pass over the level arrays: accumulates sum log c over the pairs
// (bwd[j-1], fwd[j]) for j >= accum_from (when requested) and transforms
// both arrays in place to the next level (when requested). Elliptical
// families compute their latent scores once and reuse them between the
// density and the two h-functions, which dominates the likelihood cost.
struct LevelPass {
    double sum_log_density = 0.0;
    bool underflow = false;
};

inline LevelPass level_pass(std::vector<double>& fwd, std::vector<double>& bwd,
                            const BivariateCopula& tree, int level, int accum_from,
                            bool do_accum, bool do_transform) {
    LevelPass out;
    const int n = static_cast<int>(fwd.size());
    auto accumulate = [&](double lf) {
        if (!std::isfinite(lf)) {
            lf = kLogFactorFloor;
            out.underflow = true;
        }
        out.sum_log_density += lf;
    };

    if (tree.family == Family::student_t || tree.family == Family::gaussian) {
        const bool student = tree.family == Family::student_t;
        const double rho = tree.params[0];
        const double nu = student ? tree.params[1] : 0.0;
        const double r2 = 1.0 - rho * rho;
        const double c0 =
            student ? std::lgamma(0.5 * (nu + 2.0)) + std::lgamma(0.5 * nu) -
                          2.0 * std::lgamma(0.5 * (nu + 1.0)) - 0.5 * std::log(r2)
                    : -0.5 * std::log(r2);
        // latent scores of the current level arrays
        std::vector<double> xf(n), xb(n);
        for (int j = level - 1; j < n; ++j) {
            const double uf = clip_unit(fwd[j]);
            const double ub = clip_unit(bwd[j]);
            xf[j] = student ? math::student_t_quantile(uf, nu) : math::norm_quantile(uf);
            xb[j] = student ? math::student_t_quantile(ub, nu) : math::norm_quantile(ub);
        }
        for (int j = n - 1; j >= level; --j) {
            const double x = xf[j], y = xb[j - 1];
            if (do_accum && j >= accum_from) {
                double lf;
                if (student) {
                    lf = c0 +
                         0.5 * (nu + 1.0) * (std::log1p(x * x / nu) + std::log1p(y * y / nu)) -
                         0.5 * (nu + 2.0) *
                             std::log1p((x * x - 2.0 * rho * x * y + y * y) / (nu * r2));
                } else {
                    lf = c0 - (rho * rho * (x * x + y * y) - 2.0 * rho * x * y) / (2.0 * r2);
                }
                accumulate(lf);
            }
            if (do_transform) {
                if (student) {
                    const double sy = std::sqrt((nu + y * y) * r2 / (nu + 1.0));
                    const double sx = std::sqrt((nu + x * x) * r2 / (nu + 1.0));
                    fwd[j] = clip_unit(math::student_t_cdf((x - rho * y) / sy, nu + 1.0));
                    bwd[j] = clip_unit(math::student_t_cdf((y - rho * x) / sx, nu + 1.0));
                } else {
                    const double s = std::sqrt(r2);
                    fwd[j] = clip_unit(math::norm_cdf((x - rho * y) / s));
                    bwd[j] = clip_unit(math::norm_cdf((y - rho * x) / s));
                }
            }
        }
        return out;
    }

    for (int j = n - 1; j >= level; --j) {
        const double a = bwd[j - 1];  // F(v_{j-k} | middle block)
        const double b = fwd[j];      // F(v_j | middle block)
        if (do_accum && j >= accum_from) accumulate(log_density(a, b, tree));
        if (do_transform) {
            fwd[j] = hfun(b, a, tree);
            bwd[j] = hfun(a, b, tree);
        }
    }
    return out;
}

// Forward/backward conditional cdf arrays over a window in time order.
// After level k, fwd[j] = F(v_j | v_{j-k..j-1}) and
// bwd[j] = F(v_{j-k} | v_{j-k+1..j}), valid for j >= k (0-based).
struct WindowRecursion {
    std::vector<double> fwd;
    std::vector<double> bwd;

    explicit WindowRecursion(std::span<const double> time_ordered)
        : fwd(time_ordered.begin(), time_ordered.end()),
          bwd(time_ordered.begin(), time_ordered.end()) {}

    // Applies tree level k (1-based) in place; entries j < k become stale.
    void apply_level(int k, const BivariateCopula& tree) {
        level_pass(fwd, bwd, tree, k, 0, false, true);
    }
};

inline std::vector<double> to_time_order(std::span<const double> current_first) {
    return std::vector<double>(current_first.rbegin(), current_first.rend());
}

}  // namespace udvine_detail

// w(u_t, u_{t-1}, ..., u_{t-p}): product over trees of the copula density
// at the conditional cdf pairs. Arguments ordered current-first.
inline double log_w_density(std::span<const double> window, const UDvineSpec& spec) {
    const int p = spec.order();
    if (static_cast<int>(window.size()) != p + 1)
        throw std::invalid_argument("log_w_density: window length must be order + 1");
    if (p == 0) return 0.0;
    const auto v = udvine_detail::to_time_order(window);
    udvine_detail::WindowRecursion rec(v);
    const int m = p + 1;
    double total = 0.0;
    for (int k = 1; k <= p; ++k) {
        double lf = log_density(rec.bwd[m - 2], rec.fwd[m - 1], spec.trees[k - 1]);
        if (!std::isfinite(lf)) lf = kLogFactorFloor;
        total += lf;
        if (k < p) rec.apply_level(k, spec.trees[k - 1]);
    }
    return total;
}

inline double w_density(std::span<const double> window, const UDvineSpec& spec) {
    return std::exp(log_w_density(window, spec));
}

// g(u_t, ..., u_{t-p}) = F(u_t | u_{t-1}, ..., u_{t-p}).
inline double g_condcdf(std::span<const double> window, const UDvineSpec& spec) {
    const int p = spec.order();
    if (static_cast<int>(window.size()) != p + 1)
        throw std::invalid_argument("g_condcdf: window length must be order + 1");
    if (p == 0) return window[0];
    const auto v = udvine_detail::to_time_order(window);
    udvine_detail::WindowRecursion rec(v);
    for (int k = 1; k < p; ++k) rec.apply_level(k, spec.trees[k - 1]);
    return hfun(rec.fwd[p], rec.bwd[p - 1], spec.trees[p - 1]);
}

// Sum over t = p+1..T of log w; the first p observations carry incomplete
// conditioning sets and contribute nothing. Level arrays give O(T p)
// h-evaluations for the whole series.
inline double loglik(std::span<const double> pits, const UDvineSpec& spec) {
    const int p = spec.order();
    const int n = static_cast<int>(pits.size());
    if (n <= p) throw std::invalid_argument("loglik: series shorter than order + 1");
    if (p == 0) return 0.0;
    udvine_detail::WindowRecursion rec(pits);
    double total = 0.0;
    bool bad = false;
    for (int k = 1; k <= p; ++k) {
        const auto pass =
            udvine_detail::level_pass(rec.fwd, rec.bwd, spec.trees[k - 1], k, p, true, k < p);
        total += pass.sum_log_density;
        bad = bad || pass.underflow;
    }
    if (!std::isfinite(total)) return kLoglikSentinel;
    return bad ? std::max(total, kLoglikSentinel) : total;
}

// Inverse of g in its first argument: u with g(u, history) = q.
// history ordered most-recent-first (u_{t-1}, ..., u_{t-p}).
inline double cond_quantile(double q, std::span<const double> history, const UDvineSpec& spec) {
    const int p = spec.order();
    if (static_cast<int>(history.size()) != p)
        throw std::invalid_argument("cond_quantile: history length must equal order");
    if (!(q > 0.0 && q < 1.0)) throw std::domain_error("cond_quantile: q outside (0,1)");
    if (p == 0) return q;

    // Conditionals of the history block: cond[k] = F(v_{p-k} | v_{p-k+1..p-1})
    // in 0-based time order, needed as the conditioning value of tree k+1.
    const auto v = udvine_detail::to_time_order(history);  // v[0..p-1], v[p-1] most recent
    udvine_detail::WindowRecursion rec(v);
    std::vector<double> cond(p);
    cond[0] = v[p - 1];
    for (int k = 1; k < p; ++k) {
        rec.apply_level(k, spec.trees[k - 1]);
        cond[k] = rec.bwd[p - 1];
    }

    double qq = q;
    for (int k = p; k >= 1; --k) qq = hinv(qq, cond[k - 1], spec.trees[k - 1]);

    // The nested-hinv chain is the exact inverse of g; only numerically
    // inverted trees (gumbel, joe) can accumulate error worth polishing.
    bool numeric_tree = false;
    for (const auto& tree : spec.trees)
        numeric_tree = numeric_tree ||
                       (tree.family == Family::gumbel && tree.params[0] != 1.0) ||
                       tree.family == Family::joe;
    if (numeric_tree) {
        std::vector<double> window(p + 1);
        auto gof = [&](double u) {
            window[0] = u;
            std::copy(history.begin(), history.end(), window.begin() + 1);
            return g_condcdf(window, spec);
        };
        if (std::fabs(gof(qq) - q) > 1e-9) {
            qq = math::invert_increasing(gof, q, nullptr, "cond_quantile polish");
        }
    }
    return qq;
}

struct UDvineModel {
    UDvineSpec spec;
    EmpiricalMarginal marginal;
};

// PIT-space simulation: the chain starts from independent uniforms and
// discards burn_in draws.
inline std::vector<double> simulate_pits(int n, const UDvineSpec& spec, math::Rng& rng,
                                         int burn_in = 500) {
    if (n < 1) throw std::invalid_argument("simulate_pits: n must be >= 1");
    const int p = spec.order();
    std::vector<double> recent;  // most recent first
    recent.reserve(p);
    for (int i = 0; i < p; ++i) recent.push_back(rng.uniform());
    std::vector<double> out;
    out.reserve(n);
    for (int i = 0; i < n + burn_in; ++i) {
        const double q = rng.uniform();
        const double u = (p == 0) ? q : cond_quantile(q, recent, spec);
        if (p > 0) {
            recent.insert(recent.begin(), u);
            recent.pop_back();
        }
        if (i >= burn_in) out.push_back(u);
    }
    return out;
}

inline std::vector<double> simulate_pits(int n, const UDvineSpec& spec, std::uint64_t seed,
                                         int burn_in = 500) {
    math::Rng rng(seed);
    return simulate_pits(n, spec, rng, burn_in);
}

// Data-scale simulation through the fitted marginal's quantile function.
inline std::vector<double> simulate(int n, const UDvineModel& model, std::uint64_t seed,
                                    int burn_in = 500) {
    auto pits = simulate_pits(n, model.spec, seed, burn_in);
    for (double& u : pits) u = model.marginal.quantile(u);
    return pits;
}

}  // namespace cudvine
