#pragma once

// The full multivariate model: one truncated D-vine per component series
// linked by a cross-sectional copula, plus joint simulation.

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "crosscopula.hpp"
#include "math/matrix.hpp"
#include "math/rng.hpp"
#include "udvine.hpp"

namespace cudvine {

struct CuDvineModel {
    std::vector<UDvineModel> series;
    CrossCopulaSpec cross;

    int dim() const { return static_cast<int>(series.size()); }

    int max_order() const {
        int p = 0;
        for (const auto& s : series) p = std::max(p, s.spec.order());
        return p;
    }
};

// Joint PIT-space simulation. At each step a cross-copula draw supplies the
// conditional PITs, which each series' conditional quantile maps into its
// own PIT given its recent history. For the time-varying kind the DCC state
// is filtered along the simulated path.
inline math::Matrix simulate_panel_pits(const std::vector<UDvineSpec>& specs,
                                        const CrossCopulaSpec& cross, int n, math::Rng& rng,
                                        int burn_in = 500) {
    const int d = static_cast<int>(specs.size());
    if (d < 1) throw std::invalid_argument("simulate_panel_pits: no series specs");
    if (cross.dim() != d && d > 1)
        throw std::invalid_argument("simulate_panel_pits: cross copula dimension mismatch");
    if (n < 1) throw std::invalid_argument("simulate_panel_pits: n must be >= 1");

    std::vector<std::vector<double>> recent(d);  // most recent first
    for (int i = 0; i < d; ++i) {
        recent[i].resize(specs[i].order());
        for (auto& u : recent[i]) u = rng.uniform();
    }

    const bool varying = cross.kind == CrossKind::time_varying_t;
    math::Matrix q;
    if (varying) q = cross.dcc->qbar;

    math::Matrix out(n, d);
    for (int t = 0; t < n + burn_in; ++t) {
        std::vector<double> v;
        if (d == 1) {
            v = {rng.uniform()};
        } else if (varying) {
            const math::Matrix r = math::to_correlation(q);
            v = sample(cross, rng, &r);
            const auto eps = dcc_epsilon(v, cross.nu);
            q = dcc_step(q, eps, cross.dcc->a, cross.dcc->b, cross.dcc->qbar).q;
        } else {
            v = sample(cross, rng);
        }
        for (int i = 0; i < d; ++i) {
            const double u = specs[i].order() == 0 ? v[i] : cond_quantile(v[i], recent[i], specs[i]);
            if (specs[i].order() > 0) {
                recent[i].insert(recent[i].begin(), u);
                recent[i].pop_back();
            }
            if (t >= burn_in) out(t - burn_in, i) = u;
        }
    }
    return out;
}

inline math::Matrix simulate_panel_pits(const std::vector<UDvineSpec>& specs,
                                        const CrossCopulaSpec& cross, int n, std::uint64_t seed,
                                        int burn_in = 500) {
    math::Rng rng(seed);
    return simulate_panel_pits(specs, cross, n, rng, burn_in);
}

// Data-scale simulation through each series' fitted marginal quantile.
inline math::Matrix simulate_panel(const CuDvineModel& model, int n, std::uint64_t seed,
                                   int burn_in = 500) {
    std::vector<UDvineSpec> specs;
    specs.reserve(model.series.size());
    for (const auto& s : model.series) specs.push_back(s.spec);
    math::Matrix pits = simulate_panel_pits(specs, model.cross, n, seed, burn_in);
    for (int t = 0; t < pits.rows(); ++t)
        for (int i = 0; i < pits.cols(); ++i)
            pits(t, i) = model.series[i].marginal.quantile(pits(t, i));
    return pits;
}

}  // namespace cudvine
