#pragma once

// d-dimensional cross-sectional copulas linking the component time-series
// models: Gaussian (unstructured or Matern-structured over site distances),
// Student t, and a DCC(1,1)-driven time-varying t copula.

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "math/matrix.hpp"
#include "math/rng.hpp"
#include "math/special.hpp"

namespace cudvine {

enum class CrossKind { gaussian_full, student_t_full, gaussian_matern, time_varying_t };

inline const char* cross_kind_name(CrossKind k) {
    switch (k) {
        case CrossKind::gaussian_full: return "gaussian";
        case CrossKind::student_t_full: return "student_t";
        case CrossKind::gaussian_matern: return "gaussian_matern";
        case CrossKind::time_varying_t: return "time_varying_t";
    }
    throw std::logic_error("cross_kind_name: unknown kind");
}

inline CrossKind cross_kind_from_name(const std::string& s) {
    if (s == "gaussian") return CrossKind::gaussian_full;
    if (s == "student_t" || s == "t") return CrossKind::student_t_full;
    if (s == "gaussian_matern" || s == "matern") return CrossKind::gaussian_matern;
    if (s == "time_varying_t" || s == "dcc_t") return CrossKind::time_varying_t;
    throw std::invalid_argument("unknown cross copula kind: " + s);
}

struct MaternParams {
    double range = 1.0;       // phi > 0
    double smoothness = 0.5;  // nu_m > 0
    math::Matrix distances;   // symmetric, zero diagonal
};

struct DccParams {
    double a = 0.0;
    double b = 0.0;
    math::Matrix qbar;
};

// Matern correlation with the sqrt(2 nu) scaling convention, so the range
// parameter keeps consistent length units across smoothness values.
// smoothness 1/2 is the exponential kernel exactly.
inline double matern_rho(double h, double range, double smoothness) {
    if (!(range > 0.0) || !(smoothness > 0.0))
        throw std::invalid_argument("matern_rho: range and smoothness must be positive");
    if (h < 0.0) throw std::invalid_argument("matern_rho: negative distance");
    if (h == 0.0) return 1.0;
    const double s = std::sqrt(2.0 * smoothness) * h / range;
    if (smoothness == 0.5) return std::exp(-s);
    if (s > 600.0) return 0.0;
    const double val = std::exp((1.0 - smoothness) * std::log(2.0) - std::lgamma(smoothness) +
                                smoothness * std::log(s)) *
                       std::cyl_bessel_k(smoothness, s);
    return std::min(val, 1.0);
}

inline math::Matrix matern_correlation(const math::Matrix& distances, double range,
                                       double smoothness) {
    const int d = distances.rows();
    if (distances.cols() != d) throw std::invalid_argument("matern_correlation: not square");
    for (int i = 0; i < d; ++i) {
        if (distances(i, i) != 0.0)
            throw std::invalid_argument("matern_correlation: nonzero diagonal distance");
        for (int j = 0; j < i; ++j) {
            if (distances(i, j) < 0.0 || std::fabs(distances(i, j) - distances(j, i)) > 1e-12)
                throw std::invalid_argument("matern_correlation: distances must be symmetric and nonnegative");
            if (i != j && distances(i, j) == 0.0)
                throw std::invalid_argument("matern_correlation: zero distance between distinct sites");
        }
    }
    math::Matrix r(d, d);
    for (int i = 0; i < d; ++i) {
        r(i, i) = 1.0;
        for (int j = 0; j < i; ++j) {
            r(i, j) = r(j, i) = matern_rho(distances(i, j), range, smoothness);
        }
    }
    return math::make_positive_definite(r);
}

struct CrossCopulaSpec {
    CrossKind kind = CrossKind::gaussian_full;
    math::Matrix correlation;            // full kinds; derived for matern
    double nu = 0.0;                     // t kinds
    std::optional<MaternParams> matern;  // gaussian_matern
    std::optional<DccParams> dcc;        // time_varying_t

    int dim() const {
        if (kind == CrossKind::time_varying_t) return dcc ? dcc->qbar.rows() : 0;
        return correlation.rows();
    }

    void validate() const {
        switch (kind) {
            case CrossKind::gaussian_full:
                math::validate_correlation(correlation, "cross correlation");
                break;
            case CrossKind::student_t_full:
                math::validate_correlation(correlation, "cross correlation");
                if (!(nu >= 2.001)) throw std::invalid_argument("cross copula: nu must be >= 2.001");
                break;
            case CrossKind::gaussian_matern:
                if (!matern) throw std::invalid_argument("matern cross copula: parameters missing");
                math::validate_correlation(correlation, "matern correlation");
                break;
            case CrossKind::time_varying_t:
                if (!dcc) throw std::invalid_argument("time-varying copula: DCC parameters missing");
                if (!(nu >= 2.001)) throw std::invalid_argument("cross copula: nu must be >= 2.001");
                if (!(dcc->a >= 0.0 && dcc->b >= 0.0 && dcc->a + dcc->b < 1.0))
                    throw std::invalid_argument("time-varying copula: need a,b >= 0 and a+b < 1");
                math::validate_correlation(math::to_correlation(dcc->qbar), "Qbar");
                break;
        }
    }

    bool is_student() const {
        return kind == CrossKind::student_t_full || kind == CrossKind::time_varying_t;
    }

    // Builds a Matern-kind copula with its correlation realized from distances.
    static CrossCopulaSpec matern_gaussian(math::Matrix distances, double range,
                                           double smoothness) {
        CrossCopulaSpec s;
        s.kind = CrossKind::gaussian_matern;
        s.matern = MaternParams{range, smoothness, std::move(distances)};
        s.correlation = matern_correlation(s.matern->distances, range, smoothness);
        return s;
    }
};

namespace cross_detail {

inline std::vector<double> latent_scores(std::span<const double> v, const CrossCopulaSpec& spec) {
    std::vector<double> z(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double vi = std::min(std::max(v[i], 1e-10), 1.0 - 1e-10);
        z[i] = spec.is_student() ? math::student_t_quantile(vi, spec.nu)
                                 : math::norm_quantile(vi);
    }
    return z;
}

}  // namespace cross_detail

// Log copula density at v with the effective correlation matrix; a state
// matrix must be supplied for the time-varying kind.
inline double log_density(std::span<const double> v, const CrossCopulaSpec& spec,
                          const math::Matrix* state = nullptr) {
    const int d = static_cast<int>(v.size());
    const math::Matrix* r = state;
    if (spec.kind == CrossKind::time_varying_t) {
        if (!r) throw std::invalid_argument("cross log_density: time-varying kind needs a state R_t");
    } else if (!r) {
        r = &spec.correlation;
    }
    if (r->rows() != d) throw std::invalid_argument("cross log_density: dimension mismatch");
    for (double vi : v) {
        if (!(vi > 0.0 && vi < 1.0)) throw std::domain_error("cross log_density: v outside (0,1)");
    }

    const auto z = cross_detail::latent_scores(v, spec);
    const auto l = math::cholesky(*r);
    const double logdet = math::log_det_from_cholesky(l);
    const double quad = math::quad_form_inv(l, z);

    if (!spec.is_student()) {
        double z2 = 0.0;
        for (double zi : z) z2 += zi * zi;
        return -0.5 * logdet - 0.5 * (quad - z2);
    }
    const double nu = spec.nu;
    double marg = 0.0;
    for (double zi : z) marg += std::log1p(zi * zi / nu);
    return std::lgamma(0.5 * (nu + d)) + (d - 1) * std::lgamma(0.5 * nu) -
           d * std::lgamma(0.5 * (nu + 1.0)) - 0.5 * logdet -
           0.5 * (nu + d) * std::log1p(quad / nu) + 0.5 * (nu + 1.0) * marg;
}

// One DCC(1,1) update: Q_next = (1-a-b) Qbar + a eps eps' + b Q_prev,
// R_next = Q_next rescaled to unit diagonal.
struct DccStep {
    math::Matrix q;
    math::Matrix r;
};

inline DccStep dcc_step(const math::Matrix& q_prev, std::span<const double> eps_prev,
                        double a, double b, const math::Matrix& qbar) {
    const int d = q_prev.rows();
    if (!(a >= 0.0 && b >= 0.0 && a + b < 1.0))
        throw std::invalid_argument("dcc_step: need a,b >= 0 and a+b < 1");
    if (static_cast<int>(eps_prev.size()) != d || qbar.rows() != d)
        throw std::invalid_argument("dcc_step: dimension mismatch");
    DccStep out;
    out.q = math::Matrix(d, d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            out.q(i, j) = (1.0 - a - b) * qbar(i, j) + a * eps_prev[i] * eps_prev[j] +
                          b * q_prev(i, j);
        }
        if (out.q(i, i) <= 0.0) throw std::runtime_error("dcc_step: degenerate Q diagonal");
    }
    out.r = math::to_correlation(out.q);
    if (!math::is_positive_definite(out.r)) out.r = math::make_positive_definite(out.r);
    return out;
}

// Standardized scores feeding the DCC recursion: t-quantiles of the
// conditional PITs scaled to unit variance.
inline std::vector<double> dcc_epsilon(std::span<const double> v, double nu) {
    std::vector<double> eps(v.size());
    const double sd = std::sqrt(nu / (nu - 2.0));
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double vi = std::min(std::max(v[i], 1e-10), 1.0 - 1e-10);
        eps[i] = math::student_t_quantile(vi, nu) / sd;
    }
    return eps;
}

// One draw from the copula (uniform scale).
inline std::vector<double> sample(const CrossCopulaSpec& spec, math::Rng& rng,
                                  const math::Matrix* state = nullptr) {
    const math::Matrix* r = state;
    if (spec.kind == CrossKind::time_varying_t) {
        if (!r) throw std::invalid_argument("cross sample: time-varying kind needs a state R_t");
    } else if (!r) {
        r = &spec.correlation;
    }
    const int d = r->rows();
    const auto l = math::cholesky(*r);
    std::vector<double> z(d);
    for (int i = 0; i < d; ++i) z[i] = rng.normal();
    std::vector<double> x(d, 0.0);
    for (int i = 0; i < d; ++i)
        for (int k = 0; k <= i; ++k) x[i] += l(i, k) * z[k];
    std::vector<double> u(d);
    if (spec.is_student()) {
        const double g = rng.chi_squared(spec.nu) / spec.nu;
        const double scale = 1.0 / std::sqrt(g);
        for (int i = 0; i < d; ++i) u[i] = math::student_t_cdf(x[i] * scale, spec.nu);
    } else {
        for (int i = 0; i < d; ++i) u[i] = math::norm_cdf(x[i]);
    }
    for (double& ui : u) ui = std::min(std::max(ui, 1e-10), 1.0 - 1e-10);
    return u;
}

inline std::vector<double> sample(const CrossCopulaSpec& spec, std::uint64_t seed,
                                  const math::Matrix* state = nullptr) {
    math::Rng rng(seed);
    return sample(spec, rng, state);
}

// Draw the unobserved coordinates given observed ones, by conditioning in
// the latent elliptical score space. observed_z are scores (normal or t
// quantiles of the observed coordinates' conditional PITs). Returns a full
// d-vector on the uniform scale with observed slots filled by their exact
// PIT values mapped back.
inline std::vector<double> sample_conditional(const CrossCopulaSpec& spec,
                                              const std::vector<int>& observed_idx,
                                              const std::vector<double>& observed_z,
                                              math::Rng& rng,
                                              const math::Matrix* state = nullptr) {
    if (spec.kind == CrossKind::time_varying_t && !state)
        throw std::invalid_argument("sample_conditional: time-varying kind needs a state R_t");
    const math::Matrix& r = state ? *state : spec.correlation;
    const int d = r.rows();
    const int no = static_cast<int>(observed_idx.size());
    if (no == 0 || no >= d)
        throw std::invalid_argument("sample_conditional: need 1..d-1 observed coordinates");
    std::vector<bool> is_obs(d, false);
    for (int idx : observed_idx) {
        if (idx < 0 || idx >= d) throw std::invalid_argument("sample_conditional: index out of range");
        is_obs[idx] = true;
    }
    std::vector<int> unobs;
    for (int i = 0; i < d; ++i)
        if (!is_obs[i]) unobs.push_back(i);
    const int nu_dim = static_cast<int>(unobs.size());

    math::Matrix roo(no, no), ruo(nu_dim, no), ruu(nu_dim, nu_dim);
    for (int i = 0; i < no; ++i)
        for (int j = 0; j < no; ++j) roo(i, j) = r(observed_idx[i], observed_idx[j]);
    for (int i = 0; i < nu_dim; ++i)
        for (int j = 0; j < no; ++j) ruo(i, j) = r(unobs[i], observed_idx[j]);
    for (int i = 0; i < nu_dim; ++i)
        for (int j = 0; j < nu_dim; ++j) ruu(i, j) = r(unobs[i], unobs[j]);

    const auto loo = math::cholesky(roo);
    const auto w = math::cholesky_solve(loo, observed_z);  // Roo^{-1} z_o

    std::vector<double> mu(nu_dim, 0.0);
    for (int i = 0; i < nu_dim; ++i)
        for (int j = 0; j < no; ++j) mu[i] += ruo(i, j) * w[j];

    // Schur complement Ruu - Ruo Roo^{-1} Rou
    math::Matrix sigma = ruu;
    for (int i = 0; i < nu_dim; ++i) {
        std::vector<double> rowi(no);
        for (int k = 0; k < no; ++k) rowi[k] = ruo(i, k);
        const auto solved = math::cholesky_solve(loo, rowi);
        for (int j = 0; j < nu_dim; ++j) {
            double dot = 0.0;
            for (int k = 0; k < no; ++k) dot += ruo(j, k) * solved[k];
            sigma(i, j) -= dot;
        }
    }
    for (int i = 0; i < nu_dim; ++i)
        for (int j = 0; j < i; ++j) {
            const double s = 0.5 * (sigma(i, j) + sigma(j, i));
            sigma(i, j) = sigma(j, i) = s;
        }

    double t_scale = 1.0;
    double cond_dof = 0.0;
    if (spec.is_student()) {
        double quad = 0.0;
        for (int j = 0; j < no; ++j) quad += observed_z[j] * w[j];
        cond_dof = spec.nu + no;
        t_scale = std::sqrt((spec.nu + quad) / cond_dof);
    }

    math::Matrix lsig;
    try {
        lsig = math::cholesky(sigma);
    } catch (const std::exception&) {
        for (int i = 0; i < nu_dim; ++i) sigma(i, i) += 1e-10;
        lsig = math::cholesky(sigma);
    }

    std::vector<double> zn(nu_dim);
    for (int i = 0; i < nu_dim; ++i) zn[i] = rng.normal();
    std::vector<double> x(nu_dim, 0.0);
    for (int i = 0; i < nu_dim; ++i)
        for (int k = 0; k <= i; ++k) x[i] += lsig(i, k) * zn[k];

    double mix = 1.0;
    if (spec.is_student()) mix = 1.0 / std::sqrt(rng.chi_squared(cond_dof) / cond_dof);

    std::vector<double> out(d);
    for (int j = 0; j < no; ++j) {
        const double z = observed_z[j];
        out[observed_idx[j]] =
            spec.is_student() ? math::student_t_cdf(z, spec.nu) : math::norm_cdf(z);
    }
    for (int i = 0; i < nu_dim; ++i) {
        const double xi = mu[i] + t_scale * mix * x[i];
        out[unobs[i]] = spec.is_student() ? math::student_t_cdf(xi, spec.nu) : math::norm_cdf(xi);
        out[unobs[i]] = std::min(std::max(out[unobs[i]], 1e-10), 1.0 - 1e-10);
    }
    return out;
}

}  // namespace cudvine
