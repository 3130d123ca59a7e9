#pragma once

// Bivariate copula families: density, cdf, h-function (conditional cdf),
// its inverse, Kendall-tau maps, and pair sampling. These are the building
// blocks of every D-vine tree and of the model-selection candidate pool.
//
// The h-function follows the vine convention h(u|v) = dC(u,v)/dv, i.e. the
// conditional cdf of U given V = v (Aas et al. 2009).

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "math/optimize.hpp"
#include "math/quadrature.hpp"
#include "math/rng.hpp"
#include "math/special.hpp"

namespace cudvine {

enum class Family {
    independence,
    gaussian,
    student_t,
    clayton,
    gumbel,
    frank,
    joe,
};

inline const char* family_name(Family f) {
    switch (f) {
        case Family::independence: return "independence";
        case Family::gaussian: return "gaussian";
        case Family::student_t: return "student_t";
        case Family::clayton: return "clayton";
        case Family::gumbel: return "gumbel";
        case Family::frank: return "frank";
        case Family::joe: return "joe";
    }
    throw std::logic_error("family_name: unknown family");
}

inline Family family_from_name(const std::string& s) {
    if (s == "independence") return Family::independence;
    if (s == "gaussian") return Family::gaussian;
    if (s == "student_t" || s == "t") return Family::student_t;
    if (s == "clayton") return Family::clayton;
    if (s == "gumbel") return Family::gumbel;
    if (s == "frank") return Family::frank;
    if (s == "joe") return Family::joe;
    throw std::invalid_argument("unknown copula family: " + s);
}

inline int family_param_count(Family f) {
    switch (f) {
        case Family::independence: return 0;
        case Family::student_t: return 2;
        default: return 1;
    }
}

// Parameter boxes keep log-likelihoods finite in double precision; Gumbel
// and Clayton in particular overflow when left unconstrained.
inline std::vector<math::ParamBox> family_param_boxes(Family f) {
    switch (f) {
        case Family::independence: return {};
        case Family::gaussian: return {{-0.999999, 0.999999, false}};
        case Family::student_t: return {{-0.999999, 0.999999, false}, {2.001, 100.0, true}};
        case Family::clayton: return {{1e-4, 28.0, true}};
        case Family::gumbel: return {{1.0 + 1e-6, 17.0, false}};
        case Family::frank: return {{-35.0, 35.0, false}};
        case Family::joe: return {{1.0 + 1e-6, 30.0, false}};
    }
    throw std::logic_error("family_param_boxes: unknown family");
}

inline std::vector<std::string> family_param_names(Family f) {
    switch (f) {
        case Family::independence: return {};
        case Family::gaussian: return {"rho"};
        case Family::student_t: return {"rho", "nu"};
        case Family::clayton: return {"theta"};
        case Family::gumbel: return {"alpha"};
        case Family::frank: return {"delta"};
        case Family::joe: return {"theta"};
    }
    throw std::logic_error("family_param_names: unknown family");
}

struct BivariateCopula {
    Family family = Family::independence;
    std::vector<double> params;

    BivariateCopula() = default;
    BivariateCopula(Family f, std::vector<double> p) : family(f), params(std::move(p)) {
        validate();
    }

    void validate() const {
        if (static_cast<int>(params.size()) != family_param_count(family))
            throw std::invalid_argument(std::string("copula ") + family_name(family) +
                                        ": wrong parameter count");
        switch (family) {
            case Family::independence:
                break;
            case Family::gaussian:
                if (!(std::fabs(params[0]) < 1.0))
                    throw std::invalid_argument("gaussian copula: |rho| must be < 1");
                break;
            case Family::student_t:
                if (!(std::fabs(params[0]) < 1.0))
                    throw std::invalid_argument("student_t copula: |rho| must be < 1");
                if (!(params[1] >= 2.001 && params[1] <= 100.0))
                    throw std::invalid_argument("student_t copula: nu must lie in [2.001, 100]");
                break;
            case Family::clayton:
                if (!(params[0] > 0.0 && params[0] <= 28.0))
                    throw std::invalid_argument("clayton copula: theta must lie in (0, 28]");
                break;
            case Family::gumbel:
                if (!(params[0] >= 1.0 && params[0] <= 17.0))
                    throw std::invalid_argument("gumbel copula: alpha must lie in [1, 17]");
                break;
            case Family::frank:
                if (!(std::fabs(params[0]) <= 35.0) || std::fabs(params[0]) < 1e-8)
                    throw std::invalid_argument(
                        "frank copula: delta must lie in [-35, 35] and be nonzero");
                break;
            case Family::joe:
                if (!(params[0] > 1.0 && params[0] <= 30.0))
                    throw std::invalid_argument("joe copula: theta must lie in (1, 30]");
                break;
        }
    }
};

inline constexpr double kUnitClip = 1e-10;

inline double clip_unit(double u) {
    if (u < kUnitClip) return kUnitClip;
    if (u > 1.0 - kUnitClip) return 1.0 - kUnitClip;
    return u;
}

namespace copula_detail {

inline void check_interior(double u, double v) {
    if (!(u > 0.0 && u < 1.0 && v > 0.0 && v < 1.0) || std::isnan(u) || std::isnan(v))
        throw std::domain_error("copula argument outside (0,1)");
}

// --- Gaussian ---

inline double gaussian_logdensity(double u, double v, double rho) {
    if (rho == 0.0) return 0.0;
    const double x = math::norm_quantile(u), y = math::norm_quantile(v);
    const double r2 = 1.0 - rho * rho;
    return -0.5 * std::log(r2) -
           (rho * rho * (x * x + y * y) - 2.0 * rho * x * y) / (2.0 * r2);
}

inline double gaussian_hfun(double u, double v, double rho) {
    const double x = math::norm_quantile(u), y = math::norm_quantile(v);
    return math::norm_cdf((x - rho * y) / std::sqrt(1.0 - rho * rho));
}

inline double gaussian_hinv(double q, double v, double rho) {
    const double y = math::norm_quantile(v);
    return math::norm_cdf(math::norm_quantile(q) * std::sqrt(1.0 - rho * rho) + rho * y);
}

// Bivariate normal cdf as a single integral over the correlation
// (Drezner & Wesolowsky); independent of the h-function formula.
inline double gaussian_cdf(double u, double v, double rho) {
    if (rho == 0.0) return u * v;
    const double x = math::norm_quantile(u), y = math::norm_quantile(v);
    const double corr = math::integrate_gl(
        [&](double r) {
            const double r2 = 1.0 - r * r;
            return std::exp(-(x * x - 2.0 * r * x * y + y * y) / (2.0 * r2)) / std::sqrt(r2);
        },
        0.0, rho, 64);
    return u * v + corr / (2.0 * math::kPi);
}

// --- Student t ---

inline double student_logdensity(double u, double v, double rho, double nu) {
    const double x = math::student_t_quantile(u, nu), y = math::student_t_quantile(v, nu);
    const double r2 = 1.0 - rho * rho;
    return std::lgamma(0.5 * (nu + 2.0)) + std::lgamma(0.5 * nu) -
           2.0 * std::lgamma(0.5 * (nu + 1.0)) - 0.5 * std::log(r2) +
           0.5 * (nu + 1.0) * (std::log1p(x * x / nu) + std::log1p(y * y / nu)) -
           0.5 * (nu + 2.0) * std::log1p((x * x - 2.0 * rho * x * y + y * y) / (nu * r2));
}

inline double student_hfun(double u, double v, double rho, double nu) {
    const double x = math::student_t_quantile(u, nu), y = math::student_t_quantile(v, nu);
    const double scale = std::sqrt((nu + y * y) * (1.0 - rho * rho) / (nu + 1.0));
    return math::student_t_cdf((x - rho * y) / scale, nu + 1.0);
}

inline double student_hinv(double q, double v, double rho, double nu) {
    const double y = math::student_t_quantile(v, nu);
    const double scale = std::sqrt((nu + y * y) * (1.0 - rho * rho) / (nu + 1.0));
    const double x = math::student_t_quantile(q, nu + 1.0) * scale + rho * y;
    return math::student_t_cdf(x, nu);
}

// cdf by integrating the conditional cdf over the conditioning margin.
inline double student_cdf(double u, double v, double rho, double nu) {
    auto integrand = [&](double t) { return student_hfun(u, t, rho, nu); };
    // two panels: split at v/2 for a little extra margin near 0
    return math::integrate_gl(integrand, 0.0, 0.5 * v, 64) +
           math::integrate_gl(integrand, 0.5 * v, v, 64);
}

// --- Clayton ---

inline double clayton_logdensity(double u, double v, double th) {
    const double lu = std::log(u), lv = std::log(v);
    const double a = std::exp(-th * lu) + std::exp(-th * lv) - 1.0;
    return std::log1p(th) - (th + 1.0) * (lu + lv) - (2.0 + 1.0 / th) * std::log(a);
}

inline double clayton_cdf(double u, double v, double th) {
    const double a = std::exp(-th * std::log(u)) + std::exp(-th * std::log(v)) - 1.0;
    return std::exp(-std::log(a) / th);
}

inline double clayton_hfun(double u, double v, double th) {
    const double lu = std::log(u), lv = std::log(v);
    const double a = std::exp(-th * lu) + std::exp(-th * lv) - 1.0;
    return std::exp(-(th + 1.0) * lv - (1.0 + 1.0 / th) * std::log(a));
}

inline double clayton_hinv(double q, double v, double th) {
    const double lv = std::log(v);
    const double b = std::exp(-th * lv);
    const double d = std::expm1(-(th / (th + 1.0)) * std::log(q));
    const double inner = 1.0 + b * d;
    return clip_unit(std::exp(-std::log(inner) / th));
}

// --- Gumbel ---

struct GumbelParts {
    double lx, ly;    // log((-log u)^alpha) etc.
    double logs;      // log(x + y)
    double outer;     // (x + y)^(1/alpha)
};

inline GumbelParts gumbel_parts(double u, double v, double al) {
    GumbelParts p;
    p.lx = al * std::log(-std::log(u));
    p.ly = al * std::log(-std::log(v));
    const double hi = std::max(p.lx, p.ly), lo = std::min(p.lx, p.ly);
    p.logs = hi + std::log1p(std::exp(lo - hi));
    p.outer = std::exp(p.logs / al);
    return p;
}

inline double gumbel_cdf(double u, double v, double al) {
    if (al == 1.0) return u * v;
    return std::exp(-gumbel_parts(u, v, al).outer);
}

inline double gumbel_hfun(double u, double v, double al) {
    if (al == 1.0) return u;
    const auto p = gumbel_parts(u, v, al);
    const double logh = -p.outer + (1.0 / al - 1.0) * p.logs +
                        (al - 1.0) * std::log(-std::log(v)) - std::log(v);
    return std::exp(logh);
}

// --- Frank ---

inline double frank_cdf(double u, double v, double de) {
    const double gu = std::expm1(-de * u), gv = std::expm1(-de * v);
    const double g1 = std::expm1(-de);
    return -std::log1p(gu * gv / g1) / de;
}

inline double frank_hfun(double u, double v, double de) {
    const double gu = std::expm1(-de * u), gv = std::expm1(-de * v);
    const double g1 = std::expm1(-de);
    return std::exp(-de * v) * gu / (g1 + gu * gv);
}

inline double frank_hinv(double q, double v, double de) {
    const double gv = std::expm1(-de * v);
    const double g1 = std::expm1(-de);
    const double gu = q * g1 / (std::exp(-de * v) - q * gv);
    return clip_unit(-std::log1p(gu) / de);
}

// --- Joe ---

struct JoeParts {
    double xb, yb;    // (1-u)^theta, (1-v)^theta
    double s;         // xb + yb - xb*yb
};

inline JoeParts joe_parts(double u, double v, double th) {
    JoeParts p;
    p.xb = std::exp(th * std::log1p(-u));
    p.yb = std::exp(th * std::log1p(-v));
    p.s = p.xb + p.yb - p.xb * p.yb;
    return p;
}

inline double joe_cdf(double u, double v, double th) {
    const auto p = joe_parts(u, v, th);
    return 1.0 - std::exp(std::log(p.s) / th);
}

inline double joe_logdensity(double u, double v, double th) {
    const auto p = joe_parts(u, v, th);
    return (1.0 / th - 2.0) * std::log(p.s) +
           (th - 1.0) * (std::log1p(-u) + std::log1p(-v)) + std::log(th - 1.0 + p.s);
}

inline double joe_hfun(double u, double v, double th) {
    const auto p = joe_parts(u, v, th);
    // 1 - xb computed stably for u near 0
    const double one_minus_xb = -std::expm1(th * std::log1p(-u));
    return std::exp((1.0 / th - 1.0) * std::log(p.s) + (th - 1.0) * std::log1p(-v)) *
           one_minus_xb;
}

}  // namespace copula_detail

inline double log_density(double u, double v, const BivariateCopula& c) {
    copula_detail::check_interior(u, v);
    u = clip_unit(u);
    v = clip_unit(v);
    switch (c.family) {
        case Family::independence: return 0.0;
        case Family::gaussian: return copula_detail::gaussian_logdensity(u, v, c.params[0]);
        case Family::student_t:
            return copula_detail::student_logdensity(u, v, c.params[0], c.params[1]);
        case Family::clayton: return copula_detail::clayton_logdensity(u, v, c.params[0]);
        case Family::gumbel: {
            const double al = c.params[0];
            if (al == 1.0) return 0.0;
            const auto p = copula_detail::gumbel_parts(u, v, al);
            return -p.outer + (2.0 / al - 2.0) * p.logs +
                   (al - 1.0) * (std::log(-std::log(u)) + std::log(-std::log(v))) -
                   std::log(u) - std::log(v) +
                   std::log1p((al - 1.0) * std::exp(-p.logs / al));
        }
        case Family::frank: {
            const double de = c.params[0];
            const double gu = std::expm1(-de * u), gv = std::expm1(-de * v);
            const double g1 = std::expm1(-de);
            const double denom = g1 + gu * gv;
            // de * (e^{-de} - 1) = -de * (1 - e^{-de}) > 0 for both signs of de
            return std::log(-de * g1) - de * (u + v) - 2.0 * std::log(std::fabs(denom));
        }
        case Family::joe: return copula_detail::joe_logdensity(u, v, c.params[0]);
    }
    throw std::logic_error("log_density: unknown family");
}

inline double density(double u, double v, const BivariateCopula& c) {
    return std::exp(log_density(u, v, c));
}

inline double cdf(double u, double v, const BivariateCopula& c) {
    if (u <= 0.0 || v <= 0.0) return 0.0;
    if (u >= 1.0 && v >= 1.0) return 1.0;
    if (u >= 1.0) return v;
    if (v >= 1.0) return u;
    u = clip_unit(u);
    v = clip_unit(v);
    switch (c.family) {
        case Family::independence: return u * v;
        case Family::gaussian: return copula_detail::gaussian_cdf(u, v, c.params[0]);
        case Family::student_t:
            return copula_detail::student_cdf(u, v, c.params[0], c.params[1]);
        case Family::clayton: return copula_detail::clayton_cdf(u, v, c.params[0]);
        case Family::gumbel: return copula_detail::gumbel_cdf(u, v, c.params[0]);
        case Family::frank: return copula_detail::frank_cdf(u, v, c.params[0]);
        case Family::joe: return copula_detail::joe_cdf(u, v, c.params[0]);
    }
    throw std::logic_error("cdf: unknown family");
}

// h(u|v) = dC(u,v)/dv, the conditional cdf of U given V = v.
inline double hfun(double u, double v, const BivariateCopula& c) {
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 1.0;
    if (!(v > 0.0 && v < 1.0)) throw std::domain_error("hfun: conditioning value outside (0,1)");
    u = clip_unit(u);
    v = clip_unit(v);
    double h;
    switch (c.family) {
        case Family::independence: return u;
        case Family::gaussian: h = copula_detail::gaussian_hfun(u, v, c.params[0]); break;
        case Family::student_t:
            h = copula_detail::student_hfun(u, v, c.params[0], c.params[1]);
            break;
        case Family::clayton: h = copula_detail::clayton_hfun(u, v, c.params[0]); break;
        case Family::gumbel:
            h = (c.params[0] == 1.0) ? u : copula_detail::gumbel_hfun(u, v, c.params[0]);
            break;
        case Family::frank: h = copula_detail::frank_hfun(u, v, c.params[0]); break;
        case Family::joe: h = copula_detail::joe_hfun(u, v, c.params[0]); break;
        default: throw std::logic_error("hfun: unknown family");
    }
    return std::min(std::max(h, 0.0), 1.0);
}

// Inverse of hfun in u: closed form where available, otherwise safeguarded
// Newton with the copula density as derivative.
inline double hinv(double q, double v, const BivariateCopula& c) {
    if (!(q > 0.0 && q < 1.0)) throw std::domain_error("hinv: q outside (0,1)");
    if (!(v > 0.0 && v < 1.0)) throw std::domain_error("hinv: conditioning value outside (0,1)");
    q = clip_unit(q);
    v = clip_unit(v);
    switch (c.family) {
        case Family::independence: return q;
        case Family::gaussian:
            return clip_unit(copula_detail::gaussian_hinv(q, v, c.params[0]));
        case Family::student_t:
            return clip_unit(copula_detail::student_hinv(q, v, c.params[0], c.params[1]));
        case Family::clayton: return copula_detail::clayton_hinv(q, v, c.params[0]);
        case Family::frank: return copula_detail::frank_hinv(q, v, c.params[0]);
        case Family::gumbel:
            if (c.params[0] == 1.0) return q;
            [[fallthrough]];
        case Family::joe: {
            try {
                return math::invert_increasing(
                    [&](double u) { return hfun(u, v, c); }, q,
                    [&](double u) { return density(u, v, c); },
                    std::string(family_name(c.family)) + " hinv, q=" + std::to_string(q) +
                        ", v=" + std::to_string(v) + ", param=" + std::to_string(c.params[0]));
            } catch (const std::runtime_error& e) {
                throw std::runtime_error(std::string("hinv failed: ") + e.what());
            }
        }
    }
    throw std::logic_error("hinv: unknown family");
}

// --- Kendall tau maps ---

namespace copula_detail {

inline double frank_tau_abs(double de) {
    // tau = 1 - 4/de * (1 - D1(de)) with the Debye function D1
    const double d1 = math::integrate_gl(
                          [](double t) { return (t < 1e-12) ? 1.0 : t / std::expm1(t); }, 0.0,
                          de, 64) /
                      de;
    return 1.0 - 4.0 / de * (1.0 - d1);
}

inline double joe_tau(double th) {
    // tau = 1 - 4 * sum_k 1/(k (th k + 2)(th (k-1) + 2)), tail ~ 1/(2 th^2 K^2)
    double s = 0.0;
    const int big = 200000;
    for (int k = 1; k <= big; ++k) {
        s += 1.0 / (static_cast<double>(k) * (th * k + 2.0) * (th * (k - 1.0) + 2.0));
    }
    s += 1.0 / (2.0 * th * th * static_cast<double>(big) * static_cast<double>(big));
    return 1.0 - 4.0 * s;
}

}  // namespace copula_detail

inline double tau(const BivariateCopula& c) {
    switch (c.family) {
        case Family::independence: return 0.0;
        case Family::gaussian:
        case Family::student_t: return 2.0 / math::kPi * std::asin(c.params[0]);
        case Family::clayton: return c.params[0] / (c.params[0] + 2.0);
        case Family::gumbel: return 1.0 - 1.0 / c.params[0];
        case Family::frank: {
            const double de = c.params[0];
            const double t = copula_detail::frank_tau_abs(std::fabs(de));
            return (de < 0.0) ? -t : t;
        }
        case Family::joe: return copula_detail::joe_tau(c.params[0]);
    }
    throw std::logic_error("tau: unknown family");
}

// Inverse tau map; for Student t the degrees of freedom are set to a
// midrange initializer value (tau does not identify nu).
inline BivariateCopula copula_from_tau(Family f, double target_tau, double student_nu = 5.0) {
    auto require = [&](bool ok, const char* msg) {
        if (!ok) throw std::domain_error(std::string(family_name(f)) + ": " + msg);
    };
    switch (f) {
        case Family::independence:
            require(std::fabs(target_tau) < 1e-12, "tau must be 0 for independence");
            return BivariateCopula(f, {});
        case Family::gaussian:
            require(std::fabs(target_tau) < 1.0, "tau outside (-1,1)");
            return BivariateCopula(f, {std::sin(math::kPi * target_tau / 2.0)});
        case Family::student_t:
            require(std::fabs(target_tau) < 1.0, "tau outside (-1,1)");
            return BivariateCopula(f, {std::sin(math::kPi * target_tau / 2.0), student_nu});
        case Family::clayton: {
            require(target_tau > 0.0 && target_tau <= 28.0 / 30.0, "tau outside (0, 14/15]");
            return BivariateCopula(f, {2.0 * target_tau / (1.0 - target_tau)});
        }
        case Family::gumbel: {
            require(target_tau >= 0.0 && target_tau <= 16.0 / 17.0, "tau outside [0, 16/17]");
            if (target_tau < 1e-9) return BivariateCopula(f, {1.0});
            return BivariateCopula(f, {1.0 / (1.0 - target_tau)});
        }
        case Family::frank: {
            const double ta = std::fabs(target_tau);
            require(target_tau != 0.0, "tau must be nonzero for frank");
            require(ta <= copula_detail::frank_tau_abs(35.0), "tau outside attainable range");
            double lo = 1e-6, hi = 35.0;
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (copula_detail::frank_tau_abs(mid) < ta)
                    lo = mid;
                else
                    hi = mid;
                if (hi - lo < 1e-11) break;
            }
            const double de = 0.5 * (lo + hi);
            return BivariateCopula(f, {target_tau < 0.0 ? -de : de});
        }
        case Family::joe: {
            require(target_tau > 0.0 && target_tau <= copula_detail::joe_tau(30.0),
                    "tau outside attainable range");
            double lo = 1.0 + 1e-6, hi = 30.0;
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (copula_detail::joe_tau(mid) < target_tau)
                    lo = mid;
                else
                    hi = mid;
                if (hi - lo < 1e-11) break;
            }
            return BivariateCopula(f, {0.5 * (lo + hi)});
        }
    }
    throw std::logic_error("copula_from_tau: unknown family");
}

// Conditional-inverse sampling: v ~ U(0,1), u = hinv(w | v) with w ~ U(0,1).
inline std::vector<std::pair<double, double>> sample_pair(int n, const BivariateCopula& c,
                                                          std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("sample_pair: n must be >= 1");
    math::Rng rng(seed);
    std::vector<std::pair<double, double>> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) {
        const double v = rng.uniform();
        const double w = rng.uniform();
        out.emplace_back(hinv(w, v, c), v);
    }
    return out;
}

}  // namespace cudvine
