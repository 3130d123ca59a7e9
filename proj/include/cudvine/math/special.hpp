#pragma once

// Scalar special functions used throughout the library: standard normal
// cdf/quantile, the regularized incomplete beta function and its inverse,
// and the Student t distribution built on top of them.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace cudvine::math {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSqrt2 = 1.41421356237309504880;
inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;

inline double norm_pdf(double x) {
    return std::exp(-0.5 * x * x - kLogSqrt2Pi);
}

inline double norm_cdf(double x) {
    return 0.5 * std::erfc(-x / kSqrt2);
}

// Inverse standard normal cdf, Wichura's algorithm AS 241 (PPND16).
// Relative accuracy about 1e-16 over (0,1).
inline double norm_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        if (p == 0.0) return -std::numeric_limits<double>::infinity();
        if (p == 1.0) return std::numeric_limits<double>::infinity();
        throw std::domain_error("norm_quantile: p outside [0,1]");
    }
    const double q = p - 0.5;
    if (std::fabs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q *
               (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                     6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
                   1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
                 1.3314166789178437745e+2) * r + 3.3871328727963666080e0) /
               (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                     3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
                   5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
                 4.2313330701600911252e+1) * r + 1.0);
    }
    double r = (q < 0.0) ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double x;
    if (r <= 5.0) {
        r -= 1.6;
        x = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                  2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
                3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
              4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
            (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                  1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
              2.05319162663775882187e0) * r + 1.0);
    } else {
        r -= 5.0;
        x = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                  1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
              5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
            (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                  1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
              5.99832206555887937690e-1) * r + 1.0);
    }
    return (q < 0.0) ? -x : x;
}

namespace detail {

// Continued fraction for the incomplete beta function (modified Lentz).
inline double beta_cont_frac(double a, double b, double x) {
    constexpr double fpmin = 1e-300;
    constexpr double eps = 3e-16;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < fpmin) d = fpmin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 10000; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) <= eps) return h;
    }
    throw std::runtime_error("beta_cont_frac: no convergence (a=" + std::to_string(a) +
                             ", b=" + std::to_string(b) + ", x=" + std::to_string(x) + ")");
}

}  // namespace detail

// Regularized incomplete beta function I_x(a, b).
inline double inc_beta(double a, double b, double x) {
    if (a <= 0.0 || b <= 0.0) throw std::domain_error("inc_beta: a, b must be positive");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double lnfront = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(lnfront);
    if (x < (a + 1.0) / (a + b + 2.0))
        return front * detail::beta_cont_frac(a, b, x) / a;
    return 1.0 - front * detail::beta_cont_frac(b, a, 1.0 - x) / b;
}

// Inverse of I_x(a, b) in x. Initial estimate per Numerical-Recipes style
// approximations followed by Halley refinement.
inline double inc_beta_inv(double a, double b, double p) {
    if (p <= 0.0) return 0.0;
    if (p >= 1.0) return 1.0;
    const double a1 = a - 1.0, b1 = b - 1.0;
    double x;
    if (a >= 1.0 && b >= 1.0) {
        const double pp = (p < 0.5) ? p : 1.0 - p;
        const double t = std::sqrt(-2.0 * std::log(pp));
        double xg = (2.30753 + t * 0.27061) / (1.0 + t * (0.99229 + t * 0.04481)) - t;
        if (p < 0.5) xg = -xg;
        const double al = (xg * xg - 3.0) / 6.0;
        const double h = 2.0 / (1.0 / (2.0 * a - 1.0) + 1.0 / (2.0 * b - 1.0));
        const double w = xg * std::sqrt(al + h) / h -
                         (1.0 / (2.0 * b - 1.0) - 1.0 / (2.0 * a - 1.0)) *
                             (al + 5.0 / 6.0 - 2.0 / (3.0 * h));
        x = a / (a + b * std::exp(2.0 * w));
    } else {
        const double lna = std::log(a / (a + b));
        const double lnb = std::log(b / (a + b));
        const double t = std::exp(a * lna) / a;
        const double u = std::exp(b * lnb) / b;
        const double w = t + u;
        if (p < t / w)
            x = std::pow(a * w * p, 1.0 / a);
        else
            x = 1.0 - std::pow(b * w * (1.0 - p), 1.0 / b);
    }
    const double afac = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b);
    for (int j = 0; j < 12; ++j) {
        if (x <= 0.0 || x >= 1.0) {
            x = std::min(std::max(x, 1e-300), 1.0 - 1e-16);
        }
        const double err = inc_beta(a, b, x) - p;
        const double lnt = a1 * std::log(x) + b1 * std::log1p(-x) + afac;
        const double t = std::exp(lnt);
        if (t == 0.0) break;
        double u = err / t;
        // Halley step
        double step = u / (1.0 - 0.5 * std::min(1.0, u * (a1 / x - b1 / (1.0 - x))));
        x -= step;
        if (x <= 0.0) x = 0.5 * (x + step);
        if (x >= 1.0) x = 0.5 * (x + step + 1.0);
        if (std::fabs(step) < 1e-14 * x && j > 0) break;
    }
    return x;
}

// --- Student t distribution ---

inline double student_t_logpdf(double x, double nu) {
    return std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
           0.5 * std::log(nu * kPi) - 0.5 * (nu + 1.0) * std::log1p(x * x / nu);
}

inline double student_t_pdf(double x, double nu) { return std::exp(student_t_logpdf(x, nu)); }

inline double student_t_cdf(double x, double nu) {
    if (nu <= 0.0) throw std::domain_error("student_t_cdf: nu must be positive");
    if (x == 0.0) return 0.5;
    const double w = nu / (nu + x * x);
    const double p = 0.5 * inc_beta(0.5 * nu, 0.5, w);
    return (x > 0.0) ? 1.0 - p : p;
}

namespace detail {

// Reference path: invert the incomplete beta, then polish on the cdf.
inline double student_t_quantile_beta(double pu, double nu) {
    const double pp = 2.0 * (1.0 - pu);
    const double w = inc_beta_inv(0.5 * nu, 0.5, pp);
    double x = (w > 0.0) ? std::sqrt(nu * (1.0 - w) / w) : std::numeric_limits<double>::infinity();
    if (std::isfinite(x)) {
        for (int i = 0; i < 3; ++i) {
            const double err = student_t_cdf(x, nu) - pu;
            const double f = student_t_pdf(x, nu);
            if (f <= 0.0) break;
            x -= err / f;
        }
    }
    return x;
}

}  // namespace detail

inline double student_t_quantile(double p, double nu) {
    if (!(p > 0.0 && p < 1.0)) {
        if (p == 0.0) return -std::numeric_limits<double>::infinity();
        if (p == 1.0) return std::numeric_limits<double>::infinity();
        throw std::domain_error("student_t_quantile: p outside [0,1]");
    }
    if (p == 0.5) return 0.0;
    const double pu = std::max(p, 1.0 - p);
    const double q = 1.0 - pu;  // tail probability, <= 1/2
    const double sign = (p < 0.5) ? -1.0 : 1.0;

    // Starting point: tail expansion of the incomplete beta where it is
    // valid, otherwise a Cornish-Fisher expansion around the normal
    // quantile (moderate nu) or a variance-matched normal (small nu).
    double x0;
    const double lbeta = std::lgamma(0.5 * nu) + std::lgamma(0.5) - std::lgamma(0.5 * (nu + 1.0));
    const double w_tail = std::exp((2.0 / nu) * (std::log(q * nu) + lbeta));
    if (w_tail < 0.7) {
        x0 = std::sqrt(nu * (1.0 - w_tail) / w_tail);
    } else {
        const double z = norm_quantile(pu);
        if (nu >= 5.0) {
            const double z2 = z * z;
            x0 = z + z * (z2 + 1.0) / (4.0 * nu) +
                 z * (5.0 * z2 * z2 + 16.0 * z2 + 3.0) / (96.0 * nu * nu);
        } else {
            x0 = z * std::sqrt(nu / std::max(nu - 2.0, 0.5));
        }
    }

    // Halley iteration on the upper-tail probability (full relative
    // precision there); falls back to the incomplete-beta inverse if
    // convergence stalls. tail(x) = 1 - T(x) = I_w(nu/2, 1/2)/2 with
    // w = nu/(nu + x^2), and d tail/dx = -pdf(x).
    auto tail = [&](double x) { return 0.5 * inc_beta(0.5 * nu, 0.5, nu / (nu + x * x)); };
    double x = std::max(x0, 1e-300);
    for (int it = 0; it < 6; ++it) {
        const double err = tail(x) - q;
        if (std::fabs(err) <= 1e-12 * q) return sign * x;
        const double f = student_t_pdf(x, nu);
        if (f <= 0.0) break;
        const double u = -err / f;  // Newton step for tail(x) = q
        const double logf_deriv = -(nu + 1.0) * x / (nu + x * x);
        const double denom = 1.0 + 0.5 * (err / f) * logf_deriv;
        double step = (denom > 0.25) ? u / denom : u;
        double next = x - step;
        if (next < 0.0) next = 0.5 * x;
        x = next;
    }
    if (std::fabs(tail(x) - q) <= 1e-11 * q) return sign * x;
    return sign * detail::student_t_quantile_beta(pu, nu);
}

}  // namespace cudvine::math
