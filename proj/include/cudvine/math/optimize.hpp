#pragma once

// Derivative-free bounded optimization: Nelder-Mead over box-transformed
// coordinates, plus a safeguarded scalar root finder for monotone inverses.

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cudvine::math {

struct ParamBox {
    double lo;
    double hi;
    bool log_scale = false;
};

// Box transform: unconstrained z -> parameter in (lo, hi) via a logistic map,
// applied on the log axis for scale parameters.
inline double box_to_param(double z, const ParamBox& box) {
    const double s = 1.0 / (1.0 + std::exp(-z));
    if (box.log_scale) {
        const double llo = std::log(box.lo), lhi = std::log(box.hi);
        return std::exp(llo + (lhi - llo) * s);
    }
    return box.lo + (box.hi - box.lo) * s;
}

inline double param_to_box(double p, const ParamBox& box) {
    double s;
    if (box.log_scale) {
        const double llo = std::log(box.lo), lhi = std::log(box.hi);
        s = (std::log(p) - llo) / (lhi - llo);
    } else {
        s = (p - box.lo) / (box.hi - box.lo);
    }
    s = std::min(std::max(s, 1e-8), 1.0 - 1e-8);
    return std::log(s / (1.0 - s));
}

struct NelderMeadResult {
    std::vector<double> x;
    double fmin = 0.0;
    int evaluations = 0;
    bool converged = false;
};

// Standard Nelder-Mead on R^n. Stops when both the function spread and the
// simplex diameter fall below tol.
inline NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                    std::vector<double> x0, double step = 0.5,
                                    double tol = 1e-8, int max_iter = 0) {
    const int n = static_cast<int>(x0.size());
    if (n == 0) throw std::invalid_argument("nelder_mead: empty start point");
    if (max_iter == 0) max_iter = 400 * n;

    NelderMeadResult res;
    std::vector<std::vector<double>> simplex(n + 1, x0);
    for (int i = 0; i < n; ++i) simplex[i + 1][i] += step;
    std::vector<double> fv(n + 1);
    for (int i = 0; i <= n; ++i) {
        fv[i] = f(simplex[i]);
        ++res.evaluations;
    }

    const double alpha = 1.0, gamma = 2.0, rho = 0.5, sigma = 0.5;
    for (int iter = 0; iter < max_iter; ++iter) {
        std::vector<int> order(n + 1);
        for (int i = 0; i <= n; ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](int a, int b) { return fv[a] < fv[b]; });
        {
            std::vector<std::vector<double>> s2(n + 1);
            std::vector<double> f2(n + 1);
            for (int i = 0; i <= n; ++i) {
                s2[i] = simplex[order[i]];
                f2[i] = fv[order[i]];
            }
            simplex.swap(s2);
            fv.swap(f2);
        }

        double diam = 0.0;
        for (int i = 1; i <= n; ++i)
            for (int j = 0; j < n; ++j) diam = std::max(diam, std::fabs(simplex[i][j] - simplex[0][j]));
        const double fspread = std::fabs(fv[n] - fv[0]);
        if (fspread <= tol * (1.0 + std::fabs(fv[0])) && diam <= tol) {
            res.converged = true;
            break;
        }

        std::vector<double> centroid(n, 0.0);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) centroid[j] += simplex[i][j] / n;

        auto point = [&](double coef) {
            std::vector<double> p(n);
            for (int j = 0; j < n; ++j) p[j] = centroid[j] + coef * (centroid[j] - simplex[n][j]);
            return p;
        };

        const auto xr = point(alpha);
        const double fr = f(xr);
        ++res.evaluations;
        if (fr < fv[0]) {
            const auto xe = point(gamma);
            const double fe = f(xe);
            ++res.evaluations;
            if (fe < fr) {
                simplex[n] = xe;
                fv[n] = fe;
            } else {
                simplex[n] = xr;
                fv[n] = fr;
            }
        } else if (fr < fv[n - 1]) {
            simplex[n] = xr;
            fv[n] = fr;
        } else {
            const auto xc = point(fr < fv[n] ? rho : -rho);
            const double fc = f(xc);
            ++res.evaluations;
            if (fc < std::min(fr, fv[n])) {
                simplex[n] = xc;
                fv[n] = fc;
            } else {
                for (int i = 1; i <= n; ++i) {
                    for (int j = 0; j < n; ++j)
                        simplex[i][j] = simplex[0][j] + sigma * (simplex[i][j] - simplex[0][j]);
                    fv[i] = f(simplex[i]);
                    ++res.evaluations;
                }
            }
        }
    }

    int best = 0;
    for (int i = 1; i <= n; ++i)
        if (fv[i] < fv[best]) best = i;
    res.x = simplex[best];
    res.fmin = fv[best];
    return res;
}

// Minimize over a box with a restart from the first solution.
struct BoxedMinimizeResult {
    std::vector<double> params;
    double fmin = 0.0;
    int evaluations = 0;
};

inline BoxedMinimizeResult minimize_boxed(
    const std::function<double(const std::vector<double>&)>& f,
    const std::vector<double>& init, const std::vector<ParamBox>& boxes,
    double tol = 1e-8) {
    const int n = static_cast<int>(boxes.size());
    auto fz = [&](const std::vector<double>& z) {
        std::vector<double> p(n);
        for (int i = 0; i < n; ++i) p[i] = box_to_param(z[i], boxes[i]);
        return f(p);
    };
    std::vector<double> z0(n);
    for (int i = 0; i < n; ++i) z0[i] = param_to_box(init[i], boxes[i]);

    auto first = nelder_mead(fz, z0, 0.5, tol);
    auto second = nelder_mead(fz, first.x, 0.25, tol);
    const auto& best = (second.fmin <= first.fmin) ? second : first;

    BoxedMinimizeResult out;
    out.params.resize(n);
    for (int i = 0; i < n; ++i) out.params[i] = box_to_param(best.x[i], boxes[i]);
    out.fmin = best.fmin;
    out.evaluations = first.evaluations + second.evaluations;
    return out;
}

// Safeguarded Newton/bisection for a strictly increasing f on (0,1).
// Returns u with f(u) ~= target; derivative is optional.
inline double invert_increasing(const std::function<double(double)>& f, double target,
                                const std::function<double(double)>& dfdu,
                                const std::string& context) {
    double lo = 1e-12, hi = 1.0 - 1e-12;
    double u = std::min(std::max(target, lo), hi);
    double fu = f(u);
    for (int it = 0; it < 200; ++it) {
        if (fu > target)
            hi = u;
        else
            lo = u;
        double next = u;
        bool newton_ok = false;
        if (dfdu) {
            const double d = dfdu(u);
            if (d > 1e-14 && std::isfinite(d)) {
                next = u - (fu - target) / d;
                newton_ok = (next > lo && next < hi);
            }
        }
        if (!newton_ok) next = 0.5 * (lo + hi);
        if (std::fabs(next - u) < 1e-14 && std::fabs(fu - target) < 1e-11) return next;
        u = next;
        fu = f(u);
        if (std::fabs(fu - target) < 1e-13 || hi - lo < 1e-15) return u;
    }
    if (std::fabs(fu - target) < 1e-9) return u;
    throw std::runtime_error("invert_increasing: no convergence (" + context + ")");
}

}  // namespace cudvine::math
