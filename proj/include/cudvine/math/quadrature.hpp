#pragma once

// Gauss-Legendre quadrature with cached node tables.

#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <vector>

namespace cudvine::math {

struct GaussLegendre {
    std::vector<double> nodes;    // on (0,1)
    std::vector<double> weights;
};

// Nodes/weights on (0,1) by Newton iteration on the Legendre polynomial.
inline GaussLegendre gauss_legendre_unit(int n) {
    GaussLegendre gl;
    gl.nodes.resize(n);
    gl.weights.resize(n);
    const int m = (n + 1) / 2;
    const double xm = 0.5, xl = 0.5;
    for (int i = 1; i <= m; ++i) {
        double z = std::cos(3.14159265358979323846 * (i - 0.25) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p1 = 1.0, p2 = 0.0;
            for (int j = 1; j <= n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
            }
            pp = n * (z * p1 - p2) / (z * z - 1.0);
            const double z1 = z;
            z = z1 - p1 / pp;
            if (std::fabs(z - z1) < 1e-15) break;
        }
        gl.nodes[i - 1] = xm - xl * z;
        gl.nodes[n - i] = xm + xl * z;
        gl.weights[i - 1] = 2.0 * xl / ((1.0 - z * z) * pp * pp);
        gl.weights[n - i] = gl.weights[i - 1];
    }
    return gl;
}

inline const GaussLegendre& gauss_legendre_cached(int n) {
    static std::map<int, GaussLegendre> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, gauss_legendre_unit(n)).first;
    return it->second;
}

// Integral of f over [a, b] with an n-point rule.
template <class F>
double integrate_gl(F&& f, double a, double b, int n = 64) {
    const auto& gl = gauss_legendre_cached(n);
    double s = 0.0;
    const double len = b - a;
    for (int i = 0; i < n; ++i) s += gl.weights[i] * f(a + len * gl.nodes[i]);
    return s * len;
}

}  // namespace cudvine::math
