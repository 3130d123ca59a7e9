#pragma once

// Rank statistics and classical tests: Kendall's tau (Knight's O(n log n)
// algorithm), empirical quantiles, Kolmogorov-Smirnov statistic, exact
// binomial test and one-sample z-test.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "special.hpp"

namespace cudvine::math {

inline double mean(const std::vector<double>& x) {
    if (x.empty()) throw std::invalid_argument("mean: empty sample");
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

inline double sample_sd(const std::vector<double>& x) {
    if (x.size() < 2) throw std::invalid_argument("sample_sd: need at least two points");
    const double m = mean(x);
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return std::sqrt(s / static_cast<double>(x.size() - 1));
}

namespace detail {

// Merge-sort inversion count.
inline std::uint64_t count_inversions(std::vector<double>& v, std::vector<double>& buf,
                                      std::size_t lo, std::size_t hi) {
    if (hi - lo < 2) return 0;
    const std::size_t mid = lo + (hi - lo) / 2;
    std::uint64_t inv = count_inversions(v, buf, lo, mid) + count_inversions(v, buf, mid, hi);
    std::size_t i = lo, j = mid, k = lo;
    while (i < mid && j < hi) {
        if (v[j] < v[i]) {
            inv += mid - i;
            buf[k++] = v[j++];
        } else {
            buf[k++] = v[i++];
        }
    }
    while (i < mid) buf[k++] = v[i++];
    while (j < hi) buf[k++] = v[j++];
    std::copy(buf.begin() + lo, buf.begin() + hi, v.begin() + lo);
    return inv;
}

}  // namespace detail

// Kendall's tau-a for continuous samples (ties assumed negligible).
inline double kendall_tau(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (y.size() != n || n < 2) throw std::invalid_argument("kendall_tau: bad sample sizes");
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (x[a] != x[b]) return x[a] < x[b];
        return y[a] < y[b];
    });
    std::vector<double> ys(n);
    for (std::size_t i = 0; i < n; ++i) ys[i] = y[idx[i]];
    std::vector<double> buf(n);
    const std::uint64_t inv = detail::count_inversions(ys, buf, 0, n);
    const double pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
    return 1.0 - 2.0 * static_cast<double>(inv) / pairs;
}

// Type-7 (linear interpolation) empirical quantile of an unsorted sample.
inline double quantile_type7(std::vector<double> x, double p) {
    if (x.empty()) throw std::invalid_argument("quantile_type7: empty sample");
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("quantile_type7: level outside [0,1]");
    std::sort(x.begin(), x.end());
    const double h = (static_cast<double>(x.size()) - 1.0) * p;
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= x.size()) return x.back();
    return x[lo] + (h - static_cast<double>(lo)) * (x[lo + 1] - x[lo]);
}

inline double quantile_type7_sorted(const std::vector<double>& xsorted, double p) {
    const double h = (static_cast<double>(xsorted.size()) - 1.0) * p;
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= xsorted.size()) return xsorted.back();
    return xsorted[lo] + (h - static_cast<double>(lo)) * (xsorted[lo + 1] - xsorted[lo]);
}

// Kolmogorov-Smirnov statistic against Uniform(0,1).
inline double ks_statistic_uniform(std::vector<double> v) {
    if (v.empty()) throw std::invalid_argument("ks_statistic_uniform: empty sample");
    std::sort(v.begin(), v.end());
    const double n = static_cast<double>(v.size());
    double d = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double hi = (static_cast<double>(i) + 1.0) / n - v[i];
        const double lo = v[i] - static_cast<double>(i) / n;
        d = std::max(d, std::max(hi, lo));
    }
    return d;
}

// Exact two-sided binomial test, "minlike" convention (sum of all outcome
// probabilities no larger than the observed one), matching R's binom.test.
inline double binom_test_two_sided(int k, int n, double p0) {
    if (n <= 0 || k < 0 || k > n) throw std::invalid_argument("binom_test_two_sided: bad counts");
    if (p0 <= 0.0 || p0 >= 1.0) {
        // degenerate null: p-value 1 iff the observation is the certain one
        const int certain = (p0 <= 0.0) ? 0 : n;
        return (k == certain) ? 1.0 : 0.0;
    }
    const double logp = std::log(p0), logq = std::log1p(-p0);
    auto lpmf = [&](int j) {
        return std::lgamma(n + 1.0) - std::lgamma(j + 1.0) - std::lgamma(n - j + 1.0) +
               j * logp + (n - j) * logq;
    };
    const double lk = lpmf(k);
    const double cutoff = lk + std::log1p(1e-7);
    double total = 0.0;
    for (int j = 0; j <= n; ++j) {
        const double lj = lpmf(j);
        if (lj <= cutoff) total += std::exp(lj);
    }
    return std::min(total, 1.0);
}

// Two-sided z-test of mean(samples) against target.
inline double z_test_two_sided(const std::vector<double>& samples, double target) {
    const double m = mean(samples);
    const double sd = sample_sd(samples);
    if (sd == 0.0) return (m == target) ? 1.0 : 0.0;
    const double z = (m - target) / (sd / std::sqrt(static_cast<double>(samples.size())));
    return std::erfc(std::fabs(z) / kSqrt2);
}

inline double pearson_correlation(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("pearson_correlation: bad sample sizes");
    const double mx = mean(x), my = mean(y);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace cudvine::math
