#pragma once

// Nonparametric marginal model: the rescaled empirical cdf
// F(x) = #{y_t <= x} / (T + 1), its step-function inverse, and the
// probability integral transform. The T+1 rescaling keeps transformed
// values strictly inside (0,1).

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace cudvine {

class EmpiricalMarginal {
public:
    EmpiricalMarginal() = default;

    static EmpiricalMarginal fit(const std::vector<double>& series) {
        if (series.size() < 2)
            throw std::invalid_argument("EmpiricalMarginal: need at least two observations");
        for (double x : series) {
            if (!std::isfinite(x))
                throw std::invalid_argument("EmpiricalMarginal: non-finite observation");
        }
        EmpiricalMarginal m;
        m.sorted_ = series;
        std::sort(m.sorted_.begin(), m.sorted_.end());
        if (m.sorted_.front() == m.sorted_.back())
            throw std::invalid_argument("EmpiricalMarginal: constant series (degenerate marginal)");
        return m;
    }

    std::size_t size() const { return sorted_.size(); }
    const std::vector<double>& sorted_sample() const { return sorted_; }

    // F(x) = #{y <= x}/(T+1), clipped to [1/(T+1), T/(T+1)].
    double cdf(double x) const {
        check_fitted();
        const double tp1 = static_cast<double>(sorted_.size()) + 1.0;
        const auto count = std::upper_bound(sorted_.begin(), sorted_.end(), x) - sorted_.begin();
        const double raw = static_cast<double>(count) / tp1;
        return std::min(std::max(raw, 1.0 / tp1), static_cast<double>(sorted_.size()) / tp1);
    }

    // Generalized inverse: smallest sample value with cdf >= q. A step
    // function, so simulated draws are resamples of observed values.
    double quantile(double q) const {
        check_fitted();
        if (!(q > 0.0 && q < 1.0))
            throw std::invalid_argument("EmpiricalMarginal::quantile: q outside (0,1)");
        const double tp1 = static_cast<double>(sorted_.size()) + 1.0;
        const double k = std::ceil(q * tp1);
        const std::size_t idx =
            static_cast<std::size_t>(std::min(std::max(k, 1.0), static_cast<double>(sorted_.size())));
        return sorted_[idx - 1];
    }

    std::vector<double> pit(const std::vector<double>& series) const {
        std::vector<double> out;
        out.reserve(series.size());
        for (double x : series) out.push_back(cdf(x));
        return out;
    }

private:
    void check_fitted() const {
        if (sorted_.size() < 2) throw std::logic_error("EmpiricalMarginal: not fitted");
    }

    std::vector<double> sorted_;
};

}  // namespace cudvine
