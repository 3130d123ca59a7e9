#pragma once

// Small dense matrix type with just the operations the copula code needs:
// Cholesky factorization, triangular solves, and correlation utilities.
// Cross-sectional dimensions stay modest (d <= 200), so no BLAS.

#include <cmath>
#include <stdexcept>
#include <vector>

namespace cudvine::math {

class Matrix {
public:
    Matrix() : rows_(0), cols_(0) {}
    Matrix(int rows, int cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, fill) {}

    static Matrix identity(int n) {
        Matrix m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    double& operator()(int i, int j) { return data_[static_cast<std::size_t>(i) * cols_ + j]; }
    double operator()(int i, int j) const { return data_[static_cast<std::size_t>(i) * cols_ + j]; }

    bool empty() const { return data_.empty(); }

    Matrix transposed() const {
        Matrix t(cols_, rows_);
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    std::vector<double> row(int i) const {
        std::vector<double> r(cols_);
        for (int j = 0; j < cols_; ++j) r[j] = (*this)(i, j);
        return r;
    }

    std::vector<double> col(int j) const {
        std::vector<double> c(rows_);
        for (int i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
        return c;
    }

private:
    int rows_, cols_;
    std::vector<double> data_;
};

// Lower-triangular Cholesky factor; throws on non-positive-definite input.
inline Matrix cholesky(const Matrix& a) {
    const int n = a.rows();
    if (a.cols() != n) throw std::invalid_argument("cholesky: matrix not square");
    Matrix l(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            double s = a(i, j);
            for (int k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            if (i == j) {
                if (s <= 0.0) throw std::runtime_error("cholesky: matrix not positive definite");
                l(i, i) = std::sqrt(s);
            } else {
                l(i, j) = s / l(j, j);
            }
        }
    }
    return l;
}

inline bool is_positive_definite(const Matrix& a) {
    try {
        cholesky(a);
        return true;
    } catch (const std::exception&) {
        return false;
    }
}

// Solve L y = b for lower-triangular L.
inline std::vector<double> forward_solve(const Matrix& l, const std::vector<double>& b) {
    const int n = l.rows();
    std::vector<double> y(n);
    for (int i = 0; i < n; ++i) {
        double s = b[i];
        for (int k = 0; k < i; ++k) s -= l(i, k) * y[k];
        y[i] = s / l(i, i);
    }
    return y;
}

// Solve L^T x = y.
inline std::vector<double> backward_solve(const Matrix& l, const std::vector<double>& y) {
    const int n = l.rows();
    std::vector<double> x(n);
    for (int i = n - 1; i >= 0; --i) {
        double s = y[i];
        for (int k = i + 1; k < n; ++k) s -= l(k, i) * x[k];
        x[i] = s / l(i, i);
    }
    return x;
}

// Solve A x = b through a precomputed Cholesky factor of A.
inline std::vector<double> cholesky_solve(const Matrix& l, const std::vector<double>& b) {
    return backward_solve(l, forward_solve(l, b));
}

inline double log_det_from_cholesky(const Matrix& l) {
    double s = 0.0;
    for (int i = 0; i < l.rows(); ++i) s += std::log(l(i, i));
    return 2.0 * s;
}

// x^T A^{-1} x via the factor of A.
inline double quad_form_inv(const Matrix& l, const std::vector<double>& x) {
    const auto y = forward_solve(l, x);
    double s = 0.0;
    for (double v : y) s += v * v;
    return s;
}

// Rescale a symmetric PD matrix to unit diagonal.
inline Matrix to_correlation(const Matrix& q) {
    const int n = q.rows();
    Matrix r(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) r(i, j) = q(i, j) / std::sqrt(q(i, i) * q(j, j));
    }
    return r;
}

// Add diagonal jitter until the matrix factors; keeps unit diagonal.
inline Matrix make_positive_definite(Matrix r, double jitter = 1e-10) {
    for (int attempt = 0; attempt < 12; ++attempt) {
        if (is_positive_definite(r)) return r;
        for (int i = 0; i < r.rows(); ++i) r(i, i) += jitter;
        r = to_correlation(r);
        jitter *= 10.0;
    }
    throw std::runtime_error("make_positive_definite: could not repair matrix");
}

inline void validate_correlation(const Matrix& r, const char* what) {
    const int n = r.rows();
    if (r.cols() != n || n < 1) throw std::invalid_argument(std::string(what) + ": not square");
    for (int i = 0; i < n; ++i) {
        if (std::fabs(r(i, i) - 1.0) > 1e-12)
            throw std::invalid_argument(std::string(what) + ": diagonal must be 1");
        for (int j = 0; j < i; ++j) {
            if (std::fabs(r(i, j) - r(j, i)) > 1e-12)
                throw std::invalid_argument(std::string(what) + ": not symmetric");
        }
    }
    if (!is_positive_definite(r))
        throw std::invalid_argument(std::string(what) + ": not positive definite");
}

}  // namespace cudvine::math
