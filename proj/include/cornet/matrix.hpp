#pragma once
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "cornet/errors.hpp"

namespace cornet {

using Vec = std::vector<double>;

/// Dense row-major matrix. Small enough on purpose: everything in this
/// project is desk-scale (d <= a few dozen, n <= a few thousand).
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> a;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), a(r * c, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a[i * cols + j]; }

    std::span<double> row(std::size_t i) { return {a.data() + i * cols, cols}; }
    std::span<const double> row(std::size_t i) const { return {a.data() + i * cols, cols}; }

    bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }

    void fill(double v) { std::fill(a.begin(), a.end(), v); }

    bool all_finite() const {
        for (double v : a)
            if (!std::isfinite(v)) return false;
        return true;
    }
};

inline double dot(std::span<const double> x, std::span<const double> y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

inline double l1_norm(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += std::abs(v);
    return s;
}

inline double l2_norm(std::span<const double> x) { return std::sqrt(dot(x, x)); }

/// Max absolute row sum, the (1,inf) operator norm used for weight diagnostics.
inline double norm_1inf(const Matrix& w) {
    double m = 0.0;
    for (std::size_t i = 0; i < w.rows; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < w.cols; ++j) s += std::abs(w(i, j));
        if (s > m) m = s;
    }
    return m;
}

// C = A * B^T with A (n x k), B (m x k) -> C (n x m). accumulate=false zeroes C first.
void gemm_nt(const Matrix& A, const Matrix& B, Matrix& C, bool accumulate = false);
// C = A^T * B with A (n x k), B (n x m) -> C (k x m).
void gemm_tn(const Matrix& A, const Matrix& B, Matrix& C, bool accumulate = false);
// C = A * B with A (n x k), B (k x m) -> C (n x m).
void gemm_nn(const Matrix& A, const Matrix& B, Matrix& C, bool accumulate = false);

}  // namespace cornet
