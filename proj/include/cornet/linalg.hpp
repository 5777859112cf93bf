#pragma once
#include "cornet/matrix.hpp"

namespace cornet {

/// Eigen-decomposition of a symmetric matrix. values are ascending;
/// vectors.col(j) (stored as vectors(i, j)) is the eigenvector for values[j].
struct EigenSym {
    Vec values;
    Matrix vectors;
};

/// Cyclic Jacobi rotations; dependency-free and exact enough for the small
/// dense matrices used here (d <= 64).
EigenSym jacobi_eigen(const Matrix& s, int max_sweeps = 100);

/// Solve A x = b for symmetric positive-definite A via Cholesky.
Vec solve_spd(const Matrix& a, const Vec& b);

/// Least squares min ||X beta - y||^2 via the normal equations and a
/// spectral pseudo-inverse; returns the minimum-norm solution when X^T X is
/// rank deficient (flagged through rank_deficient if provided).
Vec lstsq_min_norm(const Matrix& x, const Vec& y, bool* rank_deficient = nullptr, double rcond = 1e-10);

}  // namespace cornet
