#include "cornet/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cornet {

EigenSym jacobi_eigen(const Matrix& s, int max_sweeps) {
    if (s.rows != s.cols) throw shape_error("jacobi_eigen: matrix not square");
    const std::size_t n = s.rows;
    Matrix a = s;
    Matrix v(n, n);
    for (std::size_t i = 0; i < n; ++i) v(i, i) = 1.0;

    auto off_diag = [&]() {
        double sum = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) sum += a(p, q) * a(p, q);
        return sum;
    };
    double diag_scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) diag_scale += a(i, i) * a(i, i);
    const double tol = 1e-30 * std::max(1.0, diag_scale);

    for (int sweep = 0; sweep < max_sweeps && off_diag() > tol; ++sweep) {
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::abs(apq) < 1e-300) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double si = t * c;
                const double tau = si / (1.0 + c);
                const double app = a(p, p), aqq = a(q, q);
                a(p, p) = app - t * apq;
                a(q, q) = aqq + t * apq;
                a(p, q) = a(q, p) = 0.0;
                for (std::size_t r = 0; r < n; ++r) {
                    const double vrp = v(r, p), vrq = v(r, q);
                    v(r, p) = vrp - si * (vrq + tau * vrp);
                    v(r, q) = vrq + si * (vrp - tau * vrq);
                    if (r == p || r == q) continue;
                    const double arp = a(r, p), arq = a(r, q);
                    a(r, p) = a(p, r) = arp - si * (arq + tau * arp);
                    a(r, q) = a(q, r) = arq + si * (arp - tau * arq);
                }
            }
        }
    }

    EigenSym out;
    out.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.values[i] = a(i, i);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return out.values[i] < out.values[j]; });
    EigenSym sorted;
    sorted.values.resize(n);
    sorted.vectors = Matrix(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        sorted.values[j] = out.values[order[j]];
        for (std::size_t i = 0; i < n; ++i) sorted.vectors(i, j) = v(i, order[j]);
    }
    return sorted;
}

Vec solve_spd(const Matrix& a, const Vec& b) {
    if (a.rows != a.cols || b.size() != a.rows) throw shape_error("solve_spd: dimension mismatch");
    const std::size_t n = a.rows;
    Matrix l(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            if (i == j) {
                if (s <= 0.0) throw numeric_error("solve_spd: matrix not positive definite");
                l(i, i) = std::sqrt(s);
            } else {
                l(i, j) = s / l(j, j);
            }
        }
    }
    Vec z(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * z[k];
        z[i] = s / l(i, i);
    }
    Vec x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = z[i];
        for (std::size_t k = i + 1; k < n; ++k) s -= l(k, i) * x[k];
        x[i] = s / l(i, i);
    }
    return x;
}

Vec lstsq_min_norm(const Matrix& x, const Vec& y, bool* rank_deficient, double rcond) {
    if (x.rows != y.size()) throw shape_error("lstsq: row count mismatch");
    const std::size_t p = x.cols;
    Matrix gram(p, p);
    gemm_tn(x, x, gram);
    Vec xty(p, 0.0);
    for (std::size_t i = 0; i < x.rows; ++i)
        for (std::size_t j = 0; j < p; ++j) xty[j] += x(i, j) * y[i];

    EigenSym eig = jacobi_eigen(gram);
    const double cutoff = rcond * std::max(1e-300, eig.values.back());
    bool deficient = false;
    Vec beta(p, 0.0);
    for (std::size_t j = 0; j < p; ++j) {
        if (eig.values[j] <= cutoff) {
            deficient = true;
            continue;
        }
        double proj = 0.0;
        for (std::size_t i = 0; i < p; ++i) proj += eig.vectors(i, j) * xty[i];
        proj /= eig.values[j];
        for (std::size_t i = 0; i < p; ++i) beta[i] += proj * eig.vectors(i, j);
    }
    if (rank_deficient != nullptr) *rank_deficient = deficient;
    return beta;
}

}  // namespace cornet
