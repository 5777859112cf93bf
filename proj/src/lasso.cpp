#include "cornet/lasso.hpp"

#include <cmath>

namespace cornet {

double soft_threshold(double v, double lambda) {
    if (lambda < 0.0) throw numeric_error("soft_threshold: lambda must be nonnegative");
    if (v > lambda) return v - lambda;
    if (v < -lambda) return v + lambda;
    return 0.0;
}

double lasso_objective(const LassoProblem& p, const Vec& coef) {
    const std::size_t n = p.z.rows;
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = p.y[i] - dot(p.z.row(i), coef);
        rss += r * r;
    }
    return rss / static_cast<double>(n) + p.lambda * l1_norm(coef);
}

LassoSolution lasso_cd(const LassoProblem& p, double tol, int max_sweeps, Vec* objective_trace) {
    const std::size_t n = p.z.rows;
    const std::size_t d = p.z.cols;
    if (n < 1 || d < 1) throw shape_error("lasso_cd: empty problem");
    if (p.y.size() != n) throw shape_error("lasso_cd: response length mismatch");
    if (p.lambda < 0.0 || !std::isfinite(p.lambda)) throw numeric_error("lasso_cd: bad lambda");
    if (tol <= 0.0 || max_sweeps < 1) throw numeric_error("lasso_cd: bad solver controls");
    if (!p.z.all_finite()) throw numeric_error("lasso_cd: non-finite design entry");
    for (double v : p.y)
        if (!std::isfinite(v)) throw numeric_error("lasso_cd: non-finite response entry");

    // Column sums of squares, scaled by 2/n to match the coordinate update.
    Vec col_sq(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) col_sq[j] += p.z(i, j) * p.z(i, j);
    const double two_over_n = 2.0 / static_cast<double>(n);

    LassoSolution sol;
    sol.coef.assign(d, 0.0);
    Vec resid = p.y;  // y - Z b, with b = 0

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double max_change = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            if (col_sq[j] == 0.0) continue;  // zero column stays at 0
            const double old = sol.coef[j];
            // partial residual correlation: (2/n) z_j . (r + z_j * old)
            double zr = 0.0;
            for (std::size_t i = 0; i < n; ++i) zr += p.z(i, j) * resid[i];
            const double rho = two_over_n * (zr + col_sq[j] * old);
            const double denom = two_over_n * col_sq[j];
            const double next = soft_threshold(rho, p.lambda) / denom;
            if (next != old) {
                const double delta = next - old;
                for (std::size_t i = 0; i < n; ++i) resid[i] -= delta * p.z(i, j);
                sol.coef[j] = next;
                max_change = std::max(max_change, std::abs(delta));
            }
        }
        sol.iterations = sweep + 1;
        if (objective_trace != nullptr) objective_trace->push_back(lasso_objective(p, sol.coef));
        if (max_change < tol) {
            sol.converged = true;
            break;
        }
    }
    sol.final_objective = lasso_objective(p, sol.coef);
    return sol;
}

}  // namespace cornet
