#pragma once
#include "cornet/matrix.hpp"

namespace cornet {

/// L1-regularized least squares, objective (1/n)||y - Z b||^2 + lambda ||b||_1.
/// The 1/n scaling on the quadratic (and none on the penalty) is deliberate:
/// the closed-form regularization rule for the debiasing step applies to
/// exactly this scaling.
struct LassoProblem {
    Matrix z;
    Vec y;
    double lambda = 0.0;
};

struct LassoSolution {
    Vec coef;
    int iterations = 0;
    bool converged = false;
    double final_objective = 0.0;
};

/// Proximal operator of the absolute value: sign(v) * max(|v| - lambda, 0).
double soft_threshold(double v, double lambda);

double lasso_objective(const LassoProblem& p, const Vec& coef);

/// Cyclic coordinate descent from a zero start. Converged when the largest
/// coordinate change within a sweep drops below tol. A zero column with
/// lambda = 0 leaves that coordinate at 0. If objective_trace is non-null the
/// objective after each sweep is appended (used by the monotonicity tests).
LassoSolution lasso_cd(const LassoProblem& p, double tol = 1e-8, int max_sweeps = 10000,
                       Vec* objective_trace = nullptr);

}  // namespace cornet
