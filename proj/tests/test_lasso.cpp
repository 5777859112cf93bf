#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cornet/lasso.hpp"
#include "cornet/linalg.hpp"
#include "cornet/rng.hpp"

using namespace cornet;

namespace {

// Brute-force minimizer over a 2-D grid; the independent oracle for lasso_cd.
Vec brute_force_2d(const LassoProblem& p, double lo, double hi, double step) {
    Vec best = {0.0, 0.0};
    double best_obj = lasso_objective(p, best);
    Vec cand(2);
    for (double b0 = lo; b0 <= hi + 1e-12; b0 += step) {
        for (double b1 = lo; b1 <= hi + 1e-12; b1 += step) {
            cand[0] = b0;
            cand[1] = b1;
            const double obj = lasso_objective(p, cand);
            if (obj < best_obj) {
                best_obj = obj;
                best = cand;
            }
        }
    }
    return best;
}

LassoProblem random_problem(Rng& rng, std::size_t n, std::size_t p, double lambda) {
    LassoProblem prob;
    prob.z = draw_gaussian_matrix(rng, n, p);
    prob.y.resize(n);
    for (double& v : prob.y) v = draw_gaussian(rng);
    prob.lambda = lambda;
    return prob;
}

}  // namespace

TEST_CASE("soft_threshold hand values") {
    CHECK(soft_threshold(3.0, 1.0) == 2.0);
    CHECK(soft_threshold(-0.5, 1.0) == 0.0);
    CHECK(soft_threshold(-3.0, 1.0) == -2.0);
    CHECK(soft_threshold(0.0, 0.0) == 0.0);
}

TEST_CASE("full shrinkage: lambda beyond the KKT bound zeroes every coefficient") {
    Rng rng = make_rng(42);
    LassoProblem p = random_problem(rng, 20, 5, 0.0);
    double bound = 0.0;
    for (std::size_t j = 0; j < 5; ++j) {
        double zy = 0.0;
        for (std::size_t i = 0; i < 20; ++i) zy += p.z(i, j) * p.y[i];
        bound = std::max(bound, std::abs(zy) / 20.0);
    }
    p.lambda = 2.0 * bound * (1.0 + 1e-12);  // nudge past the boundary ulp
    const LassoSolution sol = lasso_cd(p);
    CHECK(sol.converged);
    for (double b : sol.coef) CHECK(b == 0.0);
}

TEST_CASE("orthonormal design: coordinates equal soft_threshold(Z_j.y/n, lambda/2)") {
    // columns scaled so Z^T Z / n = I
    const std::size_t n = 8;
    Matrix z(n, 3);
    // +-1 sign design with orthogonal columns, so Z^T Z / n = I
    const int h[8][3] = {{1, 1, 1},  {1, -1, 1},  {1, 1, -1},  {1, -1, -1},
                         {-1, 1, 1}, {-1, -1, 1}, {-1, 1, -1}, {-1, -1, -1}};
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < 3; ++j) z(i, j) = h[i][j];
    Rng rng = make_rng(9);
    Vec y(n);
    for (double& v : y) v = draw_gaussian(rng);
    LassoProblem p{z, y, 0.3};
    const LassoSolution sol = lasso_cd(p, 1e-12);
    for (std::size_t j = 0; j < 3; ++j) {
        double zy = 0.0;
        for (std::size_t i = 0; i < n; ++i) zy += z(i, j) * y[i];
        const double expect = soft_threshold(zy / static_cast<double>(n), p.lambda / 2.0);
        CHECK(sol.coef[j] == doctest::Approx(expect).epsilon(1e-10));
    }
}

TEST_CASE("2-D random problem matches the brute-force grid oracle") {
    Rng rng = make_rng(1234);
    LassoProblem p = random_problem(rng, 5, 2, 0.1);
    const LassoSolution sol = lasso_cd(p, 1e-10);
    const Vec brute = brute_force_2d(p, -3.0, 3.0, 1e-3);
    CHECK(std::abs(sol.coef[0] - brute[0]) < 2e-3);
    CHECK(std::abs(sol.coef[1] - brute[1]) < 2e-3);
}

TEST_CASE("objective is non-increasing across sweeps") {
    Rng rng = make_rng(77);
    for (int trial = 0; trial < 10; ++trial) {
        LassoProblem p = random_problem(rng, 30, 6, 0.05 * (trial + 1));
        Vec trace;
        (void)lasso_cd(p, 1e-10, 10000, &trace);
        for (std::size_t s = 1; s < trace.size(); ++s) CHECK(trace[s] <= trace[s - 1] + 1e-12);
    }
}

TEST_CASE("KKT residuals hold at convergence on 50 random problems") {
    Rng rng = make_rng(99);
    const double tol = 1e-8;
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 10 + trial % 40;
        const std::size_t d = 2 + trial % 7;
        LassoProblem p = random_problem(rng, n, d, 0.02 + 0.05 * (trial % 5));
        const LassoSolution sol = lasso_cd(p, tol);
        REQUIRE(sol.converged);
        Vec resid = p.y;
        for (std::size_t i = 0; i < n; ++i) resid[i] -= dot(p.z.row(i), sol.coef);
        for (std::size_t j = 0; j < d; ++j) {
            double zr = 0.0;
            for (std::size_t i = 0; i < n; ++i) zr += p.z(i, j) * resid[i];
            const double grad = 2.0 * zr / static_cast<double>(n);
            if (sol.coef[j] != 0.0)
                CHECK(std::abs(grad - p.lambda * (sol.coef[j] > 0 ? 1.0 : -1.0)) <= 10.0 * tol);
            else
                CHECK(std::abs(grad) <= p.lambda + 10.0 * tol);
        }
    }
}

TEST_CASE("lambda = 0 with full-column-rank design matches least squares") {
    Rng rng = make_rng(55);
    LassoProblem p = random_problem(rng, 40, 5, 0.0);
    const LassoSolution sol = lasso_cd(p, 1e-12);
    const Vec ls = lstsq_min_norm(p.z, p.y);
    for (std::size_t j = 0; j < 5; ++j) CHECK(std::abs(sol.coef[j] - ls[j]) < 1e-6);
}

TEST_CASE("scaling equivariance: scaling y by s scales the solution at s*lambda by s") {
    Rng rng = make_rng(31);
    LassoProblem p = random_problem(rng, 25, 4, 0.2);
    const LassoSolution base = lasso_cd(p, 1e-12);
    const double s = 3.5;
    LassoProblem scaled = p;
    for (double& v : scaled.y) v *= s;
    scaled.lambda = p.lambda * s;
    const LassoSolution sol = lasso_cd(scaled, 1e-12);
    for (std::size_t j = 0; j < 4; ++j) CHECK(sol.coef[j] == doctest::Approx(s * base.coef[j]).epsilon(1e-7));
}

TEST_CASE("zero column with lambda = 0 stays at zero") {
    Rng rng = make_rng(13);
    LassoProblem p = random_problem(rng, 15, 3, 0.0);
    for (std::size_t i = 0; i < 15; ++i) p.z(i, 1) = 0.0;
    const LassoSolution sol = lasso_cd(p);
    CHECK(sol.coef[1] == 0.0);
}

TEST_CASE("non-finite inputs raise a numeric error") {
    Rng rng = make_rng(14);
    LassoProblem p = random_problem(rng, 10, 2, 0.1);
    p.y[3] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS((void)lasso_cd(p), numeric_error);
}

TEST_CASE("final_objective is the objective evaluated at the returned coefficients") {
    Rng rng = make_rng(15);
    LassoProblem p = random_problem(rng, 20, 4, 0.15);
    const LassoSolution sol = lasso_cd(p);
    CHECK(sol.final_objective == doctest::Approx(lasso_objective(p, sol.coef)).epsilon(1e-14));
}
