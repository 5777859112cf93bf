#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cornet/linalg.hpp"
#include "cornet/rng.hpp"

using namespace cornet;

TEST_CASE("jacobi: 2x2 hand matrix [[2,1],[1,2]] has eigenvalues 1 and 3") {
    Matrix s(2, 2);
    s(0, 0) = 2;
    s(0, 1) = 1;
    s(1, 0) = 1;
    s(1, 1) = 2;
    const EigenSym e = jacobi_eigen(s);
    CHECK(e.values[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(e.values[1] == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("jacobi reconstructs random symmetric matrices") {
    Rng rng = make_rng(101);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 2 + trial % 7;
        Matrix s(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j <= i; ++j) s(i, j) = s(j, i) = draw_gaussian(rng);
        const EigenSym e = jacobi_eigen(s);
        // S v_j = lambda_j v_j per column
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t i = 0; i < n; ++i) {
                double sv = 0.0;
                for (std::size_t k = 0; k < n; ++k) sv += s(i, k) * e.vectors(k, j);
                CHECK(sv == doctest::Approx(e.values[j] * e.vectors(i, j)).epsilon(1e-8).scale(1.0));
            }
        }
    }
}

TEST_CASE("solve_spd solves a well-conditioned system") {
    Rng rng = make_rng(5);
    const std::size_t n = 6;
    Matrix b(n, n);
    for (double& v : b.a) v = draw_gaussian(rng);
    Matrix a(n, n);
    gemm_tn(b, b, a);
    for (std::size_t i = 0; i < n; ++i) a(i, i) += 1.0;
    Vec rhs(n);
    for (double& v : rhs) v = draw_gaussian(rng);
    const Vec x = solve_spd(a, rhs);
    for (std::size_t i = 0; i < n; ++i) {
        double ax = 0.0;
        for (std::size_t j = 0; j < n; ++j) ax += a(i, j) * x[j];
        CHECK(ax == doctest::Approx(rhs[i]).epsilon(1e-10));
    }
}

TEST_CASE("solve_spd rejects an indefinite matrix") {
    Matrix a(2, 2);
    a(0, 0) = 1;
    a(1, 1) = -1;
    CHECK_THROWS_AS((void)solve_spd(a, Vec{1.0, 1.0}), numeric_error);
}

TEST_CASE("lstsq recovers exact coefficients on a tall full-rank system") {
    Rng rng = make_rng(7);
    Matrix x(30, 4);
    for (double& v : x.a) v = draw_gaussian(rng);
    const Vec truth = {1.0, -2.0, 0.5, 3.0};
    Vec y(30);
    for (std::size_t i = 0; i < 30; ++i) y[i] = dot(x.row(i), truth);
    bool deficient = true;
    const Vec beta = lstsq_min_norm(x, y, &deficient);
    CHECK_FALSE(deficient);
    for (std::size_t j = 0; j < 4; ++j) CHECK(beta[j] == doctest::Approx(truth[j]).epsilon(1e-9));
}

TEST_CASE("lstsq returns the minimum-norm solution on a wide system") {
    // single equation x1 + x2 = 2 -> min-norm solution (1, 1)
    Matrix x(1, 2);
    x(0, 0) = 1.0;
    x(0, 1) = 1.0;
    bool deficient = false;
    const Vec beta = lstsq_min_norm(x, Vec{2.0}, &deficient);
    CHECK(deficient);
    CHECK(beta[0] == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(beta[1] == doctest::Approx(1.0).epsilon(1e-10));
}
