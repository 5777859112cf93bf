#include "cornet/matrix.hpp"

namespace cornet {

void gemm_nt(const Matrix& A, const Matrix& B, Matrix& C, bool accumulate) {
    if (A.cols != B.cols) throw shape_error("gemm_nt: inner dims " + std::to_string(A.cols) + " vs " + std::to_string(B.cols));
    if (C.rows != A.rows || C.cols != B.rows) C = Matrix(A.rows, B.rows);
    if (!accumulate) C.fill(0.0);
    for (std::size_t i = 0; i < A.rows; ++i) {
        const double* ai = A.a.data() + i * A.cols;
        double* ci = C.a.data() + i * C.cols;
        for (std::size_t j = 0; j < B.rows; ++j) {
            const double* bj = B.a.data() + j * B.cols;
            double s = 0.0;
            for (std::size_t k = 0; k < A.cols; ++k) s += ai[k] * bj[k];
            ci[j] += s;
        }
    }
}

void gemm_tn(const Matrix& A, const Matrix& B, Matrix& C, bool accumulate) {
    if (A.rows != B.rows) throw shape_error("gemm_tn: inner dims " + std::to_string(A.rows) + " vs " + std::to_string(B.rows));
    if (C.rows != A.cols || C.cols != B.cols) C = Matrix(A.cols, B.cols);
    if (!accumulate) C.fill(0.0);
    for (std::size_t n = 0; n < A.rows; ++n) {
        const double* an = A.a.data() + n * A.cols;
        const double* bn = B.a.data() + n * B.cols;
        for (std::size_t i = 0; i < A.cols; ++i) {
            const double ani = an[i];
            if (ani == 0.0) continue;
            double* ci = C.a.data() + i * C.cols;
            for (std::size_t j = 0; j < B.cols; ++j) ci[j] += ani * bn[j];
        }
    }
}

void gemm_nn(const Matrix& A, const Matrix& B, Matrix& C, bool accumulate) {
    if (A.cols != B.rows) throw shape_error("gemm_nn: inner dims " + std::to_string(A.cols) + " vs " + std::to_string(B.rows));
    if (C.rows != A.rows || C.cols != B.cols) C = Matrix(A.rows, B.cols);
    if (!accumulate) C.fill(0.0);
    for (std::size_t i = 0; i < A.rows; ++i) {
        const double* ai = A.a.data() + i * A.cols;
        double* ci = C.a.data() + i * C.cols;
        for (std::size_t k = 0; k < A.cols; ++k) {
            const double aik = ai[k];
            if (aik == 0.0) continue;
            const double* bk = B.a.data() + k * B.cols;
            for (std::size_t j = 0; j < B.cols; ++j) ci[j] += aik * bk[j];
        }
    }
}

}  // namespace cornet
