#include "afs/kernels.hpp"

#include <cstdint>
#include <stdexcept>

namespace afs::kernels {

namespace {

void check_nn(const Matrix& a, const Matrix& b, const Matrix& c) {
    if (a.cols() != b.rows() || c.rows() != a.rows() || c.cols() != b.cols())
        throw std::invalid_argument("matmul_nn: shapes " + shape_str(a) + " * " + shape_str(b) +
                                    " -> " + shape_str(c));
}

void check_tn(const Matrix& a, const Matrix& b, const Matrix& c) {
    if (a.rows() != b.rows() || c.rows() != a.cols() || c.cols() != b.cols())
        throw std::invalid_argument("matmul_tn: shapes " + shape_str(a) + "^T * " + shape_str(b) +
                                    " -> " + shape_str(c));
}

void check_nt(const Matrix& a, const Matrix& b, const Matrix& c) {
    if (a.cols() != b.cols() || c.rows() != a.rows() || c.cols() != b.rows())
        throw std::invalid_argument("matmul_nt: shapes " + shape_str(a) + " * " + shape_str(b) +
                                    "^T -> " + shape_str(c));
}

// One output row of C = A*B, i-k-j order (axpy over rows of B).
inline void row_nn(const Matrix& a, const Matrix& b, Matrix& c, std::size_t i) {
    const std::size_t k = a.cols(), n = b.cols();
    double* __restrict__ ci = c.row(i);
    for (std::size_t j = 0; j < n; ++j) ci[j] = 0.0;
    const double* __restrict__ ai = a.row(i);
    for (std::size_t t = 0; t < k; ++t) {
        const double av = ai[t];
        const double* __restrict__ bt = b.row(t);
        for (std::size_t j = 0; j < n; ++j) ci[j] += av * bt[j];
    }
}

// One output row of C = A^T*B (row i of C gathers column i of A).
inline void row_tn(const Matrix& a, const Matrix& b, Matrix& c, std::size_t i) {
    const std::size_t k = a.rows(), n = b.cols();
    double* __restrict__ ci = c.row(i);
    for (std::size_t j = 0; j < n; ++j) ci[j] = 0.0;
    for (std::size_t t = 0; t < k; ++t) {
        const double av = a(t, i);
        const double* __restrict__ bt = b.row(t);
        for (std::size_t j = 0; j < n; ++j) ci[j] += av * bt[j];
    }
}

// One output row of C = A*B^T (dot products of row i of A with rows of B).
inline void row_nt(const Matrix& a, const Matrix& b, Matrix& c, std::size_t i) {
    const std::size_t k = a.cols(), n = b.rows();
    const double* __restrict__ ai = a.row(i);
    double* __restrict__ ci = c.row(i);
    for (std::size_t j = 0; j < n; ++j) {
        const double* __restrict__ bj = b.row(j);
        double acc = 0.0;
        for (std::size_t t = 0; t < k; ++t) acc += ai[t] * bj[t];
        ci[j] = acc;
    }
}

} // namespace

void matmul_nn(const Matrix& a, const Matrix& b, Matrix& c) {
    check_nn(a, b, c);
    const std::int64_t m = static_cast<std::int64_t>(c.rows());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < m; ++i) row_nn(a, b, c, static_cast<std::size_t>(i));
}

void matmul_tn(const Matrix& a, const Matrix& b, Matrix& c) {
    check_tn(a, b, c);
    const std::int64_t m = static_cast<std::int64_t>(c.rows());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < m; ++i) row_tn(a, b, c, static_cast<std::size_t>(i));
}

void matmul_nt(const Matrix& a, const Matrix& b, Matrix& c) {
    check_nt(a, b, c);
    const std::int64_t m = static_cast<std::int64_t>(c.rows());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < m; ++i) row_nt(a, b, c, static_cast<std::size_t>(i));
}

namespace serial {

void matmul_nn(const Matrix& a, const Matrix& b, Matrix& c) {
    check_nn(a, b, c);
    for (std::size_t i = 0; i < c.rows(); ++i) row_nn(a, b, c, i);
}

void matmul_tn(const Matrix& a, const Matrix& b, Matrix& c) {
    check_tn(a, b, c);
    for (std::size_t i = 0; i < c.rows(); ++i) row_tn(a, b, c, i);
}

void matmul_nt(const Matrix& a, const Matrix& b, Matrix& c) {
    check_nt(a, b, c);
    for (std::size_t i = 0; i < c.rows(); ++i) row_nt(a, b, c, i);
}

} // namespace serial

} // namespace afs::kernels
