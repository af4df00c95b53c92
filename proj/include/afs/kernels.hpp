#pragma once

#include "afs/matrix.hpp"

// Thread-parallel matrix kernels. Every parallel loop partitions disjoint
// output rows and keeps the per-row arithmetic order fixed, so results are
// bit-identical to the serial mirrors in kernels::serial for any thread
// count. The serial mirrors are kept for testing and for afs_bench.

namespace afs::kernels {

/// C = A * B. A is m x k, B is k x n, C must be preallocated m x n.
void matmul_nn(const Matrix& a, const Matrix& b, Matrix& c);

/// C = A^T * B. A is k x m, B is k x n, C must be preallocated m x n.
void matmul_tn(const Matrix& a, const Matrix& b, Matrix& c);

/// C = A * B^T. A is m x k, B is n x k, C must be preallocated m x n.
void matmul_nt(const Matrix& a, const Matrix& b, Matrix& c);

namespace serial {
void matmul_nn(const Matrix& a, const Matrix& b, Matrix& c);
void matmul_tn(const Matrix& a, const Matrix& b, Matrix& c);
void matmul_nt(const Matrix& a, const Matrix& b, Matrix& c);
} // namespace serial

} // namespace afs::kernels
