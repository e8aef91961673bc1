#pragma once

// Data-parallel inner loops used by every oracle. Each kernel exists twice:
// a serial reference in `kernels::serial` and an OpenMP version in
// `kernels::omp`. Both share the per-row/per-column body, so for any thread
// count the two produce bit-identical output. The unqualified entry points
// dispatch on problem size.

#include "iaprox/types.hpp"

#include <Eigen/SparseCore>

namespace iaprox::kernels {

using SparseRowMajor = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;

// Below this many scalar multiply-adds the OpenMP fork costs more than it saves.
inline constexpr Index kParallelThreshold = 1 << 15;

bool openmp_enabled();
int max_threads();

namespace serial {
// out_j = <M.col(j), x>, i.e. out = M^T x. For symmetric M this is M x.
void col_dots(Matrix const &M, Vector const &x, Vector &out);
void csr_matvec(SparseRowMajor const &A, Vector const &x, Vector &out);
void soft_threshold(Vector const &x, double theta, Vector &out);
void box_project(Vector const &x, Vector const &lo, Vector const &hi, Vector &out);
} // namespace serial

namespace omp {
void col_dots(Matrix const &M, Vector const &x, Vector &out);
void csr_matvec(SparseRowMajor const &A, Vector const &x, Vector &out);
void soft_threshold(Vector const &x, double theta, Vector &out);
void box_project(Vector const &x, Vector const &lo, Vector const &hi, Vector &out);
} // namespace omp

Vector col_dots(Matrix const &M, Vector const &x);
Vector csr_matvec(SparseRowMajor const &A, Vector const &x);
Vector soft_threshold(Vector const &x, double theta);
Vector box_project(Vector const &x, Vector const &lo, Vector const &hi);

} // namespace iaprox::kernels
