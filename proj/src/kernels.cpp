#include "iaprox/kernels.hpp"

#include <algorithm>
#include <cmath>

#ifdef IAPROX_HAVE_OPENMP
#include <omp.h>
#endif

namespace iaprox::kernels {

namespace {

inline double column_dot(double const *col, double const *x, Index n)
{
  double s = 0.0;
  for (Index i = 0; i < n; ++i) {
    s += col[i] * x[i];
  }
  return s;
}

inline double csr_row(SparseRowMajor const &A, Index row, double const *x)
{
  int const *outer = A.outerIndexPtr();
  int const *inner = A.innerIndexPtr();
  double const *val = A.valuePtr();
  double s = 0.0;
  for (int k = outer[row]; k < outer[row + 1]; ++k) {
    s += val[k] * x[inner[k]];
  }
  return s;
}

inline double shrink(double v, double theta)
{
  double const m = std::abs(v) - theta;
  return m > 0.0 ? std::copysign(m, v) : 0.0;
}

void check_compressed(SparseRowMajor const &A)
{
  if (!A.isCompressed()) {
    throw std::invalid_argument("csr_matvec: matrix must be in compressed storage");
  }
}

} // namespace

bool openmp_enabled()
{
#ifdef IAPROX_HAVE_OPENMP
  return true;
#else
  return false;
#endif
}

int max_threads()
{
#ifdef IAPROX_HAVE_OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

namespace serial {

void col_dots(Matrix const &M, Vector const &x, Vector &out)
{
  Index const n = M.cols();
  out.resize(n);
  for (Index j = 0; j < n; ++j) {
    out[j] = column_dot(M.col(j).data(), x.data(), M.rows());
  }
}

void csr_matvec(SparseRowMajor const &A, Vector const &x, Vector &out)
{
  check_compressed(A);
  out.resize(A.rows());
  for (Index i = 0; i < A.rows(); ++i) {
    out[i] = csr_row(A, i, x.data());
  }
}

void soft_threshold(Vector const &x, double theta, Vector &out)
{
  out.resize(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    out[i] = shrink(x[i], theta);
  }
}

void box_project(Vector const &x, Vector const &lo, Vector const &hi, Vector &out)
{
  out.resize(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    out[i] = std::clamp(x[i], lo[i], hi[i]);
  }
}

} // namespace serial

namespace omp {

void col_dots(Matrix const &M, Vector const &x, Vector &out)
{
  Index const n = M.cols();
  Index const m = M.rows();
  out.resize(n);
  double *o = out.data();
#pragma omp parallel for schedule(static)
  for (Index j = 0; j < n; ++j) {
    o[j] = column_dot(M.col(j).data(), x.data(), m);
  }
}

void csr_matvec(SparseRowMajor const &A, Vector const &x, Vector &out)
{
  check_compressed(A);
  Index const rows = A.rows();
  out.resize(rows);
  double *o = out.data();
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < rows; ++i) {
    o[i] = csr_row(A, i, x.data());
  }
}

void soft_threshold(Vector const &x, double theta, Vector &out)
{
  Index const n = x.size();
  out.resize(n);
  double *o = out.data();
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < n; ++i) {
    o[i] = shrink(x[i], theta);
  }
}

void box_project(Vector const &x, Vector const &lo, Vector const &hi, Vector &out)
{
  Index const n = x.size();
  out.resize(n);
  double *o = out.data();
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < n; ++i) {
    o[i] = std::clamp(x[i], lo[i], hi[i]);
  }
}

} // namespace omp

Vector col_dots(Matrix const &M, Vector const &x)
{
  if (x.size() != M.rows()) {
    throw std::invalid_argument("col_dots: dimension mismatch");
  }
  Vector out;
  if (openmp_enabled() && M.size() >= kParallelThreshold) {
    omp::col_dots(M, x, out);
  } else {
    serial::col_dots(M, x, out);
  }
  return out;
}

Vector csr_matvec(SparseRowMajor const &A, Vector const &x)
{
  if (x.size() != A.cols()) {
    throw std::invalid_argument("csr_matvec: dimension mismatch");
  }
  Vector out;
  if (openmp_enabled() && A.nonZeros() >= kParallelThreshold) {
    omp::csr_matvec(A, x, out);
  } else {
    serial::csr_matvec(A, x, out);
  }
  return out;
}

Vector soft_threshold(Vector const &x, double theta)
{
  if (theta < 0.0) {
    throw std::invalid_argument("soft_threshold: theta must be nonnegative");
  }
  Vector out;
  if (openmp_enabled() && x.size() >= kParallelThreshold) {
    omp::soft_threshold(x, theta, out);
  } else {
    serial::soft_threshold(x, theta, out);
  }
  return out;
}

Vector box_project(Vector const &x, Vector const &lo, Vector const &hi)
{
  if (lo.size() != x.size() || hi.size() != x.size()) {
    throw std::invalid_argument("box_project: dimension mismatch");
  }
  for (Index i = 0; i < x.size(); ++i) {
    if (lo[i] > hi[i]) {
      throw std::invalid_argument("box_project: lower bound exceeds upper bound at index " +
                                  std::to_string(i));
    }
  }
  Vector out;
  if (openmp_enabled() && x.size() >= kParallelThreshold) {
    omp::box_project(x, lo, hi, out);
  } else {
    serial::box_project(x, lo, hi, out);
  }
  return out;
}

} // namespace iaprox::kernels
