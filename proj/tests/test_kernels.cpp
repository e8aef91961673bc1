#include "helpers.hpp"

#include "iaprox/kernels.hpp"

#include <doctest.h>

using namespace iaprox;
using namespace iaprox::test;

TEST_SUITE("kernels")
{
  TEST_CASE("OpenMP kernels match the serial reference bit for bit")
  {
    std::mt19937_64 rng(1);
    for (Index n : {1, 7, 300}) {
      Matrix M(n, n);
      for (Index j = 0; j < n; ++j) M.col(j) = randn(n, rng);
      Vector const x = randn(n, rng);
      Vector a(n);
      Vector b(n);
      kernels::serial::col_dots(M, x, a);
      kernels::omp::col_dots(M, x, b);
      CHECK((a.array() == b.array()).all());
      CHECK((a - M.transpose() * x).norm() <= 1e-12 * (1.0 + a.norm()));

      kernels::serial::soft_threshold(x, 0.3, a);
      kernels::omp::soft_threshold(x, 0.3, b);
      CHECK((a.array() == b.array()).all());

      Vector const lo = Vector::Constant(n, -0.5);
      Vector const hi = Vector::Constant(n, 0.7);
      kernels::serial::box_project(x, lo, hi, a);
      kernels::omp::box_project(x, lo, hi, b);
      CHECK((a.array() == b.array()).all());
    }
    BoxQP const qp = gen_poisson_qp(20);
    auto const &A = qp.A->sparse_data();
    Vector const x = randn(A.cols(), rng);
    Vector a(A.rows());
    Vector b(A.rows());
    kernels::serial::csr_matvec(A, x, a);
    kernels::omp::csr_matvec(A, x, b);
    CHECK((a.array() == b.array()).all());
    CHECK((a - A * x).norm() <= 1e-12 * (1.0 + a.norm()));
  }

  TEST_CASE("dispatching entry points agree with the references")
  {
    std::mt19937_64 rng(2);
    Vector const x = randn(1 << 16, rng);
    Vector out(x.size());
    kernels::serial::soft_threshold(x, 0.2, out);
    CHECK((kernels::soft_threshold(x, 0.2).array() == out.array()).all());
  }
}
