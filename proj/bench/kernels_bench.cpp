// Serial reference kernels against their OpenMP counterparts.

#include "iaprox/kernels.hpp"
#include "iaprox/problems.hpp"

#include <benchmark/benchmark.h>

#include <random>
#include <string>

namespace {

using namespace iaprox;

Vector random_vector(Index n, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(n);
  for (Index i = 0; i < n; ++i) {
    v[i] = normal(rng);
  }
  return v;
}

Matrix random_matrix(Index n, std::uint64_t seed)
{
  Vector const v = random_vector(n * n, seed);
  return Eigen::Map<Matrix const>(v.data(), n, n);
}

template <void (*Kernel)(Matrix const &, Vector const &, Vector &)>
void BM_col_dots(benchmark::State &state)
{
  Index const n = state.range(0);
  Matrix const M = random_matrix(n, 1);
  Vector const x = random_vector(n, 2);
  Vector out(n);
  for (auto _ : state) {
    Kernel(M, x, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * n * n);
}

template <void (*Kernel)(kernels::SparseRowMajor const &, Vector const &, Vector &)>
void BM_csr_matvec(benchmark::State &state)
{
  Index const grid = state.range(0);
  BoxQP const qp = gen_poisson_qp(grid);
  auto const &A = qp.A->sparse_data();
  Vector const x = random_vector(A.cols(), 3);
  Vector out(A.rows());
  for (auto _ : state) {
    Kernel(A, x, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * A.nonZeros());
}

template <void (*Kernel)(Vector const &, double, Vector &)>
void BM_soft_threshold(benchmark::State &state)
{
  Index const n = state.range(0);
  Vector const x = random_vector(n, 4);
  Vector out(n);
  for (auto _ : state) {
    Kernel(x, 0.5, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * n);
}

template <void (*Kernel)(Vector const &, Vector const &, Vector const &, Vector &)>
void BM_box_project(benchmark::State &state)
{
  Index const n = state.range(0);
  Vector const x = random_vector(n, 5);
  Vector const lo = Vector::Constant(n, -1.0);
  Vector const hi = Vector::Constant(n, 1.0);
  Vector out(n);
  for (auto _ : state) {
    Kernel(x, lo, hi, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * n);
}

} // namespace

BENCHMARK(BM_col_dots<kernels::serial::col_dots>)->Name("col_dots/serial")->Arg(100)->Arg(400)->Arg(1600);
BENCHMARK(BM_col_dots<kernels::omp::col_dots>)->Name("col_dots/omp")->Arg(100)->Arg(400)->Arg(1600);
BENCHMARK(BM_csr_matvec<kernels::serial::csr_matvec>)->Name("csr_matvec/serial")->Arg(33)->Arg(129)->Arg(513);
BENCHMARK(BM_csr_matvec<kernels::omp::csr_matvec>)->Name("csr_matvec/omp")->Arg(33)->Arg(129)->Arg(513);
BENCHMARK(BM_soft_threshold<kernels::serial::soft_threshold>)->Name("soft_threshold/serial")->Arg(1 << 12)->Arg(1 << 20);
BENCHMARK(BM_soft_threshold<kernels::omp::soft_threshold>)->Name("soft_threshold/omp")->Arg(1 << 12)->Arg(1 << 20);
BENCHMARK(BM_box_project<kernels::serial::box_project>)->Name("box_project/serial")->Arg(1 << 12)->Arg(1 << 20);
BENCHMARK(BM_box_project<kernels::omp::box_project>)->Name("box_project/omp")->Arg(1 << 12)->Arg(1 << 20);

int main(int argc, char **argv)
{
  benchmark::Initialize(&argc, argv);
  benchmark::AddCustomContext("openmp", kernels::openmp_enabled() ? "on" : "off");
  benchmark::AddCustomContext("omp_threads", std::to_string(kernels::max_threads()));
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
