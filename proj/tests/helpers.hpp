#pragma once

#include "iaprox/problems.hpp"

#include <Eigen/Eigenvalues>

#include <random>

namespace iaprox::test {

inline Vector randn(Index n, std::mt19937_64 &rng, double scale = 1.0)
{
  std::normal_distribution<double> normal(0.0, scale);
  Vector v(n);
  for (Index i = 0; i < n; ++i) {
    v[i] = normal(rng);
  }
  return v;
}

inline Vector vec(std::initializer_list<double> xs)
{
  Vector v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) {
    v[i++] = x;
  }
  return v;
}

inline double max_eig(Matrix const &A)
{
  return Eigen::SelfAdjointEigenSolver<Matrix>(A, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
}

inline double min_eig(Matrix const &A)
{
  return Eigen::SelfAdjointEigenSolver<Matrix>(A, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
}

// f(x) = 1/2 d (x - c)^2 in one dimension, g = 0.
inline CompositeProblem scalar_quadratic(double d = 1.0, double c = 0.0)
{
  auto A = std::make_shared<SymMatrix const>(SymMatrix::dense(Matrix::Constant(1, 1, d)));
  return make_unconstrained_quadratic(A, Vector::Constant(1, d * c), d, d);
}

} // namespace iaprox::test
