#pragma once

// Problem instances for f = h + g: smooth and nonsmooth oracles, closed-form
// proximal building blocks, and the quadratic-program / Lasso generators.

#include "iaprox/kernels.hpp"
#include "iaprox/types.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>

namespace iaprox {

using ScalarFn = std::function<double(Vector const &)>;
using VectorFn = std::function<Vector(Vector const &)>;
using ProxFn = std::function<Vector(double lambda, Vector const &x)>;
using DiffFn = std::function<double(Vector const &x, Vector const &y)>;

/// h with an L-Lipschitz gradient and strong convexity modulus mu.
struct SmoothOracle
{
  ScalarFn eval;
  VectorFn grad;
  double mu = 0.0;
  double lip = 0.0;
  /// Optional h(x) - h(y) evaluated without cancellation.
  DiffFn diff;

  double difference(Vector const &x, Vector const &y) const;
};

/// A closed convex function given through its value and proximal map.
///
/// `eval` may return +inf outside the domain. `conjugate` is empty when the
/// Fenchel conjugate has no closed form. `prox_factory`, when set, returns a
/// prox for one fixed lambda with any factorization work done up front.
struct NonsmoothOracle
{
  ScalarFn eval;
  ProxFn prox;
  ScalarFn conjugate;
  DiffFn diff;
  std::function<VectorFn(double lambda)> prox_factory;
  /// dist(-q, subdifferential of f at w); empty when not available.
  DiffFn subdiff_dist;
  double mu = 0.0;
  /// False when eval can be +inf (indicator parts).
  bool full_domain = true;

  bool has_prox() const { return static_cast<bool>(prox); }
  bool has_conjugate() const { return static_cast<bool>(conjugate); }
  double difference(Vector const &x, Vector const &y) const;
  VectorFn prox_for(double lambda) const;
};

struct Reference
{
  double f_star = 0.0;
  Vector x_star;
};

/// f = h + g on R^dim.
struct CompositeProblem
{
  std::string name;
  SmoothOracle h;
  NonsmoothOracle g;
  Index dim = 0;
  std::optional<Reference> reference;

  /// Closed-form prox of the whole f; empty when only g's prox is known.
  ProxFn full_prox;
  std::function<VectorFn(double lambda)> full_prox_factory;
  /// Returns an exact minimizer when one is cheaply available.
  std::function<std::optional<Vector>()> exact_solve;
  /// Refines a near-optimal point to an exact minimizer (active-set solve).
  std::function<std::optional<Vector>(Vector const &)> polish;

  double value(Vector const &x) const { return h.eval(x) + g.eval(x); }
  /// f(x) - f(y), summing the oracles' cancellation-free differences.
  double difference(Vector const &x, Vector const &y) const;
  /// f(x) - f*; requires a reference.
  double gap(Vector const &x) const;
  /// f viewed as a single prox-able function (requires full_prox).
  NonsmoothOracle whole() const;
  /// Installs x_star and f_star = f(x_star).
  void set_reference(Vector x_star);
};

/// Symmetric positive semidefinite matrix stored dense or as sparse CSR.
class SymMatrix
{
public:
  static SymMatrix dense(Matrix A);
  static SymMatrix sparse(kernels::SparseRowMajor A);

  Index size() const;
  bool is_sparse() const { return std::holds_alternative<kernels::SparseRowMajor>(data_); }
  Vector apply(Vector const &x) const;
  double trace() const;
  Matrix to_dense() const;
  Matrix const &dense_data() const { return std::get<Matrix>(data_); }
  kernels::SparseRowMajor const &sparse_data() const
  {
    return std::get<kernels::SparseRowMajor>(data_);
  }

private:
  explicit SymMatrix(std::variant<Matrix, kernels::SparseRowMajor> data)
    : data_{std::move(data)}
  {
  }
  std::variant<Matrix, kernels::SparseRowMajor> data_;
};

/// min 1/2 x'Ax - b'x  subject to  l <= x <= u.
struct BoxQP
{
  std::shared_ptr<SymMatrix const> A;
  Vector b, l, u;
  double mu = 0.0;
  double lip = 0.0;
};

struct BoxBounds
{
  double lower = -1.0;
  double upper = 1.0;
};

struct LassoData
{
  std::shared_ptr<Matrix const> A; // m x n
  std::shared_ptr<Matrix const> At; // n x m, kept for row-parallel A x
  Vector b;
  Vector y_true;
  double rho = 0.5;
};

inline constexpr double kLassoRho = 0.5;

// Closed-form building blocks.
Vector soft_threshold(Vector const &x, double theta);
Vector box_project(Vector const &x, Vector const &l, Vector const &u);
/// prox of lambda*(1/2 x'Ax - b'x) at w: solves (I + lambda A) x = w + lambda b.
Vector quad_prox(SymMatrix const &A, Vector const &b, double lambda, Vector const &w);

/// Factorized (I + lambda A) for repeated quad_prox calls at one lambda.
class QuadProxSolver
{
public:
  QuadProxSolver(std::shared_ptr<SymMatrix const> A, Vector b, double lambda);
  Vector operator()(Vector const &w) const;
  double lambda() const { return lambda_; }

private:
  struct Impl;
  std::shared_ptr<Impl const> impl_;
  double lambda_;
};

double lipschitz_trace(Matrix const &A);
double lipschitz_trace(SymMatrix const &A);
/// Trace of A'A (the Frobenius norm squared) without forming the Gram matrix.
double lipschitz_trace_gram(Matrix const &A);

/// Eigenvalue (i, j), 1-based, of the m^2 x m^2 five-point Laplacian.
double poisson_eigenvalue(Index m, Index i, Index j);

BoxQP gen_random_qp(Index n, std::uint64_t seed, BoxBounds bounds = {});
BoxQP gen_poisson_qp(Index m, BoxBounds bounds = {});
LassoData gen_lasso(Index m, Index n, Index s, double noise, std::uint64_t seed);
LassoData lasso_from(Matrix A, Vector b, double rho = kLassoRho);

// Nonsmooth parts.
NonsmoothOracle zero_function();
NonsmoothOracle l1_norm(double rho);
NonsmoothOracle box_indicator(Vector l, Vector u);

// Smooth parts.
SmoothOracle quadratic_oracle(std::shared_ptr<SymMatrix const> A, Vector b, double mu, double lip);
SmoothOracle least_squares_oracle(LassoData const &data, double lip);

// Assembled problems.
CompositeProblem make_box_qp_problem(BoxQP const &qp);
/// g = 0; full prox is quad_prox; reference from a direct solve when A is nonsingular.
CompositeProblem make_unconstrained_quadratic(std::shared_ptr<SymMatrix const> A, Vector b,
                                              double mu, double lip);
CompositeProblem make_lasso_problem(LassoData const &data);
/// h = 1/2 sum d_i (x_i - c_i)^2, g = rho ||x||_1, with closed-form prox of f
/// and exact minimizer. mu = min d, L = max d.
CompositeProblem make_separable_l1(Vector d, Vector c, double rho);

} // namespace iaprox
