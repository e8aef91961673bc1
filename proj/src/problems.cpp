#include "iaprox/problems.hpp"

#include <Eigen/Cholesky>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <vector>

namespace iaprox {

namespace {

using SparseCol = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

double norm1(Vector const &x) { return x.lpNorm<1>(); }

bool inside_box(Vector const &x, Vector const &l, Vector const &u)
{
  for (Index i = 0; i < x.size(); ++i) {
    if (x[i] < l[i] || x[i] > u[i]) {
      return false;
    }
  }
  return true;
}

Matrix principal_submatrix(Matrix const &A, std::vector<Index> const &rows,
                           std::vector<Index> const &cols)
{
  Matrix S(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      S(static_cast<Index>(i), static_cast<Index>(j)) = A(rows[i], cols[j]);
    }
  }
  return S;
}

// Largest dense problem the active-set polish is willing to factor.
constexpr Index kPolishMaxDim = 4096;

} // namespace

double SmoothOracle::difference(Vector const &x, Vector const &y) const
{
  return diff ? diff(x, y) : eval(x) - eval(y);
}

double NonsmoothOracle::difference(Vector const &x, Vector const &y) const
{
  if (diff) {
    return diff(x, y);
  }
  double const fx = eval(x);
  double const fy = eval(y);
  if (std::isinf(fx)) {
    return fx;
  }
  return fx - fy;
}

VectorFn NonsmoothOracle::prox_for(double lambda) const
{
  if (prox_factory) {
    return prox_factory(lambda);
  }
  if (!prox) {
    throw std::logic_error("prox_for: oracle has no proximal map");
  }
  return [p = prox, lambda](Vector const &x) { return p(lambda, x); };
}

double CompositeProblem::difference(Vector const &x, Vector const &y) const
{
  double const dg = g.difference(x, y);
  if (std::isinf(dg)) {
    return dg;
  }
  return h.difference(x, y) + dg;
}

double CompositeProblem::gap(Vector const &x) const
{
  if (!reference) {
    throw std::logic_error("gap: problem '" + name + "' has no reference solution");
  }
  return difference(x, reference->x_star);
}

NonsmoothOracle CompositeProblem::whole() const
{
  if (!full_prox) {
    throw std::logic_error("whole: problem '" + name + "' has no closed-form prox of f");
  }
  NonsmoothOracle f;
  f.eval = [h = h, g = g](Vector const &x) { return h.eval(x) + g.eval(x); };
  f.prox = full_prox;
  f.prox_factory = full_prox_factory;
  f.diff = [h = h, g = g](Vector const &x, Vector const &y) {
    double const dg = g.difference(x, y);
    return std::isinf(dg) ? dg : h.difference(x, y) + dg;
  };
  if (g.subdiff_dist) {
    f.subdiff_dist = [h = h, g = g](Vector const &w, Vector const &q) {
      return g.subdiff_dist(w, q + h.grad(w));
    };
  }
  f.mu = h.mu + g.mu;
  f.full_domain = g.full_domain;
  return f;
}

void CompositeProblem::set_reference(Vector x_star)
{
  double const f_star = value(x_star);
  reference = Reference{f_star, std::move(x_star)};
}

// ---------------------------------------------------------------------------
// SymMatrix

SymMatrix SymMatrix::dense(Matrix A)
{
  if (A.rows() != A.cols()) {
    throw std::invalid_argument("SymMatrix: matrix must be square");
  }
  return SymMatrix{std::move(A)};
}

SymMatrix SymMatrix::sparse(kernels::SparseRowMajor A)
{
  if (A.rows() != A.cols()) {
    throw std::invalid_argument("SymMatrix: matrix must be square");
  }
  A.makeCompressed();
  return SymMatrix{std::move(A)};
}

Index SymMatrix::size() const
{
  return std::visit([](auto const &m) -> Index { return m.rows(); }, data_);
}

Vector SymMatrix::apply(Vector const &x) const
{
  if (is_sparse()) {
    return kernels::csr_matvec(sparse_data(), x);
  }
  return kernels::col_dots(dense_data(), x);
}

double SymMatrix::trace() const
{
  if (is_sparse()) {
    auto const &A = sparse_data();
    double t = 0.0;
    for (Index i = 0; i < A.outerSize(); ++i) {
      for (kernels::SparseRowMajor::InnerIterator it(A, i); it; ++it) {
        if (it.col() == i) {
          t += it.value();
        }
      }
    }
    return t;
  }
  return dense_data().trace();
}

Matrix SymMatrix::to_dense() const
{
  if (is_sparse()) {
    return Matrix(sparse_data());
  }
  return dense_data();
}

// ---------------------------------------------------------------------------
// Proximal building blocks

Vector soft_threshold(Vector const &x, double theta) { return kernels::soft_threshold(x, theta); }

Vector box_project(Vector const &x, Vector const &l, Vector const &u)
{
  return kernels::box_project(x, l, u);
}

struct QuadProxSolver::Impl
{
  std::shared_ptr<SymMatrix const> A;
  Vector b;
  double lambda = 0.0;
  std::optional<Eigen::LLT<Matrix>> dense_llt;
  std::shared_ptr<Eigen::SimplicialLLT<SparseCol>> sparse_llt;
  Matrix dense_system;
  SparseCol sparse_system;

  Vector apply_system(Vector const &x) const { return x + lambda * A->apply(x); }

  Vector factor_solve(Vector const &rhs) const
  {
    if (dense_llt) {
      return dense_llt->solve(rhs);
    }
    return sparse_llt->solve(rhs);
  }

  bool factored() const { return dense_llt.has_value() || sparse_llt != nullptr; }

  Vector cg_solve(Vector const &rhs, Vector const &guess) const
  {
    if (A->is_sparse()) {
      Eigen::ConjugateGradient<SparseCol, Eigen::Lower | Eigen::Upper> cg(sparse_system);
      cg.setTolerance(1e-12);
      cg.setMaxIterations(10 * sparse_system.rows() + 100);
      return cg.solveWithGuess(rhs, guess);
    }
    Eigen::ConjugateGradient<Matrix, Eigen::Lower | Eigen::Upper> cg(dense_system);
    cg.setTolerance(1e-12);
    cg.setMaxIterations(10 * dense_system.rows() + 100);
    return cg.solveWithGuess(rhs, guess);
  }

  Vector solve(Vector const &w) const
  {
    Vector const rhs = w + lambda * b;
    double const scale = 1.0 + rhs.norm();
    Vector x;
    if (factored()) {
      x = factor_solve(rhs);
      Vector r = rhs - apply_system(x);
      if (r.norm() > 1e-13 * scale) {
        x += factor_solve(r);
      }
    } else {
      x = Vector::Zero(rhs.size());
    }
    double res = (rhs - apply_system(x)).norm();
    if (!factored() || res > 1e-12 * scale) {
      x = cg_solve(rhs, x);
      res = (rhs - apply_system(x)).norm();
    }
    if (!std::isfinite(res) || res > 1e-9 * scale) {
      throw NumericalError("quad_prox: linear solve did not converge", res);
    }
    return x;
  }
};

QuadProxSolver::QuadProxSolver(std::shared_ptr<SymMatrix const> A, Vector b, double lambda)
  : lambda_{lambda}
{
  if (!(lambda > 0.0)) {
    throw std::invalid_argument("quad_prox: lambda must be positive");
  }
  if (b.size() != A->size()) {
    throw std::invalid_argument("quad_prox: dimension mismatch");
  }
  auto impl = std::make_shared<Impl>();
  impl->A = std::move(A);
  impl->b = std::move(b);
  impl->lambda = lambda;
  Index const n = impl->A->size();
  if (impl->A->is_sparse()) {
    SparseCol I(n, n);
    I.setIdentity();
    impl->sparse_system = I + lambda * SparseCol(impl->A->sparse_data());
    auto llt = std::make_shared<Eigen::SimplicialLLT<SparseCol>>(impl->sparse_system);
    if (llt->info() == Eigen::Success) {
      impl->sparse_llt = std::move(llt);
    }
  } else {
    impl->dense_system = Matrix::Identity(n, n) + lambda * impl->A->dense_data();
    Eigen::LLT<Matrix> llt(impl->dense_system);
    if (llt.info() == Eigen::Success) {
      impl->dense_llt = std::move(llt);
    }
  }
  impl_ = std::move(impl);
}

Vector QuadProxSolver::operator()(Vector const &w) const
{
  if (w.size() != impl_->A->size()) {
    throw std::invalid_argument("quad_prox: dimension mismatch");
  }
  return impl_->solve(w);
}

Vector quad_prox(SymMatrix const &A, Vector const &b, double lambda, Vector const &w)
{
  // Non-owning view: the solver does not outlive this call.
  std::shared_ptr<SymMatrix const> view(&A, [](SymMatrix const *) {});
  return QuadProxSolver(view, b, lambda)(w);
}

double lipschitz_trace(Matrix const &A) { return A.trace(); }
double lipschitz_trace(SymMatrix const &A) { return A.trace(); }
double lipschitz_trace_gram(Matrix const &A) { return A.squaredNorm(); }

double poisson_eigenvalue(Index m, Index i, Index j)
{
  double const h = std::numbers::pi / static_cast<double>(m + 1);
  return 4.0 - 2.0 * std::cos(static_cast<double>(i) * h) - 2.0 * std::cos(static_cast<double>(j) * h);
}

// ---------------------------------------------------------------------------
// Generators

BoxQP gen_random_qp(Index n, std::uint64_t seed, BoxBounds bounds)
{
  if (n < 1) {
    throw std::invalid_argument("gen_random_qp: n must be positive");
  }
  if (bounds.lower > bounds.upper) {
    throw std::invalid_argument("gen_random_qp: lower bound exceeds upper bound");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Matrix Q(n, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) {
      Q(i, j) = unif(rng);
    }
  }
  Vector b(n);
  for (Index i = 0; i < n; ++i) {
    b[i] = unif(rng);
  }
  Matrix A = Q.transpose() * Q;
  A = 0.5 * (A + A.transpose()).eval();

  BoxQP qp;
  qp.A = std::make_shared<SymMatrix const>(SymMatrix::dense(std::move(A)));
  qp.b = std::move(b);
  qp.l = Vector::Constant(n, bounds.lower);
  qp.u = Vector::Constant(n, bounds.upper);
  qp.mu = 0.0;
  qp.lip = lipschitz_trace(*qp.A);
  return qp;
}

BoxQP gen_poisson_qp(Index m, BoxBounds bounds)
{
  if (m < 2) {
    throw std::invalid_argument("gen_poisson_qp: grid must be at least 2");
  }
  if (bounds.lower > bounds.upper) {
    throw std::invalid_argument("gen_poisson_qp: lower bound exceeds upper bound");
  }
  Index const n = m * m;
  std::vector<Eigen::Triplet<double, int>> entries;
  entries.reserve(static_cast<std::size_t>(5 * n));
  auto id = [m](Index r, Index c) { return static_cast<int>(r * m + c); };
  for (Index r = 0; r < m; ++r) {
    for (Index c = 0; c < m; ++c) {
      int const k = id(r, c);
      entries.emplace_back(k, k, 4.0);
      if (r > 0) entries.emplace_back(k, id(r - 1, c), -1.0);
      if (r + 1 < m) entries.emplace_back(k, id(r + 1, c), -1.0);
      if (c > 0) entries.emplace_back(k, id(r, c - 1), -1.0);
      if (c + 1 < m) entries.emplace_back(k, id(r, c + 1), -1.0);
    }
  }
  kernels::SparseRowMajor A(n, n);
  A.setFromTriplets(entries.begin(), entries.end());

  double const h = 1.0 / static_cast<double>(m + 1);
  BoxQP qp;
  qp.A = std::make_shared<SymMatrix const>(SymMatrix::sparse(std::move(A)));
  qp.b = Vector::Constant(n, h * h);
  qp.l = Vector::Constant(n, bounds.lower);
  qp.u = Vector::Constant(n, bounds.upper);
  qp.mu = poisson_eigenvalue(m, 1, 1);
  qp.lip = poisson_eigenvalue(m, m, m);
  return qp;
}

LassoData lasso_from(Matrix A, Vector b, double rho)
{
  if (A.rows() != b.size()) {
    throw std::invalid_argument("lasso_from: dimension mismatch");
  }
  if (!(rho > 0.0)) {
    throw std::invalid_argument("lasso_from: rho must be positive");
  }
  LassoData data;
  data.At = std::make_shared<Matrix const>(A.transpose());
  data.A = std::make_shared<Matrix const>(std::move(A));
  data.b = std::move(b);
  data.rho = rho;
  return data;
}

LassoData gen_lasso(Index m, Index n, Index s, double noise, std::uint64_t seed)
{
  if (m < 1 || n < 1 || s < 1 || s > n) {
    throw std::invalid_argument("gen_lasso: require m >= 1 and 1 <= s <= n");
  }
  if (noise < 0.0) {
    throw std::invalid_argument("gen_lasso: noise must be nonnegative");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix A(m, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < m; ++i) {
      A(i, j) = normal(rng);
    }
  }
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  for (Index i = 0; i < s; ++i) {
    std::uniform_int_distribution<Index> pick(i, n - 1);
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(pick(rng))]);
  }
  Vector y = Vector::Zero(n);
  for (Index i = 0; i < s; ++i) {
    y[perm[static_cast<std::size_t>(i)]] = normal(rng);
  }
  Vector e(m);
  for (Index i = 0; i < m; ++i) {
    e[i] = noise * normal(rng);
  }
  Vector b = A * y + e;
  LassoData data = lasso_from(std::move(A), std::move(b), kLassoRho);
  data.y_true = std::move(y);
  return data;
}

// ---------------------------------------------------------------------------
// Oracles

NonsmoothOracle zero_function()
{
  NonsmoothOracle g;
  g.eval = [](Vector const &) { return 0.0; };
  g.prox = [](double, Vector const &x) { return x; };
  g.conjugate = [](Vector const &p) { return p.squaredNorm() == 0.0 ? 0.0 : kInf; };
  g.diff = [](Vector const &, Vector const &) { return 0.0; };
  g.subdiff_dist = [](Vector const &, Vector const &q) { return q.norm(); };
  return g;
}

NonsmoothOracle l1_norm(double rho)
{
  if (rho < 0.0) {
    throw std::invalid_argument("l1_norm: rho must be nonnegative");
  }
  NonsmoothOracle g;
  g.eval = [rho](Vector const &x) { return rho * norm1(x); };
  g.prox = [rho](double lambda, Vector const &x) { return soft_threshold(x, lambda * rho); };
  g.conjugate = [rho](Vector const &p) {
    return p.lpNorm<Eigen::Infinity>() <= rho * (1.0 + 1e-12) ? 0.0 : kInf;
  };
  g.diff = [rho](Vector const &x, Vector const &y) {
    double s = 0.0;
    for (Index i = 0; i < x.size(); ++i) {
      s += std::abs(x[i]) - std::abs(y[i]);
    }
    return rho * s;
  };
  g.subdiff_dist = [rho](Vector const &w, Vector const &q) {
    double s = 0.0;
    for (Index i = 0; i < w.size(); ++i) {
      double const r = w[i] != 0.0 ? q[i] + std::copysign(rho, w[i]) : std::max(std::abs(q[i]) - rho, 0.0);
      s += r * r;
    }
    return std::sqrt(s);
  };
  return g;
}

NonsmoothOracle box_indicator(Vector l, Vector u)
{
  if (l.size() != u.size()) {
    throw std::invalid_argument("box_indicator: dimension mismatch");
  }
  for (Index i = 0; i < l.size(); ++i) {
    if (l[i] > u[i]) {
      throw std::invalid_argument("box_indicator: lower bound exceeds upper bound");
    }
  }
  auto lo = std::make_shared<Vector const>(std::move(l));
  auto hi = std::make_shared<Vector const>(std::move(u));
  NonsmoothOracle g;
  g.full_domain = false;
  g.eval = [lo, hi](Vector const &x) { return inside_box(x, *lo, *hi) ? 0.0 : kInf; };
  g.prox = [lo, hi](double, Vector const &x) { return box_project(x, *lo, *hi); };
  g.conjugate = [lo, hi](Vector const &p) {
    double s = 0.0;
    for (Index i = 0; i < p.size(); ++i) {
      s += std::max((*lo)[i] * p[i], (*hi)[i] * p[i]);
    }
    return s;
  };
  g.diff = [lo, hi](Vector const &x, Vector const &y) {
    if (!inside_box(x, *lo, *hi)) {
      return kInf;
    }
    return inside_box(y, *lo, *hi) ? 0.0 : -kInf;
  };
  // Normal cone: (-inf, 0] at a lower face, [0, inf) at an upper face.
  g.subdiff_dist = [lo, hi](Vector const &w, Vector const &q) {
    if (!inside_box(w, *lo, *hi)) {
      return kInf;
    }
    double s = 0.0;
    for (Index i = 0; i < w.size(); ++i) {
      bool const at_lo = w[i] == (*lo)[i];
      bool const at_hi = w[i] == (*hi)[i];
      double r = q[i];
      if (at_lo && at_hi) {
        r = 0.0;
      } else if (at_lo) {
        r = std::min(q[i], 0.0);
      } else if (at_hi) {
        r = std::max(q[i], 0.0);
      }
      s += r * r;
    }
    return std::sqrt(s);
  };
  return g;
}

SmoothOracle quadratic_oracle(std::shared_ptr<SymMatrix const> A, Vector b, double mu, double lip)
{
  auto rhs = std::make_shared<Vector const>(std::move(b));
  SmoothOracle h;
  h.eval = [A, rhs](Vector const &x) { return 0.5 * x.dot(A->apply(x)) - rhs->dot(x); };
  h.grad = [A, rhs](Vector const &x) -> Vector { return A->apply(x) - *rhs; };
  h.diff = [A, rhs](Vector const &x, Vector const &y) {
    Vector const d = x - y;
    return 0.5 * d.dot(A->apply(d)) + (A->apply(y) - *rhs).dot(d);
  };
  h.mu = mu;
  h.lip = lip;
  return h;
}

SmoothOracle least_squares_oracle(LassoData const &data, double lip)
{
  auto A = data.A;
  auto At = data.At;
  auto b = std::make_shared<Vector const>(data.b);
  // A x = At^T x, A^T r = A^T r: both are column-dot kernels.
  auto Ax = [At](Vector const &x) { return kernels::col_dots(*At, x); };
  auto Atr = [A](Vector const &r) { return kernels::col_dots(*A, r); };
  SmoothOracle h;
  h.eval = [Ax, b](Vector const &x) { return 0.5 * (Ax(x) - *b).squaredNorm(); };
  h.grad = [Ax, Atr, b](Vector const &x) -> Vector { return Atr(Ax(x) - *b); };
  h.diff = [Ax, b](Vector const &x, Vector const &y) {
    Vector const Ad = Ax(x - y);
    return 0.5 * Ad.squaredNorm() + (Ax(y) - *b).dot(Ad);
  };
  h.mu = 0.0;
  h.lip = lip;
  return h;
}

// ---------------------------------------------------------------------------
// Assembled problems

namespace {

// Primal-dual active-set iteration for the box QP started from a near-optimal
// point. Returns a point satisfying KKT to working precision, or nothing.
std::optional<Vector> polish_box_qp(BoxQP const &qp, Vector const &guess)
{
  Index const n = qp.A->size();
  if (n > kPolishMaxDim) {
    return std::nullopt;
  }
  Matrix const A = qp.A->to_dense();
  enum class State { Free, Lower, Upper };
  std::vector<State> state(static_cast<std::size_t>(n), State::Free);
  Vector grad = A * guess - qp.b;
  for (Index i = 0; i < n; ++i) {
    if (guess[i] <= qp.l[i] && grad[i] >= 0.0) {
      state[static_cast<std::size_t>(i)] = State::Lower;
    } else if (guess[i] >= qp.u[i] && grad[i] <= 0.0) {
      state[static_cast<std::size_t>(i)] = State::Upper;
    }
  }

  double const scale = 1.0 + qp.b.lpNorm<Eigen::Infinity>() + A.lpNorm<Eigen::Infinity>();
  Vector x = guess;
  for (int iter = 0; iter < 100; ++iter) {
    std::vector<Index> freeset, bound;
    for (Index i = 0; i < n; ++i) {
      auto const s = state[static_cast<std::size_t>(i)];
      if (s == State::Free) {
        freeset.push_back(i);
      } else {
        bound.push_back(i);
        x[i] = s == State::Lower ? qp.l[i] : qp.u[i];
      }
    }
    if (!freeset.empty()) {
      Matrix const AFF = principal_submatrix(A, freeset, freeset);
      Vector rhs(static_cast<Index>(freeset.size()));
      for (std::size_t i = 0; i < freeset.size(); ++i) {
        double r = qp.b[freeset[i]];
        for (Index j : bound) {
          r -= A(freeset[i], j) * x[j];
        }
        rhs[static_cast<Index>(i)] = r;
      }
      Eigen::LLT<Matrix> llt(AFF);
      if (llt.info() != Eigen::Success) {
        return std::nullopt;
      }
      Vector const xF = llt.solve(rhs);
      for (std::size_t i = 0; i < freeset.size(); ++i) {
        x[freeset[i]] = xF[static_cast<Index>(i)];
      }
    }
    grad = A * x - qp.b;

    bool changed = false;
    for (Index i = 0; i < n; ++i) {
      auto &s = state[static_cast<std::size_t>(i)];
      State next = State::Free;
      double const nu_lo = s == State::Lower ? grad[i] : 0.0;
      double const nu_hi = s == State::Upper ? -grad[i] : 0.0;
      if (nu_lo + (qp.l[i] - x[i]) > 0.0) {
        next = State::Lower;
      } else if (nu_hi + (x[i] - qp.u[i]) > 0.0) {
        next = State::Upper;
      }
      changed = changed || next != s;
      s = next;
    }
    if (!changed) {
      double const tol = 1e-9 * scale;
      for (Index i = 0; i < n; ++i) {
        auto const s = state[static_cast<std::size_t>(i)];
        if (s == State::Free && (std::abs(grad[i]) > tol || x[i] < qp.l[i] - tol || x[i] > qp.u[i] + tol)) {
          return std::nullopt;
        }
        if ((s == State::Lower && grad[i] < -tol) || (s == State::Upper && grad[i] > tol)) {
          return std::nullopt;
        }
      }
      return box_project(x, qp.l, qp.u);
    }
  }
  return std::nullopt;
}

// Support/sign refinement for the Lasso: on a fixed support S with signs s,
// the minimizer solves A_S'A_S x_S = A_S'b - rho s.
std::optional<Vector> polish_lasso(LassoData const &data, Vector const &guess)
{
  Matrix const &A = *data.A;
  Index const n = A.cols();
  Vector x = guess;
  double const rho = data.rho;
  double const tol = 1e-9 * (1.0 + rho);
  for (int iter = 0; iter < 50; ++iter) {
    std::vector<Index> support;
    for (Index i = 0; i < n; ++i) {
      if (x[i] != 0.0) {
        support.push_back(i);
      }
    }
    if (static_cast<Index>(support.size()) > A.rows()) {
      return std::nullopt;
    }
    Vector next = Vector::Zero(n);
    if (!support.empty()) {
      Matrix AS(A.rows(), static_cast<Index>(support.size()));
      Vector sgn(static_cast<Index>(support.size()));
      for (std::size_t k = 0; k < support.size(); ++k) {
        AS.col(static_cast<Index>(k)) = A.col(support[k]);
        sgn[static_cast<Index>(k)] = x[support[k]] > 0.0 ? 1.0 : -1.0;
      }
      Eigen::LLT<Matrix> llt(AS.transpose() * AS);
      if (llt.info() != Eigen::Success) {
        return std::nullopt;
      }
      Vector const xs = llt.solve(AS.transpose() * data.b - rho * sgn);
      bool flipped = false;
      for (std::size_t k = 0; k < support.size(); ++k) {
        double const v = xs[static_cast<Index>(k)];
        if (v * sgn[static_cast<Index>(k)] <= 0.0) {
          flipped = true;
        } else {
          next[support[k]] = v;
        }
      }
      if (flipped) {
        x = next;
        continue;
      }
    }
    Vector const corr = A.transpose() * (A * next - data.b);
    Index worst = -1;
    double worst_val = rho + tol;
    for (Index j = 0; j < n; ++j) {
      if (next[j] == 0.0 && std::abs(corr[j]) > worst_val) {
        worst = j;
        worst_val = std::abs(corr[j]);
      }
    }
    if (worst < 0) {
      for (Index j = 0; j < n; ++j) {
        if (next[j] != 0.0 && std::abs(corr[j] + rho * (next[j] > 0.0 ? 1.0 : -1.0)) > tol * (1.0 + std::abs(corr[j]))) {
          return std::nullopt;
        }
      }
      return next;
    }
    // Enter the most violating coordinate with the sign that reduces f.
    next[worst] = corr[worst] > 0.0 ? -1e-300 : 1e-300;
    x = next;
  }
  return std::nullopt;
}

} // namespace

CompositeProblem make_box_qp_problem(BoxQP const &qp)
{
  CompositeProblem p;
  p.name = qp.A->is_sparse() ? "poisson_qp" : "box_qp";
  p.dim = qp.A->size();
  p.h = quadratic_oracle(qp.A, qp.b, qp.mu, qp.lip);
  p.g = box_indicator(qp.l, qp.u);
  p.exact_solve = [qp]() -> std::optional<Vector> {
    try {
      // lambda -> infinity limit of the prox is the unconstrained solve; use
      // a direct factorization of A instead.
      if (qp.A->is_sparse()) {
        Eigen::SimplicialLLT<SparseCol> llt{SparseCol(qp.A->sparse_data())};
        if (llt.info() != Eigen::Success) return std::nullopt;
        Vector x = llt.solve(qp.b);
        double const res = (qp.A->apply(x) - qp.b).norm();
        if (res > 1e-10 * (1.0 + qp.b.norm()) || !inside_box(x, qp.l, qp.u)) return std::nullopt;
        return x;
      }
      Eigen::LLT<Matrix> llt(qp.A->dense_data());
      if (llt.info() != Eigen::Success) return std::nullopt;
      Vector x = llt.solve(qp.b);
      double const res = (qp.A->apply(x) - qp.b).norm();
      if (res > 1e-10 * (1.0 + qp.b.norm()) || !inside_box(x, qp.l, qp.u)) return std::nullopt;
      return x;
    } catch (std::exception const &) {
      return std::nullopt;
    }
  };
  p.polish = [qp](Vector const &guess) { return polish_box_qp(qp, guess); };
  return p;
}

CompositeProblem make_unconstrained_quadratic(std::shared_ptr<SymMatrix const> A, Vector b,
                                              double mu, double lip)
{
  if (b.size() != A->size()) {
    throw std::invalid_argument("make_unconstrained_quadratic: dimension mismatch");
  }
  CompositeProblem p;
  p.name = "quadratic";
  p.dim = A->size();
  p.h = quadratic_oracle(A, b, mu, lip);
  p.g = zero_function();
  p.full_prox = [A, b](double lambda, Vector const &w) { return quad_prox(*A, b, lambda, w); };
  p.full_prox_factory = [A, b](double lambda) -> VectorFn {
    QuadProxSolver solver(A, b, lambda);
    return [solver](Vector const &w) { return solver(w); };
  };
  p.exact_solve = [A, b]() -> std::optional<Vector> {
    Matrix const M = A->to_dense();
    Eigen::LLT<Matrix> llt(M);
    if (llt.info() != Eigen::Success) return std::nullopt;
    Vector x = llt.solve(b);
    x += llt.solve(b - M * x);
    if ((M * x - b).norm() > 1e-8 * (1.0 + b.norm())) return std::nullopt;
    return x;
  };
  if (auto x = p.exact_solve()) {
    p.set_reference(std::move(*x));
  }
  return p;
}

CompositeProblem make_lasso_problem(LassoData const &data)
{
  CompositeProblem p;
  p.name = "lasso";
  p.dim = data.A->cols();
  p.h = least_squares_oracle(data, lipschitz_trace_gram(*data.A));
  p.g = l1_norm(data.rho);
  p.polish = [data](Vector const &guess) { return polish_lasso(data, guess); };
  return p;
}

CompositeProblem make_separable_l1(Vector d, Vector c, double rho)
{
  if (d.size() != c.size() || d.size() == 0) {
    throw std::invalid_argument("make_separable_l1: dimension mismatch");
  }
  if (d.minCoeff() <= 0.0 || rho < 0.0) {
    throw std::invalid_argument("make_separable_l1: need d > 0 and rho >= 0");
  }
  auto dd = std::make_shared<Vector const>(std::move(d));
  auto cc = std::make_shared<Vector const>(std::move(c));
  CompositeProblem p;
  p.name = "separable_l1";
  p.dim = dd->size();
  p.h.eval = [dd, cc](Vector const &x) {
    return 0.5 * (dd->array() * (x - *cc).array().square()).sum();
  };
  p.h.grad = [dd, cc](Vector const &x) -> Vector { return dd->cwiseProduct(x - *cc); };
  p.h.diff = [dd, cc](Vector const &x, Vector const &y) {
    // 1/2 d (x-c)^2 - 1/2 d (y-c)^2 = 1/2 d (x-y)(x+y-2c)
    return 0.5 * (dd->array() * (x - y).array() * (x + y - 2.0 * *cc).array()).sum();
  };
  p.h.mu = dd->minCoeff();
  p.h.lip = dd->maxCoeff();
  p.g = l1_norm(rho);
  p.full_prox = [dd, cc, rho](double lambda, Vector const &x) {
    Vector out(x.size());
    for (Index i = 0; i < x.size(); ++i) {
      double const s = 1.0 + lambda * (*dd)[i];
      double const z = (x[i] + lambda * (*dd)[i] * (*cc)[i]) / s;
      double const t = lambda * rho / s;
      double const m = std::abs(z) - t;
      out[i] = m > 0.0 ? std::copysign(m, z) : 0.0;
    }
    return out;
  };
  Vector xs(dd->size());
  for (Index i = 0; i < xs.size(); ++i) {
    double const z = (*dd)[i] * (*cc)[i];
    double const m = std::abs(z) - rho;
    xs[i] = m > 0.0 ? std::copysign(m, z) / (*dd)[i] : 0.0;
  }
  p.exact_solve = [xs]() -> std::optional<Vector> { return xs; };
  p.set_reference(xs);
  return p;
}

} // namespace iaprox
