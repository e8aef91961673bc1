#include "iaprox/matrix_io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace iaprox::io {

namespace {

struct Header
{
  bool coordinate = false;
  bool symmetric = false;
  Index rows = 0;
  Index cols = 0;
  Index nnz = 0;
};

std::string lower(std::string s)
{
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

Header read_header(std::istream &is)
{
  std::string line;
  if (!std::getline(is, line)) {
    throw ConfigError("matrix market: empty input");
  }
  std::istringstream banner(lower(line));
  std::string tag, object, format, field, symmetry;
  banner >> tag >> object >> format >> field >> symmetry;
  if (tag != "%%matrixmarket" || object != "matrix") {
    throw ConfigError("matrix market: missing '%%MatrixMarket matrix' banner");
  }
  if (field != "real" && field != "integer" && field != "double") {
    throw ConfigError("matrix market: only real fields are supported, got '" + field + "'");
  }
  Header h;
  if (format == "coordinate") {
    h.coordinate = true;
  } else if (format != "array") {
    throw ConfigError("matrix market: unknown format '" + format + "'");
  }
  if (symmetry == "symmetric") {
    h.symmetric = true;
  } else if (symmetry != "general") {
    throw ConfigError("matrix market: unsupported symmetry '" + symmetry + "'");
  }
  while (std::getline(is, line)) {
    if (!line.empty() && line[0] != '%') {
      break;
    }
  }
  std::istringstream size(line);
  size >> h.rows >> h.cols;
  if (h.coordinate) {
    size >> h.nnz;
  }
  if (!size || h.rows < 1 || h.cols < 1 || h.nnz < 0) {
    throw ConfigError("matrix market: malformed size line");
  }
  if (h.symmetric && h.rows != h.cols) {
    throw ConfigError("matrix market: symmetric matrix must be square");
  }
  return h;
}

std::vector<Eigen::Triplet<double, int>> read_entries(std::istream &is, Header const &h)
{
  std::vector<Eigen::Triplet<double, int>> out;
  out.reserve(static_cast<std::size_t>(h.symmetric ? 2 * h.nnz : h.nnz));
  for (Index k = 0; k < h.nnz; ++k) {
    Index i = 0;
    Index j = 0;
    double v = 0.0;
    if (!(is >> i >> j >> v)) {
      throw ConfigError("matrix market: expected " + std::to_string(h.nnz) + " entries, got " +
                        std::to_string(k));
    }
    if (i < 1 || j < 1 || i > h.rows || j > h.cols) {
      throw ConfigError("matrix market: entry index out of range");
    }
    out.emplace_back(static_cast<int>(i - 1), static_cast<int>(j - 1), v);
    if (h.symmetric && i != j) {
      out.emplace_back(static_cast<int>(j - 1), static_cast<int>(i - 1), v);
    }
  }
  return out;
}

Matrix read_array(std::istream &is, Header const &h)
{
  Matrix A = Matrix::Zero(h.rows, h.cols);
  for (Index j = 0; j < h.cols; ++j) {
    for (Index i = h.symmetric ? j : 0; i < h.rows; ++i) {
      if (!(is >> A(i, j))) {
        throw ConfigError("matrix market: array data ended early");
      }
      if (h.symmetric) {
        A(j, i) = A(i, j);
      }
    }
  }
  return A;
}

std::string fmt(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ifstream open_in(std::filesystem::path const &p)
{
  std::ifstream is(p);
  if (!is) {
    throw ConfigError("cannot open " + p.string());
  }
  return is;
}

std::ofstream open_out(std::filesystem::path const &p)
{
  std::ofstream os(p);
  if (!os) {
    throw ConfigError("cannot write " + p.string());
  }
  return os;
}

} // namespace

SymMatrix read_sym_matrix(std::istream &is)
{
  Header const h = read_header(is);
  if (h.rows != h.cols) {
    throw ConfigError("matrix market: expected a square matrix");
  }
  if (!h.coordinate) {
    Matrix A = read_array(is, h);
    if (!A.isApprox(A.transpose(), 1e-12)) {
      throw ConfigError("matrix market: matrix is not symmetric");
    }
    return SymMatrix::dense(std::move(A));
  }
  auto const entries = read_entries(is, h);
  kernels::SparseRowMajor A(h.rows, h.cols);
  A.setFromTriplets(entries.begin(), entries.end());
  kernels::SparseRowMajor const At = A.transpose();
  if (!A.isApprox(At, 1e-12)) {
    throw ConfigError("matrix market: matrix is not symmetric");
  }
  return SymMatrix::sparse(std::move(A));
}

Matrix read_dense_matrix(std::istream &is)
{
  Header const h = read_header(is);
  if (!h.coordinate) {
    return read_array(is, h);
  }
  Matrix A = Matrix::Zero(h.rows, h.cols);
  for (auto const &t : read_entries(is, h)) {
    A(t.row(), t.col()) += t.value();
  }
  return A;
}

void write_matrix(std::ostream &os, SymMatrix const &A)
{
  if (!A.is_sparse()) {
    Matrix const &M = A.dense_data();
    os << "%%MatrixMarket matrix array real symmetric\n" << M.rows() << ' ' << M.cols() << '\n';
    for (Index j = 0; j < M.cols(); ++j) {
      for (Index i = j; i < M.rows(); ++i) {
        os << fmt(M(i, j)) << '\n';
      }
    }
    return;
  }
  auto const &S = A.sparse_data();
  std::vector<Eigen::Triplet<double, int>> lowerpart;
  for (int r = 0; r < S.outerSize(); ++r) {
    for (kernels::SparseRowMajor::InnerIterator it(S, r); it; ++it) {
      if (it.col() <= it.row()) {
        lowerpart.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
      }
    }
  }
  os << "%%MatrixMarket matrix coordinate real symmetric\n"
     << S.rows() << ' ' << S.cols() << ' ' << lowerpart.size() << '\n';
  for (auto const &t : lowerpart) {
    os << t.row() + 1 << ' ' << t.col() + 1 << ' ' << fmt(t.value()) << '\n';
  }
}

void write_matrix(std::ostream &os, Matrix const &A)
{
  os << "%%MatrixMarket matrix array real general\n" << A.rows() << ' ' << A.cols() << '\n';
  for (Index j = 0; j < A.cols(); ++j) {
    for (Index i = 0; i < A.rows(); ++i) {
      os << fmt(A(i, j)) << '\n';
    }
  }
}

Vector read_vector(std::istream &is)
{
  std::vector<double> vals;
  std::string tok;
  while (is >> tok) {
    if (tok[0] == '#') {
      std::getline(is, tok);
      continue;
    }
    try {
      std::size_t used = 0;
      vals.push_back(std::stod(tok, &used));
      if (used != tok.size()) {
        throw std::invalid_argument(tok);
      }
    } catch (std::exception const &) {
      throw ConfigError("vector file: cannot parse '" + tok + "'");
    }
  }
  return Eigen::Map<Vector const>(vals.data(), static_cast<Index>(vals.size()));
}

void write_vector(std::ostream &os, Vector const &v)
{
  for (Index i = 0; i < v.size(); ++i) {
    os << fmt(v[i]) << '\n';
  }
}

void save_box_qp(std::filesystem::path const &dir, BoxQP const &qp)
{
  std::filesystem::create_directories(dir);
  auto A = open_out(dir / "A.mtx");
  write_matrix(A, *qp.A);
  auto b = open_out(dir / "b.txt");
  write_vector(b, qp.b);
  auto l = open_out(dir / "l.txt");
  write_vector(l, qp.l);
  auto u = open_out(dir / "u.txt");
  write_vector(u, qp.u);
}

BoxQP load_box_qp(std::filesystem::path const &dir)
{
  BoxQP qp;
  auto A = open_in(dir / "A.mtx");
  qp.A = std::make_shared<SymMatrix const>(read_sym_matrix(A));
  auto b = open_in(dir / "b.txt");
  qp.b = read_vector(b);
  Index const n = qp.A->size();
  qp.l = Vector::Constant(n, -1.0);
  qp.u = Vector::Constant(n, 1.0);
  if (std::filesystem::exists(dir / "l.txt")) {
    auto l = open_in(dir / "l.txt");
    qp.l = read_vector(l);
  }
  if (std::filesystem::exists(dir / "u.txt")) {
    auto u = open_in(dir / "u.txt");
    qp.u = read_vector(u);
  }
  if (qp.b.size() != n || qp.l.size() != n || qp.u.size() != n) {
    throw ConfigError("box QP files have inconsistent dimensions");
  }
  qp.mu = 0.0;
  qp.lip = lipschitz_trace(*qp.A);
  return qp;
}

void save_lasso(std::filesystem::path const &dir, LassoData const &data)
{
  std::filesystem::create_directories(dir);
  auto A = open_out(dir / "A.mtx");
  write_matrix(A, *data.A);
  auto b = open_out(dir / "b.txt");
  write_vector(b, data.b);
  if (data.y_true.size()) {
    auto y = open_out(dir / "y_true.txt");
    write_vector(y, data.y_true);
  }
}

LassoData load_lasso(std::filesystem::path const &dir, double rho)
{
  auto A = open_in(dir / "A.mtx");
  Matrix M = read_dense_matrix(A);
  auto b = open_in(dir / "b.txt");
  Vector v = read_vector(b);
  if (v.size() != M.rows()) {
    throw ConfigError("lasso files have inconsistent dimensions");
  }
  LassoData data = lasso_from(std::move(M), std::move(v), rho);
  if (std::filesystem::exists(dir / "y_true.txt")) {
    auto y = open_in(dir / "y_true.txt");
    data.y_true = read_vector(y);
  }
  return data;
}

} // namespace iaprox::io
