#pragma once

// Plain-text problem data: Matrix Market (coordinate or array, real,
// general or symmetric) for matrices, one float per line for vectors.

#include "iaprox/problems.hpp"

#include <filesystem>
#include <iosfwd>

namespace iaprox::io {

/// Coordinate files become sparse, array files dense. Symmetric storage is
/// expanded.
SymMatrix read_sym_matrix(std::istream &is);
Matrix read_dense_matrix(std::istream &is);

/// Sparse -> coordinate symmetric (lower triangle), dense -> array symmetric.
void write_matrix(std::ostream &os, SymMatrix const &A);
/// Array general, column-major.
void write_matrix(std::ostream &os, Matrix const &A);

Vector read_vector(std::istream &is);
void write_vector(std::ostream &os, Vector const &v);

/// Directory layout: A.mtx, b.txt, l.txt, u.txt.
void save_box_qp(std::filesystem::path const &dir, BoxQP const &qp);
/// mu = 0 and L = trace(A) unless the files say otherwise.
BoxQP load_box_qp(std::filesystem::path const &dir);

/// Directory layout: A.mtx, b.txt (and y_true.txt when known).
void save_lasso(std::filesystem::path const &dir, LassoData const &data);
LassoData load_lasso(std::filesystem::path const &dir, double rho = kLassoRho);

} // namespace iaprox::io
