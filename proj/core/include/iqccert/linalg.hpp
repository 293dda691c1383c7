#pragma once

#include <cstddef>
#include <vector>

#include "iqccert/errors.hpp"

namespace iqccert {

// Dense row-major matrix. Column count zero is allowed so that an empty
// nullspace basis can be represented.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, double fill = 0.0);

  static Matrix identity(int n);

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  double& operator()(int i, int j) { return data_[static_cast<size_t>(i) * cols_ + j]; }
  double operator()(int i, int j) const { return data_[static_cast<size_t>(i) * cols_ + j]; }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  bool all_finite() const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator*(double s, const Matrix& a);
Matrix transpose(const Matrix& a);
Matrix kron(const Matrix& a, const Matrix& b);

double frobenius_norm(const Matrix& a);
double max_abs(const Matrix& a);

std::vector<double> mat_vec(const Matrix& a, const std::vector<double>& x);
double dot(const std::vector<double>& a, const std::vector<double>& b);

// Symmetric matrix with exact entry-level symmetry: entries(i,j) == entries(j,i)
// holds bit-for-bit because construction and mutation write both triangles.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(int order);

  // Symmetrizes a square matrix: both (i,j) and (j,i) receive (a_ij + a_ji)/2.
  static SymMatrix symmetrize(const Matrix& a);
  static SymMatrix identity(int n);

  int order() const { return order_; }

  double at(int i, int j) const { return data_[static_cast<size_t>(i) * order_ + j]; }
  void set(int i, int j, double v) {
    data_[static_cast<size_t>(i) * order_ + j] = v;
    data_[static_cast<size_t>(j) * order_ + i] = v;
  }
  void add(int i, int j, double v) { set(i, j, at(i, j) + v); }

  Matrix to_matrix() const;
  bool all_finite() const;

 private:
  int order_ = 0;
  std::vector<double> data_;
};

SymMatrix operator+(const SymMatrix& a, const SymMatrix& b);
SymMatrix operator-(const SymMatrix& a, const SymMatrix& b);
SymMatrix operator*(double s, const SymMatrix& a);
double frobenius_norm(const SymMatrix& a);

// x^T a x
double quadratic_form(const SymMatrix& a, const std::vector<double>& x);

// Congruence r^T a r, symmetrized exactly.
SymMatrix congruence(const SymMatrix& a, const Matrix& r);

struct EigResult {
  std::vector<double> values;  // ascending
  Matrix vectors;              // orthonormal columns, vectors.col(k) pairs with values[k]
};

// Cyclic Jacobi eigendecomposition. Throws KernelError on non-convergence.
EigResult sym_eig(const SymMatrix& m);

double min_eigenvalue(const SymMatrix& m);
double max_eigenvalue(const SymMatrix& m);

// True iff min eigenvalue >= -tol.
bool is_psd(const SymMatrix& m, double tol);

struct SvdResult {
  std::vector<double> singular_values;  // descending
  Matrix v;                             // right singular vectors, orthonormal columns
};

// One-sided Jacobi SVD (right factor only). Singular values carry high relative
// accuracy, which the rank decisions in nullspace_basis depend on.
SvdResult right_singular_vectors(const Matrix& a);

double default_rank_tol(const Matrix& m);

// Orthonormal basis of null(m); may have zero columns. rank_tol <= 0 selects
// the default 1e-10 * max(rows, cols) * ||m||_2.
Matrix nullspace_basis(const Matrix& m, double rank_tol = -1.0);

// Cholesky factorization a = L L^T. Returns false (and leaves `lower`
// unspecified) when a pivot is non-positive.
bool cholesky(const SymMatrix& a, Matrix& lower);

// Solves L x = b, then L^T y = x (i.e. a y = b given a = L L^T).
std::vector<double> cholesky_solve(const Matrix& lower, const std::vector<double>& b);

// X = L^{-1} B and X = L^{-T} B column-wise.
Matrix forward_substitute(const Matrix& lower, const Matrix& b);
Matrix back_substitute_transposed(const Matrix& lower, const Matrix& b);

}  // namespace iqccert
