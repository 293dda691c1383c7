#include "iqccert/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace iqccert {

namespace {

void check_mul_dims(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw KernelError("matrix product dimension mismatch: " + std::to_string(a.rows()) + "x" +
                      std::to_string(a.cols()) + " * " + std::to_string(b.rows()) + "x" +
                      std::to_string(b.cols()));
  }
}

void check_same_dims(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw KernelError("matrix sum dimension mismatch");
  }
}

}  // namespace

Matrix::Matrix(int rows, int cols, double fill)
    : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols, fill) {
  if (rows < 1 || cols < 0) {
    throw KernelError("invalid matrix dimensions " + std::to_string(rows) + "x" +
                      std::to_string(cols));
  }
}

Matrix Matrix::identity(int n) {
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

bool Matrix::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  check_mul_dims(a, b);
  Matrix c(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    for (int k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (int j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  }
  return c;
}

Matrix operator+(const Matrix& a, const Matrix& b) {
  check_same_dims(a, b);
  Matrix c = a;
  for (size_t i = 0; i < c.data().size(); ++i) c.data()[i] += b.data()[i];
  return c;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
  check_same_dims(a, b);
  Matrix c = a;
  for (size_t i = 0; i < c.data().size(); ++i) c.data()[i] -= b.data()[i];
  return c;
}

Matrix operator*(double s, const Matrix& a) {
  Matrix c = a;
  for (double& v : c.data()) v *= s;
  return c;
}

Matrix transpose(const Matrix& a) {
  if (a.cols() == 0) throw KernelError("transpose of a zero-column matrix");
  Matrix out(a.cols(), a.rows());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix c(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < a.cols(); ++j) {
      const double aij = a(i, j);
      if (aij == 0.0) continue;
      for (int k = 0; k < b.rows(); ++k)
        for (int l = 0; l < b.cols(); ++l) c(i * b.rows() + k, j * b.cols() + l) = aij * b(k, l);
    }
  }
  return c;
}

double frobenius_norm(const Matrix& a) {
  double s = 0.0;
  for (double v : a.data()) s += v * v;
  return std::sqrt(s);
}

double max_abs(const Matrix& a) {
  double s = 0.0;
  for (double v : a.data()) s = std::max(s, std::abs(v));
  return s;
}

std::vector<double> mat_vec(const Matrix& a, const std::vector<double>& x) {
  if (static_cast<int>(x.size()) != a.cols()) {
    throw KernelError("mat_vec dimension mismatch");
  }
  std::vector<double> y(a.rows(), 0.0);
  for (int i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (int j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

SymMatrix::SymMatrix(int order)
    : order_(order), data_(static_cast<size_t>(order) * order, 0.0) {
  if (order < 1) throw KernelError("symmetric matrix order must be positive");
}

SymMatrix SymMatrix::symmetrize(const Matrix& a) {
  if (a.rows() != a.cols()) throw KernelError("cannot symmetrize a non-square matrix");
  SymMatrix m(a.rows());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = i; j < a.cols(); ++j) m.set(i, j, 0.5 * (a(i, j) + a(j, i)));
  return m;
}

SymMatrix SymMatrix::identity(int n) {
  SymMatrix m(n);
  for (int i = 0; i < n; ++i) m.set(i, i, 1.0);
  return m;
}

Matrix SymMatrix::to_matrix() const {
  Matrix m(order_, order_);
  for (int i = 0; i < order_; ++i)
    for (int j = 0; j < order_; ++j) m(i, j) = at(i, j);
  return m;
}

bool SymMatrix::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

SymMatrix operator+(const SymMatrix& a, const SymMatrix& b) {
  if (a.order() != b.order()) throw KernelError("symmetric sum order mismatch");
  SymMatrix c = a;
  for (int i = 0; i < a.order(); ++i)
    for (int j = i; j < a.order(); ++j) c.set(i, j, a.at(i, j) + b.at(i, j));
  return c;
}

SymMatrix operator-(const SymMatrix& a, const SymMatrix& b) {
  if (a.order() != b.order()) throw KernelError("symmetric difference order mismatch");
  SymMatrix c = a;
  for (int i = 0; i < a.order(); ++i)
    for (int j = i; j < a.order(); ++j) c.set(i, j, a.at(i, j) - b.at(i, j));
  return c;
}

SymMatrix operator*(double s, const SymMatrix& a) {
  SymMatrix c = a;
  for (int i = 0; i < a.order(); ++i)
    for (int j = i; j < a.order(); ++j) c.set(i, j, s * a.at(i, j));
  return c;
}

double frobenius_norm(const SymMatrix& a) {
  double s = 0.0;
  for (int i = 0; i < a.order(); ++i)
    for (int j = 0; j < a.order(); ++j) s += a.at(i, j) * a.at(i, j);
  return std::sqrt(s);
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw KernelError("dot product dimension mismatch");
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double quadratic_form(const SymMatrix& a, const std::vector<double>& x) {
  if (static_cast<int>(x.size()) != a.order()) {
    throw KernelError("quadratic form dimension mismatch");
  }
  double s = 0.0;
  for (int i = 0; i < a.order(); ++i) {
    double row = 0.0;
    for (int j = 0; j < a.order(); ++j) row += a.at(i, j) * x[j];
    s += x[i] * row;
  }
  return s;
}

SymMatrix congruence(const SymMatrix& a, const Matrix& r) {
  if (r.rows() != a.order()) throw KernelError("congruence dimension mismatch");
  if (r.cols() == 0) throw KernelError("congruence with empty basis");
  return SymMatrix::symmetrize(transpose(r) * (a.to_matrix() * r));
}

EigResult sym_eig(const SymMatrix& m) {
  if (!m.all_finite()) throw KernelError("eigendecomposition of non-finite matrix");
  const int n = m.order();
  Matrix a = m.to_matrix();
  Matrix v = Matrix::identity(n);

  const double scale = frobenius_norm(m);
  const double off_tol = 1e-14 * (1.0 + scale);
  const int max_sweeps = 100;

  auto off_norm = [&]() {
    double s = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) s += 2.0 * a(p, q) * a(p, q);
    return std::sqrt(s);
  };

  int sweep = 0;
  for (; sweep < max_sweeps; ++sweep) {
    if (off_norm() <= off_tol) break;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) <= 1e-300) continue;
        const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;

        const double app = a(p, p), aqq = a(q, q);
        a(p, p) = app - t * apq;
        a(q, q) = aqq + t * apq;
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (int i = 0; i < n; ++i) {
          if (i == p || i == q) continue;
          const double aip = a(i, p), aiq = a(i, q);
          a(i, p) = c * aip - s * aiq;
          a(p, i) = a(i, p);
          a(i, q) = s * aip + c * aiq;
          a(q, i) = a(i, q);
        }
        for (int i = 0; i < n; ++i) {
          const double vip = v(i, p), viq = v(i, q);
          v(i, p) = c * vip - s * viq;
          v(i, q) = s * vip + c * viq;
        }
      }
    }
  }
  if (sweep == max_sweeps && off_norm() > off_tol) {
    throw KernelError("jacobi eigensolver did not converge for order " + std::to_string(n));
  }

  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int i, int j) { return a(i, i) < a(j, j); });

  EigResult res;
  res.values.resize(n);
  res.vectors = Matrix(n, n);
  for (int k = 0; k < n; ++k) {
    res.values[k] = a(idx[k], idx[k]);
    for (int i = 0; i < n; ++i) res.vectors(i, k) = v(i, idx[k]);
  }
  return res;
}

double min_eigenvalue(const SymMatrix& m) { return sym_eig(m).values.front(); }
double max_eigenvalue(const SymMatrix& m) { return sym_eig(m).values.back(); }

bool is_psd(const SymMatrix& m, double tol) {
  if (tol < 0.0) throw DomainError("is_psd tolerance must be nonnegative");
  return min_eigenvalue(m) >= -tol;
}

SvdResult right_singular_vectors(const Matrix& a) {
  if (!a.all_finite()) throw KernelError("svd of non-finite matrix");
  const int m = a.rows();
  const int n = a.cols();
  Matrix u = a;  // columns get orthogonalized in place
  Matrix v = Matrix::identity(n);

  auto col_dot = [&](const Matrix& x, int p, int q) {
    double s = 0.0;
    for (int i = 0; i < m; ++i) s += x(i, p) * x(i, q);
    return s;
  };

  const int max_sweeps = 60;
  const double tol = 1e-15;
  double scale2 = 0.0;  // largest initial squared column norm
  for (int j = 0; j < n; ++j) scale2 = std::max(scale2, col_dot(u, j, j));
  // Columns this small are numerically zero; rotating two of them against
  // each other never settles and their norms are already below any rank
  // threshold.
  const double negligible2 = 1e-30 * scale2;
  bool converged = false;
  for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
    converged = true;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double alpha = col_dot(u, p, p);
        const double beta = col_dot(u, q, q);
        const double gamma = col_dot(u, p, q);
        if (std::abs(gamma) <= tol * std::sqrt(alpha * beta) ||
            std::min(alpha, beta) <= negligible2) {
          continue;
        }
        converged = false;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t =
            (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (int i = 0; i < m; ++i) {
          const double up = u(i, p), uq = u(i, q);
          u(i, p) = c * up - s * uq;
          u(i, q) = s * up + c * uq;
        }
        for (int i = 0; i < n; ++i) {
          const double vp = v(i, p), vq = v(i, q);
          v(i, p) = c * vp - s * vq;
          v(i, q) = s * vp + c * vq;
        }
      }
    }
  }
  if (!converged) {
    throw KernelError("jacobi svd did not converge for " + std::to_string(m) + "x" +
                      std::to_string(n));
  }

  std::vector<double> sv(n);
  for (int j = 0; j < n; ++j) sv[j] = std::sqrt(col_dot(u, j, j));
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int i, int j) { return sv[i] > sv[j]; });

  SvdResult res;
  res.singular_values.resize(n);
  res.v = Matrix(n, n);
  for (int k = 0; k < n; ++k) {
    res.singular_values[k] = sv[idx[k]];
    for (int i = 0; i < n; ++i) res.v(i, k) = v(i, idx[k]);
  }
  return res;
}

double default_rank_tol(const Matrix& m) {
  const SvdResult s = right_singular_vectors(m);
  const double spectral = s.singular_values.empty() ? 0.0 : s.singular_values.front();
  return 1e-10 * std::max(m.rows(), m.cols()) * spectral;
}

Matrix nullspace_basis(const Matrix& m, double rank_tol) {
  if (!m.all_finite()) throw KernelError("nullspace of non-finite matrix");
  const SvdResult s = right_singular_vectors(m);
  const double spectral = s.singular_values.empty() ? 0.0 : s.singular_values.front();
  const double tol =
      rank_tol > 0.0 ? rank_tol : 1e-10 * std::max(m.rows(), m.cols()) * spectral;

  int rank = 0;
  for (double sv : s.singular_values) {
    if (sv > tol) ++rank;
  }
  const int null_dim = m.cols() - rank;
  Matrix basis(m.cols(), null_dim);
  for (int k = 0; k < null_dim; ++k)
    for (int i = 0; i < m.cols(); ++i) basis(i, k) = s.v(i, rank + k);
  return basis;
}

bool cholesky(const SymMatrix& a, Matrix& lower) {
  const int n = a.order();
  lower = Matrix(n, n);
  for (int j = 0; j < n; ++j) {
    double d = a.at(j, j);
    for (int k = 0; k < j; ++k) d -= lower(j, k) * lower(j, k);
    if (!(d > 0.0)) return false;
    const double ljj = std::sqrt(d);
    lower(j, j) = ljj;
    for (int i = j + 1; i < n; ++i) {
      double s = a.at(i, j);
      for (int k = 0; k < j; ++k) s -= lower(i, k) * lower(j, k);
      lower(i, j) = s / ljj;
    }
  }
  return true;
}

std::vector<double> cholesky_solve(const Matrix& lower, const std::vector<double>& b) {
  const int n = lower.rows();
  std::vector<double> y(b);
  for (int i = 0; i < n; ++i) {
    double s = y[i];
    for (int k = 0; k < i; ++k) s -= lower(i, k) * y[k];
    y[i] = s / lower(i, i);
  }
  for (int i = n - 1; i >= 0; --i) {
    double s = y[i];
    for (int k = i + 1; k < n; ++k) s -= lower(k, i) * y[k];
    y[i] = s / lower(i, i);
  }
  return y;
}

Matrix forward_substitute(const Matrix& lower, const Matrix& b) {
  const int n = lower.rows();
  Matrix x = b;
  for (int j = 0; j < b.cols(); ++j) {
    for (int i = 0; i < n; ++i) {
      double s = x(i, j);
      for (int k = 0; k < i; ++k) s -= lower(i, k) * x(k, j);
      x(i, j) = s / lower(i, i);
    }
  }
  return x;
}

Matrix back_substitute_transposed(const Matrix& lower, const Matrix& b) {
  const int n = lower.rows();
  Matrix x = b;
  for (int j = 0; j < b.cols(); ++j) {
    for (int i = n - 1; i >= 0; --i) {
      double s = x(i, j);
      for (int k = i + 1; k < n; ++k) s -= lower(k, i) * x(k, j);
      x(i, j) = s / lower(i, i);
    }
  }
  return x;
}

}  // namespace iqccert
