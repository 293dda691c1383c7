#include "iqccert/model.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "iqccert/util.hpp"

namespace iqccert {

namespace {

constexpr double kStochasticTol = 1e-12;
constexpr double kSupportThreshold = 1e-14;

std::vector<int> reachable_from(const Matrix& w, int start, bool transpose_graph) {
  const int n = w.rows();
  std::vector<int> visited(n, 0);
  std::vector<int> stack{start};
  visited[start] = 1;
  while (!stack.empty()) {
    const int i = stack.back();
    stack.pop_back();
    for (int j = 0; j < n; ++j) {
      const double entry = transpose_graph ? w(j, i) : w(i, j);
      if (!visited[j] && std::abs(entry) > kSupportThreshold) {
        visited[j] = 1;
        stack.push_back(j);
      }
    }
  }
  return visited;
}

std::string vertex_set_string(const std::vector<int>& mask, int keep) {
  std::string out = "{";
  bool first = true;
  for (int i = 0; i < static_cast<int>(mask.size()); ++i) {
    if (mask[i] != keep) continue;
    if (!first) out += ", ";
    out += std::to_string(i);
    first = false;
  }
  out += "}";
  return out;
}

}  // namespace

MixingMatrix two_node_w(double sigma) {
  if (!(sigma > -1.0 && sigma < 1.0)) {
    throw DomainError("two_node_w: sigma must lie in (-1, 1), got " + format_g12(sigma));
  }
  Matrix w(2, 2);
  w(0, 0) = w(1, 1) = 0.5 * (1.0 + sigma);
  w(0, 1) = w(1, 0) = 0.5 * (1.0 - sigma);
  return MixingMatrix{2, w};
}

MixingMatrix metropolis_w(const Matrix& adjacency) {
  const int n = adjacency.rows();
  if (adjacency.cols() != n) throw ValidationError("adjacency matrix must be square");
  for (int i = 0; i < n; ++i) {
    if (adjacency(i, i) != 0.0) throw ValidationError("adjacency diagonal must be zero");
    for (int j = 0; j < n; ++j) {
      if (adjacency(i, j) != 0.0 && adjacency(i, j) != 1.0) {
        throw ValidationError("adjacency entries must be 0 or 1");
      }
      if (adjacency(i, j) != adjacency(j, i)) {
        throw ValidationError("adjacency matrix must be symmetric");
      }
    }
  }

  const std::vector<int> component = reachable_from(adjacency, 0, false);
  for (int i = 0; i < n; ++i) {
    if (!component[i]) {
      throw ValidationError("graph is disconnected: component " + vertex_set_string(component, 1) +
                            " does not reach vertex " + std::to_string(i));
    }
  }

  std::vector<int> degree(n, 0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) degree[i] += adjacency(i, j) != 0.0 ? 1 : 0;

  Matrix w(n, n);
  for (int i = 0; i < n; ++i) {
    double off_sum = 0.0;
    for (int j = 0; j < n; ++j) {
      if (j == i || adjacency(i, j) == 0.0) continue;
      w(i, j) = 1.0 / (1.0 + std::max(degree[i], degree[j]));
      off_sum += w(i, j);
    }
    w(i, i) = 1.0 - off_sum;
  }
  return validate_mixing(w);
}

MixingMatrix validate_mixing(const Matrix& w) {
  const int n = w.rows();
  if (w.cols() != n) throw ValidationError("mixing matrix must be square");
  if (!w.all_finite()) throw ValidationError("mixing matrix has non-finite entries");

  for (int i = 0; i < n; ++i) {
    double row = 0.0, col = 0.0;
    for (int j = 0; j < n; ++j) {
      row += w(i, j);
      col += w(j, i);
    }
    if (std::abs(row - 1.0) > kStochasticTol) {
      throw ValidationError("not doubly stochastic: row " + std::to_string(i) + " sums to " +
                            format_g12(row));
    }
    if (std::abs(col - 1.0) > kStochasticTol) {
      throw ValidationError("not doubly stochastic: column " + std::to_string(i) + " sums to " +
                            format_g12(col));
    }
  }

  const std::vector<int> fwd = reachable_from(w, 0, false);
  const std::vector<int> bwd = reachable_from(w, 0, true);
  for (int i = 0; i < n; ++i) {
    if (!fwd[i] || !bwd[i]) {
      throw ValidationError("not irreducible: support graph does not strongly connect vertex " +
                            std::to_string(i));
    }
  }
  return MixingMatrix{n, w};
}

double second_singular_value(const MixingMatrix& w) {
  if (w.n < 2) return 0.0;
  const SvdResult s = right_singular_vectors(w.w);
  return s.singular_values[1];
}

std::pair<Realization, EqualityConstraint> dgt_realization(const MixingMatrix& w, double eta,
                                                           double beta) {
  if (!(eta > 0.0)) throw DomainError("dgt_realization: eta must be positive");
  if (!(beta > 0.0)) throw DomainError("dgt_realization: beta must be positive");
  const int n = w.n;

  Matrix a(2 * n, 2 * n);
  Matrix b(2 * n, n);
  Matrix c(n, 2 * n);
  Matrix d(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      a(i, j) = w.w(i, j);
      a(n + i, n + j) = w.w(i, j);
      b(n + i, j) = w.w(i, j) - (i == j ? 1.0 : 0.0);
    }
    a(i, n + i) = -eta;
    b(i, i) = -eta;
    c(i, i) = 1.0;
  }

  Matrix f(1, 2 * n);
  for (int j = 0; j < n; ++j) f(0, n + j) = 1.0;
  Matrix g(1, n);

  Realization r;
  r.a = a;
  r.b = b;
  r.c = c;
  r.d = d;
  r.n = n;
  r.dim = 1;
  r.eta = eta;
  r.beta = beta;
  r.w_digest = matrix_digest(w.w);
  return {r, EqualityConstraint{f, g}};
}

Realization centralized_gd_realization(double eta, double beta) {
  if (!(eta > 0.0)) throw DomainError("centralized_gd_realization: eta must be positive");
  if (!(beta > 0.0)) throw DomainError("centralized_gd_realization: beta must be positive");
  Realization r;
  r.a = Matrix(1, 1);
  r.a(0, 0) = 1.0;
  r.b = Matrix(1, 1);
  r.b(0, 0) = -eta;
  r.c = Matrix(1, 1);
  r.c(0, 0) = 1.0;
  r.d = Matrix(1, 1);
  r.n = 1;
  r.dim = 1;
  r.eta = eta;
  r.beta = beta;
  r.w_digest = "centralized";
  return r;
}

Realization lift_dimension(const Realization& r, int d) {
  if (d < 1) throw DomainError("lift_dimension: d must be >= 1");
  if (d == 1) return r;
  const Matrix eye = Matrix::identity(d);
  Realization out = r;
  out.a = kron(r.a, eye);
  out.b = kron(r.b, eye);
  out.c = kron(r.c, eye);
  out.d = kron(r.d, eye);
  out.dim = r.dim * d;
  return out;
}

std::pair<Realization, EqualityConstraint> lift_dimension(const Realization& r,
                                                          const EqualityConstraint& eq, int d) {
  if (d < 1) throw DomainError("lift_dimension: d must be >= 1");
  if (d == 1) return {r, eq};
  const Matrix eye = Matrix::identity(d);
  return {lift_dimension(r, d), EqualityConstraint{kron(eq.f, eye), kron(eq.g, eye)}};
}

}  // namespace iqccert
