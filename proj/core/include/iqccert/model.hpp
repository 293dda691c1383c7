#pragma once

#include <string>
#include <utility>

#include "iqccert/linalg.hpp"

namespace iqccert {

// Doubly stochastic, irreducible consensus weight matrix. Construct through
// the factory functions below so the invariants are always checked.
struct MixingMatrix {
  int n = 0;
  Matrix w;
};

// W = [[(1+s)/2, (1-s)/2], [(1-s)/2, (1+s)/2]] for s in (-1, 1).
MixingMatrix two_node_w(double sigma);

// Metropolis weights for an undirected connected graph given as a 0/1
// adjacency matrix with zero diagonal: W_ij = 1/(1 + max(deg_i, deg_j)) on
// edges, diagonal absorbs the remainder.
MixingMatrix metropolis_w(const Matrix& adjacency);

// Validates double stochasticity (row/column sums within 1e-12) and
// irreducibility (strong connectivity of the support graph).
MixingMatrix validate_mixing(const Matrix& w);

// Second-largest singular value of W.
double second_singular_value(const MixingMatrix& w);

// State-space data of an algorithm viewed as a feedback interconnection
// x = C xi + D u, xi^+ = A xi + B u, u = gradient map output.
struct Realization {
  Matrix a, b, c, d;
  int n = 1;              // agent count
  int dim = 1;            // per-agent decision dimension
  double eta = 0.0;
  double beta = 0.0;
  std::string w_digest;   // identifies the mixing matrix ("centralized" for the scalar model)

  int state_dim() const { return a.rows(); }
  int input_dim() const { return b.cols(); }
  int output_dim() const { return c.rows(); }
};

// Rows of F (xi - xi*) + G (u - u*) = 0 satisfied along every trajectory.
struct EqualityConstraint {
  Matrix f, g;
};

// Distributed gradient tracking with state xi = (x, s - u):
//   A = [[W, -eta I], [0, W]], B = [[-eta I], [W - I]], C = [I 0], D = 0,
//   F = [0 1^T], G = 0.
std::pair<Realization, EqualityConstraint> dgt_realization(const MixingMatrix& w, double eta,
                                                           double beta);

// Centralized gradient descent: A = 1, B = -eta, C = 1, D = 0. No equality
// constraint applies.
Realization centralized_gd_realization(double eta, double beta);

// Replaces every matrix X by kron(X, I_d).
Realization lift_dimension(const Realization& r, int d);
std::pair<Realization, EqualityConstraint> lift_dimension(const Realization& r,
                                                          const EqualityConstraint& eq, int d);

}  // namespace iqccert
