#pragma once

#include <optional>
#include <string>
#include <vector>

#include "iqccert/linalg.hpp"
#include "iqccert/model.hpp"

namespace iqccert {

// Base supply rate S0 over (xi_hat, u_hat):
//   S0 = -(1/n) [[beta C^T Jperp C, C^T J / 2], [J C / 2, 0]]
// with J = (1/n) 11^T lifted per coordinate. Bounds the negative average
// optimality gap along trajectories.
struct SupplyRate {
  SymMatrix s0;
};

// Pointwise quadratic constraint on (x_hat, u_hat). The smoothness instance is
// M1 = [[0, beta I], [beta I, -2 I]] (gradient co-coercivity).
struct PointwiseIqc {
  SymMatrix m;
};

struct CertificateMargins {
  double min_eig_p = 0.0;
  double max_eig_lhs = 0.0;
  double tol = 0.0;  // feasibility tolerance the margins were checked against
};

// A feasible (P, lambda) pair together with the parameters it certifies.
struct Certificate {
  SymMatrix p;
  std::vector<double> lambda;
  double eta = 0.0;
  double beta = 0.0;
  int n = 1;
  std::string w_digest;
  CertificateMargins margins;
};

struct LmiDims {
  int state = 0;    // order of P
  int input = 0;    // gradient input dimension
  int reduced = 0;  // order after nullspace reduction
};

// The certification LMI as an affine map in (P, lambda):
//   LHS(P, lambda) = base + sum_kl P_kl * p_basis[kl] + sum_i lambda_i * iqc_terms[i]
// where base = -R^T S0 R and every block is reduced by the nullspace basis R
// of [F G]. R = I when no equality constraint applies.
struct LmiProblem {
  Realization realization;
  std::optional<EqualityConstraint> eq;
  SupplyRate supply;
  std::vector<PointwiseIqc> iqcs;

  Matrix r;
  SymMatrix base;
  std::vector<SymMatrix> p_basis;    // indexed by sym_index(k, l), k <= l
  std::vector<SymMatrix> iqc_terms;
  LmiDims dims;

  int num_p_vars() const { return dims.state * (dims.state + 1) / 2; }
  int sym_index(int k, int l) const;

  // Affine evaluation through the materialized basis (the solver's route).
  SymMatrix evaluate(const SymMatrix& p, const std::vector<double>& lambda) const;

  // Direct evaluation R^T {[[A'PA-P, A'PB],[B'PA, B'PB]] - S0 + sum lambda_i
  // Phi' M_i Phi} R from the raw problem data (the verifier's route).
  SymMatrix evaluate_direct(const SymMatrix& p, const std::vector<double>& lambda) const;
};

SupplyRate build_supply_rate(const Realization& r);

// `count` is the gradient input dimension (agent count at d = 1).
PointwiseIqc build_smoothness_iqc(int count, double beta);

LmiProblem assemble_lmi(const Realization& r, const std::optional<EqualityConstraint>& eq,
                        const SupplyRate& s0, const std::vector<PointwiseIqc>& iqcs);

struct VerificationReport {
  bool pass = false;
  double min_eig_p = 0.0;
  double max_eig_lhs = 0.0;
  double lambda_min = 0.0;
  double tol_psd = 0.0;
  double tol_feas = 0.0;  // absolute threshold after scaling
};

// Independent eigenvalue re-check of the certificate conditions:
// min_eig(P) >= -tol_psd, lambda >= 0, max_eig(LHS) <= tol_feas_rel*(1+||LHS||_F).
VerificationReport verify_certificate(const LmiProblem& lmi, const Certificate& cert,
                                      double tol_psd = 1e-9, double tol_feas_rel = 1e-8);

// (1 - sigma2)^2 / (160 beta), the analytic step-size bound from the original
// convergence proof of gradient tracking.
double analytic_bound_qu_li(double sigma2, double beta);

// Closed form for centralized gradient descent: feasible iff 0 < eta < 2/beta.
bool centralized_feasibility_oracle(double eta, double beta);

// Convenience pipelines.
LmiProblem make_dgt_lmi(const MixingMatrix& w, double eta, double beta);
LmiProblem make_centralized_lmi(double eta, double beta);
LmiProblem make_lifted_dgt_lmi(const MixingMatrix& w, double eta, double beta, int d);

}  // namespace iqccert
