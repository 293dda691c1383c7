#include "iqccert/certify.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace iqccert {

namespace {

// Phi = [[C, D], [0, I]], the map from (xi_hat, u_hat) to (x_hat, u_hat).
Matrix io_selector(const Realization& r) {
  const int nx = r.state_dim();
  const int nu = r.input_dim();
  const int ny = r.output_dim();
  Matrix phi(ny + nu, nx + nu);
  for (int i = 0; i < ny; ++i) {
    for (int j = 0; j < nx; ++j) phi(i, j) = r.c(i, j);
    for (int j = 0; j < nu; ++j) phi(i, nx + j) = r.d(i, j);
  }
  for (int i = 0; i < nu; ++i) phi(ny + i, nx + i) = 1.0;
  return phi;
}

void require(bool cond, const std::string& what) {
  if (!cond) throw AssemblyError(what);
}

}  // namespace

SupplyRate build_supply_rate(const Realization& r) {
  const int n = r.n;
  const int dim = r.dim;
  const int nx = r.state_dim();
  const int nu = r.input_dim();
  const int ny = r.output_dim();
  require(ny == n * dim, "build_supply_rate: output dimension does not match n*dim");

  Matrix j_small(n, n, 1.0 / n);
  const Matrix j = dim == 1 ? j_small : kron(j_small, Matrix::identity(dim));
  Matrix jperp = Matrix::identity(ny) - j;

  const Matrix ct = transpose(r.c);
  const Matrix top_left = (-r.beta / n) * (ct * (jperp * r.c));
  const Matrix top_right = (-0.5 / n) * (ct * j);

  Matrix s(nx + nu, nx + nu);
  for (int i = 0; i < nx; ++i) {
    for (int k = 0; k < nx; ++k) s(i, k) = top_left(i, k);
    for (int k = 0; k < nu; ++k) {
      s(i, nx + k) = top_right(i, k);
      s(nx + k, i) = top_right(i, k);
    }
  }
  return SupplyRate{SymMatrix::symmetrize(s)};
}

PointwiseIqc build_smoothness_iqc(int count, double beta) {
  if (count < 1) throw DomainError("build_smoothness_iqc: count must be positive");
  if (!(beta > 0.0)) throw DomainError("build_smoothness_iqc: beta must be positive");
  SymMatrix m(2 * count);
  for (int i = 0; i < count; ++i) {
    m.set(i, count + i, beta);
    m.set(count + i, count + i, -2.0);
  }
  return PointwiseIqc{m};
}

int LmiProblem::sym_index(int k, int l) const {
  // row-major upper triangle: (k, l) with k <= l
  return k * dims.state - k * (k - 1) / 2 + (l - k);
}

SymMatrix LmiProblem::evaluate(const SymMatrix& p, const std::vector<double>& lambda) const {
  require(p.order() == dims.state, "LmiProblem::evaluate: P order mismatch");
  require(lambda.size() == iqc_terms.size(), "LmiProblem::evaluate: lambda count mismatch");
  SymMatrix lhs = base;
  for (int k = 0; k < dims.state; ++k) {
    for (int l = k; l < dims.state; ++l) {
      const double coeff = p.at(k, l);
      if (coeff == 0.0) continue;
      const SymMatrix& g = p_basis[sym_index(k, l)];
      for (int i = 0; i < lhs.order(); ++i)
        for (int j = i; j < lhs.order(); ++j) lhs.set(i, j, lhs.at(i, j) + coeff * g.at(i, j));
    }
  }
  for (size_t t = 0; t < lambda.size(); ++t) {
    const SymMatrix& g = iqc_terms[t];
    for (int i = 0; i < lhs.order(); ++i)
      for (int j = i; j < lhs.order(); ++j) lhs.set(i, j, lhs.at(i, j) + lambda[t] * g.at(i, j));
  }
  return lhs;
}

SymMatrix LmiProblem::evaluate_direct(const SymMatrix& p,
                                      const std::vector<double>& lambda) const {
  require(p.order() == dims.state, "LmiProblem::evaluate_direct: P order mismatch");
  require(lambda.size() == iqcs.size(), "LmiProblem::evaluate_direct: lambda count mismatch");
  const Realization& rz = realization;
  const int nx = rz.state_dim();
  const int nu = rz.input_dim();

  const Matrix pm = p.to_matrix();
  const Matrix pa = pm * rz.a;
  const Matrix pb = pm * rz.b;
  const Matrix at = transpose(rz.a);
  const Matrix bt = transpose(rz.b);
  const Matrix apa = at * pa;
  const Matrix apb = at * pb;
  const Matrix bpa = bt * pa;
  const Matrix bpb = bt * pb;

  Matrix inner(nx + nu, nx + nu);
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < nx; ++j) inner(i, j) = apa(i, j) - pm(i, j);
    for (int j = 0; j < nu; ++j) inner(i, nx + j) = apb(i, j);
  }
  for (int i = 0; i < nu; ++i) {
    for (int j = 0; j < nx; ++j) inner(nx + i, j) = bpa(i, j);
    for (int j = 0; j < nu; ++j) inner(nx + i, nx + j) = bpb(i, j);
  }
  inner = inner - supply.s0.to_matrix();

  const Matrix phi = io_selector(rz);
  const Matrix phit = transpose(phi);
  for (size_t t = 0; t < lambda.size(); ++t) {
    inner = inner + lambda[t] * (phit * (iqcs[t].m.to_matrix() * phi));
  }
  return congruence(SymMatrix::symmetrize(inner), r);
}

LmiProblem assemble_lmi(const Realization& r, const std::optional<EqualityConstraint>& eq,
                        const SupplyRate& s0, const std::vector<PointwiseIqc>& iqcs) {
  const int nx = r.state_dim();
  const int nu = r.input_dim();
  const int ny = r.output_dim();

  require(r.a.rows() == nx && r.a.cols() == nx, "assemble_lmi: A must be square");
  require(r.b.rows() == nx, "assemble_lmi: B row count must match A");
  require(r.c.cols() == nx, "assemble_lmi: C column count must match A");
  require(r.d.rows() == ny && r.d.cols() == nu, "assemble_lmi: D dimensions must match C and B");
  require(max_abs(r.d) == 0.0, "assemble_lmi: D must be zero (well-posedness)");
  require(s0.s0.order() == nx + nu, "assemble_lmi: S0 order must be state+input");
  for (const PointwiseIqc& iqc : iqcs) {
    require(iqc.m.order() == ny + nu, "assemble_lmi: IQC order must be output+input");
  }

  LmiProblem lmi;
  lmi.realization = r;
  lmi.eq = eq;
  lmi.supply = s0;
  lmi.iqcs = iqcs;

  if (eq.has_value()) {
    require(eq->f.cols() == nx, "assemble_lmi: F column count must match state");
    require(eq->g.cols() == nu, "assemble_lmi: G column count must match input");
    require(eq->f.rows() == eq->g.rows(), "assemble_lmi: F and G row counts differ");
    Matrix fg(eq->f.rows(), nx + nu);
    for (int i = 0; i < eq->f.rows(); ++i) {
      for (int j = 0; j < nx; ++j) fg(i, j) = eq->f(i, j);
      for (int j = 0; j < nu; ++j) fg(i, nx + j) = eq->g(i, j);
    }
    lmi.r = nullspace_basis(fg);
    require(lmi.r.cols() > 0, "assemble_lmi: equality constraint leaves no free directions");
  } else {
    lmi.r = Matrix::identity(nx + nu);
  }

  lmi.dims = LmiDims{nx, nu, lmi.r.cols()};
  lmi.base = congruence(-1.0 * s0.s0, lmi.r);

  const Matrix phi = io_selector(r);
  const Matrix phit = transpose(phi);
  lmi.iqc_terms.reserve(iqcs.size());
  for (const PointwiseIqc& iqc : iqcs) {
    lmi.iqc_terms.push_back(
        congruence(SymMatrix::symmetrize(phit * (iqc.m.to_matrix() * phi)), lmi.r));
  }

  // Reduced image of each symmetric basis element E_kl of P.
  lmi.p_basis.reserve(static_cast<size_t>(nx) * (nx + 1) / 2);
  const Matrix at = transpose(r.a);
  const Matrix bt = transpose(r.b);
  for (int k = 0; k < nx; ++k) {
    for (int l = k; l < nx; ++l) {
      Matrix e(nx, nx);
      e(k, l) = 1.0;
      e(l, k) = 1.0;
      const Matrix ea = e * r.a;
      const Matrix eb = e * r.b;
      const Matrix aea = at * ea;
      const Matrix aeb = at * eb;
      const Matrix bea = bt * ea;
      const Matrix beb = bt * eb;
      Matrix block(nx + nu, nx + nu);
      for (int i = 0; i < nx; ++i) {
        for (int j = 0; j < nx; ++j) block(i, j) = aea(i, j) - e(i, j);
        for (int j = 0; j < nu; ++j) block(i, nx + j) = aeb(i, j);
      }
      for (int i = 0; i < nu; ++i) {
        for (int j = 0; j < nx; ++j) block(nx + i, j) = bea(i, j);
        for (int j = 0; j < nu; ++j) block(nx + i, nx + j) = beb(i, j);
      }
      lmi.p_basis.push_back(congruence(SymMatrix::symmetrize(block), lmi.r));
    }
  }
  return lmi;
}

VerificationReport verify_certificate(const LmiProblem& lmi, const Certificate& cert,
                                      double tol_psd, double tol_feas_rel) {
  if (cert.p.order() != lmi.dims.state) {
    throw AssemblyError("verify_certificate: certificate P order " +
                        std::to_string(cert.p.order()) + " does not match LMI state dimension " +
                        std::to_string(lmi.dims.state));
  }
  if (cert.lambda.size() != lmi.iqc_terms.size()) {
    throw AssemblyError("verify_certificate: certificate multiplier count mismatch");
  }

  VerificationReport rep;
  rep.tol_psd = tol_psd;
  rep.min_eig_p = min_eigenvalue(cert.p);
  rep.lambda_min = cert.lambda.empty() ? 0.0 : *std::min_element(cert.lambda.begin(),
                                                                 cert.lambda.end());
  const SymMatrix lhs = lmi.evaluate_direct(cert.p, cert.lambda);
  rep.max_eig_lhs = max_eigenvalue(lhs);
  rep.tol_feas = tol_feas_rel * (1.0 + frobenius_norm(lhs));
  rep.pass = rep.min_eig_p >= -tol_psd && rep.lambda_min >= 0.0 && rep.max_eig_lhs <= rep.tol_feas;
  return rep;
}

double analytic_bound_qu_li(double sigma2, double beta) {
  if (!(sigma2 >= 0.0 && sigma2 < 1.0)) {
    throw DomainError("analytic_bound_qu_li: sigma2 must lie in [0, 1)");
  }
  if (!(beta > 0.0)) throw DomainError("analytic_bound_qu_li: beta must be positive");
  return (1.0 - sigma2) * (1.0 - sigma2) / (160.0 * beta);
}

bool centralized_feasibility_oracle(double eta, double beta) {
  if (!(beta > 0.0)) throw DomainError("centralized_feasibility_oracle: beta must be positive");
  return eta > 0.0 && eta < 2.0 / beta;
}

LmiProblem make_dgt_lmi(const MixingMatrix& w, double eta, double beta) {
  auto [r, eq] = dgt_realization(w, eta, beta);
  return assemble_lmi(r, eq, build_supply_rate(r), {build_smoothness_iqc(r.output_dim(), beta)});
}

LmiProblem make_centralized_lmi(double eta, double beta) {
  const Realization r = centralized_gd_realization(eta, beta);
  return assemble_lmi(r, std::nullopt, build_supply_rate(r),
                      {build_smoothness_iqc(r.output_dim(), beta)});
}

LmiProblem make_lifted_dgt_lmi(const MixingMatrix& w, double eta, double beta, int d) {
  auto [r1, eq1] = dgt_realization(w, eta, beta);
  auto [r, eq] = lift_dimension(r1, eq1, d);
  return assemble_lmi(r, eq, build_supply_rate(r), {build_smoothness_iqc(r.output_dim(), beta)});
}

}  // namespace iqccert
