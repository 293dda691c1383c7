#include "iqccert/sdp.hpp"

#include <cmath>
#include <utility>
#include <vector>

#include "iqccert/util.hpp"

namespace iqccert {

namespace {

// One PSD block of the LMI  F(y) = f0 + sum_i y_i coeff_i  >= 0.
struct Block {
  int order = 0;
  SymMatrix f0;
  std::vector<std::pair<int, SymMatrix>> coeff;  // (variable index, coefficient matrix)
};

struct BlockLmi {
  int num_vars = 0;
  int barrier_degree = 0;  // sum of block orders
  std::vector<Block> blocks;
  std::vector<double> objective;  // minimize objective^T y

  SymMatrix eval_block(const Block& b, const std::vector<double>& y) const {
    SymMatrix v = b.f0;
    for (const auto& [idx, c] : b.coeff) {
      const double yi = y[idx];
      if (yi == 0.0) continue;
      for (int i = 0; i < v.order(); ++i)
        for (int j = i; j < v.order(); ++j) v.set(i, j, v.at(i, j) + yi * c.at(i, j));
    }
    return v;
  }
};

// Variable layout: [P upper triangle row-major | lambda | t].
BlockLmi build_block_lmi(const LmiProblem& lmi, double trace_cap) {
  const int m = lmi.dims.state;
  const int np = lmi.num_p_vars();
  const int nl = static_cast<int>(lmi.iqc_terms.size());
  const int t_idx = np + nl;

  BlockLmi sdp;
  sdp.num_vars = np + nl + 1;
  sdp.objective.assign(sdp.num_vars, 0.0);
  sdp.objective[t_idx] = 1.0;

  // Slack block: t I - LHS(P, lambda) >= 0.
  Block slack;
  slack.order = lmi.dims.reduced;
  slack.f0 = -1.0 * lmi.base;
  for (int v = 0; v < np; ++v) slack.coeff.emplace_back(v, -1.0 * lmi.p_basis[v]);
  for (int i = 0; i < nl; ++i) slack.coeff.emplace_back(np + i, -1.0 * lmi.iqc_terms[i]);
  slack.coeff.emplace_back(t_idx, SymMatrix::identity(lmi.dims.reduced));
  sdp.blocks.push_back(std::move(slack));

  // P >= 0.
  Block pblock;
  pblock.order = m;
  pblock.f0 = SymMatrix(m);
  {
    int v = 0;
    for (int k = 0; k < m; ++k) {
      for (int l = k; l < m; ++l, ++v) {
        SymMatrix e(m);
        e.set(k, l, 1.0);
        pblock.coeff.emplace_back(v, e);
      }
    }
  }
  sdp.blocks.push_back(std::move(pblock));

  // lambda_i >= 0 as scalar blocks.
  for (int i = 0; i < nl; ++i) {
    Block lb;
    lb.order = 1;
    lb.f0 = SymMatrix(1);
    SymMatrix one(1);
    one.set(0, 0, 1.0);
    lb.coeff.emplace_back(np + i, one);
    sdp.blocks.push_back(std::move(lb));
  }

  // trace cap: trace_cap - trace(P) - sum lambda >= 0.
  Block cap;
  cap.order = 1;
  cap.f0 = SymMatrix(1);
  cap.f0.set(0, 0, trace_cap);
  {
    int v = 0;
    SymMatrix neg(1);
    neg.set(0, 0, -1.0);
    for (int k = 0; k < m; ++k) {
      for (int l = k; l < m; ++l, ++v) {
        if (k == l) cap.coeff.emplace_back(v, neg);
      }
    }
    for (int i = 0; i < nl; ++i) cap.coeff.emplace_back(np + i, neg);
  }
  sdp.blocks.push_back(std::move(cap));

  for (const Block& b : sdp.blocks) sdp.barrier_degree += b.order;
  return sdp;
}

struct BarrierState {
  std::vector<Matrix> chol;  // Cholesky factor per block
  double barrier = 0.0;      // -sum logdet
  bool interior = false;
};

BarrierState factor_blocks(const BlockLmi& sdp, const std::vector<double>& y) {
  BarrierState st;
  st.chol.resize(sdp.blocks.size());
  st.interior = true;
  for (size_t b = 0; b < sdp.blocks.size(); ++b) {
    const SymMatrix f = sdp.eval_block(sdp.blocks[b], y);
    if (!f.all_finite() || !cholesky(f, st.chol[b])) {
      st.interior = false;
      return st;
    }
    for (int i = 0; i < f.order(); ++i) st.barrier -= 2.0 * std::log(st.chol[b](i, i));
  }
  return st;
}

// Newton direction for f(y) = c^T y / mu - sum logdet F_b(y). Fills grad and
// dy and returns the squared Newton decrement; false when the Hessian solve
// fails outright.
bool newton_direction(const BlockLmi& sdp, const BarrierState& st, double mu,
                      std::vector<double>& grad, std::vector<double>& dy, double& dec2) {
  const int q = sdp.num_vars;
  grad.assign(q, 0.0);
  for (int i = 0; i < q; ++i) grad[i] = sdp.objective[i] / mu;

  SymMatrix hess(q);

  for (size_t b = 0; b < sdp.blocks.size(); ++b) {
    const Block& blk = sdp.blocks[b];
    const Matrix& lower = st.chol[b];
    const int nb = blk.order;
    const int nv = static_cast<int>(blk.coeff.size());

    // S_i = L^{-1} C_i L^{-T}; grad_i += -tr(S_i), hess_ij += <S_i, S_j>.
    std::vector<Matrix> s(nv);
    for (int i = 0; i < nv; ++i) {
      const Matrix half = forward_substitute(lower, blk.coeff[i].second.to_matrix());
      s[i] = forward_substitute(lower, transpose(half));
    }
    for (int i = 0; i < nv; ++i) {
      double tr = 0.0;
      for (int d = 0; d < nb; ++d) tr += s[i](d, d);
      grad[blk.coeff[i].first] -= tr;
      for (int j = i; j < nv; ++j) {
        double h = 0.0;
        for (int r = 0; r < nb; ++r)
          for (int c = 0; c < nb; ++c) h += s[i](r, c) * s[j](r, c);
        const int vi = blk.coeff[i].first;
        const int vj = blk.coeff[j].first;
        hess.add(std::min(vi, vj), std::max(vi, vj), h);
      }
    }
  }

  // Jacobi scaling: the raw Hessian mixes barrier terms across wildly
  // different variable scales, and equilibrated solves stay usable far past
  // the point where the raw factorization degrades.
  std::vector<double> d(q);
  for (int i = 0; i < q; ++i) {
    const double hii = hess.at(i, i);
    d[i] = hii > 0.0 ? 1.0 / std::sqrt(hii) : 1.0;
  }
  SymMatrix scaled(q);
  for (int i = 0; i < q; ++i)
    for (int j = i; j < q; ++j) scaled.set(i, j, hess.at(i, j) * d[i] * d[j]);

  Matrix hl;
  double ridge = 0.0;
  for (int attempt = 0; attempt < 8; ++attempt) {
    SymMatrix h = scaled;
    if (ridge > 0.0) {
      for (int i = 0; i < q; ++i) h.set(i, i, h.at(i, i) + ridge);
    }
    if (cholesky(h, hl)) {
      std::vector<double> rhs(q);
      for (int i = 0; i < q; ++i) rhs[i] = -grad[i] * d[i];
      std::vector<double> z = cholesky_solve(hl, rhs);
      dy.resize(q);
      for (int i = 0; i < q; ++i) dy[i] = z[i] * d[i];
      dec2 = -dot(grad, dy);
      return std::isfinite(dec2);
    }
    ridge = ridge == 0.0 ? 1e-13 : ridge * 100.0;
  }
  return false;
}

struct PathState {
  std::vector<double> y;
  BarrierState factors;
  int iterations = 0;
  bool stalled = false;
};

// Damped Newton centering at fixed mu. Returns true when the Newton decrement
// target was reached within the iteration budget.
bool center(const BlockLmi& sdp, double mu, double dec2_target, int iter_cap, PathState& ps) {
  std::vector<double> grad, dy, ytrial(sdp.num_vars);
  for (int inner = 0; inner < 80; ++inner) {
    if (ps.iterations >= iter_cap) return false;
    double dec2 = 0.0;
    if (!newton_direction(sdp, ps.factors, mu, grad, dy, dec2)) {
      ps.stalled = true;
      return false;
    }
    ++ps.iterations;
    if (dec2 <= dec2_target) return true;

    const double f0 = dot(sdp.objective, ps.y) / mu + ps.factors.barrier;
    const double slope = dot(grad, dy);
    double step = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      for (int i = 0; i < sdp.num_vars; ++i) ytrial[i] = ps.y[i] + step * dy[i];
      BarrierState trial = factor_blocks(sdp, ytrial);
      if (trial.interior) {
        const double ftrial = dot(sdp.objective, ytrial) / mu + trial.barrier;
        if (ftrial <= f0 + 0.25 * step * slope) {
          ps.y = ytrial;
          ps.factors = std::move(trial);
          accepted = true;
          break;
        }
      }
      step *= 0.5;
    }
    if (!accepted) {
      ps.stalled = true;
      return false;
    }
  }
  return false;
}

}  // namespace

FeasibilityResult solve_feasibility(const LmiProblem& lmi, double tol, int iter_cap) {
  SolveOptions opts;
  opts.tol = tol;
  opts.iter_cap = iter_cap;
  return solve_feasibility(lmi, opts);
}

FeasibilityResult solve_feasibility(const LmiProblem& lmi, const SolveOptions& opts) {
  if (!(opts.tol > 0.0)) throw DomainError("solve_feasibility: tol must be positive");

  const BlockLmi sdp = build_block_lmi(lmi, opts.trace_cap);
  const int np = lmi.num_p_vars();
  const int nl = static_cast<int>(lmi.iqc_terms.size());
  const int t_idx = np + nl;
  const double nu = sdp.barrier_degree;

  const double scale = 1.0 + frobenius_norm(lmi.base);
  const double threshold = opts.tol * scale;
  const double gap_target = opts.gap_factor * threshold;
  const double mu_final = gap_target / nu;

  auto extract_certificate = [&](const std::vector<double>& y) {
    SymMatrix p(lmi.dims.state);
    int v = 0;
    for (int k = 0; k < lmi.dims.state; ++k)
      for (int l = k; l < lmi.dims.state; ++l, ++v) p.set(k, l, y[v]);
    std::vector<double> lambda(nl);
    for (int i = 0; i < nl; ++i) lambda[i] = y[np + i];
    Certificate cert;
    cert.p = std::move(p);
    cert.lambda = std::move(lambda);
    cert.eta = lmi.realization.eta;
    cert.beta = lmi.realization.beta;
    cert.n = lmi.realization.n;
    cert.w_digest = lmi.realization.w_digest;
    return cert;
  };

  PathState ps;
  ps.y.assign(sdp.num_vars, 0.0);
  {
    // Strictly interior start: P = I, lambda = 1, t above the matching LHS.
    SymMatrix p0 = SymMatrix::identity(lmi.dims.state);
    std::vector<double> lam0(nl, 1.0);
    int v = 0;
    for (int k = 0; k < lmi.dims.state; ++k)
      for (int l = k; l < lmi.dims.state; ++l, ++v) ps.y[v] = p0.at(k, l);
    for (int i = 0; i < nl; ++i) ps.y[np + i] = 1.0;
    ps.y[t_idx] = max_eigenvalue(lmi.evaluate(p0, lam0)) + 1.0 + 0.1 * scale;
  }
  ps.factors = factor_blocks(sdp, ps.y);

  FeasibilityResult res;
  if (!ps.factors.interior) {
    res.status = FeasStatus::Indeterminate;
    res.reason = "initial point is not strictly interior";
    return res;
  }

  double mu = std::max(1.0, std::abs(ps.y[t_idx]));
  bool have_centered = false;
  double centered_gap = 0.0;

  while (true) {
    const bool final_stage = mu <= mu_final;
    const bool centered = center(sdp, mu, final_stage ? 1e-10 : 1e-5, opts.iter_cap, ps);
    if (centered) {
      have_centered = true;
      centered_gap = 1.5 * nu * mu;
      // A centered point certifies t_opt >= t - gap; stop as soon as that
      // proves infeasibility at the configured tolerance.
      if (ps.y[t_idx] - centered_gap > threshold) {
        res.status = FeasStatus::Infeasible;
        res.best_margin = ps.y[t_idx] - centered_gap;
        res.iterations = ps.iterations;
        res.objective_t = ps.y[t_idx];
        res.gap = centered_gap;
        return res;
      }
      // Symmetrically, stop as soon as the current witness already passes the
      // independent check; later stages only polish the margins.
      Certificate cert = extract_certificate(ps.y);
      const VerificationReport rep = verify_certificate(lmi, cert, 1e-9, opts.tol);
      if (rep.pass) {
        cert.margins = CertificateMargins{rep.min_eig_p, rep.max_eig_lhs, rep.tol_feas};
        res.status = FeasStatus::Feasible;
        res.certificate = std::move(cert);
        res.iterations = ps.iterations;
        res.objective_t = ps.y[t_idx];
        res.gap = centered_gap;
        return res;
      }
    }
    if (!centered || final_stage) break;
    mu = std::max(mu * 0.2, mu_final);
  }

  const double t_hat = ps.y[t_idx];
  res.iterations = ps.iterations;
  res.objective_t = t_hat;
  res.gap = have_centered ? centered_gap : 1.5 * nu * mu;

  // Feasibility is decided by the witness itself: the extracted (P, lambda)
  // must pass the independent eigenvalue check at the configured tolerance.
  // This keeps the verdict sound even when centering stops early.
  Certificate cert = extract_certificate(ps.y);
  const VerificationReport rep = verify_certificate(lmi, cert, 1e-9, opts.tol);
  cert.margins = CertificateMargins{rep.min_eig_p, rep.max_eig_lhs, rep.tol_feas};
  if (rep.pass) {
    res.status = FeasStatus::Feasible;
    res.certificate = std::move(cert);
    return res;
  }

  if (ps.iterations >= opts.iter_cap) {
    res.status = FeasStatus::Indeterminate;
    res.reason = "iteration cap exceeded with duality gap " + format_g12(res.gap);
    return res;
  }
  res.status = FeasStatus::Indeterminate;
  res.reason = ps.stalled ? "newton steps stalled before deciding feasibility"
                          : "optimal slack within the tolerance band of the threshold";
  return res;
}

}  // namespace iqccert
