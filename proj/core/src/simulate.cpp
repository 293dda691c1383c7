#include "iqccert/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "iqccert/util.hpp"

namespace iqccert {

namespace {

double scalar_value(ObjectiveKind kind, double coeff, double z) {
  switch (kind) {
    case ObjectiveKind::Quadratic:
      return 0.5 * coeff * z * z;
    case ObjectiveKind::Huber:
      return std::abs(z) <= coeff ? 0.5 * z * z : coeff * std::abs(z) - 0.5 * coeff * coeff;
    case ObjectiveKind::Logistic: {
      const double a = coeff * z;
      if (a > 35.0) return a;
      if (a < -35.0) return std::exp(a);
      return std::log1p(std::exp(a));
    }
  }
  return 0.0;
}

double scalar_slope(ObjectiveKind kind, double coeff, double z) {
  switch (kind) {
    case ObjectiveKind::Quadratic:
      return coeff * z;
    case ObjectiveKind::Huber:
      return std::clamp(z, -coeff, coeff);
    case ObjectiveKind::Logistic: {
      const double a = coeff * z;
      if (a > 35.0) return coeff;
      if (a < -35.0) return coeff * std::exp(a);
      return coeff / (1.0 + std::exp(-a));
    }
  }
  return 0.0;
}

ObjectiveFamily make_family(ObjectiveKind kind, const std::vector<double>& coeff,
                            const std::vector<std::vector<double>>& c) {
  if (coeff.empty() || coeff.size() != c.size()) {
    throw ValidationError("objective family: coefficient and center counts must match");
  }
  const int dim = static_cast<int>(c.front().size());
  if (dim < 1) throw ValidationError("objective family: dimension must be positive");
  for (const auto& ci : c) {
    if (static_cast<int>(ci.size()) != dim) {
      throw ValidationError("objective family: all centers must share the same dimension");
    }
  }
  ObjectiveFamily f;
  f.kind = kind;
  f.n = static_cast<int>(coeff.size());
  f.dim = dim;
  f.coeff = coeff;
  f.center = c;
  if (!(f.beta() > 0.0)) {
    throw ValidationError("objective family: smoothness bound must be positive");
  }
  return f;
}

}  // namespace

double ObjectiveFamily::beta() const {
  switch (kind) {
    case ObjectiveKind::Quadratic: {
      double b = 0.0;
      for (double a : coeff) b = std::max(b, a);
      return b;
    }
    case ObjectiveKind::Huber:
      return 1.0;
    case ObjectiveKind::Logistic: {
      double b = 0.0;
      for (double w : coeff) b = std::max(b, w * w / 4.0);
      return b;
    }
  }
  return 0.0;
}

double ObjectiveFamily::value(int agent, const std::vector<double>& x) const {
  double v = 0.0;
  for (int j = 0; j < dim; ++j) v += scalar_value(kind, coeff[agent], x[j] - center[agent][j]);
  return v;
}

std::vector<double> ObjectiveFamily::gradient(int agent, const std::vector<double>& x) const {
  std::vector<double> g(dim);
  for (int j = 0; j < dim; ++j) g[j] = scalar_slope(kind, coeff[agent], x[j] - center[agent][j]);
  return g;
}

double ObjectiveFamily::aggregate_value(const std::vector<double>& x) const {
  double v = 0.0;
  for (int i = 0; i < n; ++i) v += value(i, x);
  return v / n;
}

std::vector<double> ObjectiveFamily::aggregate_gradient(const std::vector<double>& x) const {
  std::vector<double> g(dim, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < dim; ++j) {
      g[j] += scalar_slope(kind, coeff[i], x[j] - center[i][j]);
    }
  }
  for (double& v : g) v /= n;
  return g;
}

ObjectiveFamily quadratic_family(const std::vector<double>& a,
                                 const std::vector<std::vector<double>>& c) {
  for (double ai : a) {
    if (ai < 0.0) throw ValidationError("quadratic family: curvatures must be nonnegative");
  }
  return make_family(ObjectiveKind::Quadratic, a, c);
}

ObjectiveFamily huber_family(const std::vector<double>& delta,
                             const std::vector<std::vector<double>>& c) {
  for (double d : delta) {
    if (!(d > 0.0)) throw ValidationError("huber family: delta must be positive");
  }
  return make_family(ObjectiveKind::Huber, delta, c);
}

ObjectiveFamily logistic_family(const std::vector<double>& w,
                                const std::vector<std::vector<double>>& c) {
  bool has_pos = false, has_neg = false;
  for (double wi : w) {
    has_pos = has_pos || wi > 0.0;
    has_neg = has_neg || wi < 0.0;
  }
  // The aggregate of one-sided logistic losses is monotone and attains no
  // minimum; mixed signs make it coercive.
  if (!has_pos || !has_neg) {
    throw ValidationError("logistic family: coefficients must include both signs");
  }
  return make_family(ObjectiveKind::Logistic, w, c);
}

namespace {

// y = (W kron I_dim) x, agent-major stacking.
void apply_mixing(const Matrix& w, int dim, const std::vector<double>& x,
                  std::vector<double>& y) {
  const int n = w.rows();
  std::fill(y.begin(), y.end(), 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double wij = w(i, j);
      if (wij == 0.0) continue;
      for (int c = 0; c < dim; ++c) y[i * dim + c] += wij * x[j * dim + c];
    }
  }
}

std::vector<double> stacked_gradient(const ObjectiveFamily& obj, const std::vector<double>& x) {
  std::vector<double> g(static_cast<size_t>(obj.n) * obj.dim);
  std::vector<double> xi(obj.dim);
  for (int i = 0; i < obj.n; ++i) {
    for (int j = 0; j < obj.dim; ++j) xi[j] = x[i * obj.dim + j];
    const std::vector<double> gi = obj.gradient(i, xi);
    for (int j = 0; j < obj.dim; ++j) g[i * obj.dim + j] = gi[j];
  }
  return g;
}

bool finite(const std::vector<double>& v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

}  // namespace

Trajectory run_dgt(const ObjectiveFamily& obj, const MixingMatrix& w, double eta,
                   const std::vector<double>& x0, int steps) {
  if (obj.n != w.n) throw ValidationError("run_dgt: objective and mixing matrix agent counts differ");
  if (!(eta > 0.0)) throw DomainError("run_dgt: eta must be positive");
  if (steps < 0) throw DomainError("run_dgt: steps must be nonnegative");
  const size_t nd = static_cast<size_t>(obj.n) * obj.dim;
  if (x0.size() != nd) throw ValidationError("run_dgt: x0 has wrong dimension");

  Trajectory traj;
  traj.n = obj.n;
  traj.dim = obj.dim;
  traj.steps = steps;
  traj.eta = eta;
  traj.x.reserve(steps + 1);
  traj.s.reserve(steps + 1);
  traj.u.reserve(steps + 1);
  traj.running_avg.reserve(steps + 1);

  std::vector<double> x = x0;
  std::vector<double> u = stacked_gradient(obj, x);
  std::vector<double> s = u;  // s0 = g(x0)
  std::vector<double> avg = x;
  std::vector<double> wx(nd), ws(nd);

  traj.x.push_back(x);
  traj.s.push_back(s);
  traj.u.push_back(u);
  traj.running_avg.push_back(avg);

  for (int k = 1; k <= steps; ++k) {
    apply_mixing(w.w, obj.dim, x, wx);
    apply_mixing(w.w, obj.dim, s, ws);
    for (size_t i = 0; i < nd; ++i) wx[i] -= eta * s[i];
    std::vector<double> u_next = stacked_gradient(obj, wx);
    for (size_t i = 0; i < nd; ++i) ws[i] += u_next[i] - u[i];

    x = wx;
    s = ws;
    u = std::move(u_next);
    if (!finite(x) || !finite(s)) {
      throw SimulationError("run_dgt: state diverged at step " + std::to_string(k));
    }
    for (size_t i = 0; i < nd; ++i) avg[i] += (x[i] - avg[i]) / (k + 1);

    traj.x.push_back(x);
    traj.s.push_back(s);
    traj.u.push_back(u);
    traj.running_avg.push_back(avg);
  }
  return traj;
}

namespace {

double coordinate_slope(const ObjectiveFamily& obj, int j, double z) {
  double g = 0.0;
  for (int i = 0; i < obj.n; ++i) g += scalar_slope(obj.kind, obj.coeff[i], z - obj.center[i][j]);
  return g / obj.n;
}

double minimize_coordinate(const ObjectiveFamily& obj, int j) {
  double lo = obj.center[0][j], hi = obj.center[0][j];
  for (int i = 1; i < obj.n; ++i) {
    lo = std::min(lo, obj.center[i][j]);
    hi = std::max(hi, obj.center[i][j]);
  }
  lo -= 1.0;
  hi += 1.0;

  double width = std::max(1.0, hi - lo);
  int expansions = 0;
  while (coordinate_slope(obj, j, lo) > 0.0 && expansions < 150) {
    lo -= width;
    width *= 2.0;
    ++expansions;
  }
  width = std::max(1.0, hi - lo);
  while (coordinate_slope(obj, j, hi) < 0.0 && expansions < 150) {
    hi += width;
    width *= 2.0;
    ++expansions;
  }
  if (expansions >= 150) {
    const double g = coordinate_slope(obj, j, 0.5 * (lo + hi));
    throw SimulationError(
        "reference_minimum: no sign change found for coordinate " + std::to_string(j) +
        " (achieved gradient " + format_g12(g) + "); the family may have no minimizer");
  }

  for (int it = 0; it < 200 && hi - lo > 1e-16 * (1.0 + std::abs(lo) + std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (coordinate_slope(obj, j, mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

ReferencePoint reference_minimum(const ObjectiveFamily& obj) {
  ReferencePoint ref;
  ref.x_star.resize(obj.dim);

  if (obj.kind == ObjectiveKind::Quadratic) {
    double total = 0.0;
    for (double a : obj.coeff) total += a;
    for (int j = 0; j < obj.dim; ++j) {
      double s = 0.0;
      for (int i = 0; i < obj.n; ++i) s += obj.coeff[i] * obj.center[i][j];
      ref.x_star[j] = s / total;
    }
  } else {
    for (int j = 0; j < obj.dim; ++j) ref.x_star[j] = minimize_coordinate(obj, j);
  }

  const std::vector<double> g = obj.aggregate_gradient(ref.x_star);
  double gnorm = 0.0;
  for (double v : g) gnorm += v * v;
  gnorm = std::sqrt(gnorm);
  if (gnorm > 1e-12 * (1.0 + obj.beta())) {
    throw SimulationError("reference_minimum: achieved gradient norm " + format_g12(gnorm) +
                          " exceeds tolerance");
  }
  ref.f_star = obj.aggregate_value(ref.x_star);
  return ref;
}

namespace {

struct ShiftedFrame {
  std::vector<double> xi_star;  // (1 kron x*, -u*)
  std::vector<double> u_star;   // stacked gradients at consensus x*
  double f_star = 0.0;
  std::vector<double> x_star;
};

ShiftedFrame shifted_frame(const ObjectiveFamily& obj) {
  const ReferencePoint ref = reference_minimum(obj);
  ShiftedFrame fr;
  fr.x_star = ref.x_star;
  fr.f_star = ref.f_star;
  const size_t nd = static_cast<size_t>(obj.n) * obj.dim;
  fr.u_star.resize(nd);
  for (int i = 0; i < obj.n; ++i) {
    const std::vector<double> gi = obj.gradient(i, ref.x_star);
    for (int j = 0; j < obj.dim; ++j) fr.u_star[i * obj.dim + j] = gi[j];
  }
  fr.xi_star.resize(2 * nd);
  for (int i = 0; i < obj.n; ++i)
    for (int j = 0; j < obj.dim; ++j) fr.xi_star[i * obj.dim + j] = ref.x_star[j];
  for (size_t i = 0; i < nd; ++i) fr.xi_star[nd + i] = -fr.u_star[i];
  return fr;
}

// (1/n) sum_i [f0(x_i) - f*] for a stacked point.
double average_gap(const ObjectiveFamily& obj, const std::vector<double>& stacked,
                   double f_star) {
  double gap = 0.0;
  std::vector<double> xi(obj.dim);
  for (int i = 0; i < obj.n; ++i) {
    for (int j = 0; j < obj.dim; ++j) xi[j] = stacked[i * obj.dim + j];
    gap += obj.aggregate_value(xi) - f_star;
  }
  return gap / obj.n;
}

}  // namespace

DiagnosticsReport diagnostics(const Trajectory& traj, const ObjectiveFamily& obj,
                              const Realization& r, const Certificate& cert) {
  if (traj.n != obj.n || traj.dim != obj.dim) {
    throw ValidationError("diagnostics: trajectory and objective disagree");
  }
  if (r.n != traj.n || r.dim != traj.dim) {
    throw ValidationError("diagnostics: realization does not match the trajectory dimensions");
  }
  const int nd = traj.n * traj.dim;
  if (cert.p.order() != r.state_dim() && cert.p.order() * traj.dim != r.state_dim()) {
    throw ValidationError("diagnostics: certificate P order does not match the realization");
  }

  const SymMatrix p = cert.p.order() == r.state_dim()
                          ? cert.p
                          : SymMatrix::symmetrize(
                                kron(cert.p.to_matrix(), Matrix::identity(traj.dim)));
  const SymMatrix s0 = build_supply_rate(r).s0;
  const SymMatrix m1 = build_smoothness_iqc(r.output_dim(), cert.beta).m;

  const ShiftedFrame fr = shifted_frame(obj);

  DiagnosticsReport rep;
  const int steps = traj.steps;
  rep.dissipation_residual.resize(steps + 1);
  rep.iqc_value.resize(steps + 1);
  rep.supply_slack.resize(steps + 1);
  rep.gap_running_avg.resize(steps + 1);
  rep.bound_ratio.resize(steps + 1);
  rep.max_dissipation_residual = -std::numeric_limits<double>::infinity();
  rep.min_iqc_value = std::numeric_limits<double>::infinity();
  rep.max_supplyrate_violation = -std::numeric_limits<double>::infinity();
  rep.max_bound_ratio = -std::numeric_limits<double>::infinity();

  std::vector<double> xi_hat(2 * nd), u_hat(nd), z(3 * nd), xu(2 * nd);

  for (int k = 0; k <= steps; ++k) {
    const std::vector<double> u_k = stacked_gradient(obj, traj.x[k]);
    for (int i = 0; i < nd; ++i) {
      xi_hat[i] = traj.x[k][i] - fr.xi_star[i];
      xi_hat[nd + i] = (traj.s[k][i] - u_k[i]) - fr.xi_star[nd + i];
      u_hat[i] = u_k[i] - fr.u_star[i];
    }
    for (int i = 0; i < 2 * nd; ++i) z[i] = xi_hat[i];
    for (int i = 0; i < nd; ++i) z[2 * nd + i] = u_hat[i];
    const std::vector<double> x_hat = mat_vec(r.c, xi_hat);
    for (int i = 0; i < nd; ++i) {
      xu[i] = x_hat[i];
      xu[nd + i] = u_hat[i];
    }

    const double sigma0 = quadratic_form(s0, z);
    const double psi = quadratic_form(m1, xu);
    double sigma = sigma0;
    for (double lam : cert.lambda) sigma -= lam * psi;

    const std::vector<double> a_xi = mat_vec(r.a, xi_hat);
    const std::vector<double> b_u = mat_vec(r.b, u_hat);
    std::vector<double> xi_next(2 * nd);
    for (int i = 0; i < 2 * nd; ++i) xi_next[i] = a_xi[i] + b_u[i];

    const double v_now = quadratic_form(p, xi_hat);
    const double v_next = quadratic_form(p, xi_next);
    if (k == 0) rep.v0 = v_now;

    const double gap_k = average_gap(obj, traj.x[k], fr.f_star);
    const double gap_avg = average_gap(obj, traj.running_avg[k], fr.f_star);

    rep.dissipation_residual[k] = v_next - v_now - sigma;
    rep.iqc_value[k] = psi;
    rep.supply_slack[k] = sigma0 + gap_k;
    rep.gap_running_avg[k] = gap_avg;
    if (rep.v0 > 0.0) {
      rep.bound_ratio[k] = gap_avg * (k + 1) / rep.v0;
    } else {
      rep.bound_ratio[k] = gap_avg * (k + 1) <= 1e-12
                               ? 0.0
                               : std::numeric_limits<double>::infinity();
    }

    rep.max_dissipation_residual = std::max(rep.max_dissipation_residual,
                                            rep.dissipation_residual[k]);
    rep.min_iqc_value = std::min(rep.min_iqc_value, rep.iqc_value[k]);
    rep.max_supplyrate_violation = std::max(rep.max_supplyrate_violation, rep.supply_slack[k]);
    rep.max_bound_ratio = std::max(rep.max_bound_ratio, rep.bound_ratio[k]);
  }
  return rep;
}

TrajectoryChecks trajectory_checks(const Trajectory& traj, const ObjectiveFamily& obj) {
  if (traj.n != obj.n || traj.dim != obj.dim) {
    throw ValidationError("trajectory_checks: trajectory and objective disagree");
  }
  const int nd = traj.n * traj.dim;
  const double beta = obj.beta();
  const ShiftedFrame fr = shifted_frame(obj);

  TrajectoryChecks checks;
  checks.min_iqc_value = std::numeric_limits<double>::infinity();
  checks.max_conservation_residual = 0.0;
  checks.max_supplyrate_violation = -std::numeric_limits<double>::infinity();
  checks.gap_running_avg.resize(traj.steps + 1);

  std::vector<double> x_hat(nd), u_hat(nd);
  for (int k = 0; k <= traj.steps; ++k) {
    const std::vector<double> u_k = stacked_gradient(obj, traj.x[k]);

    // 1^T (s - u) per coordinate.
    for (int c = 0; c < traj.dim; ++c) {
      double sum = 0.0;
      for (int i = 0; i < traj.n; ++i) sum += traj.s[k][i * traj.dim + c] - u_k[i * traj.dim + c];
      checks.max_conservation_residual = std::max(checks.max_conservation_residual,
                                                  std::abs(sum));
    }

    for (int i = 0; i < nd; ++i) {
      x_hat[i] = traj.x[k][i] - fr.xi_star[i];
      u_hat[i] = u_k[i] - fr.u_star[i];
    }

    // psi = 2 beta x_hat' u_hat - 2 ||u_hat||^2
    double xu = 0.0, uu = 0.0;
    for (int i = 0; i < nd; ++i) {
      xu += x_hat[i] * u_hat[i];
      uu += u_hat[i] * u_hat[i];
    }
    const double psi = 2.0 * beta * xu - 2.0 * uu;
    checks.min_iqc_value = std::min(checks.min_iqc_value, psi);

    // sigma0 = -(1/n)(beta x_hat' Jperp x_hat + x_hat' J u_hat), per coordinate means.
    double sigma0 = 0.0;
    for (int c = 0; c < traj.dim; ++c) {
      double x_mean = 0.0, u_mean = 0.0;
      for (int i = 0; i < traj.n; ++i) {
        x_mean += x_hat[i * traj.dim + c];
        u_mean += u_hat[i * traj.dim + c];
      }
      x_mean /= traj.n;
      u_mean /= traj.n;
      double dev = 0.0, xsum = 0.0;
      for (int i = 0; i < traj.n; ++i) {
        const double xc = x_hat[i * traj.dim + c];
        dev += (xc - x_mean) * (xc - x_mean);
        xsum += xc;
      }
      sigma0 -= (beta * dev + xsum * u_mean) / traj.n;
    }
    const double gap_k = average_gap(obj, traj.x[k], fr.f_star);
    checks.max_supplyrate_violation = std::max(checks.max_supplyrate_violation, sigma0 + gap_k);
    checks.gap_running_avg[k] = average_gap(obj, traj.running_avg[k], fr.f_star);
  }
  return checks;
}

std::vector<double> default_x0(int n, int dim, uint64_t seed) {
  DeterministicRng rng(seed);
  std::vector<double> x0(static_cast<size_t>(n) * dim);
  for (double& v : x0) v = rng.uniform(-1.0, 1.0);
  return x0;
}

}  // namespace iqccert
