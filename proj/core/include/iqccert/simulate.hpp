#pragma once

#include <vector>

#include "iqccert/certify.hpp"
#include "iqccert/model.hpp"

namespace iqccert {

enum class ObjectiveKind { Quadratic, Huber, Logistic };

// A family of per-agent convex objectives with a known smoothness bound,
// separable across the d coordinates:
//   Quadratic: f_i(x) = (a_i/2) ||x - c_i||^2,            beta = max a_i
//   Huber:     f_i(x) = sum_j h_{delta_i}(x_j - c_ij),    beta = 1
//   Logistic:  f_i(x) = sum_j ln(1 + exp(w_i (x_j - c_ij))), beta = max w_i^2/4
struct ObjectiveFamily {
  ObjectiveKind kind = ObjectiveKind::Quadratic;
  int n = 0;
  int dim = 1;
  std::vector<double> coeff;                 // a_i / delta_i / w_i per agent
  std::vector<std::vector<double>> center;   // c_i per agent, length dim

  double beta() const;

  double value(int agent, const std::vector<double>& x) const;
  std::vector<double> gradient(int agent, const std::vector<double>& x) const;

  // f0 = (1/n) sum_i f_i and its gradient, both at a single point x in R^dim.
  double aggregate_value(const std::vector<double>& x) const;
  std::vector<double> aggregate_gradient(const std::vector<double>& x) const;
};

ObjectiveFamily quadratic_family(const std::vector<double>& a,
                                 const std::vector<std::vector<double>>& c);
ObjectiveFamily huber_family(const std::vector<double>& delta,
                             const std::vector<std::vector<double>>& c);
ObjectiveFamily logistic_family(const std::vector<double>& w,
                                const std::vector<std::vector<double>>& c);

// Simulated gradient-tracking run. States are stacked agent-major: entry
// agent*dim + coord. s0 = g(x0); 1^T(s^k - u^k) stays zero along the run.
struct Trajectory {
  int n = 0;
  int dim = 1;
  int steps = 0;
  double eta = 0.0;
  std::vector<std::vector<double>> x;            // k = 0..steps
  std::vector<std::vector<double>> s;
  std::vector<std::vector<double>> u;            // u^k = g(x^k)
  std::vector<std::vector<double>> running_avg;  // (1/(k+1)) sum_{j<=k} x^j
};

Trajectory run_dgt(const ObjectiveFamily& obj, const MixingMatrix& w, double eta,
                   const std::vector<double>& x0, int steps);

struct ReferencePoint {
  std::vector<double> x_star;  // a minimizer of f0
  double f_star = 0.0;
};

// Deterministic inner solve: closed form for quadratics, bisection on the
// aggregate derivative per coordinate otherwise. The achieved gradient norm
// satisfies ||grad f0|| <= 1e-12 (1 + beta) or a SimulationError reports it.
ReferencePoint reference_minimum(const ObjectiveFamily& obj);

// Per-step diagnostics of every certified inequality along a trajectory.
struct DiagnosticsReport {
  double max_dissipation_residual = 0.0;  // max_k V(xi+) - V(xi) - sigma
  double min_iqc_value = 0.0;             // min_k psi(xi, u; M1)
  double max_supplyrate_violation = 0.0;  // max_k sigma0 + average gap
  double max_bound_ratio = 0.0;           // max_K gap_avg(K) (K+1) / V0
  double v0 = 0.0;                        // xi_hat(0)^T P xi_hat(0)

  std::vector<double> dissipation_residual;
  std::vector<double> iqc_value;
  std::vector<double> supply_slack;
  std::vector<double> gap_running_avg;  // (1/n) sum_i [f0(avg x_i^K) - f*]
  std::vector<double> bound_ratio;
};

// `r` must be the realization matching the trajectory (lifted when dim > 1);
// the certificate's P is lifted internally when needed. u^k is recomputed from
// x^k through the gradient map, not taken from the algorithm's bookkeeping.
DiagnosticsReport diagnostics(const Trajectory& traj, const ObjectiveFamily& obj,
                              const Realization& r, const Certificate& cert);

// Certificate-free checks: conservation of 1^T(s-u), the pointwise IQC, and
// the supply-rate bound against the reference minimum.
struct TrajectoryChecks {
  double max_conservation_residual = 0.0;
  double min_iqc_value = 0.0;
  double max_supplyrate_violation = 0.0;
  std::vector<double> gap_running_avg;
};

TrajectoryChecks trajectory_checks(const Trajectory& traj, const ObjectiveFamily& obj);

// Deterministic pseudorandom start in [-1, 1)^{n dim}.
std::vector<double> default_x0(int n, int dim, uint64_t seed = 12345);

}  // namespace iqccert
