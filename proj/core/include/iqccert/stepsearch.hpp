#pragma once

#include <functional>
#include <string>
#include <vector>

#include "iqccert/sdp.hpp"

namespace iqccert {

struct VerdictTraceEntry {
  double eta = 0.0;
  FeasStatus verdict = FeasStatus::Indeterminate;
};

struct StepSearchResult {
  double eta_max = 0.0;         // largest certified step size (= eta_lo)
  double certificate_at = 0.0;  // eta of the stored certificate
  double eta_lo = 0.0;          // feasible bracket end
  double eta_hi = 0.0;          // infeasible bracket end
  double tolerance = 0.0;       // bracket width target
  std::vector<VerdictTraceEntry> trace;
  Certificate certificate;      // witness at eta_lo
};

struct StepSearchOptions {
  double eta_tol = 0.0;  // <= 0 selects 1e-2 / beta
  double eta_cap = 0.0;  // <= 0 selects 10 / beta
  SolveOptions solve;
  int interval_check_points = 8;  // post-bisection feasibility probes inside [eta_tol, eta_lo]
};

using FeasibilityOracle = std::function<FeasibilityResult(double eta)>;

// Bisection over the oracle's verdict: halve from eta_cap until feasible, then
// shrink the bracket to eta_tol, then re-test interior points to confirm the
// feasible set is an interval. Throws StepSearchError on indeterminate
// verdicts, on "no certifiable step size", and on interval-structure failures.
StepSearchResult max_step_size_with(const FeasibilityOracle& oracle, double eta_tol,
                                    double eta_cap, int interval_check_points = 8);

StepSearchResult max_step_size(const MixingMatrix& w, double beta,
                               const StepSearchOptions& opts = {});
StepSearchResult max_step_size_centralized(double beta, const StepSearchOptions& opts = {});

struct SweepRow {
  double sigma = 0.0;
  double eta_max = 0.0;
  double eta_lo = 0.0;
  double eta_hi = 0.0;
  double analytic_bound = 0.0;
  bool ok = false;
  std::string error;
};

// One max_step_size run per grid point on the two-node family, each row paired
// with the analytic bound at sigma2 = |sigma|. Failed rows carry the error and
// do not stop the sweep. Rows may be solved concurrently (jobs > 1); output
// order always matches input order.
std::vector<SweepRow> sweep_sigma(const std::vector<double>& sigma_grid, double beta,
                                  const StepSearchOptions& opts = {}, int jobs = 1);

// CSV schema: "sigma,eta_max,eta_lo,eta_hi,analytic_bound,status".
std::string sweep_csv(const std::vector<SweepRow>& rows);

}  // namespace iqccert
