#include "iqccert/stepsearch.hpp"

#include <atomic>
#include <cmath>
#include <thread>
#include <utility>

#include "iqccert/util.hpp"

namespace iqccert {

namespace {

FeasStatus probe(const FeasibilityOracle& oracle, double eta,
                 std::vector<VerdictTraceEntry>& trace, Certificate* best, double* best_eta,
                 FeasibilityResult* last) {
  FeasibilityResult r = oracle(eta);
  trace.push_back({eta, r.status});
  if (r.status == FeasStatus::Feasible && best != nullptr && eta > *best_eta) {
    *best = *r.certificate;
    *best_eta = eta;
  }
  if (last != nullptr) *last = std::move(r);
  return trace.back().verdict;
}

[[noreturn]] void indeterminate_abort(double eta, const FeasibilityResult& r) {
  throw StepSearchError("solver returned indeterminate at eta=" + format_g12(eta) + ": " +
                        r.reason);
}

}  // namespace

StepSearchResult max_step_size_with(const FeasibilityOracle& oracle, double eta_tol,
                                    double eta_cap, int interval_check_points) {
  if (!(eta_tol > 0.0)) throw DomainError("max_step_size: eta_tol must be positive");
  if (!(eta_cap > 0.0)) throw DomainError("max_step_size: eta_cap must be positive");

  StepSearchResult res;
  res.tolerance = eta_tol;
  Certificate best;
  double best_eta = -1.0;
  FeasibilityResult last;

  // Halve from the cap until feasible; the previous probe seeds the
  // infeasible bracket end.
  double eta = eta_cap;
  double eta_lo = -1.0, eta_hi = -1.0;
  for (int halving = 0; halving <= 10; ++halving) {
    const FeasStatus v = probe(oracle, eta, res.trace, &best, &best_eta, &last);
    if (v == FeasStatus::Indeterminate) indeterminate_abort(eta, last);
    if (v == FeasStatus::Feasible) {
      eta_lo = eta;
      break;
    }
    eta_hi = eta;
    eta /= 2.0;
  }
  if (eta_lo < 0.0) {
    throw StepSearchError("no certifiable step size found: infeasible down to eta=" +
                          format_g12(eta_cap / 1024.0));
  }
  if (eta_hi < 0.0) {
    throw StepSearchError("step size is feasible at eta_cap=" + format_g12(eta_cap) +
                          "; raise the cap to bracket the maximum");
  }

  while (eta_hi - eta_lo > eta_tol) {
    const double mid = 0.5 * (eta_lo + eta_hi);
    const FeasStatus v = probe(oracle, mid, res.trace, &best, &best_eta, &last);
    if (v == FeasStatus::Indeterminate) indeterminate_abort(mid, last);
    if (v == FeasStatus::Feasible) {
      eta_lo = mid;
    } else {
      eta_hi = mid;
    }
  }

  // Bisection assumes the feasible step sizes form an interval; re-test
  // interior points so the assumption is checked rather than trusted.
  for (int j = 1; j <= interval_check_points; ++j) {
    const double eta_j =
        eta_tol + (eta_lo - eta_tol) * static_cast<double>(j) / (interval_check_points + 1);
    if (!(eta_j > 0.0) || eta_j >= eta_lo) continue;
    const FeasStatus v = probe(oracle, eta_j, res.trace, nullptr, nullptr, &last);
    if (v == FeasStatus::Indeterminate) indeterminate_abort(eta_j, last);
    if (v != FeasStatus::Feasible) {
      throw StepSearchError("feasibility is not an interval: infeasible at eta=" +
                            format_g12(eta_j) + " below eta_max=" + format_g12(eta_lo));
    }
  }

  res.eta_max = eta_lo;
  res.eta_lo = eta_lo;
  res.eta_hi = eta_hi;
  res.certificate_at = best_eta;
  res.certificate = std::move(best);
  return res;
}

namespace {

StepSearchOptions resolve(const StepSearchOptions& opts, double beta) {
  StepSearchOptions r = opts;
  if (r.eta_tol <= 0.0) r.eta_tol = 1e-2 / beta;
  if (r.eta_cap <= 0.0) r.eta_cap = 10.0 / beta;
  return r;
}

}  // namespace

StepSearchResult max_step_size(const MixingMatrix& w, double beta, const StepSearchOptions& opts) {
  if (!(beta > 0.0)) throw DomainError("max_step_size: beta must be positive");
  const StepSearchOptions o = resolve(opts, beta);
  FeasibilityOracle oracle = [&w, beta, &o](double eta) {
    return solve_feasibility(make_dgt_lmi(w, eta, beta), o.solve);
  };
  return max_step_size_with(oracle, o.eta_tol, o.eta_cap, o.interval_check_points);
}

StepSearchResult max_step_size_centralized(double beta, const StepSearchOptions& opts) {
  if (!(beta > 0.0)) throw DomainError("max_step_size: beta must be positive");
  const StepSearchOptions o = resolve(opts, beta);
  FeasibilityOracle oracle = [beta, &o](double eta) {
    return solve_feasibility(make_centralized_lmi(eta, beta), o.solve);
  };
  return max_step_size_with(oracle, o.eta_tol, o.eta_cap, o.interval_check_points);
}

std::vector<SweepRow> sweep_sigma(const std::vector<double>& sigma_grid, double beta,
                                  const StepSearchOptions& opts, int jobs) {
  const int rows = static_cast<int>(sigma_grid.size());
  std::vector<SweepRow> out(rows);

  auto run_row = [&](int i) {
    SweepRow row;
    row.sigma = sigma_grid[i];
    try {
      row.analytic_bound = analytic_bound_qu_li(std::abs(row.sigma), beta);
      const StepSearchResult r = max_step_size(two_node_w(row.sigma), beta, opts);
      row.eta_max = r.eta_max;
      row.eta_lo = r.eta_lo;
      row.eta_hi = r.eta_hi;
      row.ok = true;
    } catch (const std::exception& e) {
      row.ok = false;
      row.error = e.what();
      row.eta_max = row.eta_lo = row.eta_hi = std::nan("");
    }
    out[i] = std::move(row);
  };

  const int workers = std::max(1, std::min(jobs, rows));
  if (workers == 1) {
    for (int i = 0; i < rows; ++i) run_row(i);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int t = 0; t < workers; ++t) {
      pool.emplace_back([&]() {
        for (int i = next.fetch_add(1); i < rows; i = next.fetch_add(1)) run_row(i);
      });
    }
    for (std::thread& t : pool) t.join();
  }
  return out;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string csv = "sigma,eta_max,eta_lo,eta_hi,analytic_bound,status\n";
  for (const SweepRow& r : rows) {
    csv += format_g12(r.sigma);
    csv += ',';
    csv += format_g12(r.eta_max);
    csv += ',';
    csv += format_g12(r.eta_lo);
    csv += ',';
    csv += format_g12(r.eta_hi);
    csv += ',';
    csv += format_g12(r.analytic_bound);
    csv += ',';
    csv += r.ok ? "ok" : "failed";
    csv += '\n';
  }
  return csv;
}

}  // namespace iqccert
