// iqccert: certify O(1/K) convergence of distributed gradient tracking by
// LMI feasibility, search maximum step sizes, sweep mixing families, and
// cross-check certificates against simulated trajectories.

#include <cmath>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "iqccert/io.hpp"
#include "iqccert/sdp.hpp"
#include "iqccert/stepsearch.hpp"
#include "iqccert/util.hpp"

namespace {

using namespace iqccert;

constexpr int kExitOk = 0;
constexpr int kExitNegative = 1;  // infeasible / verification failed / bound violated
constexpr int kExitError = 2;     // usage error, parse error, indeterminate solve

struct ModelSelection {
  std::string model = "dgt";
  double sigma = std::nan("");
  std::string w_file;
  std::string adjacency_file;
};

void add_model_flags(CLI::App* cmd, ModelSelection& sel, bool allow_centralized) {
  if (allow_centralized) {
    cmd->add_option("--model", sel.model, "Algorithm model: dgt or centralized")
        ->check(CLI::IsMember({"dgt", "centralized"}))
        ->capture_default_str();
  }
  cmd->add_option("--sigma", sel.sigma,
                  "Two-node mixing parameter in (-1,1); shorthand for the standard 2x2 family");
  cmd->add_option("--w", sel.w_file, "Mixing matrix CSV file (n rows of n comma-separated reals)");
  cmd->add_option("--adjacency", sel.adjacency_file,
                  "0/1 adjacency CSV of a connected graph; uses Metropolis weights");
}

// Returns the mixing matrix for dgt runs; nullopt for the centralized model.
std::optional<MixingMatrix> resolve_mixing(const ModelSelection& sel) {
  const bool has_sigma = !std::isnan(sel.sigma);
  const bool has_file = !sel.w_file.empty();
  const bool has_adjacency = !sel.adjacency_file.empty();
  if (sel.model == "centralized") {
    if (has_sigma || has_file || has_adjacency) {
      throw ValidationError("--model centralized does not take a mixing matrix");
    }
    return std::nullopt;
  }
  if (static_cast<int>(has_sigma) + has_file + has_adjacency != 1) {
    throw ValidationError("exactly one of --sigma, --w, or --adjacency is required");
  }
  if (has_sigma) return two_node_w(sel.sigma);
  if (has_adjacency) return metropolis_w(load_matrix_csv(sel.adjacency_file));
  return validate_mixing(load_matrix_csv(sel.w_file));
}

std::vector<double> parse_grid(const std::string& spec) {
  std::vector<double> grid;
  if (spec.find(':') != std::string::npos) {
    double lo = 0.0, hi = 0.0, step = 0.0;
    char c1 = 0, c2 = 0;
    std::istringstream ss(spec);
    if (!(ss >> lo >> c1 >> hi >> c2 >> step) || c1 != ':' || c2 != ':' || !ss.eof()) {
      throw ValidationError("grid must be lo:hi:step or a comma-separated list");
    }
    if (!(step > 0.0) || hi < lo) throw ValidationError("grid requires step > 0 and hi >= lo");
    const int count = static_cast<int>(std::floor((hi - lo) / step + 1e-9)) + 1;
    for (int i = 0; i < count; ++i) grid.push_back(lo + i * step);
  } else {
    std::istringstream ss(spec);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      if (cell.empty()) continue;
      grid.push_back(std::stod(cell));
    }
  }
  if (grid.empty()) throw ValidationError("grid is empty");
  for (double s : grid) {
    if (!(s > -1.0 && s < 1.0)) {
      throw ValidationError("grid value " + format_g12(s) + " outside (-1, 1)");
    }
  }
  return grid;
}

std::vector<double> parse_vector(const std::string& spec) {
  std::vector<double> v;
  std::istringstream ss(spec);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    if (cell.empty()) continue;
    v.push_back(std::stod(cell));
  }
  return v;
}

int default_jobs() {
  if (const char* env = std::getenv("IQCCERT_JOBS")) {
    const int j = std::atoi(env);
    if (j > 0) return j;
  }
  return 1;
}

const char* status_name(FeasStatus s) {
  switch (s) {
    case FeasStatus::Feasible:
      return "feasible";
    case FeasStatus::Infeasible:
      return "infeasible";
    case FeasStatus::Indeterminate:
      return "indeterminate";
  }
  return "indeterminate";
}

bool close(double a, double b) { return std::abs(a - b) <= 1e-12 * (1.0 + std::abs(a)); }

// ---------------------------------------------------------------------------

int cmd_certify(const ModelSelection& sel, double beta, double eta, double tol, int iter_cap,
                const std::string& out) {
  const std::optional<MixingMatrix> w = resolve_mixing(sel);
  const LmiProblem lmi =
      w.has_value() ? make_dgt_lmi(*w, eta, beta) : make_centralized_lmi(eta, beta);
  SolveOptions opts;
  opts.tol = tol;
  opts.iter_cap = iter_cap;
  const FeasibilityResult res = solve_feasibility(lmi, opts);

  std::string line = std::string("certify status=") + status_name(res.status) +
                     " model=" + (w.has_value() ? "dgt" : "centralized") +
                     " n=" + std::to_string(lmi.realization.n) + " eta=" + format_g12(eta) +
                     " beta=" + format_g12(beta);
  if (res.status == FeasStatus::Feasible) {
    const Certificate& cert = *res.certificate;
    line += " min_eig_P=" + format_g12(cert.margins.min_eig_p) +
            " max_eig_lhs=" + format_g12(cert.margins.max_eig_lhs) +
            " lambda1=" + format_g12(cert.lambda.empty() ? 0.0 : cert.lambda[0]);
    if (!out.empty()) {
      save_certificate(out, cert);
      line += " out=" + out;
    }
    std::cout << line << "\n";
    return kExitOk;
  }
  if (res.status == FeasStatus::Infeasible) {
    line += " best_margin=" + format_g12(res.best_margin) + " gap=" + format_g12(res.gap);
    std::cout << line << "\n";
    return kExitNegative;
  }
  line += " reason=\"" + res.reason + "\"";
  std::cout << line << "\n";
  return kExitError;
}

int cmd_max_step(const ModelSelection& sel, double beta, double eta_tol, double eta_cap,
                 double solve_tol, const std::string& out) {
  const std::optional<MixingMatrix> w = resolve_mixing(sel);
  StepSearchOptions opts;
  opts.eta_tol = eta_tol;
  opts.eta_cap = eta_cap;
  opts.solve.tol = solve_tol;
  const StepSearchResult res = w.has_value() ? max_step_size(*w, beta, opts)
                                             : max_step_size_centralized(beta, opts);
  if (!out.empty()) save_certificate(out, res.certificate);
  std::cout << "eta_max=" << format_g12(res.eta_max) << " bracket=[" << format_g12(res.eta_lo)
            << "," << format_g12(res.eta_hi) << "]\n";
  return kExitOk;
}

int cmd_sweep(const std::string& grid_spec, double beta, double eta_tol, double eta_cap,
              const std::string& out, int jobs) {
  const std::vector<double> grid = parse_grid(grid_spec);
  StepSearchOptions opts;
  opts.eta_tol = eta_tol;
  opts.eta_cap = eta_cap;
  const std::vector<SweepRow> rows = sweep_sigma(grid, beta, opts, jobs);
  write_text_file(out, sweep_csv(rows));

  int ok = 0;
  for (const SweepRow& r : rows) ok += r.ok ? 1 : 0;
  std::cout << "sweep status=" << (ok == static_cast<int>(rows.size()) ? "ok" : "partial")
            << " rows=" << rows.size() << " ok=" << ok
            << " failed=" << rows.size() - static_cast<size_t>(ok) << " out=" << out << "\n";
  return ok == static_cast<int>(rows.size()) ? kExitOk : kExitNegative;
}

int cmd_simulate(const std::string& obj_path, const ModelSelection& sel, double eta, int steps,
                 const std::string& cert_path, const std::string& dump_path,
                 const std::string& x0_spec, uint64_t seed) {
  const ObjectiveFamily obj = load_objective(obj_path);
  const std::optional<MixingMatrix> w = resolve_mixing(sel);
  if (!w.has_value()) throw ValidationError("simulate requires a mixing matrix (dgt model)");
  if (w->n != obj.n) throw ValidationError("objective and mixing matrix agent counts differ");

  std::vector<double> x0 = x0_spec.empty() ? default_x0(obj.n, obj.dim, seed)
                                           : parse_vector(x0_spec);
  if (x0.size() != static_cast<size_t>(obj.n) * obj.dim) {
    throw ValidationError("--x0 must supply n*d values");
  }

  const Trajectory traj = run_dgt(obj, *w, eta, x0, steps);
  const TrajectoryChecks checks = trajectory_checks(traj, obj);

  std::optional<DiagnosticsReport> diag;
  double p_norm = 0.0;
  if (!cert_path.empty()) {
    const Certificate cert = load_certificate(cert_path);
    if (cert.w_digest != matrix_digest(w->w) || !close(cert.eta, eta) ||
        !close(cert.beta, obj.beta())) {
      std::cout << "simulate status=error reason=\"certificate does not match parameters\"\n";
      return kExitError;
    }
    auto [r, eq] = dgt_realization(*w, eta, cert.beta);
    const Realization lifted = lift_dimension(r, obj.dim);
    diag = diagnostics(traj, obj, lifted, cert);
    p_norm = frobenius_norm(cert.p);
  }

  if (!dump_path.empty()) {
    write_text_file(dump_path, trajectory_csv(traj, diag.has_value() ? &*diag : nullptr,
                                              checks.gap_running_avg));
  }

  const double conservation_tol = 1e-10;
  const double iqc_tol = 1e-10;
  const double supply_tol = 1e-8;
  bool ok = checks.max_conservation_residual <= conservation_tol &&
            checks.min_iqc_value >= -iqc_tol && checks.max_supplyrate_violation <= supply_tol;

  std::string line = "simulate steps=" + std::to_string(steps) +
                     " conservation=" + format_g12(checks.max_conservation_residual) +
                     " min_iqc=" + format_g12(checks.min_iqc_value) +
                     " max_supply_violation=" + format_g12(checks.max_supplyrate_violation);
  if (diag.has_value()) {
    const double dissipation_tol = 1e-8 * (1.0 + p_norm);
    ok = ok && diag->max_dissipation_residual <= dissipation_tol &&
         diag->max_bound_ratio <= 1.0;
    line += " max_dissipation=" + format_g12(diag->max_dissipation_residual) +
            " v0=" + format_g12(diag->v0) +
            " bound_ratio_final=" + format_g12(diag->bound_ratio.back()) +
            " max_bound_ratio=" + format_g12(diag->max_bound_ratio);
  }
  std::cout << "simulate status=" << (ok ? "ok" : "violated") << line.substr(8) << "\n";
  return ok ? kExitOk : kExitNegative;
}

int cmd_verify_certificate(const std::string& cert_path, const ModelSelection& sel, double beta,
                           double eta) {
  const Certificate cert = load_certificate(cert_path);
  const std::optional<MixingMatrix> w = resolve_mixing(sel);
  const std::string expected_digest = w.has_value() ? matrix_digest(w->w) : "centralized";
  if (cert.w_digest != expected_digest || !close(cert.eta, eta) || !close(cert.beta, beta)) {
    std::cout << "verify status=error reason=\"certificate does not match parameters\"\n";
    return kExitError;
  }
  const LmiProblem lmi =
      w.has_value() ? make_dgt_lmi(*w, eta, beta) : make_centralized_lmi(eta, beta);
  const VerificationReport rep = verify_certificate(lmi, cert);
  std::cout << "verify status=" << (rep.pass ? "pass" : "fail")
            << " min_eig_P=" << format_g12(rep.min_eig_p)
            << " max_eig_lhs=" << format_g12(rep.max_eig_lhs)
            << " lambda_min=" << format_g12(rep.lambda_min)
            << " tol_psd=" << format_g12(rep.tol_psd)
            << " tol_feas=" << format_g12(rep.tol_feas) << "\n";
  return rep.pass ? kExitOk : kExitNegative;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LMI-based convergence certification for distributed gradient tracking"};
  app.require_subcommand(1);

  // certify
  auto* certify = app.add_subcommand("certify", "Decide LMI feasibility for (W, beta, eta)");
  ModelSelection certify_sel;
  double certify_beta = 0.0, certify_eta = 0.0, certify_tol = 1e-8;
  int certify_iter_cap = 200;
  std::string certify_out;
  add_model_flags(certify, certify_sel, true);
  certify->add_option("--beta", certify_beta, "Smoothness constant")->required();
  certify->add_option("--eta", certify_eta, "Step size")->required();
  certify->add_option("--tol", certify_tol, "Feasibility tolerance")->capture_default_str();
  certify->add_option("--iter-cap", certify_iter_cap, "Newton iteration cap")
      ->capture_default_str();
  certify->add_option("--out", certify_out, "Write the certificate JSON here on success");

  // max-step
  auto* max_step = app.add_subcommand("max-step", "Bisection search for the maximum step size");
  ModelSelection max_step_sel;
  double max_step_beta = 0.0, max_step_tol = 0.0, max_step_cap = 0.0, max_step_solve_tol = 1e-8;
  std::string max_step_out;
  add_model_flags(max_step, max_step_sel, true);
  max_step->add_option("--beta", max_step_beta, "Smoothness constant")->required();
  max_step->add_option("--tol", max_step_tol, "Bisection tolerance (default 1e-2/beta)");
  max_step->add_option("--eta-cap", max_step_cap, "Bracketing start (default 10/beta)");
  max_step->add_option("--solve-tol", max_step_solve_tol, "Feasibility tolerance per solve")
      ->capture_default_str();
  max_step->add_option("--out", max_step_out, "Write the certificate at eta_max here");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Max step size over a grid of two-node sigmas");
  std::string sweep_grid, sweep_out;
  double sweep_beta = 0.0, sweep_tol = 0.0, sweep_cap = 0.0;
  int sweep_jobs = default_jobs();
  sweep->add_option("--sigma-grid", sweep_grid, "Grid lo:hi:step or comma-separated list")
      ->required();
  sweep->add_option("--beta", sweep_beta, "Smoothness constant")->required();
  sweep->add_option("--tol", sweep_tol, "Bisection tolerance (default 1e-2/beta)");
  sweep->add_option("--eta-cap", sweep_cap, "Bracketing start (default 10/beta)");
  sweep->add_option("--out", sweep_out, "Output CSV path")->required();
  sweep->add_option("--jobs", sweep_jobs, "Concurrent rows (default: IQCCERT_JOBS or 1)")
      ->capture_default_str();

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Run gradient tracking and check inequalities");
  ModelSelection simulate_sel;
  std::string simulate_obj, simulate_cert, simulate_dump, simulate_x0;
  double simulate_eta = 0.0;
  int simulate_steps = 10000;
  uint64_t simulate_seed = 12345;
  add_model_flags(simulate, simulate_sel, false);
  simulate->add_option("--objective", simulate_obj, "Objective family JSON")->required();
  simulate->add_option("--eta", simulate_eta, "Step size")->required();
  simulate->add_option("--steps", simulate_steps, "Number of iterations")->capture_default_str();
  simulate->add_option("--certificate", simulate_cert, "Certificate JSON to cross-check");
  simulate->add_option("--dump", simulate_dump, "Write the trajectory CSV here");
  simulate->add_option("--x0", simulate_x0, "Initial state, n*d comma-separated values");
  simulate->add_option("--seed", simulate_seed, "Seed for the default initial state")
      ->capture_default_str();

  // verify-certificate
  auto* verify = app.add_subcommand("verify-certificate", "Re-check a stored certificate");
  ModelSelection verify_sel;
  std::string verify_cert;
  double verify_beta = 0.0, verify_eta = 0.0;
  verify->add_option("certificate", verify_cert, "Certificate JSON path")->required();
  add_model_flags(verify, verify_sel, true);
  verify->add_option("--beta", verify_beta, "Smoothness constant")->required();
  verify->add_option("--eta", verify_eta, "Step size")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {  // --help
      std::exit(app.exit(e));
    }
    std::cout << "error status=usage message=\"" << e.what() << "\"\n";
    return kExitError;
  }

  try {
    if (certify->parsed()) {
      return cmd_certify(certify_sel, certify_beta, certify_eta, certify_tol, certify_iter_cap,
                         certify_out);
    }
    if (max_step->parsed()) {
      return cmd_max_step(max_step_sel, max_step_beta, max_step_tol, max_step_cap,
                          max_step_solve_tol, max_step_out);
    }
    if (sweep->parsed()) {
      return cmd_sweep(sweep_grid, sweep_beta, sweep_tol, sweep_cap, sweep_out, sweep_jobs);
    }
    if (simulate->parsed()) {
      return cmd_simulate(simulate_obj, simulate_sel, simulate_eta, simulate_steps, simulate_cert,
                          simulate_dump, simulate_x0, simulate_seed);
    }
    if (verify->parsed()) {
      return cmd_verify_certificate(verify_cert, verify_sel, verify_beta, verify_eta);
    }
  } catch (const Error& e) {
    std::cout << "error status=error message=\"" << e.what() << "\"\n";
    return kExitError;
  } catch (const std::exception& e) {
    std::cout << "error status=error message=\"" << e.what() << "\"\n";
    return kExitError;
  }
  std::cout << "error status=usage message=\"no subcommand\"\n";
  return kExitError;
}
