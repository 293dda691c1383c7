#pragma once

#include <string>

#include "iqccert/certify.hpp"
#include "iqccert/simulate.hpp"

namespace iqccert {

// Certificate JSON schema:
//   { "n", "eta", "beta", "w_digest", "P": row-major array, "lambda": array,
//     "margins": {"min_eig_P", "max_eig_lhs", "tol"} }
std::string certificate_to_json(const Certificate& cert);
Certificate certificate_from_json(const std::string& json_text);
void save_certificate(const std::string& path, const Certificate& cert);
Certificate load_certificate(const std::string& path);

// Objective JSON:
//   { "kind": "quadratic"|"huber"|"logistic", "n", "d",
//     "params": { "a"|"delta"|"w": [n], "c": [n] or [n][d] } }
ObjectiveFamily objective_from_json(const std::string& json_text);
ObjectiveFamily load_objective(const std::string& path);

// CSV matrix: one row per line, comma-separated reals. Parse errors name the
// first offending row and column.
Matrix load_matrix_csv(const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

// Trajectory dump consumed by cmd_simulate. Header for d = 1:
//   k,x_1..x_n,s_1..s_n,u_1..u_n,gap_running_avg,dissipation_residual,iqc_value,bound_ratio
// Coordinates gain an _<coord> suffix when d > 1. Certificate-dependent
// columns print nan when `diag` is null.
std::string trajectory_csv(const Trajectory& traj, const DiagnosticsReport* diag,
                           const std::vector<double>& gap_running_avg);

}  // namespace iqccert
