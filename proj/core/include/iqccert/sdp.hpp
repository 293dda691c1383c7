#pragma once

#include <optional>
#include <string>

#include "iqccert/certify.hpp"

namespace iqccert {

enum class FeasStatus { Feasible, Infeasible, Indeterminate };

struct SolveOptions {
  double tol = 1e-8;        // feasibility threshold, scaled by (1 + ||base||_F)
  int iter_cap = 200;       // total Newton iterations
  double trace_cap = 1e6;   // trace(P) + sum(lambda) <= trace_cap keeps the slack program bounded
  double gap_factor = 0.02; // target duality gap as a fraction of the scaled tolerance
};

struct FeasibilityResult {
  FeasStatus status = FeasStatus::Indeterminate;
  std::optional<Certificate> certificate;  // present iff Feasible
  double best_margin = 0.0;                // Infeasible: certified lower bound on the optimal slack
  std::string reason;                      // Indeterminate: what went wrong
  int iterations = 0;                      // Newton steps spent
  double objective_t = 0.0;                // achieved slack, an upper bound on the optimum
  double gap = 0.0;                        // duality gap bound at termination
};

// Decides feasibility of LHS(P, lambda) <= 0 over P >= 0, lambda >= 0 by
// solving the slack program  min t  s.t.  LHS(P, lambda) <= t I  with a
// barrier path-following method on the block LMI. Feasible results carry a
// certificate that passes verify_certificate independently.
FeasibilityResult solve_feasibility(const LmiProblem& lmi, const SolveOptions& opts);
FeasibilityResult solve_feasibility(const LmiProblem& lmi, double tol = 1e-8, int iter_cap = 200);

}  // namespace iqccert
