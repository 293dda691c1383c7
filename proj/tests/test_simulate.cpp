#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "iqccert/sdp.hpp"
#include "iqccert/simulate.hpp"
#include "iqccert/util.hpp"

using namespace iqccert;

namespace {

double fd_gradient(const ObjectiveFamily& obj, int agent, double z, double h = 1e-5) {
  return (obj.value(agent, {z + h}) - obj.value(agent, {z - h})) / (2.0 * h);
}

}  // namespace

TEST_CASE("family construction and smoothness bounds") {
  const ObjectiveFamily q = quadratic_family({1.0, 0.4}, {{1.0}, {-1.0}});
  CHECK(q.beta() == 1.0);
  const ObjectiveFamily h = huber_family({0.5, 2.0}, {{0.0}, {1.0}});
  CHECK(h.beta() == 1.0);
  const ObjectiveFamily l = logistic_family({2.0, -2.0}, {{1.0}, {-1.0}});
  CHECK(l.beta() == 1.0);

  CHECK_THROWS_AS(quadratic_family({-1.0}, {{0.0}}), ValidationError);
  CHECK_THROWS_AS(huber_family({0.0}, {{0.0}}), ValidationError);
  CHECK_THROWS_AS(quadratic_family({1.0}, {{0.0}, {1.0}}), ValidationError);
}

TEST_CASE("analytic gradients match central differences") {
  DeterministicRng rng(5);
  const ObjectiveFamily families[] = {
      quadratic_family({1.0, 0.3}, {{0.7}, {-0.4}}),
      huber_family({0.8, 1.5}, {{0.5}, {-1.0}}),
      logistic_family({1.5, -2.0}, {{0.2}, {0.9}}),
  };
  for (const ObjectiveFamily& obj : families) {
    for (int trial = 0; trial < 100; ++trial) {
      const int agent = trial % obj.n;
      const double z = rng.uniform(-4.0, 4.0);
      const double g = obj.gradient(agent, {z})[0];
      const double fd = fd_gradient(obj, agent, z);
      CHECK(std::abs(g - fd) <= 1e-6 * (1.0 + std::abs(fd)));
    }
  }
}

TEST_CASE("convexity and smoothness inequalities hold per family") {
  DeterministicRng rng(6);
  const ObjectiveFamily families[] = {
      quadratic_family({1.0, 0.5}, {{1.0}, {-2.0}}),
      huber_family({0.7, 1.2}, {{0.3}, {-0.6}}),
      logistic_family({2.0, -1.0}, {{0.5}, {-0.5}}),
  };
  for (const ObjectiveFamily& obj : families) {
    const double beta = obj.beta();
    for (int trial = 0; trial < 1000; ++trial) {
      const int agent = trial % obj.n;
      const double x = rng.uniform(-5.0, 5.0);
      const double y = rng.uniform(-5.0, 5.0);
      const double fx = obj.value(agent, {x});
      const double fy = obj.value(agent, {y});
      const double gx = obj.gradient(agent, {x})[0];
      const double gy = obj.gradient(agent, {y})[0];
      // first-order lower bound
      CHECK(fx >= fy + gy * (x - y) - 1e-9);
      // smoothness upper bound
      CHECK(fx <= fy + gy * (x - y) + 0.5 * beta * (x - y) * (x - y) + 1e-9);
      // co-coercivity
      CHECK((gx - gy) * (x - y) >= (gx - gy) * (gx - gy) / beta - 1e-9);
    }
  }
}

TEST_CASE("aggregate descent lemma on stacked points") {
  // f0(v) - f0(w) <= gbar(x)(v - w) + (beta/2n) ||x - 1v||^2
  DeterministicRng rng(7);
  const ObjectiveFamily families[] = {
      quadratic_family({1.0, 0.6, 0.2}, {{0.5}, {-0.5}, {1.5}}),
      huber_family({0.9, 1.4, 0.5}, {{0.5}, {-0.5}, {1.5}}),
      logistic_family({2.0, -2.0, 1.0}, {{0.5}, {-0.5}, {1.5}}),
  };
  for (const ObjectiveFamily& obj : families) {
    const double beta = obj.beta();
    for (int trial = 0; trial < 1000; ++trial) {
      const double v = rng.uniform(-3.0, 3.0);
      const double w = rng.uniform(-3.0, 3.0);
      std::vector<double> x(3);
      for (double& xi : x) xi = rng.uniform(-3.0, 3.0);
      double gbar = 0.0, spread = 0.0;
      for (int i = 0; i < 3; ++i) {
        gbar += obj.gradient(i, {x[i]})[0];
        spread += (x[i] - v) * (x[i] - v);
      }
      gbar /= 3.0;
      const double lhs = obj.aggregate_value({v}) - obj.aggregate_value({w});
      CHECK(lhs <= gbar * (v - w) + beta / 6.0 * spread + 1e-9);
    }
  }
}

TEST_CASE("reference minimum per family") {
  const ObjectiveFamily q = quadratic_family({1.0, 1.0}, {{0.0}, {2.0}});
  const ReferencePoint rq = reference_minimum(q);
  CHECK(rq.x_star[0] == doctest::Approx(1.0));
  CHECK(rq.f_star == doctest::Approx(0.5));

  const ObjectiveFamily l = logistic_family({1.0, -1.0}, {{1.0}, {-1.0}});
  const ReferencePoint rl = reference_minimum(l);
  CHECK(rl.x_star[0] == doctest::Approx(0.0).epsilon(1e-9));

  const ObjectiveFamily h = huber_family({1.0, 1.0}, {{-1.0}, {1.0}});
  const ReferencePoint rh = reference_minimum(h);
  CHECK(std::abs(h.aggregate_gradient(rh.x_star)[0]) <= 1e-12 * (1.0 + h.beta()));

  // all coefficients share a sign: the aggregate has no minimizer
  CHECK_THROWS_AS(logistic_family({1.0, 1.0}, {{1.0}, {-1.0}}), ValidationError);
}

TEST_CASE("fixed point stays fixed") {
  const double c = 0.7;
  const ObjectiveFamily obj = quadratic_family({1.0, 1.0}, {{c}, {c}});
  const MixingMatrix w = two_node_w(0.5);
  const Trajectory traj = run_dgt(obj, w, 0.3, {c, c}, 100);
  for (int k = 0; k <= 100; ++k) {
    CHECK(traj.x[k][0] == c);
    CHECK(traj.x[k][1] == c);
  }
}

TEST_CASE("conservation of 1^T (s - u) over long runs") {
  const ObjectiveFamily obj = quadratic_family({1.0, 0.5}, {{1.0}, {-1.0}});
  const Trajectory traj = run_dgt(obj, two_node_w(0.5), 0.1, default_x0(2, 1), 10000);
  const TrajectoryChecks checks = trajectory_checks(traj, obj);
  CHECK(checks.max_conservation_residual <= 1e-10);
}

TEST_CASE("convergence to the aggregate minimizer") {
  const ObjectiveFamily obj = quadratic_family({2.0, 1.0}, {{1.0}, {-2.0}});
  // weighted mean (2*1 + 1*(-2)) / 3 = 0
  const Trajectory traj = run_dgt(obj, two_node_w(0.5), 0.2, default_x0(2, 1), 5000);
  CHECK(std::abs(traj.x.back()[0]) <= 1e-6);
  CHECK(std::abs(traj.x.back()[1]) <= 1e-6);
}

TEST_CASE("divergent step size aborts with the step index") {
  const ObjectiveFamily obj = quadratic_family({1.0, 1.0}, {{5.0}, {-5.0}});
  CHECK_THROWS_WITH_AS(run_dgt(obj, two_node_w(0.5), 1e6, default_x0(2, 1), 100000),
                       doctest::Contains("diverged at step"), SimulationError);
}

TEST_CASE("certified run satisfies every inequality") {
  const MixingMatrix w = two_node_w(0.5);
  const double eta = 1.0, beta = 1.0;
  const FeasibilityResult res = solve_feasibility(make_dgt_lmi(w, eta, beta), 1e-8, 200);
  REQUIRE(res.status == FeasStatus::Feasible);
  const Certificate& cert = *res.certificate;
  auto [r, eq] = dgt_realization(w, eta, beta);

  const ObjectiveFamily families[] = {
      quadratic_family({1.0, 0.4}, {{1.0}, {-1.0}}),
      huber_family({1.0, 0.5}, {{2.0}, {-1.0}}),
  };
  for (const ObjectiveFamily& obj : families) {
    const Trajectory traj = run_dgt(obj, w, eta, default_x0(2, 1), 10000);
    const DiagnosticsReport d = diagnostics(traj, obj, r, cert);
    CHECK(d.max_dissipation_residual <= 1e-8 * (1.0 + frobenius_norm(cert.p)));
    CHECK(d.min_iqc_value >= -1e-10);
    CHECK(d.max_supplyrate_violation <= 1e-8);
    CHECK(d.max_bound_ratio <= 1.0);
    CHECK(d.v0 > 0.0);
    // the running-average gap decays
    CHECK(d.gap_running_avg.back() <= d.gap_running_avg[10]);
  }
}

TEST_CASE("fixed-point trajectory has zero residuals and zero ratio") {
  const MixingMatrix w = two_node_w(0.5);
  const double eta = 1.0, beta = 1.0;
  const FeasibilityResult res = solve_feasibility(make_dgt_lmi(w, eta, beta), 1e-8, 200);
  REQUIRE(res.status == FeasStatus::Feasible);
  auto [r, eq] = dgt_realization(w, eta, beta);

  const ObjectiveFamily obj = quadratic_family({1.0, 1.0}, {{0.4}, {0.4}});
  const Trajectory traj = run_dgt(obj, w, eta, {0.4, 0.4}, 50);
  const DiagnosticsReport d = diagnostics(traj, obj, r, *res.certificate);
  CHECK(d.v0 == 0.0);
  CHECK(d.max_bound_ratio == 0.0);
  CHECK(std::abs(d.max_dissipation_residual) <= 1e-14);
  CHECK(std::abs(d.max_supplyrate_violation) <= 1e-14);
}

TEST_CASE("dimension-lifted simulation checks out at d=2") {
  const MixingMatrix w = two_node_w(0.5);
  const double eta = 1.0, beta = 1.0;
  const FeasibilityResult res = solve_feasibility(make_dgt_lmi(w, eta, beta), 1e-8, 200);
  REQUIRE(res.status == FeasStatus::Feasible);

  const ObjectiveFamily obj = quadratic_family({1.0, 0.5}, {{1.0, -0.5}, {-1.0, 0.5}});
  REQUIRE(obj.dim == 2);
  auto [r1, eq1] = dgt_realization(w, eta, beta);
  const Realization r2 = lift_dimension(r1, 2);

  const Trajectory traj = run_dgt(obj, w, eta, default_x0(2, 2), 2000);
  const DiagnosticsReport d = diagnostics(traj, obj, r2, *res.certificate);
  CHECK(d.max_dissipation_residual <= 1e-8 * (1.0 + frobenius_norm(res.certificate->p)));
  CHECK(d.min_iqc_value >= -1e-10);
  CHECK(d.max_supplyrate_violation <= 1e-8);
  CHECK(d.max_bound_ratio <= 1.0);
}

TEST_CASE("running average accumulates online") {
  const ObjectiveFamily obj = quadratic_family({1.0, 1.0}, {{1.0}, {-1.0}});
  const Trajectory traj = run_dgt(obj, two_node_w(0.2), 0.3, {0.5, -0.5}, 20);
  std::vector<double> manual(2, 0.0);
  for (int k = 0; k <= 20; ++k) {
    for (int i = 0; i < 2; ++i) manual[i] += traj.x[k][i];
  }
  for (int i = 0; i < 2; ++i) {
    CHECK(traj.running_avg.back()[i] == doctest::Approx(manual[i] / 21.0).epsilon(1e-12));
  }
}
