#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "iqccert/certify.hpp"
#include "iqccert/simulate.hpp"
#include "iqccert/util.hpp"

using namespace iqccert;

TEST_CASE("supply rate collapses to the scalar case at n=1") {
  const Realization r = centralized_gd_realization(0.5, 1.0);
  const SupplyRate s = build_supply_rate(r);
  REQUIRE(s.s0.order() == 2);
  CHECK(s.s0.at(0, 0) == 0.0);
  CHECK(s.s0.at(0, 1) == doctest::Approx(-0.5));
  CHECK(s.s0.at(1, 1) == 0.0);
}

TEST_CASE("supply rate entries for two agents") {
  auto [r, eq] = dgt_realization(two_node_w(0.5), 0.1, 1.0);
  const SupplyRate s = build_supply_rate(r);
  REQUIRE(s.s0.order() == 6);
  // -(beta/n) (Jperp)_00 with Jperp_00 = 1/2
  CHECK(s.s0.at(0, 0) == doctest::Approx(-0.25));
  // -(1/(2n)) J_00 with J_00 = 1/2
  CHECK(s.s0.at(0, 4) == doctest::Approx(-0.125));
  // rows and columns touching xi^2 vanish (C = [I 0])
  for (int j = 0; j < 6; ++j) {
    CHECK(s.s0.at(2, j) == 0.0);
    CHECK(s.s0.at(3, j) == 0.0);
  }
  // u-u block vanishes
  for (int i = 4; i < 6; ++i)
    for (int j = 4; j < 6; ++j) CHECK(s.s0.at(i, j) == 0.0);
}

TEST_CASE("smoothness IQC matrix") {
  const PointwiseIqc m1 = build_smoothness_iqc(1, 1.0);
  CHECK(m1.m.at(0, 0) == 0.0);
  CHECK(m1.m.at(0, 1) == 1.0);
  CHECK(m1.m.at(1, 1) == -2.0);

  const PointwiseIqc m2 = build_smoothness_iqc(2, 2.0);
  REQUIRE(m2.m.order() == 4);
  CHECK(m2.m.at(0, 2) == 2.0);
  CHECK(m2.m.at(1, 3) == 2.0);
  CHECK(m2.m.at(2, 2) == -2.0);
  CHECK(m2.m.at(0, 1) == 0.0);

  // boundary of the co-coercivity cone: (x, u) = (v, beta v) evaluates to zero
  const double beta = 1.7, v = 0.83;
  const double q = quadratic_form(build_smoothness_iqc(1, beta).m, {v, beta * v});
  CHECK(q == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("centralized LMI matches the closed form") {
  for (double eta : {0.5, 1.0, 1.7}) {
    for (double beta : {1.0, 2.0}) {
      const LmiProblem lmi = make_centralized_lmi(eta, beta);
      REQUIRE(lmi.dims.reduced == 2);
      SymMatrix p(1);
      for (double pv : {0.0, 0.7, 2.0}) {
        for (double lam : {0.0, 0.5, 1.3}) {
          p.set(0, 0, pv);
          const SymMatrix lhs = lmi.evaluate(p, {lam});
          CHECK(lhs.at(0, 0) == doctest::Approx(0.0).epsilon(1e-14));
          CHECK(lhs.at(0, 1) == doctest::Approx(-eta * pv + lam * beta + 0.5).epsilon(1e-13));
          CHECK(lhs.at(1, 1) == doctest::Approx(eta * eta * pv - 2.0 * lam).epsilon(1e-13));
        }
      }
    }
  }
}

TEST_CASE("reduced order and base term") {
  const LmiProblem lmi = make_dgt_lmi(two_node_w(0.5), 1.0, 1.0);
  CHECK(lmi.dims.state == 4);
  CHECK(lmi.dims.input == 2);
  CHECK(lmi.dims.reduced == 5);  // 3n - rank[F G] = 6 - 1

  // evaluating at (P, lambda) = (0, 0) returns -R^T S0 R
  const SymMatrix at_zero = lmi.evaluate(SymMatrix(4), {0.0});
  const SymMatrix base_expected = congruence(-1.0 * lmi.supply.s0, lmi.r);
  CHECK(frobenius_norm(at_zero - base_expected) <= 1e-14);
}

TEST_CASE("materialized and direct evaluation agree") {
  DeterministicRng rng(17);
  const LmiProblem lmi = make_dgt_lmi(two_node_w(-0.3), 0.8, 1.5);
  for (int trial = 0; trial < 5; ++trial) {
    Matrix raw(4, 4);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) raw(i, j) = rng.uniform(-1.0, 1.0);
    const SymMatrix p = SymMatrix::symmetrize(raw);
    const std::vector<double> lam{rng.uniform(0.0, 2.0)};
    const SymMatrix a = lmi.evaluate(p, lam);
    const SymMatrix b = lmi.evaluate_direct(p, lam);
    CHECK(frobenius_norm(a - b) <= 1e-12 * (1.0 + frobenius_norm(a)));
  }
}

TEST_CASE("verify_certificate closed-form witness") {
  const LmiProblem lmi = make_centralized_lmi(1.0, 1.0);
  Certificate cert;
  cert.p = SymMatrix(1);
  cert.p.set(0, 0, 1.0);
  cert.lambda = {0.5};
  cert.eta = 1.0;
  cert.beta = 1.0;
  cert.n = 1;
  cert.w_digest = "centralized";

  // -eta P + lambda beta + 1/2 = 0 and eta^2 P - 2 lambda = 0: LHS is exactly zero
  const SymMatrix lhs = lmi.evaluate(cert.p, cert.lambda);
  CHECK(frobenius_norm(lhs) == 0.0);
  const VerificationReport rep = verify_certificate(lmi, cert);
  CHECK(rep.pass);
  CHECK(rep.max_eig_lhs == doctest::Approx(0.0));

  // eta = 3 > 2/beta: no nonnegative (P, lambda) passes
  const LmiProblem bad = make_centralized_lmi(3.0, 1.0);
  for (double pv : {0.0, 0.5, 1.0, 5.0}) {
    for (double lam : {0.0, 0.5, 2.0}) {
      Certificate c = cert;
      c.eta = 3.0;
      c.p.set(0, 0, pv);
      c.lambda = {lam};
      CHECK_FALSE(verify_certificate(bad, c).pass);
    }
  }

  // negated P fails the PSD margin
  Certificate neg = cert;
  neg.p.set(0, 0, -1.0);
  const VerificationReport bad_rep = verify_certificate(lmi, neg);
  CHECK_FALSE(bad_rep.pass);
  CHECK(bad_rep.min_eig_p < -1e-9);
}

TEST_CASE("analytic bound and centralized oracle") {
  CHECK(analytic_bound_qu_li(0.5, 1.0) == doctest::Approx(1.5625e-3));
  CHECK(analytic_bound_qu_li(0.0, 1.0) == doctest::Approx(6.25e-3));
  CHECK(analytic_bound_qu_li(0.999999, 1.0) <= 1e-11);
  CHECK_THROWS_AS(analytic_bound_qu_li(1.0, 1.0), DomainError);

  CHECK(centralized_feasibility_oracle(1.9, 1.0));
  CHECK_FALSE(centralized_feasibility_oracle(2.0, 1.0));
  CHECK_FALSE(centralized_feasibility_oracle(0.0, 1.0));
  CHECK(centralized_feasibility_oracle(0.9, 2.0));
  CHECK_FALSE(centralized_feasibility_oracle(1.0, 2.0));
}

TEST_CASE("supply rate bounds the negative average gap along trajectories") {
  // sigma0(xi, u) <= -(1/n) sum_i [f0(x_i) - f*] pointwise, checked on random
  // states for each family (not only on algorithm trajectories).
  DeterministicRng rng(23);
  const MixingMatrix w = two_node_w(0.4);
  auto [r, eq] = dgt_realization(w, 0.2, 1.0);
  const SymMatrix s0 = build_supply_rate(r).s0;

  const ObjectiveFamily families[] = {
      quadratic_family({1.0, 0.3}, {{0.5}, {-1.5}}),
      huber_family({0.7, 1.0}, {{2.0}, {-0.5}}),
      logistic_family({2.0, -2.0}, {{1.0}, {-1.0}}),
  };
  for (const ObjectiveFamily& obj : families) {
    const ReferencePoint ref = reference_minimum(obj);
    std::vector<double> u_star(2), xi_hat(4), u_hat(2), z(6);
    for (int i = 0; i < 2; ++i) u_star[i] = obj.gradient(i, ref.x_star)[0];
    for (int trial = 0; trial < 200; ++trial) {
      const std::vector<double> x{rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0)};
      // xi2 must satisfy the equality constraint 1^T xi2_hat = 0
      const double d = rng.uniform(-2.0, 2.0);
      xi_hat[0] = x[0] - ref.x_star[0];
      xi_hat[1] = x[1] - ref.x_star[0];
      xi_hat[2] = d;
      xi_hat[3] = -d;
      for (int i = 0; i < 2; ++i) u_hat[i] = obj.gradient(i, {x[i]})[0] - u_star[i];
      for (int i = 0; i < 4; ++i) z[i] = xi_hat[i];
      for (int i = 0; i < 2; ++i) z[4 + i] = u_hat[i];

      const double sigma0 = quadratic_form(s0, z);
      const double gap = 0.5 * ((obj.aggregate_value({x[0]}) - ref.f_star) +
                                (obj.aggregate_value({x[1]}) - ref.f_star));
      CHECK(sigma0 <= -gap + 1e-9);
    }
  }
}

TEST_CASE("pointwise IQC nonnegativity on gradient pairs") {
  DeterministicRng rng(29);
  const ObjectiveFamily families[] = {
      quadratic_family({1.0, 0.5, 0.2}, {{0.0}, {1.0}, {-2.0}}),
      huber_family({1.0, 0.4, 2.0}, {{0.5}, {-0.5}, {1.5}}),
      logistic_family({2.0, -1.0, 1.5}, {{0.3}, {-0.2}, {0.9}}),
  };
  for (const ObjectiveFamily& obj : families) {
    const double beta = obj.beta();
    const PointwiseIqc m1 = build_smoothness_iqc(obj.n, beta);
    const ReferencePoint ref = reference_minimum(obj);
    for (int trial = 0; trial < 300; ++trial) {
      std::vector<double> xu(2 * obj.n);
      for (int i = 0; i < obj.n; ++i) {
        const double xi = rng.uniform(-4.0, 4.0);
        xu[i] = xi - ref.x_star[0];
        xu[obj.n + i] = obj.gradient(i, {xi})[0] - obj.gradient(i, ref.x_star)[0];
      }
      CHECK(quadratic_form(m1.m, xu) >= -1e-10);
    }
  }
}

TEST_CASE("state-sign similarity leaves the reduced spectrum unchanged") {
  // Flipping the sign of the tracking block (xi2 -> -xi2) is a similarity
  // transform of the interconnection; the reduced LHS eigenvalues at mapped
  // (P, lambda) must coincide, so feasibility verdicts cannot change.
  const MixingMatrix w = two_node_w(0.4);
  const double eta = 0.6, beta = 1.0;
  auto [r, eq] = dgt_realization(w, eta, beta);
  auto [rf, eqf] = dgt_realization(w, eta, beta);
  const int n = 2;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      rf.a(i, n + j) = -rf.a(i, n + j);
      rf.b(n + i, j) = -rf.b(n + i, j);
    }
  }
  for (int j = 0; j < n; ++j) eqf.f(0, n + j) = -eqf.f(0, n + j);

  const LmiProblem lmi =
      assemble_lmi(r, eq, build_supply_rate(r), {build_smoothness_iqc(n, beta)});
  const LmiProblem flipped =
      assemble_lmi(rf, eqf, build_supply_rate(rf), {build_smoothness_iqc(n, beta)});

  DeterministicRng rng(41);
  for (int trial = 0; trial < 5; ++trial) {
    Matrix raw(4, 4);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) raw(i, j) = rng.uniform(-1.0, 1.0);
    const SymMatrix p = SymMatrix::symmetrize(raw);
    // P maps to T P T with T = diag(I, -I): flip the off-diagonal block sign
    SymMatrix pf = p;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) pf.set(i, n + j, -p.at(i, n + j));
    const std::vector<double> lam{rng.uniform(0.0, 2.0)};

    const EigResult ea = sym_eig(lmi.evaluate(p, lam));
    const EigResult eb = sym_eig(flipped.evaluate(pf, lam));
    for (size_t k = 0; k < ea.values.size(); ++k) {
      CHECK(ea.values[k] == doctest::Approx(eb.values[k]).epsilon(1e-10));
    }
  }
}

TEST_CASE("assembly dimension errors name the offending block") {
  auto [r, eq] = dgt_realization(two_node_w(0.5), 0.5, 1.0);
  const SupplyRate s0 = build_supply_rate(r);
  const PointwiseIqc wrong = build_smoothness_iqc(3, 1.0);
  CHECK_THROWS_WITH_AS(assemble_lmi(r, eq, s0, {wrong}), doctest::Contains("IQC"),
                       AssemblyError);

  Realization broken = r;
  broken.d(0, 0) = 1.0;
  CHECK_THROWS_WITH_AS(assemble_lmi(broken, eq, s0, {build_smoothness_iqc(2, 1.0)}),
                       doctest::Contains("D must be zero"), AssemblyError);
}

TEST_CASE("kronecker lift commutes with supply rate and IQC assembly") {
  auto [r1, eq1] = dgt_realization(two_node_w(0.3), 0.4, 1.2);
  auto [r2, eq2] = lift_dimension(r1, eq1, 2);

  const Matrix i2 = Matrix::identity(2);
  const SymMatrix s_lifted = build_supply_rate(r2).s0;
  const SymMatrix s_kron =
      SymMatrix::symmetrize(kron(build_supply_rate(r1).s0.to_matrix(), i2));
  CHECK(frobenius_norm(s_lifted - s_kron) <= 1e-14);

  const SymMatrix m_lifted = build_smoothness_iqc(r2.output_dim(), 1.2).m;
  const SymMatrix m_kron =
      SymMatrix::symmetrize(kron(build_smoothness_iqc(r1.output_dim(), 1.2).m.to_matrix(), i2));
  CHECK(frobenius_norm(m_lifted - m_kron) <= 1e-14);

  // with no equality constraint (R = I), the whole assembled map commutes
  const Realization c1 = centralized_gd_realization(0.7, 1.0);
  const Realization c2 = lift_dimension(c1, 2);
  const LmiProblem l1 =
      assemble_lmi(c1, std::nullopt, build_supply_rate(c1), {build_smoothness_iqc(1, 1.0)});
  const LmiProblem l2 =
      assemble_lmi(c2, std::nullopt, build_supply_rate(c2), {build_smoothness_iqc(2, 1.0)});
  CHECK(frobenius_norm(l2.base - SymMatrix::symmetrize(kron(l1.base.to_matrix(), i2))) <= 1e-14);

  SymMatrix p1(1);
  p1.set(0, 0, 0.9);
  const SymMatrix p2 = SymMatrix::symmetrize(kron(p1.to_matrix(), i2));
  const SymMatrix lhs1 = l1.evaluate(p1, {0.4});
  const SymMatrix lhs2 = l2.evaluate(p2, {0.4});
  CHECK(frobenius_norm(lhs2 - SymMatrix::symmetrize(kron(lhs1.to_matrix(), i2))) <= 1e-13);
}
