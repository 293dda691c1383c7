#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include <algorithm>

#include "iqccert/io.hpp"
#include "iqccert/simulate.hpp"
#include "iqccert/util.hpp"
#include "iqccert/sdp.hpp"

using namespace iqccert;

namespace {

std::filesystem::path temp_file(const char* name) {
  return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("certificate JSON round trip is bit exact") {
  const FeasibilityResult res = solve_feasibility(make_dgt_lmi(two_node_w(0.5), 1.0, 1.0),
                                                  1e-8, 200);
  REQUIRE(res.status == FeasStatus::Feasible);
  const Certificate& cert = *res.certificate;

  const Certificate back = certificate_from_json(certificate_to_json(cert));
  CHECK(back.n == cert.n);
  CHECK(back.eta == cert.eta);
  CHECK(back.beta == cert.beta);
  CHECK(back.w_digest == cert.w_digest);
  REQUIRE(back.p.order() == cert.p.order());
  CHECK(frobenius_norm(back.p - cert.p) == 0.0);
  REQUIRE(back.lambda.size() == cert.lambda.size());
  CHECK(back.lambda[0] == cert.lambda[0]);
  CHECK(back.margins.max_eig_lhs == cert.margins.max_eig_lhs);

  // the reloaded certificate still verifies
  CHECK(verify_certificate(make_dgt_lmi(two_node_w(0.5), 1.0, 1.0), back).pass);
}

TEST_CASE("certificate JSON rejects malformed input") {
  CHECK_THROWS_AS(certificate_from_json("{nope"), IoError);
  CHECK_THROWS_AS(certificate_from_json(R"({"n": 1})"), IoError);
  // P length that is not a perfect square
  CHECK_THROWS_AS(certificate_from_json(
                      R"({"n":1,"eta":1,"beta":1,"w_digest":"x","P":[1,2,3],"lambda":[0],
                          "margins":{"min_eig_P":0,"max_eig_lhs":0,"tol":0}})"),
                  IoError);
}

TEST_CASE("objective JSON parsing") {
  const ObjectiveFamily q = objective_from_json(
      R"({"kind":"quadratic","n":2,"d":1,"params":{"a":[1.0,0.5],"c":[1.0,-1.0]}})");
  CHECK(q.kind == ObjectiveKind::Quadratic);
  CHECK(q.n == 2);
  CHECK(q.dim == 1);
  CHECK(q.center[1][0] == -1.0);

  const ObjectiveFamily h = objective_from_json(
      R"({"kind":"huber","n":2,"d":2,"params":{"delta":[1.0,0.5],"c":[[1,2],[-1,0]]}})");
  CHECK(h.kind == ObjectiveKind::Huber);
  CHECK(h.dim == 2);
  CHECK(h.center[0][1] == 2.0);

  // "d" defaults to 1
  const ObjectiveFamily l = objective_from_json(
      R"({"kind":"logistic","n":2,"params":{"w":[1.0,-1.0],"c":[1.0,-1.0]}})");
  CHECK(l.dim == 1);

  CHECK_THROWS_WITH_AS(
      objective_from_json(R"({"kind":"cubic","n":1,"params":{"a":[1],"c":[0]}})"),
      doctest::Contains("unknown kind"), IoError);
  CHECK_THROWS_AS(objective_from_json(
                      R"({"kind":"quadratic","n":2,"d":1,"params":{"a":[1],"c":[1,-1]}})"),
                  IoError);
  CHECK_THROWS_AS(objective_from_json(
                      R"({"kind":"quadratic","n":2,"d":2,"params":{"a":[1,1],"c":[1,-1]}})"),
                  IoError);
}

TEST_CASE("matrix CSV loader") {
  const auto path = temp_file("iqccert_test_w.csv");
  {
    std::ofstream out(path);
    out << "0.75,0.25\n0.25,0.75\n";
  }
  const Matrix m = load_matrix_csv(path.string());
  REQUIRE(m.rows() == 2);
  REQUIRE(m.cols() == 2);
  CHECK(m(0, 0) == 0.75);

  {
    std::ofstream out(path);
    out << "1,2\n3\n";
  }
  CHECK_THROWS_WITH_AS(load_matrix_csv(path.string()), doctest::Contains("row 2"), IoError);

  {
    std::ofstream out(path);
    out << "1,abc\n";
  }
  CHECK_THROWS_WITH_AS(load_matrix_csv(path.string()), doctest::Contains("column 2"), IoError);

  CHECK_THROWS_AS(load_matrix_csv("/nonexistent/file.csv"), IoError);
  std::filesystem::remove(path);
}

TEST_CASE("trajectory CSV header and shape for d=2") {
  const ObjectiveFamily obj = objective_from_json(
      R"({"kind":"quadratic","n":2,"d":2,"params":{"a":[1.0,1.0],"c":[[1,0],[-1,0]]}})");
  const Trajectory traj = run_dgt(obj, two_node_w(0.5), 0.3, default_x0(2, 2), 5);
  const TrajectoryChecks checks = trajectory_checks(traj, obj);
  const std::string csv = trajectory_csv(traj, nullptr, checks.gap_running_avg);
  CHECK(csv.rfind("k,x_1_1,x_1_2,x_2_1,x_2_2,s_1_1,", 0) == 0);
  // header + 6 rows (k = 0..5)
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);
  // uncertified columns are nan
  CHECK(csv.find(",nan,nan,nan\n") != std::string::npos);
}

TEST_CASE("matrix digest distinguishes matrices and is stable") {
  const std::string a = matrix_digest(two_node_w(0.5).w);
  const std::string b = matrix_digest(two_node_w(0.5).w);
  const std::string c = matrix_digest(two_node_w(-0.5).w);
  CHECK(a == b);
  CHECK(a != c);
  CHECK(a.size() == 16);
}
