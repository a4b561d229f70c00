#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "campc/qp.hpp"

using namespace campc;

namespace {

// min z^2 - 4z subject to z <= 1; optimum z = 1 with multiplier 2.
QpProblem bound_example() {
  QpProblem p;
  p.H = Matrix::Constant(1, 1, 2.0);
  p.g = Vector::Constant(1, -4.0);
  p.A = Matrix::Ones(1, 1);
  p.b = Vector::Ones(1);
  return p;
}

QpProblem random_qp(std::mt19937_64& rng, Index d, Index q) {
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::uniform_real_distribution<double> slack(0.01, 1.0);
  QpProblem p;
  Matrix M(d, d);
  for (Index i = 0; i < d * d; ++i) M(i / d, i % d) = unif(rng);
  p.H = M.transpose() * M + 0.05 * Matrix::Identity(d, d);
  p.g = Vector(d);
  for (Index i = 0; i < d; ++i) p.g(i) = unif(rng);
  p.A = Matrix(q, d);
  Vector z0(d);
  for (Index i = 0; i < d; ++i) z0(i) = unif(rng);
  p.b = Vector(q);
  for (Index j = 0; j < q; ++j) {
    for (Index i = 0; i < d; ++i) p.A(j, i) = unif(rng);
    if (p.A.row(j).cwiseAbs().maxCoeff() < 1e-3) p.A(j, 0) = 1.0;
    // Feasible by construction: z0 satisfies every row with positive slack.
    p.b(j) = p.A.row(j).dot(z0) + slack(rng);
  }
  return p;
}

}  // namespace

TEST_CASE("analytic scalar bounds") {
  QpSolver solver;

  SUBCASE("inactive bound") {
    QpProblem p = bound_example();
    p.g.setZero();  // unconstrained optimum 0 is feasible
    QpSolution s = solver.solve(p);
    REQUIRE(s.status == QpStatus::optimal);
    CHECK(s.z(0) == doctest::Approx(0.0).epsilon(1e-8));
    CHECK(s.duals(0) == doctest::Approx(0.0).epsilon(1e-8));
  }
  SUBCASE("active bound with dual from stationarity") {
    QpSolution s = solver.solve(bound_example());
    REQUIRE(s.status == QpStatus::optimal);
    CHECK(s.z(0) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(s.duals(0) == doctest::Approx(2.0).epsilon(1e-8));
  }
  SUBCASE("infeasible row pair") {
    QpProblem p;
    p.H = Matrix::Identity(1, 1);
    p.g = Vector::Zero(1);
    p.A = Matrix(2, 1);
    p.A << 1, -1;
    p.b = Vector(2);
    p.b << 0, -1;  // z <= 0 and z >= 1
    CHECK(solver.solve(p).status == QpStatus::primal_infeasible);
  }
}

TEST_CASE("kkt_residuals") {
  QpProblem p = bound_example();

  SUBCASE("optimal point has tiny residuals") {
    Vector z = Vector::Ones(1);
    Vector duals = Vector::Constant(1, 2.0);
    CHECK(kkt_residuals(p, z, duals).max() <= 1e-10);
  }
  SUBCASE("primal perturbation shows up in stationarity") {
    Vector z = Vector::Constant(1, 1.0 - 1e-3);
    Vector duals = Vector::Constant(1, 2.0);
    KktResiduals r = kkt_residuals(p, z, duals);
    CHECK(r.stationarity == doctest::Approx(2e-3).epsilon(1e-6));
  }
  SUBCASE("unconstrained optimum with zero duals is exact") {
    QpProblem q = bound_example();
    q.g.setZero();
    KktResiduals r = kkt_residuals(q, Vector::Zero(1), Vector::Zero(1));
    CHECK(r.max() == 0.0);
  }
}

TEST_CASE("brute_force_solve") {
  SUBCASE("matches the analytic bound") {
    QpSolution s = brute_force_solve(bound_example());
    REQUIRE(s.status == QpStatus::optimal);
    CHECK(s.z(0) == doctest::Approx(1.0).epsilon(1e-10));
  }
  SUBCASE("feasible unconstrained minimizer wins with empty active set") {
    QpProblem p = bound_example();
    p.g.setZero();
    QpSolution s = brute_force_solve(p);
    REQUIRE(s.status == QpStatus::optimal);
    CHECK(s.z(0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(s.active_set.empty());
  }
  SUBCASE("degenerate duplicate rows agree with the iterative solver") {
    QpProblem p;
    p.H = 2.0 * Matrix::Identity(2, 2);
    p.g = Vector::Constant(2, -2.0);
    p.A = Matrix(4, 2);
    p.A << 1, 1, 1, 1, 1, 0, 1, 0;  // both rows duplicated
    p.b = Vector(4);
    p.b << 1, 1, 0.4, 0.4;
    QpSolution bf = brute_force_solve(p);
    QpSolution it = QpSolver().solve(p);
    REQUIRE(bf.status == QpStatus::optimal);
    REQUIRE(it.status == QpStatus::optimal);
    CHECK(bf.objective == doctest::Approx(it.objective).epsilon(1e-8));
  }
  SUBCASE("size guard") {
    QpProblem p;
    p.H = Matrix::Identity(7, 7);
    p.g = Vector::Zero(7);
    p.A = Matrix::Identity(7, 7);
    p.b = Vector::Ones(7);
    CHECK_THROWS(brute_force_solve(p));
  }
}

TEST_CASE("oracle equivalence on random instances") {
  std::mt19937_64 rng(31337);
  std::uniform_int_distribution<int> ddist(1, 4), qdist(1, 8);
  QpSolver solver;

  int matched = 0;
  for (int trial = 0; trial < 200; ++trial) {
    QpProblem p = random_qp(rng, ddist(rng), qdist(rng));
    QpSolution got = solver.solve(p);
    QpSolution want = brute_force_solve(p);
    REQUIRE(got.status == QpStatus::optimal);
    REQUIRE(want.status == QpStatus::optimal);
    CHECK((got.z - want.z).lpNorm<Eigen::Infinity>() <= 1e-6);
    CHECK(got.objective == doctest::Approx(want.objective).epsilon(1e-8));
    ++matched;
  }
  CHECK(matched == 200);
}

TEST_CASE("determinism: identical input, identical output") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    QpProblem p = random_qp(rng, 3, 6);
    QpSolution a = QpSolver().solve(p);
    QpSolution b = QpSolver().solve(p);
    CHECK(a.iterations == b.iterations);
    CHECK((a.z - b.z).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK((a.duals - b.duals).lpNorm<Eigen::Infinity>() == 0.0);
  }
}

TEST_CASE("warm starts track slowly varying sequences") {
  std::mt19937_64 rng(55);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);

  int warm_not_worse = 0, total = 0;
  for (int seq = 0; seq < 20; ++seq) {
    QpProblem p = random_qp(rng, 3, 6);
    QpSolver warm_solver, cold_solver;
    QpSolution prev = warm_solver.solve(p);
    REQUIRE(prev.status == QpStatus::optimal);
    for (int k = 0; k < 10; ++k) {
      // Drift the linear term slightly; constraints stay fixed.
      for (Index i = 0; i < p.g.size(); ++i) p.g(i) += 0.01 * unif(rng);
      QpSolution warm = warm_solver.solve(p, &prev);
      QpSolution cold = cold_solver.solve(p);
      REQUIRE(warm.status == QpStatus::optimal);
      REQUIRE(cold.status == QpStatus::optimal);
      CHECK(std::abs(warm.objective - cold.objective) <= 1e-8 * (1.0 + std::abs(cold.objective)));
      ++total;
      if (warm.iterations <= cold.iterations) ++warm_not_worse;
      prev = warm;
    }
  }
  // Warm starting must not cost iterations in at least 90% of the steps.
  CHECK(warm_not_worse >= (total * 9) / 10);
}

TEST_CASE("optimal status certifies unscaled KKT residuals") {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> ddist(2, 4), qdist(2, 8);
  QpSolver solver;
  for (int trial = 0; trial < 50; ++trial) {
    QpProblem p = random_qp(rng, ddist(rng), qdist(rng));
    QpSolution s = solver.solve(p);
    REQUIRE(s.status == QpStatus::optimal);
    CHECK(kkt_residuals(p, s.z, s.duals).max() <= 1e-8);
  }
}
