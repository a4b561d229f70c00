#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "campc/ltimodel.hpp"

using namespace campc;

namespace {

LtiModel double_integrator() {
  Matrix A(2, 2);
  A << 1.0, 0.1, 0.0, 1.0;
  Matrix B(2, 1);
  B << 0.005, 0.1;
  return LtiModel(A, B);
}

LtiModel scalar_model(double a, double b) {
  return LtiModel(Matrix::Constant(1, 1, a), Matrix::Constant(1, 1, b));
}

Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

// Horizon cost evaluated by stepping the plant: terminal term plus stage
// terms, with the stage-0 state cost included.
double simulated_cost(const LtiModel& model, const CostWeights& w, int N, const Vector& x0,
                      const Vector& U) {
  const Index m = model.input_dim();
  Vector x = x0;
  double cost = 0.0;
  for (int i = 0; i < N; ++i) {
    Vector u = U.segment(i * m, m);
    cost += x.dot(w.Q * x) + u.dot(w.R * u);
    x = step(model, x, u);
  }
  return cost + x.dot(w.P_T * x);
}

LtiModel random_model(std::mt19937_64& rng, Index n, Index m) {
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Matrix A(n, n), B(n, m);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) A(i, j) = unif(rng);
    for (Index j = 0; j < m; ++j) B(i, j) = unif(rng);
  }
  return LtiModel(A, B);
}

}  // namespace

TEST_CASE("model and weight validation") {
  CHECK_THROWS_AS(LtiModel(Matrix::Ones(2, 3), Matrix::Ones(2, 1)), std::invalid_argument);
  CHECK_THROWS_AS(LtiModel(Matrix::Identity(2, 2), Matrix::Ones(3, 1)), std::invalid_argument);

  Matrix asym(2, 2);
  asym << 1, 0.5, 0.0, 1;
  CHECK_THROWS_AS(CostWeights(asym, Matrix::Identity(1, 1), Matrix::Identity(2, 2)),
                  std::invalid_argument);
  // R must be strictly positive definite.
  CHECK_THROWS_AS(CostWeights(Matrix::Identity(2, 2), Matrix::Zero(1, 1),
                              Matrix::Identity(2, 2)),
                  std::invalid_argument);
  // Q = 0 is an admissible PSD stage weight.
  CHECK_NOTHROW(CostWeights(Matrix::Zero(2, 2), Matrix::Identity(1, 1),
                            Matrix::Identity(2, 2)));
}

TEST_CASE("step on the double integrator") {
  LtiModel m = double_integrator();
  Vector u0 = Vector::Zero(1);
  Vector u1 = Vector::Ones(1);

  CHECK(step(m, vec2(0, 0), u0).norm() == 0.0);
  CHECK((step(m, vec2(1, 0), u0) - vec2(1, 0)).norm() == 0.0);
  CHECK((step(m, vec2(0, 0), u1) - vec2(0.005, 0.1)).norm() <= 1e-15);
  CHECK_THROWS_AS(step(m, Vector::Zero(3), u0), std::invalid_argument);
}

TEST_CASE("build_prediction") {
  SUBCASE("N = 1 reduces to (A, B)") {
    LtiModel m = double_integrator();
    PredictionMatrices pm = build_prediction(m, 1);
    CHECK((pm.Phi - m.A).cwiseAbs().maxCoeff() == 0.0);
    CHECK((pm.Gamma - m.B).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("identity chain") {
    LtiModel m(Matrix::Identity(2, 2), Matrix::Identity(2, 2));
    PredictionMatrices pm = build_prediction(m, 2);
    Matrix Phi(4, 2), Gamma(4, 4);
    Phi << Matrix::Identity(2, 2), Matrix::Identity(2, 2);
    Gamma << Matrix::Identity(2, 2), Matrix::Zero(2, 2), Matrix::Identity(2, 2),
        Matrix::Identity(2, 2);
    CHECK((pm.Phi - Phi).cwiseAbs().maxCoeff() == 0.0);
    CHECK((pm.Gamma - Gamma).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("N = 15 matches iterated stepping") {
    LtiModel m = double_integrator();
    const int N = 15;
    PredictionMatrices pm = build_prediction(m, N);
    CHECK((pm.Phi.topRows(2) - m.A).cwiseAbs().maxCoeff() == 0.0);

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    Vector x0 = vec2(unif(rng), unif(rng));
    Vector U(N);
    for (int i = 0; i < N; ++i) U(i) = unif(rng);

    Vector stacked = pm.Phi * x0 + pm.Gamma * U;
    Vector x = x0;
    for (int i = 0; i < N; ++i) {
      x = step(m, x, U.segment(i, 1));
      CHECK((stacked.segment(2 * i, 2) - x).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
}

TEST_CASE("condense_objective") {
  SUBCASE("pure input cost") {
    LtiModel m = scalar_model(1.0, 1.0);
    CostWeights w(Matrix::Zero(1, 1), Matrix::Identity(1, 1), Matrix::Zero(1, 1));
    CondensedObjective co = condense_objective(m, w, 1, Vector::Ones(1));
    CHECK(co.H(0, 0) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(co.g(0) == 0.0);
  }
  SUBCASE("one-step terminal drive") {
    LtiModel m = scalar_model(1.0, 1.0);
    CostWeights w(Matrix::Zero(1, 1), Matrix::Constant(1, 1, 1e-12), Matrix::Identity(1, 1));
    CondensedObjective co = condense_objective(m, w, 1, Vector::Ones(1));
    const double u_star = -co.g(0) / co.H(0, 0);
    CHECK(u_star == doctest::Approx(-1.0).epsilon(1e-9));
  }
  SUBCASE("double integrator horizon cost matches simulation") {
    LtiModel m = double_integrator();
    CostWeights w(Matrix::Identity(2, 2), Matrix::Identity(1, 1), Matrix::Identity(2, 2));
    const int N = 15;
    Vector x0 = vec2(-4.2, -0.3);
    CondensedObjective co = condense_objective(m, w, N, x0);

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unif(-0.5, 0.5);
    for (int trial = 0; trial < 10; ++trial) {
      Vector U(N);
      for (int i = 0; i < N; ++i) U(i) = unif(rng);
      const double condensed = 0.5 * U.dot(co.H * U) + co.g.dot(U) + co.constant;
      CHECK(condensed == doctest::Approx(simulated_cost(m, w, N, x0, U)).epsilon(1e-9));
    }
  }
}

TEST_CASE("stack_constraints") {
  SUBCASE("vacuous stage sets leave only input bounds") {
    LtiModel m = double_integrator();
    const int N = 15;
    std::vector<Polytope> stages(N - 1, Polytope::vacuous(2));
    Matrix Cu(2, 1);
    Cu << 1, -1;
    Polytope U(Cu, Vector::Constant(2, 0.5));
    InequalitySystem sys = stack_constraints(m, N, vec2(0, 0), stages, std::nullopt,
                                             Polytope::vacuous(2), U);
    CHECK(sys.rows() == 30);
  }
  SUBCASE("scalar one-step substitution") {
    LtiModel m = scalar_model(1.0, 1.0);
    Polytope terminal(Matrix::Ones(1, 1), Vector::Ones(1));  // x <= 1
    InequalitySystem sys = stack_constraints(m, 1, Vector::Constant(1, 0.5), {}, std::nullopt,
                                             terminal, Polytope::vacuous(1));
    REQUIRE(sys.rows() == 1);
    CHECK(sys.A(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(sys.b(0) == doctest::Approx(0.5).epsilon(1e-14));
  }
  SUBCASE("large corpus row count") {
    // 1000-row state set over a 15-step horizon: 14 interior stages of state
    // rows plus the input bounds.
    LtiModel m = double_integrator();
    const int N = 15;
    Polytope X = tangent_facets({0, 0}, {5, 1.2}, 0.0, 1000);
    std::vector<Polytope> stages(N - 1, X);
    Matrix Cu(2, 1);
    Cu << 1, -1;
    Polytope U(Cu, Vector::Constant(2, 0.5));
    InequalitySystem sys =
        stack_constraints(m, N, vec2(0, 0), stages, std::nullopt, Polytope::vacuous(2), U);
    CHECK(sys.rows() == 14 * 1000 + 30);
  }
  SUBCASE("stage count validated") {
    LtiModel m = double_integrator();
    CHECK_THROWS_AS(stack_constraints(m, 3, vec2(0, 0), {}, std::nullopt,
                                      Polytope::vacuous(2), Polytope::vacuous(1)),
                    std::invalid_argument);
  }
}

TEST_CASE("condensing matches explicit simulation on random instances") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::uniform_int_distribution<int> ndist(1, 3), mdist(1, 2), Ndist(1, 6);

  double min_eig = 1e300;
  for (int trial = 0; trial < 100; ++trial) {
    const Index n = ndist(rng), m = mdist(rng);
    const int N = Ndist(rng);
    LtiModel model = random_model(rng, n, m);

    Matrix Mq(n, n), Mr(m, m);
    for (Index i = 0; i < n * n; ++i) Mq(i / n, i % n) = unif(rng);
    for (Index i = 0; i < m * m; ++i) Mr(i / m, i % m) = unif(rng);
    CostWeights w(Matrix(Mq.transpose() * Mq), Matrix(Mr.transpose() * Mr + 0.1 * Matrix::Identity(m, m)),
                  Matrix(Mq * Mq.transpose()));

    Vector x0(n), U(N * m);
    for (Index i = 0; i < n; ++i) x0(i) = unif(rng);
    for (Index i = 0; i < N * m; ++i) U(i) = unif(rng);

    CondensedObjective co = condense_objective(model, w, N, x0);
    const double condensed = 0.5 * U.dot(co.H * U) + co.g.dot(U) + co.constant;
    const double simulated = simulated_cost(model, w, N, x0, U);
    CHECK(condensed == doctest::Approx(simulated).epsilon(1e-9));

    min_eig = std::min(min_eig,
                       Eigen::SelfAdjointEigenSolver<Matrix>(co.H).eigenvalues().minCoeff());

    // Constraint rows: residuals over U equal the per-stage geometric
    // residuals along the simulated trajectory.
    Polytope box(Matrix(Matrix::Identity(n, n)), Vector::Ones(n));
    std::vector<Polytope> stages(std::max(N - 1, 0), box);
    Polytope Ubox;
    {
      Matrix Cu(2 * m, m);
      Cu << Matrix::Identity(m, m), -Matrix::Identity(m, m);
      Ubox = Polytope(Cu, Vector::Constant(2 * m, 0.7));
    }
    InequalitySystem sys = stack_constraints(model, N, x0, stages, std::nullopt, box, Ubox);
    Vector resid = sys.A * U - sys.b;

    Vector x = x0;
    Index row = 0;
    for (int i = 1; i <= N; ++i) {
      x = step(model, x, U.segment((i - 1) * m, m));
      for (Index j = 0; j < box.rows(); ++j, ++row) {
        CHECK(resid(row) == doctest::Approx(x(j) - 1.0).epsilon(1e-9));
      }
    }
    for (int i = 0; i < N; ++i) {
      Vector u = U.segment(i * m, m);
      Vector want = Ubox.C * u - Ubox.b;
      for (Index j = 0; j < Ubox.rows(); ++j, ++row) {
        CHECK(resid(row) == doctest::Approx(want(j)).epsilon(1e-12));
      }
    }
    CHECK(row == sys.rows());
  }
  CHECK(min_eig > 0.0);  // H stays PD whenever R is PD
}
