#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "campc/reduction.hpp"

using namespace campc;

namespace {

Polytope unit_box() {
  Matrix C(4, 2);
  C << 1, 0, -1, 0, 0, 1, 0, -1;
  return Polytope(C, Vector::Ones(4));
}

Polytope scalar_halfspace() {
  return Polytope(Matrix::Ones(1, 1), Vector::Ones(1));  // x <= 1
}

Vector vec1(double v) { return Vector::Constant(1, v); }

Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

}  // namespace

TEST_CASE("uniform_margins") {
  SUBCASE("unit-normal rows get the distance itself") {
    Polytope P = unit_box();
    SafetyMargins m = uniform_margins(P, 0.1);
    REQUIRE(m.alpha.size() == 4);
    CHECK((m.alpha - Vector::Constant(4, 0.1)).cwiseAbs().maxCoeff() <= 1e-15);
  }
  SUBCASE("scaled row scales the margin") {
    Matrix C(1, 2);
    C << 3, 4;
    Polytope P(C, Vector::Ones(1));
    SafetyMargins m = uniform_margins(P, 0.1);
    CHECK(m.alpha(0) == doctest::Approx(0.5).epsilon(1e-14));
  }
  SUBCASE("nonpositive distance rejected") {
    CHECK_THROWS_AS(uniform_margins(unit_box(), 0.0), std::invalid_argument);
    CHECK_THROWS_AS(uniform_margins(unit_box(), -0.1), std::invalid_argument);
  }
}

TEST_CASE("select_indices") {
  Polytope P = scalar_halfspace();
  SafetyMargins m = uniform_margins(P, 0.1);

  CHECK(select_indices(vec1(0.0), P, m).empty());       // deep inside
  CHECK(select_indices(vec1(0.95), P, m) == IndexSet{0});  // 0.95 > 0.9
  CHECK(select_indices(vec1(0.9), P, m).empty());       // boundary, strict >
  CHECK_THROWS_AS(select_indices(vec2(0, 0), P, m), std::invalid_argument);
}

TEST_CASE("horizon_indices is the union of per-stage selections") {
  Polytope box = unit_box();
  SafetyMargins m = uniform_margins(box, 0.1);

  SUBCASE("nothing selected deep inside") {
    std::vector<Vector> plan = {vec2(0, 0), vec2(0.1, -0.2), vec2(0.5, 0.5)};
    CHECK(horizon_indices(plan, box, m).empty());
  }
  SUBCASE("union semantics") {
    // (0.95, 0.95) selects rows {0, 2}; (-0.95, 0.95) selects rows {1, 2}.
    std::vector<Vector> plan = {vec2(0.95, 0.95), vec2(-0.95, 0.95)};
    CHECK(horizon_indices(plan, box, m) == IndexSet{0, 1, 2});
  }
  SUBCASE("empty plan rejected") {
    CHECK_THROWS_AS(horizon_indices({}, box, m), std::invalid_argument);
  }
}

TEST_CASE("complement_indices uses the intersection rule") {
  Polytope box = unit_box();
  SafetyMargins m = uniform_margins(box, 0.1);

  SUBCASE("set algebra on two stages") {
    // Selections {0, 2} and {1, 2}; intersection {2}; complement {0, 1, 3}.
    std::vector<Vector> plan = {vec2(0.95, 0.95), vec2(-0.95, 0.95)};
    CHECK(complement_indices(plan, box, m) == IndexSet{0, 1, 3});
  }
  SUBCASE("nothing selected gives every row") {
    std::vector<Vector> plan = {vec2(0, 0), vec2(0.1, 0.1)};
    CHECK(complement_indices(plan, box, m) == IndexSet{0, 1, 2, 3});
  }
  SUBCASE("everything selected gives no rows") {
    // Near the (+,+) corner both stages select all four rows only if the
    // state violates every tightened row; use a corner-ish state outside the
    // tightened box in all coordinates. The box cannot violate opposite rows
    // at once, so drive all selections via two rows and shrink the box.
    Matrix C(2, 2);
    C << 1, 0, 0, 1;
    Polytope quad(C, Vector::Ones(2));
    SafetyMargins qm = uniform_margins(quad, 0.1);
    std::vector<Vector> plan = {vec2(0.95, 0.95), vec2(0.99, 0.99)};
    CHECK(complement_indices(plan, quad, qm).empty());
  }
  SUBCASE("empty plan rejected") {
    CHECK_THROWS_AS(complement_indices({}, box, m), std::invalid_argument);
  }
}

TEST_CASE("selection properties on random instances") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Polytope box = unit_box();
  SafetyMargins small = uniform_margins(box, 0.05);
  SafetyMargins large = uniform_margins(box, 0.3);

  for (int s = 0; s < 10000; ++s) {
    Vector x = vec2(unif(rng), unif(rng));
    if (!contains(box, x, 0.0)) continue;

    IndexSet sel = select_indices(x, box, small);
    // Superset: the reduced set keeps every point of X.
    CHECK(contains(row_subset(box, sel), x, 0.0));
    // Coverage: unselected rows hold with the full margin.
    IndexSet all = {0, 1, 2, 3};
    for (Index j : all) {
      if (std::find(sel.begin(), sel.end(), j) == sel.end()) {
        CHECK(box.C.row(j).dot(x) <= box.b(j) - small.alpha(j));
      }
    }
    // Monotonicity: larger margins select a superset.
    IndexSet sel_large = select_indices(x, box, large);
    CHECK(std::includes(sel_large.begin(), sel_large.end(), sel.begin(), sel.end()));
  }

  // Conservatism: every row outside the horizon union lands in the
  // complement set.
  for (int s = 0; s < 2000; ++s) {
    std::vector<Vector> plan;
    for (int i = 0; i < 4; ++i) {
      Vector x = vec2(unif(rng), unif(rng));
      if (contains(box, x, 0.0)) plan.push_back(x);
    }
    if (plan.empty()) continue;
    IndexSet uni = horizon_indices(plan, box, small);
    IndexSet comp = complement_indices(plan, box, small);
    for (Index j = 0; j < box.rows(); ++j) {
      const bool in_union = std::find(uni.begin(), uni.end(), j) != uni.end();
      const bool in_comp = std::find(comp.begin(), comp.end(), j) != comp.end();
      if (!in_union) CHECK(in_comp);
    }
  }
}
