#include "campc/delta.hpp"

#include <algorithm>
#include <stdexcept>

namespace campc {

double max_ball_radius(const Vector& center, const Polytope& X_c, DeltaNorm norm) {
  if (X_c.rows() > 0 && center.size() != X_c.dim()) {
    throw std::invalid_argument("max_ball_radius: dimension mismatch");
  }
  double c = kRadiusCap;
  for (Index j = 0; j < X_c.rows(); ++j) {
    const double slack = X_c.b(j) - X_c.C.row(j).dot(center);
    // Dual norm of the row: 1-norm for infinity balls, 2-norm for 2-balls.
    const double dual = (norm == DeltaNorm::infinity)
                            ? X_c.C.row(j).lpNorm<1>()
                            : X_c.C.row(j).norm();
    c = std::min(c, slack / dual);
  }
  return std::max(c, 0.0);
}

Polytope delta_box(const DeltaSet& d) {
  if (d.norm != DeltaNorm::infinity) {
    throw std::invalid_argument("delta_box: only infinity-norm delta sets have linear rows");
  }
  const Index n = d.center.size();
  Matrix C(2 * n, n);
  C << Matrix::Identity(n, n), -Matrix::Identity(n, n);
  Vector b(2 * n);
  b.head(n) = d.center.array() + d.radius;
  b.tail(n) = -d.center.array() + d.radius;
  return Polytope(std::move(C), std::move(b));
}

DeltaTube build_tube(const std::vector<Vector>& plan, const Polytope& X,
                     const SafetyMargins& margins, DeltaNorm norm, bool per_stage) {
  if (plan.empty()) {
    throw std::invalid_argument("build_tube: empty plan");
  }
  for (const auto& x : plan) {
    if (!contains(X, x, 1e-7)) {
      throw std::runtime_error("build_tube: plan state outside X (invariant breach)");
    }
  }
  DeltaTube tube;
  tube.reserve(plan.size());
  if (per_stage) {
    for (const auto& x : plan) {
      IndexSet sel = select_indices(x, X, margins);
      IndexSet comp;
      size_t pos = 0;
      for (Index j = 0; j < X.rows(); ++j) {
        if (pos < sel.size() && sel[pos] == j) {
          ++pos;
        } else {
          comp.push_back(j);
        }
      }
      tube.push_back({x, max_ball_radius(x, row_subset(X, comp), norm), norm});
    }
  } else {
    IndexSet comp = complement_indices(plan, X, margins);
    for (const auto& x : plan) {
      // The shared complement can retain rows this stage itself selects (the
      // intersection rule is deliberately conservative). Those rows already
      // travel with the reduced set, so the radius only needs to respect the
      // rest; keeping them would pin boundary-riding stages to radius zero.
      IndexSet sel = select_indices(x, X, margins);
      IndexSet rows;
      rows.reserve(comp.size());
      std::set_difference(comp.begin(), comp.end(), sel.begin(), sel.end(),
                          std::back_inserter(rows));
      tube.push_back({x, max_ball_radius(x, row_subset(X, rows), norm), norm});
    }
  }
  return tube;
}

SchemeADelta delta_for_scheme_a(const Vector& x, const LtiModel& model, const Polytope& U_set,
                                const Polytope& X, const SafetyMargins& margins,
                                const std::optional<Vector>& shifted_input, DeltaNorm norm) {
  if (!contains(X, x, 1e-7)) {
    throw std::runtime_error("delta_for_scheme_a: state outside X");
  }

  std::optional<Vector> u_bar;
  if (shifted_input && contains(U_set, *shifted_input, 1e-9) &&
      contains(X, step(model, x, *shifted_input), 0.0)) {
    u_bar = *shifted_input;
  }
  if (!u_bar) {
    // One-step minimum-violation program over (u, t):
    //   minimize t  s.t.  C(Ax + Bu) - b <= t 1,  C_u u <= b_u.
    const Index m = model.input_dim();
    QpProblem lp;
    lp.H = 2e-10 * Matrix::Identity(m + 1, m + 1);
    lp.g = Vector::Zero(m + 1);
    lp.g(m) = 1.0;
    const Index q = X.rows() + U_set.rows();
    lp.A = Matrix::Zero(q, m + 1);
    lp.b = Vector(q);
    lp.A.topLeftCorner(X.rows(), m) = X.C * model.B;
    lp.A.topRightCorner(X.rows(), 1).setConstant(-1.0);
    lp.b.head(X.rows()) = X.b - X.C * (model.A * x);
    lp.A.bottomLeftCorner(U_set.rows(), m) = U_set.C;
    lp.b.tail(U_set.rows()) = U_set.b;
    QpSolver solver;
    QpSolution s = solver.solve(lp);
    Vector cand = s.z.head(m);
    if (s.status == QpStatus::primal_infeasible || !contains(U_set, cand, 1e-9) ||
        !contains(X, step(model, x, cand), 1e-9)) {
      throw std::runtime_error(
          "delta_for_scheme_a: no admissible input keeps the state in X "
          "(X is not controlled invariant for this scenario)");
    }
    u_bar = cand;
  }

  Vector center = step(model, x, *u_bar);
  IndexSet sel = select_indices(x, X, margins);
  IndexSet comp;
  size_t pos = 0;
  for (Index j = 0; j < X.rows(); ++j) {
    if (pos < sel.size() && sel[pos] == j) {
      ++pos;
    } else {
      comp.push_back(j);
    }
  }
  SchemeADelta out;
  out.u_bar = *u_bar;
  out.delta = {center, max_ball_radius(center, row_subset(X, comp), norm), norm};
  return out;
}

}  // namespace campc
