#include "campc/polytope.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace campc {

Polytope::Polytope(Matrix C_in, Vector b_in) : C(std::move(C_in)), b(std::move(b_in)) {
  if (C.rows() != b.size()) {
    throw std::invalid_argument("Polytope: C and b row counts disagree");
  }
  for (Index j = 0; j < C.rows(); ++j) {
    if (C.row(j).cwiseAbs().maxCoeff() == 0.0) {
      throw std::invalid_argument("Polytope: zero row in C");
    }
  }
}

Polytope Polytope::vacuous(Index dim) {
  Polytope P;
  P.C = Matrix(0, dim);
  P.b = Vector(0);
  return P;
}

bool contains(const Polytope& P, const Vector& x, double tol) {
  if (x.size() != P.dim()) {
    throw std::invalid_argument("contains: dimension mismatch");
  }
  if (P.rows() == 0) return true;
  return ((P.C * x - P.b).array() <= tol).all();
}

Polytope row_subset(const Polytope& P, const IndexSet& idx) {
  Polytope out;
  out.C = Matrix(static_cast<Index>(idx.size()), P.dim());
  out.b = Vector(static_cast<Index>(idx.size()));
  for (size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] < 0 || idx[i] >= P.rows()) {
      throw std::out_of_range("row_subset: index out of range");
    }
    out.C.row(static_cast<Index>(i)) = P.C.row(idx[i]);
    out.b(static_cast<Index>(i)) = P.b(idx[i]);
  }
  return out;
}

Polytope tighten(const Polytope& P, const Vector& margins) {
  if (margins.size() != P.rows()) {
    throw std::invalid_argument("tighten: margin length mismatch");
  }
  if (margins.size() > 0 && margins.minCoeff() < 0.0) {
    throw std::invalid_argument("tighten: negative margin");
  }
  Polytope out;
  out.C = P.C;
  out.b = P.b - margins;
  return out;
}

Polytope intersect(const Polytope& P, const Polytope& Q) {
  if (P.dim() != Q.dim()) {
    throw std::invalid_argument("intersect: dimension mismatch");
  }
  Polytope out;
  out.C = Matrix(P.rows() + Q.rows(), P.dim());
  out.C << P.C, Q.C;
  out.b = Vector(P.rows() + Q.rows());
  out.b << P.b, Q.b;
  return out;
}

Polytope tangent_facets(const Eigen::Vector2d& center, const Eigen::Vector2d& semi_axes,
                        double rotation, int count) {
  if (count < 3) {
    throw std::invalid_argument("tangent_facets: count must be >= 3");
  }
  if (semi_axes.minCoeff() <= 0.0) {
    throw std::invalid_argument("tangent_facets: nonpositive semi-axis");
  }
  const double a = semi_axes(0);
  const double bax = semi_axes(1);
  Eigen::Matrix2d R;
  R << std::cos(rotation), -std::sin(rotation), std::sin(rotation), std::cos(rotation);

  Matrix C(count, 2);
  Vector off(count);
  for (int j = 0; j < count; ++j) {
    const double th = 2.0 * std::numbers::pi * j / count;
    Eigen::Vector2d p_local(a * std::cos(th), bax * std::sin(th));
    Eigen::Vector2d n_local(std::cos(th) / a, std::sin(th) / bax);
    n_local.normalize();
    Eigen::Vector2d p = center + R * p_local;
    Eigen::Vector2d n = R * n_local;
    C.row(j) = n.transpose();
    off(j) = n.dot(p);
  }
  return Polytope(std::move(C), std::move(off));
}

namespace {

constexpr double kLpReg = 1e-10;

// Feasibility probe: min eps*||x||^2 over Cx <= b.
bool probe_feasible(const Polytope& P) {
  if (P.rows() == 0) return true;
  QpProblem lp;
  lp.H = 2.0 * kLpReg * Matrix::Identity(P.dim(), P.dim());
  lp.g = Vector::Zero(P.dim());
  lp.A = P.C;
  lp.b = P.b;
  QpSolver solver;
  return solver.solve(lp).status != QpStatus::primal_infeasible;
}

}  // namespace

bool is_feasible(const Polytope& P) { return probe_feasible(P); }

Polytope remove_redundant(const Polytope& P) {
  if (P.rows() == 0) return P;
  if (!probe_feasible(P)) {
    throw std::invalid_argument("remove_redundant: empty polytope");
  }

  // Pass 1: drop exact duplicates / dominated parallel copies of a row,
  // comparing unit-normalized rows.
  const Index n = P.rows();
  Matrix Cn(n, P.dim());
  Vector bn(n);
  for (Index j = 0; j < n; ++j) {
    const double nrm = P.C.row(j).norm();
    Cn.row(j) = P.C.row(j) / nrm;
    bn(j) = P.b(j) / nrm;
  }
  std::vector<Index> retained;
  for (Index j = 0; j < n; ++j) {
    bool parallel = false;
    for (auto& i : retained) {
      if ((Cn.row(i) - Cn.row(j)).cwiseAbs().maxCoeff() <= 1e-12) {
        if (bn(j) < bn(i)) i = j;  // keep the tighter copy
        parallel = true;
        break;
      }
    }
    if (!parallel) retained.push_back(j);
  }

  // Pass 2: LP certification row by row against the remaining retained rows.
  QpSolver solver;
  std::vector<Index> keep = retained;
  for (size_t pos = 0; pos < keep.size();) {
    const Index j = keep[pos];
    const Index m = static_cast<Index>(keep.size());
    QpProblem lp;
    lp.H = 2.0 * kLpReg * Matrix::Identity(P.dim(), P.dim());
    lp.g = -P.C.row(j).transpose();
    lp.A = Matrix(m, P.dim());  // others + cap on the tested functional
    lp.b = Vector(m);
    Index r = 0;
    for (Index i : keep) {
      if (i == j) continue;
      lp.A.row(r) = P.C.row(i);
      lp.b(r) = P.b(i);
      ++r;
    }
    lp.A.row(r) = P.C.row(j);
    lp.b(r) = P.b(j) + P.C.row(j).norm();
    QpSolution s = solver.solve(lp);
    const double opt = (s.status == QpStatus::optimal) ? P.C.row(j).dot(s.z)
                                                       : P.b(j) + 1.0;  // keep on doubt
    if (opt > P.b(j) - 1e-9) {
      ++pos;  // non-redundant
    } else {
      keep.erase(keep.begin() + static_cast<std::ptrdiff_t>(pos));
    }
  }

  std::sort(keep.begin(), keep.end());
  return row_subset(P, IndexSet(keep.begin(), keep.end()));
}

}  // namespace campc
