#pragma once

#include <Eigen/Dense>
#include <vector>

#include "campc/qp.hpp"

namespace campc {

/// Halfspace polytope {x : C x <= b}. Zero-row instances represent R^n (the
/// column count of C still carries the ambient dimension). Immutable after
/// construction; safe to share across threads.
struct Polytope {
  Matrix C;
  Vector b;

  Polytope() = default;
  Polytope(Matrix C_in, Vector b_in);

  /// R^n with zero rows.
  static Polytope vacuous(Index dim);

  Index rows() const { return C.rows(); }
  Index dim() const { return C.cols(); }
};

bool contains(const Polytope& P, const Vector& x, double tol = 1e-9);

/// Rows of P selected by idx (0-based, sorted, in-range). An empty idx gives
/// the vacuous polytope.
Polytope row_subset(const Polytope& P, const IndexSet& idx);

/// Same normals, offsets b - margins. Margins must be nonnegative.
Polytope tighten(const Polytope& P, const Vector& margins);

/// Row-stacked intersection of two polytopes over the same space.
Polytope intersect(const Polytope& P, const Polytope& Q);

/// `count` halfspaces tangent to the rotated ellipse, feasible side the
/// interior, tangency points at parameter angles 2*pi*j/count. Rows are
/// normalized to unit 2-norm.
Polytope tangent_facets(const Eigen::Vector2d& center, const Eigen::Vector2d& semi_axes,
                        double rotation, int count);

/// Prunes redundant rows; every retained row is certified non-redundant by
/// maximizing its functional over the remaining rows (LP via the QP solver
/// with a tiny quadratic regularization). Throws if P is detected empty.
Polytope remove_redundant(const Polytope& P);

/// True when C x <= b has a solution (LP feasibility probe).
bool is_feasible(const Polytope& P);

}  // namespace campc
