#pragma once

#include <vector>

#include "campc/polytope.hpp"

namespace campc {

/// Per-row safety margins for a governing state polytope.
struct SafetyMargins {
  Vector alpha;
};

/// alpha_j = distance * ||C_j||_2, so the polytope is tightened by a uniform
/// geometric distance regardless of row scaling.
SafetyMargins uniform_margins(const Polytope& X, double distance);

/// Rows whose tightened constraint is strictly violated at x:
/// { j : C_j x > b_j - alpha_j }. Boundary states of the tightened set are
/// not selected.
IndexSet select_indices(const Vector& x, const Polytope& X, const SafetyMargins& margins);

/// Union of select_indices over the given plan states.
IndexSet horizon_indices(const std::vector<Vector>& plan, const Polytope& X,
                         const SafetyMargins& margins);

/// Full index set minus the intersection of per-state selections. A
/// deliberately conservative complement: every row outside
/// horizon_indices() is contained in the result.
IndexSet complement_indices(const std::vector<Vector>& plan, const Polytope& X,
                            const SafetyMargins& margins);

}  // namespace campc
