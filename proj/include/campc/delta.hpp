#pragma once

#include <optional>
#include <vector>

#include "campc/ltimodel.hpp"
#include "campc/polytope.hpp"
#include "campc/reduction.hpp"

namespace campc {

enum class DeltaNorm { two, infinity };

/// p-norm ball about a center state. Radius 0 denotes the singleton {center}.
struct DeltaSet {
  Vector center;
  double radius = 0.0;
  DeltaNorm norm = DeltaNorm::infinity;
};

/// One DeltaSet per stage 1..N-1 of the next problem, centered on the tail of
/// the previous optimal plan.
using DeltaTube = std::vector<DeltaSet>;

/// Radius cap used when the complement set has no rows.
inline constexpr double kRadiusCap = 1e6;

/// Largest radius (capped) such that the p-norm ball about `center` lies in
/// X_c, via the support-function identity c = min_j (b_j - C_j center)/||C_j||_*
/// with the dual norm. Returns 0 when the center violates X_c.
double max_ball_radius(const Vector& center, const Polytope& X_c, DeltaNorm norm);

/// Box rows |x - center|_inf <= radius as a 2n-row polytope. Only valid for
/// infinity-norm delta sets (linear rows for the QP).
Polytope delta_box(const DeltaSet& d);

/// Tube for Scheme B: one delta set per previous-plan state, radii against
/// the complement constraint set. With per_stage = false (the horizon-
/// invariant variant) one complement set, built from the conservative
/// intersection rule over the whole plan, is shared by all stages; with
/// per_stage = true each stage uses the complement of its own selection.
DeltaTube build_tube(const std::vector<Vector>& plan, const Polytope& X,
                     const SafetyMargins& margins, DeltaNorm norm, bool per_stage = false);

/// Scheme A: candidate input keeping the plant in X (shifted previous input
/// first, then a one-step minimum-violation program), and the delta ball
/// about the resulting successor state.
struct SchemeADelta {
  Vector u_bar;
  DeltaSet delta;
};

SchemeADelta delta_for_scheme_a(const Vector& x, const LtiModel& model, const Polytope& U_set,
                                const Polytope& X, const SafetyMargins& margins,
                                const std::optional<Vector>& shifted_input, DeltaNorm norm);

}  // namespace campc
