#pragma once

#include <cstdint>

#include "campc/ltimodel.hpp"
#include "campc/polytope.hpp"

namespace campc {

/// LQR gain (u = -K x), Riccati cost, and terminal polytope.
struct TerminalIngredients {
  Matrix K;
  Matrix P_lqr;
  Polytope X_T;
};

struct DareResult {
  Matrix K;
  Matrix P;
};

/// Fixed-point iteration of the discrete Riccati recursion to 1e-12.
DareResult solve_dare(const LtiModel& model, const Matrix& Q, const Matrix& R);

/// Maximal positively invariant polytope of x+ = (A - BK)x inside
/// X intersect {x : -Kx in U}. Converges when every newly propagated row is
/// redundant; throws if max_iter sweeps are exhausted first.
Polytope max_invariant_set(const LtiModel& model, const Matrix& K, const Polytope& X,
                           const Polytope& U, int max_iter = 200);

/// Sampling certificate: n_samples points of S (rejection sampling inside the
/// support-function bounding box), each propagated one step through (A - BK);
/// true iff every image stays in S and every input -Kx is admissible.
bool check_invariance(const LtiModel& model, const Matrix& K, const Polytope& S,
                      const Polytope& U, int n_samples, std::uint64_t seed = 0);

/// Per-coordinate support bounds of S: row i is [min x_i, max x_i].
/// Throws when a direction is unbounded.
Matrix bounding_box(const Polytope& S);

/// Full synthesis for a scenario: LQR from (Q, R), then the invariant set.
/// For corpora with more than `subsample_threshold` rows the iteration runs
/// on an every-25th-row outer approximation of X, the result is intersected
/// with all rows, pruned, and re-run through the iteration so the final set
/// is invariant for the full corpus.
TerminalIngredients synthesize_terminal(const LtiModel& model, const Matrix& Q, const Matrix& R,
                                        const Polytope& X, const Polytope& U,
                                        Index subsample_threshold = 200);

}  // namespace campc
