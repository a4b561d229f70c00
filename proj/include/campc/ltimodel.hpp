#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "campc/polytope.hpp"

namespace campc {

/// Discrete-time plant x+ = A x + B u.
struct LtiModel {
  Matrix A;
  Matrix B;

  LtiModel() = default;
  LtiModel(Matrix A_in, Matrix B_in);

  Index state_dim() const { return A.rows(); }
  Index input_dim() const { return B.cols(); }
};

/// Quadratic stage/terminal weights. Q, P_T symmetric PSD; R symmetric PD.
struct CostWeights {
  Matrix Q;
  Matrix R;
  Matrix P_T;

  CostWeights() = default;
  CostWeights(Matrix Q_in, Matrix R_in, Matrix PT_in);
};

/// Stacked free/forced response over a horizon: [x_1; ...; x_N] = Phi x0 + Gamma U.
struct PredictionMatrices {
  Matrix Phi;    // (N n) x n
  Matrix Gamma;  // (N n) x (N m)
  int N = 0;
};

/// Condensed cost: 1/2 U'H U + g'U + constant equals the horizon cost from x0.
struct CondensedObjective {
  Matrix H;
  Vector g;
  double constant = 0.0;
};

struct InequalitySystem {
  Matrix A;
  Vector b;

  Index rows() const { return A.rows(); }
};

Vector step(const LtiModel& model, const Vector& x, const Vector& u);

PredictionMatrices build_prediction(const LtiModel& model, int N);

CondensedObjective condense_objective(const LtiModel& model, const CostWeights& weights,
                                      int N, const Vector& x0);

/// Maps per-stage state polytopes (stages 1..N-1), an optional extra stage-1
/// set, a terminal set for stage N, and per-stage input rows into one
/// inequality system over the stacked input sequence. State rows come first
/// (stage order), then terminal rows, then input rows.
InequalitySystem stack_constraints(const LtiModel& model, int N, const Vector& x0,
                                   const std::vector<Polytope>& stage_sets,
                                   const std::optional<Polytope>& extra_first_stage,
                                   const Polytope& terminal, const Polytope& input_set);

}  // namespace campc
