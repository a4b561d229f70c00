#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "campc/delta.hpp"
#include "campc/ltimodel.hpp"
#include "campc/polytope.hpp"
#include "campc/qp.hpp"
#include "campc/reduction.hpp"

namespace campc {

enum class Scheme { full, full_terminal, ca_invariant, ca_terminal };

const char* scheme_name(Scheme s);
std::optional<Scheme> scheme_from_name(const std::string& name);

struct MpcConfig {
  int N = 15;
  CostWeights weights;
  Scheme scheme = Scheme::full_terminal;
  double margin_distance = 0.1;
  DeltaNorm delta_norm = DeltaNorm::infinity;
  bool per_stage_reduction = false;  // per-stage reduced sets instead of the
                                     // horizon-invariant union
  QpSettings solver;
};

/// Receding-horizon bookkeeping. prev_plan holds (x*_{1|k-1},...,x*_{N|k-1});
/// prev_inputs holds (u*_{0|k-1},...,u*_{N-1|k-1}), so
/// prev_plan[i+1] = A prev_plan[i] + B prev_inputs[i+1].
struct ControllerState {
  std::optional<std::vector<Vector>> prev_plan;
  std::optional<std::vector<Vector>> prev_inputs;
  std::optional<QpSolution> warm;
};

struct StepDiagnostics {
  Vector u_applied;
  Index qp_rows_total = 0;
  Index qp_state_rows = 0;
  double selected_fraction = 0.0;
  double solve_time = 0.0;
  double build_time = 0.0;
  QpStatus qp_status = QpStatus::max_iter;
  int solver_iterations = 0;
  double min_tube_radius = 0.0;
  double cost_value = 0.0;
};

struct BuiltQp {
  QpProblem qp;
  double objective_constant = 0.0;
  Index state_rows = 0;
  Index selected_count = 0;
  double min_tube_radius = 0.0;
};

BuiltQp build_full(const LtiModel& model, const Polytope& X, const Polytope& U,
                   const std::optional<Polytope>& X_T, const Vector& x_k,
                   const MpcConfig& cfg);

BuiltQp build_ca_invariant(const LtiModel& model, const Polytope& X, const Polytope& U,
                           const Vector& x_k, const ControllerState& state,
                           const MpcConfig& cfg);

BuiltQp build_ca_terminal(const LtiModel& model, const Polytope& X, const Polytope& U,
                          const Polytope& X_T, const ControllerState& state,
                          const MpcConfig& cfg);

/// One receding-horizon controller instance: a single-threaded state machine.
class MpcController {
 public:
  MpcController(LtiModel model, Polytope X, Polytope U, std::optional<Polytope> X_T,
                MpcConfig cfg, std::optional<Matrix> terminal_gain = std::nullopt);

  /// Seeds prev_plan with a certified member of S with first state x0 by
  /// solving the full terminal-set problem once. Required before stepping a
  /// ca_terminal controller.
  void startup(const Vector& x0);

  std::pair<Vector, StepDiagnostics> control_step(const Vector& x_k);

  const ControllerState& state() const { return state_; }
  const SafetyMargins& margins() const { return margins_; }
  const MpcConfig& config() const { return cfg_; }

 private:
  LtiModel model_;
  Polytope X_;
  Polytope U_;
  std::optional<Polytope> X_T_;
  MpcConfig cfg_;
  std::optional<Matrix> terminal_gain_;
  SafetyMargins margins_;
  QpSolver solver_;
  ControllerState state_;

  Vector shifted_warm_primal() const;
};

}  // namespace campc
