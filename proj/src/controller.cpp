#include "campc/controller.hpp"

#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

namespace campc {

const char* scheme_name(Scheme s) {
  switch (s) {
    case Scheme::full: return "full";
    case Scheme::full_terminal: return "full_terminal";
    case Scheme::ca_invariant: return "ca_invariant";
    case Scheme::ca_terminal: return "ca_terminal";
  }
  return "?";
}

std::optional<Scheme> scheme_from_name(const std::string& name) {
  if (name == "full") return Scheme::full;
  if (name == "full_terminal") return Scheme::full_terminal;
  if (name == "ca_invariant") return Scheme::ca_invariant;
  if (name == "ca_terminal") return Scheme::ca_terminal;
  return std::nullopt;
}

namespace {

BuiltQp assemble(const LtiModel& model, int N, const Vector& x0, const CostWeights& weights,
                 const std::vector<Polytope>& stage_sets,
                 const std::optional<Polytope>& extra_first, const Polytope& terminal,
                 const Polytope& input_set) {
  BuiltQp out;
  CondensedObjective obj = condense_objective(model, weights, N, x0);
  InequalitySystem sys =
      stack_constraints(model, N, x0, stage_sets, extra_first, terminal, input_set);
  out.qp.H = std::move(obj.H);
  out.qp.g = std::move(obj.g);
  out.objective_constant = obj.constant;
  out.state_rows = sys.rows() - input_set.rows() * N;
  out.qp.A = std::move(sys.A);
  out.qp.b = std::move(sys.b);
  return out;
}

}  // namespace

BuiltQp build_full(const LtiModel& model, const Polytope& X, const Polytope& U,
                   const std::optional<Polytope>& X_T, const Vector& x_k,
                   const MpcConfig& cfg) {
  std::vector<Polytope> stage_sets(static_cast<size_t>(cfg.N - 1), X);
  const Polytope& terminal = X_T ? *X_T : X;
  BuiltQp out = assemble(model, cfg.N, x_k, cfg.weights, stage_sets, std::nullopt, terminal, U);
  out.selected_count = X.rows();
  return out;
}

BuiltQp build_ca_invariant(const LtiModel& model, const Polytope& X, const Polytope& U,
                           const Vector& x_k, const ControllerState& state,
                           const MpcConfig& cfg) {
  SafetyMargins margins = uniform_margins(X, cfg.margin_distance);
  IndexSet sel = select_indices(x_k, X, margins);
  Polytope X_r = row_subset(X, sel);

  std::optional<Vector> shifted;
  if (state.prev_inputs && state.prev_inputs->size() >= 2) {
    shifted = (*state.prev_inputs)[1];
  }
  SchemeADelta ad =
      delta_for_scheme_a(x_k, model, U, X, margins, shifted, cfg.delta_norm);

  std::vector<Polytope> stage_sets(static_cast<size_t>(cfg.N - 1), X_r);
  BuiltQp out = assemble(model, cfg.N, x_k, cfg.weights, stage_sets,
                         delta_box(ad.delta), X_r, U);
  out.selected_count = static_cast<Index>(sel.size());
  out.min_tube_radius = ad.delta.radius;
  return out;
}

BuiltQp build_ca_terminal(const LtiModel& model, const Polytope& X, const Polytope& U,
                          const Polytope& X_T, const ControllerState& state,
                          const MpcConfig& cfg) {
  if (!state.prev_plan) {
    throw std::runtime_error("build_ca_terminal: startup has not been run");
  }
  const std::vector<Vector>& plan = *state.prev_plan;
  if (static_cast<int>(plan.size()) != cfg.N) {
    throw std::runtime_error("build_ca_terminal: plan length mismatch");
  }
  const Vector& x_k = plan.front();
  // Stages 2..N of the previous plan drive both the reduction and the tube.
  std::vector<Vector> tail(plan.begin() + 1, plan.end());

  SafetyMargins margins = uniform_margins(X, cfg.margin_distance);
  DeltaTube tube = build_tube(tail, X, margins, cfg.delta_norm, cfg.per_stage_reduction);

  std::vector<Polytope> stage_sets;
  stage_sets.reserve(tail.size());
  Index selected = 0;
  if (cfg.per_stage_reduction) {
    for (size_t i = 0; i < tail.size(); ++i) {
      IndexSet sel = select_indices(tail[i], X, margins);
      selected = std::max<Index>(selected, static_cast<Index>(sel.size()));
      stage_sets.push_back(intersect(row_subset(X, sel), delta_box(tube[i])));
    }
  } else {
    IndexSet sel = horizon_indices(tail, X, margins);
    selected = static_cast<Index>(sel.size());
    Polytope X_r = row_subset(X, sel);
    for (size_t i = 0; i < tail.size(); ++i) {
      stage_sets.push_back(intersect(X_r, delta_box(tube[i])));
    }
  }

  BuiltQp out =
      assemble(model, cfg.N, x_k, cfg.weights, stage_sets, std::nullopt, X_T, U);
  out.selected_count = selected;
  out.min_tube_radius = kRadiusCap;
  for (const auto& d : tube) out.min_tube_radius = std::min(out.min_tube_radius, d.radius);
  return out;
}

MpcController::MpcController(LtiModel model, Polytope X, Polytope U,
                             std::optional<Polytope> X_T, MpcConfig cfg,
                             std::optional<Matrix> terminal_gain)
    : model_(std::move(model)),
      X_(std::move(X)),
      U_(std::move(U)),
      X_T_(std::move(X_T)),
      cfg_(std::move(cfg)),
      terminal_gain_(std::move(terminal_gain)),
      margins_(uniform_margins(X_, cfg_.margin_distance)),
      solver_(cfg_.solver) {
  if (cfg_.scheme == Scheme::ca_terminal && cfg_.N < 2) {
    throw std::invalid_argument("MpcController: ca_terminal needs N >= 2");
  }
  if ((cfg_.scheme == Scheme::ca_terminal || cfg_.scheme == Scheme::full_terminal) && !X_T_) {
    throw std::invalid_argument("MpcController: terminal scheme needs X_T");
  }
}

void MpcController::startup(const Vector& x0) {
  if (!contains(X_, x0, 1e-9)) {
    throw std::runtime_error("startup: x0 outside X");
  }
  if (!X_T_) {
    throw std::runtime_error("startup: no terminal set configured");
  }
  // Solve the full terminal-set problem at x0; the plan (x0, x*_1, ...,
  // x*_{N-1}) is dynamically consistent and must end in X_T. When the
  // N-horizon solve leaves x*_{N-1} outside X_T, an (N-1)-horizon solve makes
  // the plan end in X_T by construction.
  auto make_plan = [&](int horizon) -> std::optional<std::pair<std::vector<Vector>, std::vector<Vector>>> {
    MpcConfig full_cfg = cfg_;
    full_cfg.scheme = Scheme::full_terminal;
    full_cfg.N = horizon;
    BuiltQp built = build_full(model_, X_, U_, X_T_, x0, full_cfg);
    QpSolution sol = solver_.solve(built.qp);
    if (sol.status != QpStatus::optimal) return std::nullopt;

    const Index n = model_.state_dim();
    const Index m = model_.input_dim();
    std::vector<Vector> plan;
    std::vector<Vector> inputs;
    plan.push_back(x0);
    inputs.push_back(sol.z.head(m));  // placeholder slot; never consumed
    Vector x = x0;
    for (int i = 0; i + 1 < cfg_.N; ++i) {
      Vector u = (i < horizon) ? Vector(sol.z.segment(i * m, m)) : Vector::Zero(m);
      x = step(model_, x, u);
      plan.push_back(x);
      inputs.push_back(u);
    }
    (void)n;
    if (static_cast<int>(inputs.size()) < cfg_.N) inputs.push_back(inputs.back());
    return std::make_pair(plan, inputs);
  };

  auto candidate = make_plan(cfg_.N);
  if (!candidate || !contains(*X_T_, candidate->first.back(), 1e-9)) {
    candidate = make_plan(cfg_.N - 1);
  }
  if (!candidate) {
    throw std::runtime_error("startup: full terminal problem infeasible at x0");
  }
  // Certify membership in S_0(x0).
  const auto& plan = candidate->first;
  for (const auto& xs : plan) {
    if (!contains(X_, xs, 1e-7)) {
      throw std::runtime_error("startup: certified plan leaves X");
    }
  }
  if (!contains(*X_T_, plan.back(), 1e-7)) {
    throw std::runtime_error("startup: certified plan does not end in X_T");
  }
  state_.prev_plan = plan;
  state_.prev_inputs = candidate->second;
  state_.warm.reset();
}

Vector MpcController::shifted_warm_primal() const {
  const Index m = model_.input_dim();
  const Vector& z = state_.warm->z;
  Vector out(z.size());
  out.head(z.size() - m) = z.tail(z.size() - m);
  Vector u_tail = z.tail(m);
  if (terminal_gain_ && state_.prev_plan) {
    u_tail = -(*terminal_gain_) * state_.prev_plan->back();
  }
  out.tail(m) = u_tail;
  return out;
}

std::pair<Vector, StepDiagnostics> MpcController::control_step(const Vector& x_k) {
  const auto t0 = std::chrono::steady_clock::now();
  BuiltQp built;
  switch (cfg_.scheme) {
    case Scheme::full:
      built = build_full(model_, X_, U_, std::nullopt, x_k, cfg_);
      break;
    case Scheme::full_terminal:
      built = build_full(model_, X_, U_, X_T_, x_k, cfg_);
      break;
    case Scheme::ca_invariant:
      built = build_ca_invariant(model_, X_, U_, x_k, state_, cfg_);
      break;
    case Scheme::ca_terminal: {
      if (state_.prev_plan &&
          (state_.prev_plan->front() - x_k).lpNorm<Eigen::Infinity>() > 1e-6) {
        throw std::runtime_error("control_step: measured state disagrees with plan head");
      }
      built = build_ca_terminal(model_, X_, U_, *X_T_, state_, cfg_);
      break;
    }
  }
  const double build_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  QpSolution warm;
  const QpSolution* warm_ptr = nullptr;
  if (state_.warm) {
    warm.z = shifted_warm_primal();
    warm_ptr = &warm;
  }
  QpSolution sol = solver_.solve(built.qp, warm_ptr);
  if (sol.status != QpStatus::optimal) {
    std::ostringstream msg;
    msg << "control_step: QP not solved to optimality (status="
        << (sol.status == QpStatus::primal_infeasible ? "primal_infeasible" : "max_iter")
        << ", scheme=" << scheme_name(cfg_.scheme) << ", rows=" << built.qp.num_constraints()
        << ", iters=" << sol.iterations << "); guarantee violation or configuration bug";
    throw std::runtime_error(msg.str());
  }

  const Index n = model_.state_dim();
  const Index m = model_.input_dim();
  PredictionMatrices pm = build_prediction(model_, cfg_.N);
  const Vector& x0 = (cfg_.scheme == Scheme::ca_terminal && state_.prev_plan)
                         ? state_.prev_plan->front()
                         : x_k;
  Vector stacked = pm.Phi * x0 + pm.Gamma * sol.z;
  std::vector<Vector> plan;
  std::vector<Vector> inputs;
  for (int i = 0; i < cfg_.N; ++i) {
    plan.push_back(stacked.segment(i * n, n));
    inputs.push_back(sol.z.segment(i * m, m));
  }

  StepDiagnostics diag;
  diag.u_applied = inputs.front();
  diag.qp_rows_total = built.qp.num_constraints();
  diag.qp_state_rows = built.state_rows;
  diag.selected_fraction =
      X_.rows() > 0 ? static_cast<double>(built.selected_count) / static_cast<double>(X_.rows())
                    : 0.0;
  diag.solve_time = sol.solve_time;
  diag.build_time = build_time;
  diag.qp_status = sol.status;
  diag.solver_iterations = sol.iterations;
  diag.min_tube_radius = built.min_tube_radius;
  diag.cost_value = sol.objective + built.objective_constant;

  state_.prev_plan = std::move(plan);
  state_.prev_inputs = std::move(inputs);
  state_.warm = std::move(sol);
  return {diag.u_applied, diag};
}

}  // namespace campc
