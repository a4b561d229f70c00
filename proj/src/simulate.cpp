#include <algorithm>
#include <chrono>
#include <stdexcept>

#include "campc/scenario.hpp"

namespace campc {

namespace {

bool needs_terminal(Scheme scheme) {
  return scheme == Scheme::full_terminal || scheme == Scheme::ca_terminal;
}

}  // namespace

SimLog run_closed_loop(const Scenario& sc_in, Scheme scheme) {
  Scenario sc = sc_in;
  if (needs_terminal(scheme)) ensure_terminal(sc);

  MpcConfig cfg = sc.cfg;
  cfg.scheme = scheme;
  MpcController controller(sc.model, sc.X, sc.U, sc.X_T, cfg, sc.K_T);

  SimLog log;
  log.scheme = scheme;
  if (sc.steps == 0) return log;

  if (scheme == Scheme::ca_terminal) {
    const auto t0 = std::chrono::steady_clock::now();
    controller.startup(sc.x0);
    log.startup_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }

  // One discarded warm-up solve so first-step timings do not carry cold-cache
  // noise.
  {
    MpcController scratch(sc.model, sc.X, sc.U, sc.X_T, cfg, sc.K_T);
    if (scheme == Scheme::ca_terminal) {
      scratch.startup(sc.x0);
    }
    scratch.control_step(sc.x0);
  }

  Vector x = sc.x0;
  for (int k = 0; k < sc.steps; ++k) {
    auto [u, diag] = controller.control_step(x);
    SimRecord rec;
    rec.k = k;
    rec.x = x;
    rec.u = u;
    rec.stage_cost = x.dot(sc.cfg.weights.Q * x) + u.dot(sc.cfg.weights.R * u);
    rec.qp_rows_total = diag.qp_rows_total;
    rec.qp_state_rows = diag.qp_state_rows;
    rec.selected_fraction = diag.selected_fraction;
    rec.solve_time = diag.solve_time;
    rec.build_time = diag.build_time;
    rec.solver_iterations = diag.solver_iterations;
    rec.min_tube_radius = diag.min_tube_radius;
    log.records.push_back(std::move(rec));
    x = step(sc.model, x, u);
  }
  return log;
}

ComparisonResult compare(const Scenario& sc_in) {
  Scenario sc = sc_in;
  ensure_terminal(sc);

  ComparisonResult out;
  out.full_log = run_closed_loop(sc, Scheme::full_terminal);
  out.ca_log = run_closed_loop(sc, Scheme::ca_terminal);

  const size_t steps = out.full_log.records.size();
  if (out.ca_log.records.size() != steps) {
    throw std::runtime_error("compare: run lengths disagree");
  }

  ComparisonReport& r = out.report;
  r.startup_time = out.ca_log.startup_time;
  std::vector<double> speedups;
  speedups.reserve(steps);
  for (size_t k = 0; k < steps; ++k) {
    const auto& f = out.full_log.records[k];
    const auto& c = out.ca_log.records[k];
    r.max_state_deviation_inf =
        std::max(r.max_state_deviation_inf, (f.x - c.x).lpNorm<Eigen::Infinity>());
    r.closed_loop_cost_full += f.stage_cost;
    r.closed_loop_cost_ca += c.stage_cost;
    speedups.push_back(f.solve_time / std::max(c.solve_time, 1e-12));
    r.mean_constraint_fraction += c.selected_fraction;
  }
  if (steps > 0) {
    r.mean_constraint_fraction /= static_cast<double>(steps);
    r.mean_speedup = 0.0;
    for (double s : speedups) r.mean_speedup += s;
    r.mean_speedup /= static_cast<double>(steps);
    std::vector<double> sorted = speedups;
    std::sort(sorted.begin(), sorted.end());
    r.median_speedup = sorted[sorted.size() / 2];
    r.cost_ratio = r.closed_loop_cost_ca / r.closed_loop_cost_full;
  }
  return out;
}

}  // namespace campc
