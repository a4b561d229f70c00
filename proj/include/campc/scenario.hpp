#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "campc/controller.hpp"
#include "campc/ltimodel.hpp"
#include "campc/polytope.hpp"

namespace campc {

struct EllipseSpec {
  Eigen::Vector2d center;
  Eigen::Vector2d semi_axes;
  double rotation = 0.0;
  int facets = 500;
};

/// A self-contained benchmark instance. Serializes to a bundle directory of
/// a key-value manifest plus CSV matrix payloads.
struct Scenario {
  std::string name;
  LtiModel model;
  Polytope X;
  Polytope U;
  MpcConfig cfg;
  Vector x0;
  int steps = 150;
  std::uint64_t seed = 0;
  double terminal_gain_R = 300.0;  // input weight of the detuned LQR behind X_T
  std::vector<EllipseSpec> ellipses;
  std::optional<Polytope> X_T;  // cached terminal set
  std::optional<Matrix> K_T;    // cached terminal gain
};

/// The 1000-facet double-integrator benchmark: two rotated-ellipse facet
/// corpora, N = 15, U = [-0.5, 0.5], x0 = (-4.2, -0.3). Throws if the
/// generated corpus fails to contain x0 and the origin with the required
/// safety-set slack.
Scenario gen_flagship(std::uint64_t seed = 0, int facets_per_ellipse = 500);

/// Box state set with full input authority; controlled invariant by
/// construction, for exercising the invariant-set scheme.
Scenario gen_invariant_box(std::uint64_t seed = 0);

/// Synthesizes and caches the terminal ingredients if absent.
void ensure_terminal(Scenario& sc);

void save_scenario(const Scenario& sc, const std::filesystem::path& dir);
Scenario load_scenario(const std::filesystem::path& dir);

// --- simulation -----------------------------------------------------------

struct SimRecord {
  int k = 0;
  Vector x;
  Vector u;
  double stage_cost = 0.0;
  Index qp_rows_total = 0;
  Index qp_state_rows = 0;
  double selected_fraction = 0.0;
  double solve_time = 0.0;
  double build_time = 0.0;
  int solver_iterations = 0;
  double min_tube_radius = 0.0;
};

struct SimLog {
  Scheme scheme = Scheme::full_terminal;
  std::vector<SimRecord> records;
  double startup_time = 0.0;  // ca_terminal only; excluded from step timings
};

SimLog run_closed_loop(const Scenario& sc, Scheme scheme);

struct ComparisonReport {
  double max_state_deviation_inf = 0.0;
  double closed_loop_cost_full = 0.0;
  double closed_loop_cost_ca = 0.0;
  double cost_ratio = 1.0;
  double mean_speedup = 1.0;
  double median_speedup = 1.0;
  double mean_constraint_fraction = 0.0;
  double startup_time = 0.0;
};

struct ComparisonResult {
  ComparisonReport report;
  SimLog full_log;
  SimLog ca_log;
};

/// Runs full_terminal and ca_terminal from the same x0 with identical solver
/// settings and warm-start policy, sequentially, and aggregates the metrics.
ComparisonResult compare(const Scenario& sc);

// --- CSV ------------------------------------------------------------------

void write_matrix_csv(const std::filesystem::path& path, const Matrix& M);
Matrix read_matrix_csv(const std::filesystem::path& path);
Vector read_vector_csv(const std::filesystem::path& path);

void write_csv(const SimLog& log, const std::filesystem::path& path);
SimLog read_simlog_csv(const std::filesystem::path& path);
void write_csv(const ComparisonReport& report, const std::filesystem::path& path);

// --- SVG ------------------------------------------------------------------

/// Phase-plane plot (2D state only): X boundary, X_T, trajectories.
void emit_svg_phase(const std::vector<const SimLog*>& logs, const Scenario& sc,
                    const std::filesystem::path& path);

/// Per-step constraint percentage and (with two logs) speedup on a log scale.
void emit_svg_timeseries(const std::vector<const SimLog*>& logs, const Scenario& sc,
                         const std::filesystem::path& path);

}  // namespace campc
