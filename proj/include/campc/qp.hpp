#pragma once

#include <Eigen/Dense>
#include <vector>

namespace campc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;
using IndexSet = std::vector<Index>;

/// Dense convex QP:  minimize 1/2 z'Hz + g'z  subject to  A z <= b,
/// with H symmetric positive definite.
struct QpProblem {
  Matrix H;
  Vector g;
  Matrix A;
  Vector b;

  Index dim() const { return H.rows(); }
  Index num_constraints() const { return A.rows(); }
};

enum class QpStatus { optimal, primal_infeasible, max_iter };

struct QpSolution {
  Vector z;
  Vector duals;
  QpStatus status = QpStatus::max_iter;
  int iterations = 0;
  double solve_time = 0.0;
  IndexSet active_set;
  double objective = 0.0;
};

struct QpSettings {
  double tol = 1e-8;       // unscaled KKT residual target
  int max_iter = 20000;
  double act_tol = 1e-6;   // active-set identification threshold (scaled rows)
  bool scaling = true;
  int scaling_iters = 10;  // Ruiz equilibration sweeps
  double rho = 0.1;        // ADMM penalty (adapted online)
  double sigma = 1e-6;     // proximal regularization
  double alpha = 1.6;      // over-relaxation
  int check_interval = 25;
};

struct KktResiduals {
  double stationarity = 0.0;
  double primal = 0.0;
  double comp_slack = 0.0;
  double max() const;
};

KktResiduals kkt_residuals(const QpProblem& p, const Vector& z, const Vector& duals);

/// Operator-splitting QP solver with Ruiz equilibration and a direct
/// active-set polish step. A solver instance owns mutable workspace and is
/// single-threaded; distinct instances may run concurrently. Deterministic:
/// the same input produces the same iterate sequence.
class QpSolver {
 public:
  explicit QpSolver(QpSettings settings = {}) : settings_(settings) {}

  QpSolution solve(const QpProblem& p, const QpSolution* warm = nullptr);

  QpSettings& settings() { return settings_; }
  const QpSettings& settings() const { return settings_; }

 private:
  QpSettings settings_;
};

/// Enumeration oracle: solves the KKT system for every active subset of rows
/// up to size dim(), keeps primal-feasible dual-nonnegative candidates, and
/// returns the best. Guarded to num_constraints() <= 20 and dim() <= 6.
QpSolution brute_force_solve(const QpProblem& p);

}  // namespace campc
