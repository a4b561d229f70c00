#include "campc/terminal.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>
#include <stdexcept>

namespace campc {

DareResult solve_dare(const LtiModel& model, const Matrix& Q, const Matrix& R) {
  const Matrix& A = model.A;
  const Matrix& B = model.B;
  Matrix P = Q;
  const int max_iter = 100000;
  for (int it = 0; it < max_iter; ++it) {
    Matrix S = R + B.transpose() * P * B;
    Matrix K = S.ldlt().solve(B.transpose() * P * A);
    Matrix Pn = Q + A.transpose() * P * A - A.transpose() * P * B * K;
    Pn = 0.5 * (Pn + Pn.transpose());
    const double diff = (Pn - P).cwiseAbs().maxCoeff();
    P = Pn;
    if (!P.allFinite()) break;
    if (diff <= 1e-12) {
      DareResult out;
      out.P = P;
      out.K = (R + B.transpose() * P * B).ldlt().solve(B.transpose() * P * A);
      return out;
    }
  }
  throw std::runtime_error("solve_dare: no convergence (unstabilizable or ill-conditioned)");
}

namespace {

double spectral_radius(const Matrix& M) {
  return Eigen::EigenSolver<Matrix>(M, false).eigenvalues().cwiseAbs().maxCoeff();
}

// max c'x over Omega, capped at b + ||c||; redundant iff the optimum does not
// exceed b by more than tolerance.
bool row_redundant(const Polytope& Omega, const Eigen::RowVectorXd& c, double b,
                   QpSolution* cache = nullptr) {
  // Cheap sufficient test: an Omega row parallel to c with a tighter offset
  // dominates the candidate outright (common for propagated facet rows).
  const double cn = c.norm();
  for (Index i = 0; i < Omega.rows(); ++i) {
    const double rn = Omega.C.row(i).norm();
    if ((Omega.C.row(i) / rn - c / cn).lpNorm<Eigen::Infinity>() < 1e-12 &&
        Omega.b(i) / rn <= b / cn + 1e-12) {
      return true;
    }
  }
  QpProblem lp;
  const Index n = Omega.dim();
  lp.H = 2e-10 * Matrix::Identity(n, n);
  lp.g = -c.transpose();
  lp.A = Matrix(Omega.rows() + 1, n);
  lp.A << Omega.C, c;
  lp.b = Vector(Omega.rows() + 1);
  lp.b << Omega.b, b + cn;
  QpSolver solver;
  const QpSolution* warm = (cache != nullptr && cache->z.size() == n) ? cache : nullptr;
  QpSolution s = solver.solve(lp, warm);
  if (cache != nullptr) *cache = s;
  if (s.status != QpStatus::optimal) return false;  // keep on doubt
  return c.dot(s.z) <= b + 1e-9;
}

// Positively invariant set iteration from a seed polytope: propagate the seed
// rows through A_cl until every new row is redundant.
Polytope mpi_iterate(const Matrix& A_cl, Polytope Omega, int max_iter) {
  Matrix F_C = Omega.C * A_cl;
  Vector F_b = Omega.b;
  Index since_prune = 0;
  // Per-frontier-row warm starts: each row's support point drifts slowly
  // between sweeps, so the previous optimum is an excellent initial iterate.
  std::vector<QpSolution> warm(static_cast<size_t>(F_C.rows()));
  for (int it = 0; it < max_iter; ++it) {
    Matrix add_C(F_C.rows(), F_C.cols());
    Vector add_b(F_b.size());
    Index added = 0;
    for (Index j = 0; j < F_C.rows(); ++j) {
      if (F_C.row(j).cwiseAbs().maxCoeff() < 1e-14) continue;
      if (!row_redundant(Omega, F_C.row(j), F_b(j), &warm[static_cast<size_t>(j)])) {
        add_C.row(added) = F_C.row(j);
        add_b(added) = F_b(j);
        ++added;
      }
    }
    if (added == 0) return remove_redundant(Omega);
    Polytope grown;
    grown.C = Matrix(Omega.rows() + added, Omega.dim());
    grown.C << Omega.C, add_C.topRows(added);
    grown.b = Vector(Omega.rows() + added);
    grown.b << Omega.b, add_b.head(added);
    // Full redundancy pruning each sweep is the dominant cost for slow
    // closed loops; prune only once enough rows have accumulated.
    since_prune += added;
    if (since_prune >= 25) {
      Omega = remove_redundant(grown);
      since_prune = 0;
    } else {
      Omega = std::move(grown);
    }
    F_C = F_C * A_cl;
  }
  throw std::runtime_error("max_invariant_set: iteration did not converge");
}

Polytope closed_loop_seed(const Matrix& K, const Polytope& X, const Polytope& U) {
  Polytope seed = X;
  if (U.rows() > 0) {
    Polytope input_rows;
    input_rows.C = -U.C * K;
    input_rows.b = U.b;
    // Rows where the input constraint does not depend on the state are
    // vacuous for the set iteration and are dropped.
    IndexSet nonzero;
    for (Index j = 0; j < input_rows.C.rows(); ++j) {
      if (input_rows.C.row(j).cwiseAbs().maxCoeff() > 1e-14) nonzero.push_back(j);
    }
    seed = intersect(X, row_subset(input_rows, nonzero));
  }
  return remove_redundant(seed);
}

}  // namespace

Polytope max_invariant_set(const LtiModel& model, const Matrix& K, const Polytope& X,
                           const Polytope& U, int max_iter) {
  const Matrix A_cl = model.A - model.B * K;
  if (spectral_radius(A_cl) >= 1.0) {
    throw std::invalid_argument("max_invariant_set: closed loop not Schur stable");
  }
  return mpi_iterate(A_cl, closed_loop_seed(K, X, U), max_iter);
}

Matrix bounding_box(const Polytope& S) {
  const Index n = S.dim();
  Matrix box(n, 2);
  QpSolver solver;
  for (Index i = 0; i < n; ++i) {
    for (int sgn : {-1, 1}) {
      QpProblem lp;
      lp.H = 2e-10 * Matrix::Identity(n, n);
      lp.g = Vector::Zero(n);
      lp.g(i) = -static_cast<double>(sgn);
      lp.A = Matrix(S.rows() + 1, n);
      Eigen::RowVectorXd cap = Eigen::RowVectorXd::Zero(n);
      cap(i) = static_cast<double>(sgn);
      lp.A << S.C, cap;
      lp.b = Vector(S.rows() + 1);
      lp.b << S.b, 1e7;
      QpSolution s = solver.solve(lp);
      const double val = sgn * s.z(i);
      if (s.status != QpStatus::optimal || val >= 1e6) {
        throw std::runtime_error("bounding_box: set appears unbounded");
      }
      box(i, sgn > 0 ? 1 : 0) = s.z(i);
    }
  }
  return box;
}

bool check_invariance(const LtiModel& model, const Matrix& K, const Polytope& S,
                      const Polytope& U, int n_samples, std::uint64_t seed) {
  const Matrix A_cl = model.A - model.B * K;
  const Matrix box = bounding_box(S);
  const Index n = S.dim();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  int accepted = 0;
  long attempts = 0;
  const long max_attempts = 1000L * n_samples;
  Vector x(n);
  while (accepted < n_samples && attempts < max_attempts) {
    ++attempts;
    for (Index i = 0; i < n; ++i) {
      x(i) = box(i, 0) + unif(rng) * (box(i, 1) - box(i, 0));
    }
    if (!contains(S, x, 0.0)) continue;
    ++accepted;
    if (!contains(S, A_cl * x, 1e-9)) return false;
    if (U.rows() > 0 && !contains(U, Vector(-K * x), 1e-9)) return false;
  }
  return true;
}

TerminalIngredients synthesize_terminal(const LtiModel& model, const Matrix& Q, const Matrix& R,
                                        const Polytope& X, const Polytope& U,
                                        Index subsample_threshold) {
  DareResult dare = solve_dare(model, Q, R);
  TerminalIngredients out;
  out.K = dare.K;
  out.P_lqr = dare.P;

  if (X.rows() <= subsample_threshold) {
    out.X_T = max_invariant_set(model, out.K, X, U);
    return out;
  }

  // Large corpus: iterate on a sub-sampled outer approximation, then restore
  // the full row set by intersection and prune.
  IndexSet sub;
  for (Index j = 0; j < X.rows(); j += 25) sub.push_back(j);
  Polytope coarse = max_invariant_set(model, out.K, row_subset(X, sub), U);
  // Screen the full corpus against the coarse set first; redundancy LPs over
  // the small set are much cheaper than over all rows at once.
  IndexSet active_rows;
  for (Index j = 0; j < X.rows(); ++j) {
    if (!row_redundant(coarse, X.C.row(j), X.b(j))) active_rows.push_back(j);
  }
  out.X_T = remove_redundant(intersect(coarse, row_subset(X, active_rows)));
  // The intersection can clip the invariant set, so finish with the exact
  // iteration from the refined seed. It is already near-invariant, which
  // keeps the remaining sweeps cheap.
  out.X_T = max_invariant_set(model, out.K, out.X_T, U);
  return out;
}

}  // namespace campc
