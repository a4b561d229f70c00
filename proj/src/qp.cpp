#include "campc/qp.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace campc {

double KktResiduals::max() const {
  return std::max({stationarity, primal, comp_slack});
}

KktResiduals kkt_residuals(const QpProblem& p, const Vector& z, const Vector& duals) {
  if (z.size() != p.dim() || duals.size() != p.num_constraints()) {
    throw std::invalid_argument("kkt_residuals: dimension mismatch");
  }
  KktResiduals r;
  r.stationarity = (p.H * z + p.g + p.A.transpose() * duals).lpNorm<Eigen::Infinity>();
  if (p.num_constraints() > 0) {
    Vector slack = p.A * z - p.b;
    r.primal = slack.cwiseMax(0.0).lpNorm<Eigen::Infinity>();
    r.comp_slack = (duals.array() * slack.array()).abs().maxCoeff();
  }
  return r;
}

namespace {

void validate(const QpProblem& p) {
  const Index d = p.H.rows();
  if (p.H.cols() != d || p.g.size() != d) {
    throw std::invalid_argument("QpProblem: H/g dimension mismatch");
  }
  if (p.A.rows() != p.b.size() || (p.A.rows() > 0 && p.A.cols() != d)) {
    throw std::invalid_argument("QpProblem: A/b dimension mismatch");
  }
  double scale = std::max(1.0, p.H.cwiseAbs().maxCoeff());
  if ((p.H - p.H.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw std::invalid_argument("QpProblem: H not symmetric");
  }
  Eigen::LLT<Matrix> llt(p.H);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("QpProblem: H not positive definite");
  }
}

struct Scaling {
  Vector d;       // variable scaling
  Vector e;       // row scaling
  double c = 1.0; // cost scaling
};

// Ruiz equilibration on the stacked [H A'; A 0] system, then cost scaling.
Scaling ruiz_equilibrate(Matrix& H, Vector& g, Matrix& A, Vector& b, int iters) {
  const Index d = H.rows();
  const Index q = A.rows();
  Scaling s;
  s.d = Vector::Ones(d);
  s.e = Vector::Ones(q);
  for (int it = 0; it < iters; ++it) {
    Vector dv(d), ev(q);
    for (Index i = 0; i < d; ++i) {
      double m = H.col(i).cwiseAbs().maxCoeff();
      if (q > 0) m = std::max(m, A.col(i).cwiseAbs().maxCoeff());
      dv(i) = (m > 1e-12) ? 1.0 / std::sqrt(m) : 1.0;
    }
    for (Index j = 0; j < q; ++j) {
      double m = A.row(j).cwiseAbs().maxCoeff();
      ev(j) = (m > 1e-12) ? 1.0 / std::sqrt(m) : 1.0;
    }
    H = dv.asDiagonal() * H * dv.asDiagonal();
    g = dv.asDiagonal() * g;
    if (q > 0) {
      A = ev.asDiagonal() * A * dv.asDiagonal();
      b = ev.asDiagonal() * b;
    }
    s.d = s.d.cwiseProduct(dv);
    s.e = s.e.cwiseProduct(ev);
  }
  double col_mean = 0.0;
  for (Index i = 0; i < d; ++i) col_mean += H.col(i).cwiseAbs().maxCoeff();
  col_mean /= static_cast<double>(d);
  double gn = g.lpNorm<Eigen::Infinity>();
  double denom = std::max(col_mean, gn);
  s.c = (denom > 1e-12) ? 1.0 / denom : 1.0;
  H *= s.c;
  g *= s.c;
  return s;
}

// Equality-constrained KKT solve on the rows in `active`, with one step of
// iterative refinement. Rows whose multiplier comes out clearly negative are
// dropped; if the active rows are mutually inconsistent (over-determined
// guess from the ADMM iterate), the row with the smallest multiplier is
// dropped and the system re-solved.
bool polish_point(const QpProblem& p, IndexSet active, double act_tol,
                  Vector& z_out, Vector& y_out, IndexSet& active_out) {
  const Index d = p.dim();
  const int max_pass = 4 + static_cast<int>(active.size());
  for (int pass = 0; pass < max_pass; ++pass) {
    const Index na = static_cast<Index>(active.size());
    Matrix K = Matrix::Zero(d + na, d + na);
    K.topLeftCorner(d, d) = p.H;
    Vector rhs(d + na);
    rhs.head(d) = -p.g;
    for (Index i = 0; i < na; ++i) {
      K.block(0, d + i, d, 1) = p.A.row(active[i]).transpose();
      K.block(d + i, 0, 1, d) = p.A.row(active[i]);
      rhs(d + i) = p.b(active[i]);
    }
    Eigen::ColPivHouseholderQR<Matrix> qr(K);
    Vector sol = qr.solve(rhs);
    sol += qr.solve(rhs - K * sol);
    if (!sol.allFinite()) return false;

    IndexSet keep;
    for (Index i = 0; i < na; ++i) {
      if (sol(d + i) > -act_tol) keep.push_back(active[i]);
    }
    if (keep.size() < active.size()) {
      active = std::move(keep);
      continue;
    }

    // All multipliers nonnegative; check that the active rows are actually
    // attained by the computed point.
    double viol = 0.0;
    for (Index i = 0; i < na; ++i) {
      viol = std::max(viol, std::abs(p.A.row(active[i]).dot(sol.head(d)) - p.b(active[i])));
    }
    if (viol > act_tol && na > 1) {
      Index drop = 0;
      for (Index i = 1; i < na; ++i) {
        if (sol(d + i) < sol(d + drop)) drop = i;
      }
      active.erase(active.begin() + drop);
      continue;
    }

    z_out = sol.head(d);
    y_out = Vector::Zero(p.num_constraints());
    for (Index i = 0; i < na; ++i) {
      y_out(active[i]) = std::max(sol(d + i), 0.0);
    }
    active_out = active;
    return true;
  }
  return false;
}

IndexSet detect_active(const Matrix& A, const Vector& b, const Vector& x, double act_tol) {
  IndexSet act;
  if (A.rows() == 0) return act;
  Vector slack = b - A * x;
  for (Index j = 0; j < A.rows(); ++j) {
    if (slack(j) <= act_tol) act.push_back(j);
  }
  return act;
}

}  // namespace

QpSolution QpSolver::solve(const QpProblem& p, const QpSolution* warm) {
  validate(p);
  const auto t0 = std::chrono::steady_clock::now();
  const Index d = p.dim();
  const Index q = p.num_constraints();

  QpSolution sol;
  sol.z = Vector::Zero(d);
  sol.duals = Vector::Zero(q);

  auto finish = [&](QpStatus st, int iters) {
    sol.status = st;
    sol.iterations = iters;
    sol.active_set = detect_active(p.A, p.b, sol.z, 1e-6);
    sol.objective = 0.5 * sol.z.dot(p.H * sol.z) + p.g.dot(sol.z);
    sol.solve_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return sol;
  };

  if (q == 0) {
    sol.z = p.H.llt().solve(-p.g);
    return finish(QpStatus::optimal, 0);
  }

  // Scaled working copy.
  Matrix Hs = p.H;
  Vector gs = p.g;
  Matrix As = p.A;
  Vector bs = p.b;
  Scaling sc;
  sc.d = Vector::Ones(d);
  sc.e = Vector::Ones(q);
  if (settings_.scaling) {
    sc = ruiz_equilibrate(Hs, gs, As, bs, settings_.scaling_iters);
  }

  double rho = settings_.rho;
  const double sigma = settings_.sigma;
  const double alpha = settings_.alpha;

  Eigen::LLT<Matrix> llt;
  auto refactor = [&]() {
    Matrix M = Hs + sigma * Matrix::Identity(d, d) + rho * As.transpose() * As;
    llt.compute(M);
    if (llt.info() != Eigen::Success) {
      throw std::runtime_error("QpSolver: factorization failed");
    }
  };
  refactor();

  Vector x = Vector::Zero(d);
  Vector y = Vector::Zero(q);
  if (warm != nullptr && warm->z.size() == d) {
    x = warm->z.cwiseQuotient(sc.d);
    if (warm->duals.size() == q) {
      y = sc.c * warm->duals.cwiseQuotient(sc.e);
    }
  }
  Vector zeta = (As * x).cwiseMin(bs);
  Vector dy = Vector::Zero(q);
  int infeas_streak = 0;
  double eps = std::max(1e-6, settings_.tol);

  // Unscale + polish a candidate; returns true when it meets the KKT target.
  auto try_accept = [&](QpStatus st_if_ok, int iters, QpSolution& out) {
    Vector z0 = sc.d.cwiseProduct(x);
    Vector y0 = sc.e.cwiseProduct(y) / sc.c;
    KktResiduals r0 = kkt_residuals(p, z0, y0);
    // Active rows identified on the scaled problem.
    IndexSet act;
    Vector slack_s = bs - As * x;
    for (Index j = 0; j < q; ++j) {
      if (slack_s(j) <= settings_.act_tol || y(j) > settings_.act_tol) act.push_back(j);
    }
    Vector zp, yp;
    IndexSet actp;
    if (static_cast<Index>(act.size()) <= 4 * d + 16 &&
        polish_point(p, act, settings_.act_tol, zp, yp, actp)) {
      KktResiduals rp = kkt_residuals(p, zp, yp);
      if (rp.max() < r0.max()) {
        z0 = zp;
        y0 = yp;
        r0 = rp;
      }
    }
    // Degenerate vertices (more candidate rows than variables) can defeat the
    // drop heuristic; with a small candidate set, enumerate its subsets.
    if (r0.max() > settings_.tol && act.size() >= 2 && act.size() <= 8) {
      const unsigned total = 1u << act.size();
      for (unsigned mask = 1; mask < total; ++mask) {
        if (__builtin_popcount(mask) > d) continue;
        IndexSet sub;
        for (size_t i = 0; i < act.size(); ++i) {
          if (mask & (1u << i)) sub.push_back(act[i]);
        }
        Vector zs, ys;
        IndexSet acts;
        if (!polish_point(p, sub, settings_.act_tol, zs, ys, acts)) continue;
        KktResiduals rs = kkt_residuals(p, zs, ys);
        if (rs.max() < r0.max()) {
          z0 = zs;
          y0 = ys;
          r0 = rs;
        }
        if (r0.max() <= settings_.tol) break;
      }
    }
    out.z = z0;
    out.duals = y0;
    if (r0.max() <= settings_.tol) {
      sol.z = z0;
      sol.duals = y0;
      finish(st_if_ok, iters);
      return true;
    }
    return false;
  };

  QpSolution best;
  int check_idx = 0;
  int next_polish = 1;
  int it = 0;
  for (it = 1; it <= settings_.max_iter; ++it) {
    Vector rhs = sigma * x - gs + As.transpose() * (rho * zeta - y);
    Vector xt = llt.solve(rhs);
    Vector zt = As * xt;
    x = alpha * xt + (1.0 - alpha) * x;
    Vector v = alpha * zt + (1.0 - alpha) * zeta + y / rho;
    Vector zeta_next = v.cwiseMin(bs);
    Vector y_next = rho * (v - zeta_next);
    dy = y_next - y;
    y = y_next;
    zeta = zeta_next;

    if (it % settings_.check_interval == 0 || it == settings_.max_iter) {
      Vector Ax = As * x;
      double pri = (Ax - zeta).lpNorm<Eigen::Infinity>();
      Vector dual_vec = Hs * x + gs + As.transpose() * y;
      double dua = dual_vec.lpNorm<Eigen::Infinity>();
      double eps_pri = eps + eps * std::max(Ax.lpNorm<Eigen::Infinity>(),
                                            zeta.lpNorm<Eigen::Infinity>());
      double eps_dua = eps + eps * std::max({(Hs * x).lpNorm<Eigen::Infinity>(),
                                             (As.transpose() * y).lpNorm<Eigen::Infinity>(),
                                             gs.lpNorm<Eigen::Infinity>()});
      // A polished point that passes the unscaled KKT test is optimal
      // regardless of ADMM residual state, and on vertex-dominated problems
      // it converges long before ADMM does. Failed attempts back off
      // exponentially so degenerate instances do not pay for polishing at
      // every check.
      ++check_idx;
      const bool admm_converged = (pri <= eps_pri && dua <= eps_dua);
      if (admm_converged || check_idx >= next_polish) {
        if (try_accept(QpStatus::optimal, it, best)) return sol;
        next_polish = check_idx + std::min(std::max(next_polish, 1), 64);
        if (admm_converged) {
          // ADMM converged but polish could not certify; tighten and continue.
          eps = std::max(eps * 1e-2, 1e-13);
        }
      }

      // Primal infeasibility certificate from the dual update direction.
      double dyn = dy.lpNorm<Eigen::Infinity>();
      if (dyn > 1e-14) {
        Vector yhat = dy / dyn;
        bool cone_ok = yhat.minCoeff() >= -1e-6;
        double atv = (As.transpose() * yhat).lpNorm<Eigen::Infinity>();
        double bty = bs.dot(yhat);
        if (cone_ok && atv <= 1e-6 && bty <= -1e-6) {
          if (++infeas_streak >= 2) {
            sol.z = sc.d.cwiseProduct(x);
            sol.duals = sc.e.cwiseProduct(y) / sc.c;
            return finish(QpStatus::primal_infeasible, it);
          }
        } else {
          infeas_streak = 0;
        }
      }

      // Residual-balancing penalty update.
      double ratio = std::sqrt((pri / std::max(eps_pri, 1e-16)) /
                               std::max(dua / std::max(eps_dua, 1e-16), 1e-16));
      if (ratio > 5.0 || ratio < 0.2) {
        rho = std::clamp(rho * ratio, 1e-6, 1e6);
        refactor();
      }
    }
  }

  // Best-effort return.
  if (best.z.size() == d) {
    sol.z = best.z;
    sol.duals = best.duals;
  } else {
    sol.z = sc.d.cwiseProduct(x);
    sol.duals = sc.e.cwiseProduct(y) / sc.c;
  }
  return finish(QpStatus::max_iter, settings_.max_iter);
}

QpSolution brute_force_solve(const QpProblem& p) {
  validate(p);
  const Index d = p.dim();
  const Index q = p.num_constraints();
  if (q > 20 || d > 6) {
    throw std::invalid_argument("brute_force_solve: instance too large");
  }
  const auto t0 = std::chrono::steady_clock::now();
  const double feas_tol = 1e-8;

  QpSolution best;
  best.status = QpStatus::primal_infeasible;
  double best_obj = std::numeric_limits<double>::infinity();

  auto consider = [&](const Vector& z, const Vector& duals, const IndexSet& act) {
    if (!z.allFinite()) return;
    if (q > 0 && ((p.A * z - p.b).maxCoeff() > feas_tol)) return;
    if (duals.size() > 0 && duals.minCoeff() < -feas_tol) return;
    double obj = 0.5 * z.dot(p.H * z) + p.g.dot(z);
    if (obj < best_obj) {
      best_obj = obj;
      best.z = z;
      best.duals = Vector::Zero(q);
      for (size_t i = 0; i < act.size(); ++i) best.duals(act[i]) = duals(static_cast<Index>(i));
      best.active_set = act;
      best.status = QpStatus::optimal;
      best.objective = obj;
    }
  };

  // Unconstrained minimizer.
  consider(p.H.llt().solve(-p.g), Vector(), {});

  const unsigned total = 1u << q;
  for (unsigned mask = 1; mask < total; ++mask) {
    const int na = __builtin_popcount(mask);
    if (na > d) continue;
    IndexSet act;
    for (Index j = 0; j < q; ++j) {
      if (mask & (1u << j)) act.push_back(j);
    }
    Matrix K = Matrix::Zero(d + na, d + na);
    K.topLeftCorner(d, d) = p.H;
    Vector rhs(d + na);
    rhs.head(d) = -p.g;
    for (int i = 0; i < na; ++i) {
      K.block(0, d + i, d, 1) = p.A.row(act[i]).transpose();
      K.block(d + i, 0, 1, d) = p.A.row(act[i]);
      rhs(d + i) = p.b(act[i]);
    }
    Eigen::ColPivHouseholderQR<Matrix> qr(K);
    Vector s = qr.solve(rhs);
    if ((K * s - rhs).lpNorm<Eigen::Infinity>() >
        1e-7 * std::max(1.0, rhs.lpNorm<Eigen::Infinity>())) {
      continue;  // singular KKT subset
    }
    consider(s.head(d), s.tail(na), act);
  }

  best.solve_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (best.status != QpStatus::optimal) {
    best.z = Vector::Zero(d);
    best.duals = Vector::Zero(q);
  }
  return best;
}

}  // namespace campc
