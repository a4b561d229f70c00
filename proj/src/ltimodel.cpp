#include "campc/ltimodel.hpp"

#include <Eigen/Eigenvalues>

#include <stdexcept>

namespace campc {

LtiModel::LtiModel(Matrix A_in, Matrix B_in) : A(std::move(A_in)), B(std::move(B_in)) {
  if (A.rows() != A.cols()) {
    throw std::invalid_argument("LtiModel: A must be square");
  }
  if (B.rows() != A.rows()) {
    throw std::invalid_argument("LtiModel: B row count must match A");
  }
}

namespace {

void check_symmetric_psd(const Matrix& M, const char* name, bool strict) {
  if (M.rows() != M.cols()) {
    throw std::invalid_argument(std::string(name) + " must be square");
  }
  double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw std::invalid_argument(std::string(name) + " not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(M, Eigen::EigenvaluesOnly);
  const double min_eig = es.eigenvalues().minCoeff();
  if (strict ? (min_eig <= 0.0) : (min_eig < -1e-10 * scale)) {
    throw std::invalid_argument(std::string(name) + (strict ? " not PD" : " not PSD"));
  }
}

}  // namespace

CostWeights::CostWeights(Matrix Q_in, Matrix R_in, Matrix PT_in)
    : Q(std::move(Q_in)), R(std::move(R_in)), P_T(std::move(PT_in)) {
  check_symmetric_psd(Q, "Q", false);
  check_symmetric_psd(R, "R", true);
  check_symmetric_psd(P_T, "P_T", false);
  if (P_T.rows() != Q.rows()) {
    throw std::invalid_argument("CostWeights: Q/P_T dimension mismatch");
  }
}

Vector step(const LtiModel& model, const Vector& x, const Vector& u) {
  if (x.size() != model.state_dim() || u.size() != model.input_dim()) {
    throw std::invalid_argument("step: dimension mismatch");
  }
  return model.A * x + model.B * u;
}

PredictionMatrices build_prediction(const LtiModel& model, int N) {
  if (N < 1) {
    throw std::invalid_argument("build_prediction: N must be >= 1");
  }
  const Index n = model.state_dim();
  const Index m = model.input_dim();
  PredictionMatrices pm;
  pm.N = N;
  pm.Phi = Matrix(N * n, n);
  pm.Gamma = Matrix::Zero(N * n, N * m);

  Matrix Apow = model.A;  // A^{i+1} for block i
  for (int i = 0; i < N; ++i) {
    pm.Phi.middleRows(i * n, n) = Apow;
    if (i + 1 < N) Apow = model.A * Apow;
  }
  // Gamma block (i, j) = A^{i-j-1} B for j <= i, blocks indexed from 0.
  Matrix AB = model.B;
  for (int k = 0; k < N; ++k) {  // k = i - j
    for (int j = 0; j + k < N; ++j) {
      pm.Gamma.block((j + k) * n, j * m, n, m) = AB;
    }
    AB = model.A * AB;
  }
  return pm;
}

CondensedObjective condense_objective(const LtiModel& model, const CostWeights& weights,
                                      int N, const Vector& x0) {
  const Index n = model.state_dim();
  const Index m = model.input_dim();
  if (weights.Q.rows() != n || weights.R.rows() != m || x0.size() != n) {
    throw std::invalid_argument("condense_objective: dimension mismatch");
  }
  PredictionMatrices pm = build_prediction(model, N);

  // Block weight over stacked x_1..x_N: Q at stages 1..N-1, P_T at stage N.
  Matrix Qbar = Matrix::Zero(N * n, N * n);
  for (int i = 0; i + 1 < N; ++i) {
    Qbar.block(i * n, i * n, n, n) = weights.Q;
  }
  Qbar.block((N - 1) * n, (N - 1) * n, n, n) = weights.P_T;
  Matrix Rbar = Matrix::Zero(N * m, N * m);
  for (int i = 0; i < N; ++i) {
    Rbar.block(i * m, i * m, m, m) = weights.R;
  }

  CondensedObjective out;
  Matrix QG = Qbar * pm.Gamma;
  out.H = 2.0 * (pm.Gamma.transpose() * QG + Rbar);
  out.H = 0.5 * (out.H + out.H.transpose());  // enforce exact symmetry
  Vector Phix = pm.Phi * x0;
  out.g = 2.0 * QG.transpose() * Phix;
  out.constant = Phix.dot(Qbar * Phix) + x0.dot(weights.Q * x0);
  return out;
}

InequalitySystem stack_constraints(const LtiModel& model, int N, const Vector& x0,
                                   const std::vector<Polytope>& stage_sets,
                                   const std::optional<Polytope>& extra_first_stage,
                                   const Polytope& terminal, const Polytope& input_set) {
  const Index n = model.state_dim();
  const Index m = model.input_dim();
  if (x0.size() != n) {
    throw std::invalid_argument("stack_constraints: x0 dimension mismatch");
  }
  if (static_cast<int>(stage_sets.size()) != N - 1) {
    throw std::invalid_argument("stack_constraints: need N-1 stage sets");
  }
  if (input_set.dim() != m) {
    throw std::invalid_argument("stack_constraints: input set dimension mismatch");
  }
  PredictionMatrices pm = build_prediction(model, N);

  Index state_rows = terminal.rows();
  for (const auto& P : stage_sets) {
    if (P.rows() > 0 && P.dim() != n) {
      throw std::invalid_argument("stack_constraints: stage set dimension mismatch");
    }
    state_rows += P.rows();
  }
  if (extra_first_stage) state_rows += extra_first_stage->rows();
  const Index input_rows = input_set.rows() * N;

  InequalitySystem sys;
  sys.A = Matrix::Zero(state_rows + input_rows, N * m);
  sys.b = Vector(state_rows + input_rows);

  Index r = 0;
  auto add_state_rows = [&](const Polytope& P, int stage) {
    if (P.rows() == 0) return;
    const auto Gamma_i = pm.Gamma.middleRows((stage - 1) * n, n);
    const auto Phi_i = pm.Phi.middleRows((stage - 1) * n, n);
    sys.A.middleRows(r, P.rows()) = P.C * Gamma_i;
    sys.b.segment(r, P.rows()) = P.b - P.C * (Phi_i * x0);
    r += P.rows();
  };

  for (int i = 1; i < N; ++i) {
    add_state_rows(stage_sets[static_cast<size_t>(i - 1)], i);
    if (i == 1 && extra_first_stage) add_state_rows(*extra_first_stage, 1);
  }
  if (N == 1 && extra_first_stage) add_state_rows(*extra_first_stage, 1);
  add_state_rows(terminal, N);

  for (int i = 0; i < N; ++i) {
    sys.A.block(r, i * m, input_set.rows(), m) = input_set.C;
    sys.b.segment(r, input_set.rows()) = input_set.b;
    r += input_set.rows();
  }
  return sys;
}

}  // namespace campc
