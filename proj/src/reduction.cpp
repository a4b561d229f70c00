#include "campc/reduction.hpp"

#include <stdexcept>

namespace campc {

SafetyMargins uniform_margins(const Polytope& X, double distance) {
  if (distance <= 0.0) {
    throw std::invalid_argument("uniform_margins: distance must be positive");
  }
  SafetyMargins m;
  m.alpha = X.C.rowwise().norm() * distance;
  return m;
}

IndexSet select_indices(const Vector& x, const Polytope& X, const SafetyMargins& margins) {
  if (x.size() != X.dim() || margins.alpha.size() != X.rows()) {
    throw std::invalid_argument("select_indices: dimension mismatch");
  }
  IndexSet out;
  Vector lhs = X.C * x;
  for (Index j = 0; j < X.rows(); ++j) {
    if (lhs(j) > X.b(j) - margins.alpha(j)) out.push_back(j);
  }
  return out;
}

IndexSet horizon_indices(const std::vector<Vector>& plan, const Polytope& X,
                         const SafetyMargins& margins) {
  if (plan.empty()) {
    throw std::invalid_argument("horizon_indices: empty stage range");
  }
  std::vector<bool> selected(static_cast<size_t>(X.rows()), false);
  for (const auto& x : plan) {
    for (Index j : select_indices(x, X, margins)) selected[static_cast<size_t>(j)] = true;
  }
  IndexSet out;
  for (Index j = 0; j < X.rows(); ++j) {
    if (selected[static_cast<size_t>(j)]) out.push_back(j);
  }
  return out;
}

IndexSet complement_indices(const std::vector<Vector>& plan, const Polytope& X,
                            const SafetyMargins& margins) {
  if (plan.empty()) {
    throw std::invalid_argument("complement_indices: empty stage range");
  }
  std::vector<int> count(static_cast<size_t>(X.rows()), 0);
  for (const auto& x : plan) {
    for (Index j : select_indices(x, X, margins)) ++count[static_cast<size_t>(j)];
  }
  const int all = static_cast<int>(plan.size());
  IndexSet out;
  for (Index j = 0; j < X.rows(); ++j) {
    if (count[static_cast<size_t>(j)] < all) out.push_back(j);
  }
  return out;
}

}  // namespace campc
