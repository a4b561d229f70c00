#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "campc/scenario.hpp"

namespace campc {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << std::setprecision(17);
  return os;
}

}  // namespace

void write_matrix_csv(const std::filesystem::path& path, const Matrix& M) {
  std::ofstream os = open_out(path);
  for (Index i = 0; i < M.rows(); ++i) {
    for (Index j = 0; j < M.cols(); ++j) {
      if (j > 0) os << ",";
      os << M(i, j);
    }
    os << "\n";
  }
}

Matrix read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      row.push_back(std::stod(cell));
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw std::runtime_error("ragged CSV matrix in " + path.string());
    }
    rows.push_back(std::move(row));
  }
  Matrix M(static_cast<Index>(rows.size()),
           rows.empty() ? 0 : static_cast<Index>(rows.front().size()));
  for (size_t i = 0; i < rows.size(); ++i) {
    for (size_t j = 0; j < rows[i].size(); ++j) {
      M(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
    }
  }
  return M;
}

Vector read_vector_csv(const std::filesystem::path& path) {
  Matrix M = read_matrix_csv(path);
  if (M.cols() == 1) return M.col(0);
  if (M.rows() == 1) return M.row(0).transpose();
  if (M.size() == 0) return Vector(0);
  throw std::runtime_error("expected a vector in " + path.string());
}

void write_csv(const SimLog& log, const std::filesystem::path& path) {
  std::ofstream os = open_out(path);
  Index n = log.records.empty() ? 0 : log.records.front().x.size();
  Index m = log.records.empty() ? 0 : log.records.front().u.size();
  os << "k";
  for (Index i = 0; i < std::max<Index>(n, 1); ++i) os << ",x" << i;
  for (Index i = 0; i < std::max<Index>(m, 1); ++i) os << ",u" << i;
  os << ",stage_cost,qp_rows_total,qp_state_rows,selected_fraction,"
        "solve_time_seconds,build_time_seconds,solver_iterations,min_tube_radius\n";
  for (const auto& r : log.records) {
    os << r.k;
    for (Index i = 0; i < r.x.size(); ++i) os << "," << r.x(i);
    for (Index i = 0; i < r.u.size(); ++i) os << "," << r.u(i);
    os << "," << r.stage_cost << "," << r.qp_rows_total << "," << r.qp_state_rows << ","
       << r.selected_fraction << "," << r.solve_time << "," << r.build_time << ","
       << r.solver_iterations << "," << r.min_tube_radius << "\n";
  }
}

SimLog read_simlog_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read " + path.string());
  std::string header;
  if (!std::getline(is, header)) {
    throw std::runtime_error("empty log file " + path.string());
  }
  Index n = 0, m = 0;
  {
    std::istringstream hs(header);
    std::string col;
    while (std::getline(hs, col, ',')) {
      if (col.rfind("x", 0) == 0 && col.size() > 1 && std::isdigit(col[1])) ++n;
      if (col.rfind("u", 0) == 0 && col.size() > 1 && std::isdigit(col[1])) ++m;
    }
  }
  SimLog log;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(ls, cell, ',')) vals.push_back(std::stod(cell));
    if (static_cast<Index>(vals.size()) != 1 + n + m + 8) {
      throw std::runtime_error("malformed log row in " + path.string());
    }
    SimRecord r;
    size_t c = 0;
    r.k = static_cast<int>(vals[c++]);
    r.x = Vector(n);
    for (Index i = 0; i < n; ++i) r.x(i) = vals[c++];
    r.u = Vector(m);
    for (Index i = 0; i < m; ++i) r.u(i) = vals[c++];
    r.stage_cost = vals[c++];
    r.qp_rows_total = static_cast<Index>(vals[c++]);
    r.qp_state_rows = static_cast<Index>(vals[c++]);
    r.selected_fraction = vals[c++];
    r.solve_time = vals[c++];
    r.build_time = vals[c++];
    r.solver_iterations = static_cast<int>(vals[c++]);
    r.min_tube_radius = vals[c++];
    log.records.push_back(std::move(r));
  }
  return log;
}

void write_csv(const ComparisonReport& report, const std::filesystem::path& path) {
  std::ofstream os = open_out(path);
  os << "max_state_deviation_inf,closed_loop_cost_full,closed_loop_cost_ca,cost_ratio,"
        "mean_speedup,median_speedup,mean_constraint_fraction,startup_time_seconds\n";
  os << report.max_state_deviation_inf << "," << report.closed_loop_cost_full << ","
     << report.closed_loop_cost_ca << "," << report.cost_ratio << "," << report.mean_speedup
     << "," << report.median_speedup << "," << report.mean_constraint_fraction << ","
     << report.startup_time << "\n";
}

}  // namespace campc
