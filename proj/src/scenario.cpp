#include "campc/scenario.hpp"

#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "campc/reduction.hpp"
#include "campc/terminal.hpp"

namespace campc {

namespace {

LtiModel double_integrator() {
  Matrix A(2, 2);
  A << 1.0, 0.1, 0.0, 1.0;
  Matrix B(2, 1);
  B << 0.005, 0.1;
  return LtiModel(std::move(A), std::move(B));
}

Polytope interval_input(double lo, double hi) {
  Matrix C(2, 1);
  C << 1.0, -1.0;
  Vector b(2);
  b << hi, -lo;
  return Polytope(std::move(C), std::move(b));
}

Polytope box2(double half_width) {
  Matrix C(4, 2);
  C << 1, 0, -1, 0, 0, 1, 0, -1;
  Vector b = Vector::Constant(4, half_width);
  return Polytope(std::move(C), std::move(b));
}

}  // namespace

Scenario gen_flagship(std::uint64_t seed, int facets_per_ellipse) {
  if (facets_per_ellipse < 3) {
    throw std::invalid_argument("gen_flagship: facets_per_ellipse must be >= 3");
  }
  Scenario sc;
  sc.name = "flagship";
  sc.seed = seed;
  sc.model = double_integrator();
  sc.U = interval_input(-0.5, 0.5);
  sc.x0 = Vector(2);
  sc.x0 << -4.2, -0.3;
  sc.steps = 150;

  sc.ellipses = {
      {{0.4, 0.0}, {5.05, 1.2}, 0.0, facets_per_ellipse},
      {{-0.4, 0.0}, {5.05, 1.2}, 0.15, facets_per_ellipse},
  };
  Polytope X1 = tangent_facets(sc.ellipses[0].center, sc.ellipses[0].semi_axes,
                               sc.ellipses[0].rotation, sc.ellipses[0].facets);
  Polytope X2 = tangent_facets(sc.ellipses[1].center, sc.ellipses[1].semi_axes,
                               sc.ellipses[1].rotation, sc.ellipses[1].facets);
  sc.X = intersect(X1, X2);

  sc.cfg.N = 15;
  sc.cfg.weights = CostWeights(Matrix::Identity(2, 2), Matrix::Identity(1, 1),
                               Matrix::Identity(2, 2));
  sc.cfg.scheme = Scheme::ca_terminal;
  sc.cfg.margin_distance = 0.1;
  sc.terminal_gain_R = 300.0;

  // Generator contract: x0 and the origin strictly inside the safety set.
  const Vector origin = Vector::Zero(2);
  const double need = sc.cfg.margin_distance + 0.05;
  const double slack_x0 = (sc.X.b - sc.X.C * sc.x0).minCoeff();
  const double slack_origin = (sc.X.b - sc.X.C * origin).minCoeff();
  if (slack_x0 < need || slack_origin < need) {
    throw std::runtime_error("gen_flagship: generated corpus violates x0/origin slack contract");
  }
  return sc;
}

Scenario gen_invariant_box(std::uint64_t seed) {
  Scenario sc;
  sc.name = "invariant_box";
  sc.seed = seed;
  Matrix A(2, 2);
  A << 1.0, 0.1, 0.0, 1.0;
  sc.model = LtiModel(std::move(A), Matrix::Identity(2, 2));
  sc.X = box2(1.0);
  sc.U = box2(0.5);
  sc.x0 = Vector(2);
  sc.x0 << 0.95, -0.4;
  sc.steps = 200;
  sc.cfg.N = 10;
  sc.cfg.weights = CostWeights(Matrix::Identity(2, 2), Matrix::Identity(2, 2),
                               Matrix::Identity(2, 2));
  sc.cfg.scheme = Scheme::ca_invariant;
  sc.cfg.margin_distance = 0.1;
  return sc;
}

void ensure_terminal(Scenario& sc) {
  if (sc.X_T && sc.K_T) return;
  const Index n = sc.model.state_dim();
  TerminalIngredients ti =
      synthesize_terminal(sc.model, Matrix::Identity(n, n),
                          sc.terminal_gain_R * Matrix::Identity(sc.model.input_dim(),
                                                                sc.model.input_dim()),
                          sc.X, sc.U);
  sc.X_T = ti.X_T;
  sc.K_T = ti.K;
}

// --- bundle serialization -------------------------------------------------

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

void save_scenario(const Scenario& sc, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  std::ofstream mf(dir / "manifest.txt");
  if (!mf) throw std::runtime_error("save_scenario: cannot write manifest");
  mf << "name = " << sc.name << "\n";
  mf << "n = " << sc.model.state_dim() << "\n";
  mf << "m = " << sc.model.input_dim() << "\n";
  mf << "N = " << sc.cfg.N << "\n";
  mf << "steps = " << sc.steps << "\n";
  mf << "seed = " << sc.seed << "\n";
  mf << "scheme = " << scheme_name(sc.cfg.scheme) << "\n";
  mf << "margin_distance = " << fmt(sc.cfg.margin_distance) << "\n";
  mf << "per_stage_reduction = " << (sc.cfg.per_stage_reduction ? 1 : 0) << "\n";
  mf << "terminal_gain_R = " << fmt(sc.terminal_gain_R) << "\n";
  mf << "solver_tol = " << fmt(sc.cfg.solver.tol) << "\n";
  mf << "solver_max_iter = " << sc.cfg.solver.max_iter << "\n";
  mf << "solver_act_tol = " << fmt(sc.cfg.solver.act_tol) << "\n";
  mf << "solver_scaling = " << (sc.cfg.solver.scaling ? 1 : 0) << "\n";
  mf << "has_terminal = " << (sc.X_T ? 1 : 0) << "\n";
  mf << "ellipses = " << sc.ellipses.size() << "\n";
  for (size_t i = 0; i < sc.ellipses.size(); ++i) {
    const auto& e = sc.ellipses[i];
    mf << "ellipse." << i << " = " << fmt(e.center.x()) << " " << fmt(e.center.y()) << " "
       << fmt(e.semi_axes.x()) << " " << fmt(e.semi_axes.y()) << " " << fmt(e.rotation) << " "
       << e.facets << "\n";
  }

  write_matrix_csv(dir / "A.csv", sc.model.A);
  write_matrix_csv(dir / "B.csv", sc.model.B);
  write_matrix_csv(dir / "Q.csv", sc.cfg.weights.Q);
  write_matrix_csv(dir / "R.csv", sc.cfg.weights.R);
  write_matrix_csv(dir / "PT.csv", sc.cfg.weights.P_T);
  write_matrix_csv(dir / "X_C.csv", sc.X.C);
  write_matrix_csv(dir / "X_b.csv", sc.X.b);
  write_matrix_csv(dir / "U_C.csv", sc.U.C);
  write_matrix_csv(dir / "U_b.csv", sc.U.b);
  write_matrix_csv(dir / "x0.csv", sc.x0);
  if (sc.X_T) {
    write_matrix_csv(dir / "XT_C.csv", sc.X_T->C);
    write_matrix_csv(dir / "XT_b.csv", sc.X_T->b);
  }
  if (sc.K_T) {
    write_matrix_csv(dir / "KT.csv", *sc.K_T);
  }
}

Scenario load_scenario(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  std::ifstream mf(dir / "manifest.txt");
  if (!mf) throw std::runtime_error("load_scenario: missing manifest at " + dir.string());
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(mf, line)) {
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = line.substr(0, eq);
    std::string val = line.substr(eq + 1);
    auto trim = [](std::string& s) {
      s.erase(0, s.find_first_not_of(" \t"));
      s.erase(s.find_last_not_of(" \t\r") + 1);
    };
    trim(key);
    trim(val);
    kv[key] = val;
  }
  auto need = [&](const std::string& key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw std::runtime_error("load_scenario: manifest missing " + key);
    return it->second;
  };

  Scenario sc;
  sc.name = need("name");
  sc.steps = std::stoi(need("steps"));
  sc.seed = std::stoull(need("seed"));
  sc.cfg.N = std::stoi(need("N"));
  auto scheme = scheme_from_name(need("scheme"));
  if (!scheme) throw std::runtime_error("load_scenario: unknown scheme in manifest");
  sc.cfg.scheme = *scheme;
  sc.cfg.margin_distance = std::stod(need("margin_distance"));
  sc.cfg.per_stage_reduction = std::stoi(need("per_stage_reduction")) != 0;
  sc.terminal_gain_R = std::stod(need("terminal_gain_R"));
  sc.cfg.solver.tol = std::stod(need("solver_tol"));
  sc.cfg.solver.max_iter = std::stoi(need("solver_max_iter"));
  sc.cfg.solver.act_tol = std::stod(need("solver_act_tol"));
  sc.cfg.solver.scaling = std::stoi(need("solver_scaling")) != 0;

  sc.model = LtiModel(read_matrix_csv(dir / "A.csv"), read_matrix_csv(dir / "B.csv"));
  sc.cfg.weights = CostWeights(read_matrix_csv(dir / "Q.csv"), read_matrix_csv(dir / "R.csv"),
                               read_matrix_csv(dir / "PT.csv"));
  sc.X = Polytope(read_matrix_csv(dir / "X_C.csv"), read_vector_csv(dir / "X_b.csv"));
  sc.U = Polytope(read_matrix_csv(dir / "U_C.csv"), read_vector_csv(dir / "U_b.csv"));
  sc.x0 = read_vector_csv(dir / "x0.csv");

  size_t n_ell = kv.count("ellipses") ? std::stoul(kv["ellipses"]) : 0;
  for (size_t i = 0; i < n_ell; ++i) {
    std::istringstream is(need("ellipse." + std::to_string(i)));
    EllipseSpec e;
    is >> e.center.x() >> e.center.y() >> e.semi_axes.x() >> e.semi_axes.y() >> e.rotation >>
        e.facets;
    sc.ellipses.push_back(e);
  }

  if (std::stoi(need("has_terminal")) != 0) {
    sc.X_T = Polytope(read_matrix_csv(dir / "XT_C.csv"), read_vector_csv(dir / "XT_b.csv"));
    if (fs::exists(dir / "KT.csv")) sc.K_T = read_matrix_csv(dir / "KT.csv");
  }
  return sc;
}

}  // namespace campc
