#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "campc/scenario.hpp"
#include "campc/terminal.hpp"

namespace campc {

namespace {

constexpr int kWidth = 860;
constexpr int kHeight = 560;
constexpr int kMargin = 55;

struct Frame {
  double xmin, xmax, ymin, ymax;
  double px(double x) const {
    return kMargin + (x - xmin) / (xmax - xmin) * (kWidth - 2 * kMargin);
  }
  double py(double y) const {
    return kHeight - kMargin - (y - ymin) / (ymax - ymin) * (kHeight - 2 * kMargin);
  }
};

std::string fnum(double v) {
  std::ostringstream os;
  os << std::setprecision(4) << v;
  return os.str();
}

void open_svg(std::ofstream& os, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  os.open(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
     << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n"
     << "<rect width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
}

void axes(std::ofstream& os, const Frame& f, const std::string& xlabel,
          const std::string& ylabel) {
  os << "<rect x=\"" << kMargin << "\" y=\"" << kMargin << "\" width=\""
     << (kWidth - 2 * kMargin) << "\" height=\"" << (kHeight - 2 * kMargin)
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  os << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 12
     << "\" text-anchor=\"middle\" font-size=\"14\">" << xlabel << "</text>\n";
  os << "<text x=\"16\" y=\"" << kHeight / 2 << "\" text-anchor=\"middle\" font-size=\"14\""
     << " transform=\"rotate(-90 16 " << kHeight / 2 << ")\">" << ylabel << "</text>\n";
  os << "<text x=\"" << kMargin << "\" y=\"" << kHeight - kMargin + 18
     << "\" font-size=\"11\">" << fnum(f.xmin) << "</text>\n";
  os << "<text x=\"" << kWidth - kMargin << "\" y=\"" << kHeight - kMargin + 18
     << "\" text-anchor=\"end\" font-size=\"11\">" << fnum(f.xmax) << "</text>\n";
  os << "<text x=\"" << kMargin - 4 << "\" y=\"" << kHeight - kMargin
     << "\" text-anchor=\"end\" font-size=\"11\">" << fnum(f.ymin) << "</text>\n";
  os << "<text x=\"" << kMargin - 4 << "\" y=\"" << kMargin + 4
     << "\" text-anchor=\"end\" font-size=\"11\">" << fnum(f.ymax) << "</text>\n";
}

void polyline(std::ofstream& os, const Frame& f, const std::vector<Eigen::Vector2d>& pts,
              const std::string& color, double width, bool closed) {
  if (pts.empty()) return;
  os << "<" << (closed ? "polygon" : "polyline") << " points=\"";
  for (const auto& p : pts) {
    os << fnum(f.px(p.x())) << "," << fnum(f.py(p.y())) << " ";
  }
  os << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"" << width << "\"/>\n";
}

// Boundary trace of a bounded 2D polytope by ray casting from an interior
// point.
std::vector<Eigen::Vector2d> boundary_trace(const Polytope& P, int rays = 720) {
  Vector c = Vector::Zero(2);
  if (!contains(P, c, 0.0)) {
    Matrix box = bounding_box(P);
    c = 0.5 * (box.col(0) + box.col(1));
  }
  std::vector<Eigen::Vector2d> pts;
  pts.reserve(static_cast<size_t>(rays));
  for (int i = 0; i < rays; ++i) {
    const double th = 2.0 * std::numbers::pi * i / rays;
    Eigen::Vector2d d(std::cos(th), std::sin(th));
    double t = 1e9;
    for (Index j = 0; j < P.rows(); ++j) {
      const double cd = P.C.row(j).dot(d);
      if (cd > 1e-12) {
        t = std::min(t, (P.b(j) - P.C.row(j).dot(c)) / cd);
      }
    }
    if (t >= 1e9) continue;  // unbounded direction; skip
    pts.emplace_back(c(0) + t * d(0), c(1) + t * d(1));
  }
  return pts;
}

const char* kTrajColors[] = {"#2980b9", "#eb2f06", "#44bd32"};

}  // namespace

void emit_svg_phase(const std::vector<const SimLog*>& logs, const Scenario& sc,
                    const std::filesystem::path& path) {
  if (sc.model.state_dim() != 2) {
    throw std::invalid_argument("emit_svg_phase: phase plot needs a 2D state");
  }
  auto xb = boundary_trace(sc.X);
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& p : xb) {
    xmin = std::min(xmin, p.x());
    xmax = std::max(xmax, p.x());
    ymin = std::min(ymin, p.y());
    ymax = std::max(ymax, p.y());
  }
  if (xb.empty()) {
    xmin = ymin = -1;
    xmax = ymax = 1;
  }
  const double padx = 0.06 * (xmax - xmin), pady = 0.06 * (ymax - ymin);
  Frame f{xmin - padx, xmax + padx, ymin - pady, ymax + pady};

  std::ofstream os;
  open_svg(os, path);
  axes(os, f, "x1", "x2");
  polyline(os, f, xb, "black", 1.5, true);
  if (sc.X_T) {
    polyline(os, f, boundary_trace(*sc.X_T), "#8e44ad", 1.2, true);
  }
  int ci = 0;
  for (const SimLog* log : logs) {
    if (log == nullptr) continue;
    std::vector<Eigen::Vector2d> traj;
    for (const auto& r : log->records) traj.emplace_back(r.x(0), r.x(1));
    polyline(os, f, traj, kTrajColors[ci % 3], 1.4, false);
    os << "<text x=\"" << kMargin + 8 << "\" y=\"" << kMargin + 18 + 16 * ci
       << "\" font-size=\"13\" fill=\"" << kTrajColors[ci % 3] << "\">"
       << scheme_name(log->scheme) << "</text>\n";
    ++ci;
  }
  os << "</svg>\n";
}

void emit_svg_timeseries(const std::vector<const SimLog*>& logs, const Scenario& sc,
                         const std::filesystem::path& path) {
  (void)sc;
  std::vector<const SimLog*> ls;
  for (const SimLog* l : logs) {
    if (l != nullptr) ls.push_back(l);
  }
  std::ofstream os;
  open_svg(os, path);

  size_t steps = 0;
  for (const SimLog* l : ls) steps = std::max(steps, l->records.size());
  const double kmax = steps > 1 ? static_cast<double>(steps - 1) : 1.0;

  // Top panel: state-constraint fraction [%]. Bottom panel: speedup (two
  // logs) or solve time (one log), log10 scale.
  const int mid = kHeight / 2;
  Frame top{0.0, kmax, 0.0, 100.0};
  auto py_top = [&](double v) {
    return mid - 20 - (v - top.ymin) / (top.ymax - top.ymin) * (mid - 20 - kMargin);
  };
  os << "<rect x=\"" << kMargin << "\" y=\"" << kMargin << "\" width=\""
     << (kWidth - 2 * kMargin) << "\" height=\"" << (mid - 20 - kMargin)
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  os << "<text x=\"" << kWidth / 2 << "\" y=\"" << kMargin - 8
     << "\" text-anchor=\"middle\" font-size=\"13\">state constraints in QP [%]</text>\n";
  int ci = 0;
  for (const SimLog* l : ls) {
    os << "<polyline fill=\"none\" stroke=\"" << kTrajColors[ci % 3]
       << "\" stroke-width=\"1.3\" points=\"";
    for (const auto& r : l->records) {
      os << fnum(top.px(r.k)) << "," << fnum(py_top(100.0 * r.selected_fraction)) << " ";
    }
    os << "\"/>\n";
    ++ci;
  }

  // Bottom panel.
  std::vector<double> series;
  std::string label;
  if (ls.size() >= 2) {
    label = "speedup (full / ca), log scale";
    const auto& a = ls[0]->records;
    const auto& b = ls[1]->records;
    for (size_t k = 0; k < std::min(a.size(), b.size()); ++k) {
      series.push_back(a[k].solve_time / std::max(b[k].solve_time, 1e-12));
    }
  } else if (ls.size() == 1) {
    label = "solve time [s], log scale";
    for (const auto& r : ls[0]->records) series.push_back(std::max(r.solve_time, 1e-12));
  }
  double lo = 1e300, hi = -1e300;
  for (double v : series) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (series.empty()) {
    lo = 0.1;
    hi = 10.0;
  }
  double llo = std::floor(std::log10(lo)), lhi = std::ceil(std::log10(hi));
  if (lhi <= llo) lhi = llo + 1;
  auto py_bot = [&](double v) {
    double t = (std::log10(v) - llo) / (lhi - llo);
    return kHeight - kMargin - t * (kHeight - kMargin - mid - 20);
  };
  os << "<rect x=\"" << kMargin << "\" y=\"" << (mid + 20) << "\" width=\""
     << (kWidth - 2 * kMargin) << "\" height=\"" << (kHeight - kMargin - mid - 20)
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  os << "<text x=\"" << kWidth / 2 << "\" y=\"" << mid + 12
     << "\" text-anchor=\"middle\" font-size=\"13\">" << label << "</text>\n";
  os << "<text x=\"" << kMargin - 4 << "\" y=\"" << kHeight - kMargin
     << "\" text-anchor=\"end\" font-size=\"11\">1e" << llo << "</text>\n";
  os << "<text x=\"" << kMargin - 4 << "\" y=\"" << mid + 32
     << "\" text-anchor=\"end\" font-size=\"11\">1e" << lhi << "</text>\n";
  if (!series.empty()) {
    os << "<polyline fill=\"none\" stroke=\"#2c3e50\" stroke-width=\"1.3\" points=\"";
    for (size_t k = 0; k < series.size(); ++k) {
      os << fnum(top.px(static_cast<double>(k))) << "," << fnum(py_bot(series[k])) << " ";
    }
    os << "\"/>\n";
  }
  os << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 12
     << "\" text-anchor=\"middle\" font-size=\"14\">step k</text>\n";
  os << "</svg>\n";
}

}  // namespace campc
