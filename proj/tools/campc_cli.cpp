#include <exception>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "campc/scenario.hpp"

namespace fs = std::filesystem;
using namespace campc;

namespace {

Scenario load_or_fail(const std::string& path) {
  if (path.empty()) {
    throw CLI::ValidationError("--scenario", "a scenario bundle path is required");
  }
  return load_scenario(path);
}

void print_log_summary(const SimLog& log) {
  double cost = 0.0, mean_frac = 0.0, mean_solve = 0.0;
  for (const auto& r : log.records) {
    cost += r.stage_cost;
    mean_frac += r.selected_fraction;
    mean_solve += r.solve_time;
  }
  const double steps = std::max<double>(1.0, static_cast<double>(log.records.size()));
  std::cout << "scheme:               " << scheme_name(log.scheme) << "\n"
            << "steps:                " << log.records.size() << "\n"
            << "closed-loop cost:     " << cost << "\n"
            << "mean state-row frac:  " << mean_frac / steps << "\n"
            << "mean solve time [s]:  " << mean_solve / steps << "\n";
  if (log.startup_time > 0.0) {
    std::cout << "startup time [s]:     " << log.startup_time << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"campc: constraint-adaptive MPC benchmark harness"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_dir = ".";
  std::uint64_t seed = 0;

  auto* gen = app.add_subcommand("gen", "Generate scenario bundles");
  gen->add_option("--seed", seed, "Generator seed");
  gen->add_option("--out", out_dir, "Output directory");

  std::string scheme_str = "ca_terminal";
  auto* run = app.add_subcommand("run", "Run one closed loop");
  run->add_option("--scenario", scenario_path, "Scenario bundle directory")->required();
  run->add_option("--scheme", scheme_str,
                  "full | full_terminal | ca_invariant | ca_terminal");
  run->add_option("--out", out_dir, "Output directory");

  auto* cmp = app.add_subcommand("compare", "Run full vs ca and report");
  cmp->add_option("--scenario", scenario_path, "Scenario bundle directory")->required();
  cmp->add_option("--out", out_dir, "Output directory");

  std::vector<std::string> log_paths;
  auto* plot = app.add_subcommand("plot", "Render SVG plots from run logs");
  plot->add_option("--scenario", scenario_path, "Scenario bundle directory")->required();
  plot->add_option("--log", log_paths, "Run log CSV (repeatable, up to 3)")->required();
  plot->add_option("--out", out_dir, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (gen->parsed()) {
      Scenario flagship = gen_flagship(seed);
      save_scenario(flagship, fs::path(out_dir) / "flagship");
      Scenario box = gen_invariant_box(seed);
      save_scenario(box, fs::path(out_dir) / "invariant_box");
      std::cout << "wrote bundles: " << (fs::path(out_dir) / "flagship").string() << ", "
                << (fs::path(out_dir) / "invariant_box").string() << "\n";
      return 0;
    }

    if (run->parsed()) {
      auto scheme = scheme_from_name(scheme_str);
      if (!scheme) {
        std::cerr << "unknown scheme '" << scheme_str << "'\n";
        return 2;
      }
      Scenario sc = load_or_fail(scenario_path);
      SimLog log = run_closed_loop(sc, *scheme);
      fs::path out = fs::path(out_dir) / (sc.name + "_" + scheme_name(*scheme) + ".csv");
      write_csv(log, out);
      print_log_summary(log);
      std::cout << "log: " << out.string() << "\n";
      return 0;
    }

    if (cmp->parsed()) {
      Scenario sc = load_or_fail(scenario_path);
      ComparisonResult res = compare(sc);
      fs::create_directories(out_dir);
      write_csv(res.full_log, fs::path(out_dir) / (sc.name + "_full.csv"));
      write_csv(res.ca_log, fs::path(out_dir) / (sc.name + "_ca.csv"));
      write_csv(res.report, fs::path(out_dir) / (sc.name + "_report.csv"));
      ensure_terminal(sc);
      std::vector<const SimLog*> logs = {&res.full_log, &res.ca_log};
      if (sc.model.state_dim() == 2) {
        emit_svg_phase(logs, sc, fs::path(out_dir) / (sc.name + "_phase.svg"));
      }
      emit_svg_timeseries(logs, sc, fs::path(out_dir) / (sc.name + "_timeseries.svg"));
      const auto& r = res.report;
      std::cout << "max state deviation (inf): " << r.max_state_deviation_inf << "\n"
                << "closed-loop cost full:     " << r.closed_loop_cost_full << "\n"
                << "closed-loop cost ca:       " << r.closed_loop_cost_ca << "\n"
                << "cost ratio (ca/full):      " << r.cost_ratio << "\n"
                << "mean speedup:              " << r.mean_speedup << "\n"
                << "median speedup:            " << r.median_speedup << "\n"
                << "mean constraint fraction:  " << r.mean_constraint_fraction << "\n"
                << "startup time [s]:          " << r.startup_time << "\n"
                << "artifacts in: " << out_dir << "\n";
      return 0;
    }

    if (plot->parsed()) {
      Scenario sc = load_or_fail(scenario_path);
      std::vector<SimLog> logs;
      for (const auto& p : log_paths) logs.push_back(read_simlog_csv(p));
      std::vector<const SimLog*> ptrs;
      for (const auto& l : logs) ptrs.push_back(&l);
      fs::create_directories(out_dir);
      if (sc.model.state_dim() == 2) {
        emit_svg_phase(ptrs, sc, fs::path(out_dir) / (sc.name + "_phase.svg"));
      } else {
        std::cout << "state dimension is not 2; skipping phase plot\n";
      }
      emit_svg_timeseries(ptrs, sc, fs::path(out_dir) / (sc.name + "_timeseries.svg"));
      std::cout << "plots in: " << out_dir << "\n";
      return 0;
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
