// mlitune: staircase firing-angle simulator, optimizer and oracle.
//
//   mlitune simulate <scenario.json>             timeline run with events
//   mlitune optimize <scenario.json>             one-shot tuning, no timeline
//   mlitune analyze --angles a,b,c <scenario>    metrics for fixed angles
//   mlitune oracle --step 0.5 <scenario.json>    exhaustive grid search
//
// Exit codes: 0 success, 2 scenario validation error, 3 runtime error.

#include <chrono>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mlitune/mlitune.hpp"

namespace {

constexpr int kExitScenario = 2;
constexpr int kExitRuntime = 3;

struct GlobalOptions {
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  bool quiet = false;
};

std::string join_angles(std::span<const double> angles) {
  std::string s;
  for (double a : angles) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", a);
    s += (s.empty() ? "" : ", ") + std::string(buf);
  }
  return "[" + s + "]";
}

void print_summary(const mlitune::SummaryReport& s, std::ostream& out) {
  out << "angles_deg      " << join_angles(s.angles_deg) << '\n'
      << "thd_pct         " << mlitune::format_number(s.thd_percent) << '\n'
      << "vrms_V          " << mlitune::format_number(s.v_rms) << '\n'
      << "vrms_err_V      " << mlitune::format_number(s.vrms_error) << '\n'
      << "of              " << mlitune::format_number(s.of_value) << '\n'
      << "grid_i_thd_pct  "
      << (s.grid_current_thd ? mlitune::format_number(*s.grid_current_thd) : "n/a") << '\n'
      << "evaluations     " << s.evaluations << '\n'
      << "runtime_s       " << mlitune::format_number(s.runtime_s) << '\n';
}

mlitune::Scenario load(const std::string& path, const GlobalOptions& g) {
  mlitune::Scenario s = mlitune::parse_scenario(path);
  if (g.seed) s.seed = *g.seed;
  return s;
}

template <typename RunFn>
int run_and_report(const std::string& path, const GlobalOptions& g, RunFn&& run) {
  const mlitune::Scenario scenario = load(path, g);
  const auto start = std::chrono::steady_clock::now();
  const mlitune::TimeSeriesLog log = run(scenario);
  const double runtime =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!g.out_dir.empty()) mlitune::emit_report(log, g.out_dir);
  if (!g.quiet) print_summary(mlitune::make_summary(log, runtime), std::cout);
  return 0;
}

std::vector<double> parse_angle_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) {
      throw mlitune::ScenarioError("--angles: '" + item + "' is not a number");
    }
    out.push_back(v);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cascaded H-bridge firing-angle tuning: simulate, optimize, analyze, oracle"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--seed", g.seed, "Override the scenario seed");
  app.add_option("--out-dir", g.out_dir, "Write timeseries.csv, waveform.csv, summary.csv here");
  app.add_flag("-q,--quiet", g.quiet, "Suppress the printed summary");

  std::string path;
  auto* simulate = app.add_subcommand("simulate", "Run the scenario timeline");
  simulate->add_option("scenario", path, "Scenario JSON file")->required();

  auto* optimize = app.add_subcommand("optimize", "One-shot tuning of the t=0 circuit");
  optimize->add_option("scenario", path, "Scenario JSON file")->required();

  std::string angles_text;
  auto* analyze = app.add_subcommand("analyze", "Metrics for fixed firing angles");
  analyze->add_option("--angles", angles_text, "Comma-separated degrees, e.g. 10,30,60")
      ->required();
  analyze->add_option("scenario", path, "Scenario JSON file")->required();

  double step = 0.5;
  auto* oracle = app.add_subcommand("oracle", "Exhaustive grid search (at most 4 bridges)");
  oracle->add_option("--step", step, "Grid step in degrees")->check(CLI::PositiveNumber);
  oracle->add_option("scenario", path, "Scenario JSON file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) {
      return run_and_report(path, g, [](const auto& s) { return mlitune::run_scenario(s); });
    }
    if (optimize->parsed()) {
      return run_and_report(path, g, [](const auto& s) { return mlitune::optimize_static(s); });
    }
    if (analyze->parsed()) {
      const mlitune::Scenario s = load(path, g);
      mlitune::FiringAngles angles;
      try {
        angles = mlitune::FiringAngles(parse_angle_list(angles_text));
      } catch (const mlitune::ConfigError& e) {
        throw mlitune::ScenarioError(std::string("--angles: ") + e.what());
      }
      if (angles.size() != s.inverter.bridges) {
        throw mlitune::ScenarioError("--angles needs " + std::to_string(s.inverter.bridges) +
                                     " values");
      }
      mlitune::TimeSeriesLog log;
      log.n_samples = s.objective.n_samples;
      log.final_config = s.inverter;
      const auto eval = mlitune::evaluate_detailed(s.inverter, s.objective, angles);
      log.records.push_back({0.0, angles, eval.metrics.thd_percent, eval.metrics.v_rms,
                             eval.fitness.of_value(), mlitune::Mode::kSteady, true});
      log.summary = {angles, eval.fitness, eval.metrics,
                     mlitune::grid_current_thd(s.inverter, s.objective, angles), 0, 0};
      if (!g.out_dir.empty()) mlitune::emit_report(log, g.out_dir);
      if (!g.quiet) print_summary(mlitune::make_summary(log), std::cout);
      return 0;
    }
    if (oracle->parsed()) {
      const mlitune::Scenario s = load(path, g);
      const auto start = std::chrono::steady_clock::now();
      const auto best = mlitune::grid_search(s.inverter, s.objective, {.step = step});
      const double runtime =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      mlitune::TimeSeriesLog log;
      log.n_samples = s.objective.n_samples;
      log.final_config = s.inverter;
      const auto eval = mlitune::evaluate_detailed(s.inverter, s.objective, best.angles);
      log.summary = {best.angles, best.fitness, eval.metrics,
                     mlitune::grid_current_thd(s.inverter, s.objective, best.angles),
                     best.evaluated, 0};
      if (!g.out_dir.empty()) {
        std::filesystem::create_directories(g.out_dir);
        std::ofstream(std::filesystem::path(g.out_dir) / "summary.csv")
            << mlitune::summary_csv(mlitune::make_summary(log));
        std::ofstream(std::filesystem::path(g.out_dir) / "waveform.csv")
            << mlitune::waveform_csv(log);
      }
      if (!g.quiet) print_summary(mlitune::make_summary(log, runtime), std::cout);
      return 0;
    }
  } catch (const mlitune::ScenarioError& e) {
    std::cerr << "mlitune: " << e.what() << '\n';
    return kExitScenario;
  } catch (const std::exception& e) {
    std::cerr << "mlitune: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
