#include "mlitune/harness.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mlitune/errors.hpp"

namespace mlitune {

namespace {

// Event times and tick times are compared with this slack so that an event
// at 5.0 s lands on tick 250 at 50 Hz despite rounding in i / f0.
constexpr double kTimeSlack = 1e-9;

std::size_t event_level(const EventKind& kind) {
  return std::visit(
      [](const auto& e) -> std::size_t {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, SetVdcPercent> || std::is_same_v<T, SetVdcAbsolute> ||
                      std::is_same_v<T, LevelFailure>) {
          return e.level;
        } else if constexpr (std::is_same_v<T, SetResistor>) {
          return e.which == SetResistor::Which::kInternal ? e.index : 0;
        } else {
          return 0;
        }
      },
      kind);
}

class Clock {
 public:
  explicit Clock(double f0) : f0_(f0) {}
  double at(std::size_t tick) const { return static_cast<double>(tick) / f0_; }

 private:
  double f0_;
};

}  // namespace

void ChangeDetectorConfig::validate() const {
  if (!(vrms_threshold > 0.0)) throw ConfigError("detector.vrms_threshold must be > 0");
  if (!(thd_threshold > 0.0)) throw ConfigError("detector.thd_threshold must be > 0");
  if (periodic_interval && !(*periodic_interval > 0.0)) {
    throw ConfigError("detector.periodic_interval must be > 0");
  }
}

void Scenario::validate() const {
  try {
    inverter.validate();
    objective.validate();
    pso.validate();
    ga.validate();
    detector.validate();
  } catch (const ConfigError& e) {
    throw ScenarioError(e.what());
  }
  if (population < 2) throw ScenarioError("population must be >= 2");
  if (budget_evals < population) throw ScenarioError("budget_evals must be >= population");
  if (!(duration > 0.0)) throw ScenarioError("duration must be > 0");
  if (objective.n_samples < 4 * inverter.bridges) {
    throw ScenarioError("objective.n_samples must be at least 4 * bridges");
  }
  if (initial_angles && initial_angles->size() != inverter.bridges) {
    throw ScenarioError("initial_angles has " + std::to_string(initial_angles->size()) +
                        " entries for " + std::to_string(inverter.bridges) + " bridges");
  }
  if (!(stagnation_tolerance >= 0.0)) throw ScenarioError("stagnation_tolerance must be >= 0");
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& e = events[i];
    if (!(e.at >= 0.0)) throw ScenarioError("events[" + std::to_string(i) + "].at must be >= 0");
    if (e.at > duration) {
      throw ScenarioError("events[" + std::to_string(i) + "] at " + std::to_string(e.at) +
                          " s is after the scenario duration");
    }
    if (event_level(e.kind) >= inverter.bridges) {
      throw ScenarioError("events[" + std::to_string(i) + "] references level " +
                          std::to_string(event_level(e.kind)) + " of a " +
                          std::to_string(inverter.bridges) + "-bridge inverter");
    }
    if (const auto* r = std::get_if<SetResistor>(&e.kind); r && !(r->ohms >= 0.0)) {
      throw ScenarioError("events[" + std::to_string(i) + "] resistor must be >= 0");
    }
    if (const auto* a = std::get_if<SetVdcAbsolute>(&e.kind); a && !(a->volts >= 0.0)) {
      throw ScenarioError("events[" + std::to_string(i) + "] vdc must be >= 0");
    }
  }
}

StopCriteria Scenario::stop_criteria() const {
  return {budget_evals, stagnation_generations, stagnation_tolerance};
}

InverterConfig apply_event(const InverterConfig& cfg, const ScenarioEvent& event,
                           std::span<const double> nominal_vdc) {
  InverterConfig out = cfg;
  auto check_level = [&](std::size_t level) {
    if (level >= out.bridges || level >= nominal_vdc.size()) {
      throw ConfigError("event references level " + std::to_string(level) + " of a " +
                        std::to_string(out.bridges) + "-bridge inverter");
    }
  };
  std::visit(
      [&](const auto& e) {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, SetVdcPercent>) {
          check_level(e.level);
          out.vdc[e.level] = nominal_vdc[e.level] * (1.0 + e.percent / 100.0);
        } else if constexpr (std::is_same_v<T, SetVdcAbsolute>) {
          check_level(e.level);
          out.vdc[e.level] = e.volts;
        } else if constexpr (std::is_same_v<T, LevelFailure>) {
          check_level(e.level);
          out.vdc[e.level] = 0.0;
        } else if constexpr (std::is_same_v<T, SetResistor>) {
          if (e.which == SetResistor::Which::kLine) {
            out.r_line = e.ohms;
          } else {
            check_level(e.index);
            if (out.r_internal.size() <= e.index) out.r_internal.resize(e.index + 1, 0.0);
            out.r_internal[e.index] = e.ohms;
          }
        }
      },
      event.kind);
  // A percent drop below -100 % would make the source negative.
  for (double& v : out.vdc) v = std::max(v, 0.0);
  return out;
}

bool detect_change(const HarmonicMetrics& prev, const HarmonicMetrics& cur,
                   const ChangeDetectorConfig& cfg) {
  return std::abs(cur.v_rms - prev.v_rms) > cfg.vrms_threshold ||
         std::abs(cur.thd_percent - prev.thd_percent) > cfg.thd_threshold;
}

std::optional<double> grid_current_thd(const InverterConfig& inv, const ObjectiveConfig& obj,
                                       const FiringAngles& angles) {
  InverterConfig grid = inv;
  if (!std::holds_alternative<IdealGrid>(grid.load)) {
    grid.load = IdealGrid{obj.v_target, inv.f0, 0.0};
  }
  try {
    const PeriodWaveform wave = simulate_period(grid, angles, obj.n_samples);
    return thd(dft_spectrum(wave.i_out, obj.n_max));
  } catch (const SingularCircuitError&) {
    return std::nullopt;
  } catch (const UndefinedThdError&) {
    return std::nullopt;
  }
}

namespace {

RunSummary summarize(const InverterConfig& cfg, const ObjectiveConfig& obj,
                     const FiringAngles& angles, std::size_t evaluations,
                     std::size_t sessions) {
  const Evaluation eval = evaluate_detailed(cfg, obj, angles);
  RunSummary s;
  s.best_angles = angles;
  s.final_fitness = eval.fitness;
  s.final_metrics = eval.metrics;
  s.grid_current_thd = grid_current_thd(cfg, obj, angles);
  s.evaluations_used = evaluations;
  s.tuning_sessions = sessions;
  return s;
}

}  // namespace

TimeSeriesLog run_scenario(const Scenario& scenario) {
  scenario.validate();
  const ObjectiveConfig& obj = scenario.objective;
  const std::vector<double> nominal = scenario.inverter.vdc;

  std::vector<ScenarioEvent> events = scenario.events;
  std::stable_sort(events.begin(), events.end(),
                   [](const ScenarioEvent& a, const ScenarioEvent& b) { return a.at < b.at; });

  InverterConfig cfg = scenario.inverter;
  const Clock clock(cfg.f0);
  const auto ticks = static_cast<std::size_t>(std::llround(scenario.duration * cfg.f0));

  std::optional<HybridOptimizer> optimizer;
  std::optional<FiringAngles> active = scenario.initial_angles;
  std::optional<HarmonicMetrics> baseline;
  std::size_t evaluations = 0;
  std::size_t sessions = 0;
  double last_activation = 0.0;

  auto start_tuning = [&](std::uint64_t session_seed) {
    optimizer.emplace(cfg.bridges, scenario.pso, scenario.ga, scenario.population, session_seed,
                      scenario.stop_criteria(), active);
    baseline.reset();
    ++sessions;
  };

  if (!active) start_tuning(scenario.seed);

  TimeSeriesLog log;
  log.n_samples = obj.n_samples;
  log.records.reserve(ticks);
  std::size_t next_event = 0;

  for (std::size_t tick = 0; tick < ticks; ++tick) {
    const double t = clock.at(tick);
    bool manual = false;
    while (next_event < events.size() && events[next_event].at <= t + kTimeSlack) {
      cfg = apply_event(cfg, events[next_event], nominal);
      manual = manual || std::holds_alternative<ManualTrigger>(events[next_event].kind);
      ++next_event;
    }

    if (optimizer) {
      const Candidate candidate = optimizer->ask();
      const Evaluation eval = evaluate_detailed(cfg, obj, candidate.angles);
      optimizer->tell(candidate.id, eval.fitness);
      ++evaluations;
      log.records.push_back({t, candidate.angles, eval.metrics.thd_percent, eval.metrics.v_rms,
                             eval.fitness.of_value(), Mode::kTuning,
                             !scenario.disconnect_during_tuning});
      if (optimizer->finished()) {
        active = optimizer->best_position();
        optimizer.reset();
        last_activation = t;
      }
      continue;
    }

    const Evaluation eval = evaluate_detailed(cfg, obj, *active);
    log.records.push_back({t, *active, eval.metrics.thd_percent, eval.metrics.v_rms,
                           eval.fitness.of_value(), Mode::kSteady, true});

    bool trigger = manual;
    if (baseline && detect_change(*baseline, eval.metrics, scenario.detector)) trigger = true;
    if (scenario.detector.periodic_interval &&
        t - last_activation >= *scenario.detector.periodic_interval - kTimeSlack) {
      trigger = true;
    }
    baseline = eval.metrics;
    if (trigger) {
      // Each session gets its own stream; the first one uses the seed as given.
      start_tuning(scenario.seed + sessions);
      last_activation = t;
    }
  }

  // A session cut off by the end of the run reports its incumbent, or the
  // angles still applied if it never got an evaluation back.
  std::optional<FiringAngles> final_angles = active;
  if (optimizer && optimizer->best_fitness()) final_angles = optimizer->best_position();
  if (final_angles && final_angles->size() == cfg.bridges) {
    log.summary = summarize(cfg, obj, *final_angles, evaluations, sessions);
  }
  log.final_config = cfg;
  return log;
}

TimeSeriesLog optimize_static(const Scenario& scenario) {
  scenario.validate();
  const InverterConfig& cfg = scenario.inverter;
  const ObjectiveConfig& obj = scenario.objective;
  const Clock clock(cfg.f0);

  HybridOptimizer optimizer(cfg.bridges, scenario.pso, scenario.ga, scenario.population,
                            scenario.seed, scenario.stop_criteria(), scenario.initial_angles);
  TimeSeriesLog log;
  log.n_samples = obj.n_samples;
  std::size_t tick = 0;
  while (!optimizer.finished()) {
    const Candidate c = optimizer.ask();
    const Evaluation eval = evaluate_detailed(cfg, obj, c.angles);
    optimizer.tell(c.id, eval.fitness);
    log.records.push_back({clock.at(tick++), c.angles, eval.metrics.thd_percent,
                           eval.metrics.v_rms, eval.fitness.of_value(), Mode::kTuning,
                           !scenario.disconnect_during_tuning});
  }
  log.summary = summarize(cfg, obj, optimizer.best_position(), optimizer.evaluations_used(), 1);
  log.final_config = cfg;
  return log;
}

}  // namespace mlitune
