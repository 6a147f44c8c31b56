#pragma once

// Simulated real-time loop: one tick per fundamental period. While steady the
// inverter holds its angles and a detector watches the measured metrics;
// while tuning every tick spends exactly one fitness evaluation on the
// candidate the optimizer hands out.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "mlitune/harmonics.hpp"
#include "mlitune/inverter.hpp"
#include "mlitune/objective.hpp"
#include "mlitune/optimizer.hpp"

namespace mlitune {

struct SetVdcPercent {
  std::size_t level = 0;
  double percent = 0.0;  // relative to the nominal (t = 0) value
  bool operator==(const SetVdcPercent&) const = default;
};

struct SetVdcAbsolute {
  std::size_t level = 0;
  double volts = 0.0;
  bool operator==(const SetVdcAbsolute&) const = default;
};

struct SetResistor {
  enum class Which { kLine, kInternal };
  Which which = Which::kLine;
  std::size_t index = 0;  // internal resistor slot, ignored for the line
  double ohms = 0.0;
  bool operator==(const SetResistor&) const = default;
};

struct ManualTrigger {
  bool operator==(const ManualTrigger&) const = default;
};

/// Source of the given level drops to 0 V.
struct LevelFailure {
  std::size_t level = 0;
  bool operator==(const LevelFailure&) const = default;
};

using EventKind = std::variant<SetVdcPercent, SetVdcAbsolute, SetResistor, ManualTrigger, LevelFailure>;

struct ScenarioEvent {
  double at = 0.0;  // seconds
  EventKind kind;
  bool operator==(const ScenarioEvent&) const = default;
};

struct ChangeDetectorConfig {
  double vrms_threshold = 2.0;  // volts
  double thd_threshold = 1.0;   // percentage points
  std::optional<double> periodic_interval;  // seconds

  void validate() const;
  bool operator==(const ChangeDetectorConfig&) const = default;
};

struct Scenario {
  InverterConfig inverter;
  ObjectiveConfig objective;
  PsoParams pso;
  GaParams ga;
  std::size_t population = 20;
  std::size_t budget_evals = 500;
  double duration = 30.0;  // seconds
  std::vector<ScenarioEvent> events;
  std::optional<FiringAngles> initial_angles;  // empty: optimize at start
  ChangeDetectorConfig detector;
  bool disconnect_during_tuning = false;
  std::uint64_t seed = 1;
  std::size_t stagnation_generations = 5;  // 0 disables the stagnation stop
  double stagnation_tolerance = 1e-3;

  /// Throws ScenarioError (level out of range, duration shorter than the last
  /// event, budget below population, ...).
  void validate() const;
  StopCriteria stop_criteria() const;
  bool operator==(const Scenario&) const = default;
};

enum class Mode { kSteady, kTuning };

struct TickRecord {
  double t = 0.0;
  FiringAngles angles;
  double thd_percent = 0.0;
  double v_rms = 0.0;
  double of_value = 0.0;
  Mode mode = Mode::kSteady;
  bool connected = true;
  bool operator==(const TickRecord&) const = default;
};

struct RunSummary {
  FiringAngles best_angles;
  Fitness final_fitness;
  HarmonicMetrics final_metrics;
  std::optional<double> grid_current_thd;  // percent; empty for a singular grid circuit
  std::size_t evaluations_used = 0;
  std::size_t tuning_sessions = 0;
  bool operator==(const RunSummary&) const = default;
};

struct TimeSeriesLog {
  std::vector<TickRecord> records;
  RunSummary summary;
  InverterConfig final_config;  // circuit in force at the last tick
  std::size_t n_samples = kDefaultSamples;
  bool operator==(const TimeSeriesLog&) const = default;
};

/// Percent deltas are taken against `nominal_vdc`. Throws ConfigError for a
/// level or resistor slot the inverter does not have.
InverterConfig apply_event(const InverterConfig& cfg, const ScenarioEvent& event,
                           std::span<const double> nominal_vdc);

/// Strictly greater than either threshold.
bool detect_change(const HarmonicMetrics& prev, const HarmonicMetrics& cur,
                   const ChangeDetectorConfig& cfg);

/// THD of the current injected into a stiff grid (v_target RMS at f0, phase
/// 0, unless the load already is a grid). Empty when the circuit has no
/// series resistance or the current has no fundamental.
std::optional<double> grid_current_thd(const InverterConfig& inv, const ObjectiveConfig& obj,
                                       const FiringAngles& angles);

TimeSeriesLog run_scenario(const Scenario& scenario);

/// One-shot tuning on the t = 0 circuit: no events, one record per evaluation.
TimeSeriesLog optimize_static(const Scenario& scenario);

}  // namespace mlitune
