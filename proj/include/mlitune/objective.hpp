#pragma once

#include <cstddef>

#include "mlitune/harmonics.hpp"
#include "mlitune/inverter.hpp"

namespace mlitune {

struct ObjectiveConfig {
  double k_v = 0.5;          // weight on the RMS error, per volt
  double v_target = 220.0;   // volts RMS
  std::size_t n_max = kDefaultHarmonicCutoff;
  std::size_t n_samples = kDefaultSamples;

  void validate() const;
  bool operator==(const ObjectiveConfig&) const = default;
};

/// Fitness assigned to waveforms whose fundamental vanishes.
inline constexpr double kDegeneratePenalty = 1e6;

/// Scalar fitness OF = THD% + k_v |v_target - V_rms|, lower is better.
class Fitness {
 public:
  Fitness() = default;
  Fitness(double thd_percent, double vrms_error, double k_v)
      : of_value_(thd_percent + k_v * vrms_error),
        thd_percent_(thd_percent),
        vrms_error_(vrms_error) {}

  static Fitness degenerate(double vrms_error) {
    Fitness f;
    f.of_value_ = kDegeneratePenalty;
    f.thd_percent_ = 0.0;
    f.vrms_error_ = vrms_error;
    f.degenerate_ = true;
    return f;
  }
  /// For values coming back across a boundary (tests, bindings).
  static Fitness from_value(double of_value) {
    Fitness f;
    f.of_value_ = of_value;
    return f;
  }

  double of_value() const { return of_value_; }
  double thd_percent() const { return thd_percent_; }
  double vrms_error() const { return vrms_error_; }
  bool is_degenerate() const { return degenerate_; }

  bool operator==(const Fitness&) const = default;

 private:
  double of_value_ = kDegeneratePenalty;
  double thd_percent_ = 0.0;
  double vrms_error_ = 0.0;
  bool degenerate_ = false;
};

struct Evaluation {
  Fitness fitness;
  HarmonicMetrics metrics;  // THD and RMS of v_out; thd is 0 when degenerate
};

Evaluation evaluate_detailed(const InverterConfig& inv, const ObjectiveConfig& obj,
                             const FiringAngles& angles);

inline Fitness evaluate(const InverterConfig& inv, const ObjectiveConfig& obj,
                        const FiringAngles& angles) {
  return evaluate_detailed(inv, obj, angles).fitness;
}

}  // namespace mlitune
