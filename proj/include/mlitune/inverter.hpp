#pragma once

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

namespace mlitune {

struct ResistiveLoad {
  double r_load = 4.84;  // ohms
  bool operator==(const ResistiveLoad&) const = default;
};

/// Stiff sinusoidal network behind the line resistor.
/// v_grid(phi) = sqrt(2) * v_rms * sin(phi + phase).
struct IdealGrid {
  double v_rms = 220.0;
  double frequency = 50.0;
  double phase = 0.0;  // rad
  bool operator==(const IdealGrid&) const = default;
};

struct OpenCircuit {
  bool operator==(const OpenCircuit&) const = default;
};

using Load = std::variant<ResistiveLoad, IdealGrid, OpenCircuit>;

/// Cascaded H-bridge inverter: `bridges` series cells, each fed by its own
/// DC source, producing a (2m+1)-level staircase.
struct InverterConfig {
  std::size_t bridges = 1;
  std::vector<double> vdc;         // volts, one per bridge
  std::vector<double> r_internal;  // ohms, always in the series path
  double r_line = 0.0;             // ohms, inverter to network
  Load load = OpenCircuit{};
  double f0 = 50.0;  // Hz

  /// Throws ConfigError when an invariant is broken.
  void validate() const;

  double total_internal_resistance() const;
  std::size_t level_count() const { return 2 * bridges + 1; }

  bool operator==(const InverterConfig&) const = default;
};

/// Ordered firing angles in degrees, 0 <= theta_1 <= ... <= theta_m <= 90.
/// Ties are allowed (two bridges switching together).
class FiringAngles {
 public:
  FiringAngles() = default;
  /// Throws ConfigError unless the sequence is sorted and inside [0, 90].
  explicit FiringAngles(std::vector<double> degrees);

  std::span<const double> degrees() const { return theta_; }
  const std::vector<double>& vector() const { return theta_; }
  std::size_t size() const { return theta_.size(); }
  double operator[](std::size_t k) const { return theta_[k]; }

  bool operator==(const FiringAngles&) const = default;

 private:
  std::vector<double> theta_;
};

/// One fundamental period of loaded terminal voltage and injected current.
struct PeriodWaveform {
  std::size_t n_samples = 0;
  std::vector<double> v_out;
  std::vector<double> i_out;
};

inline constexpr std::size_t kDefaultSamples = 1024;

/// Ideal no-load staircase sampled at phi_j = 360 j / n. In the first half
/// period bridge k conducts on the sample interval [theta_k, 180 - theta_k);
/// the second half is the exact negation of the first.
std::vector<double> synth_staircase(const InverterConfig& config, const FiringAngles& angles,
                                    std::size_t n_samples = kDefaultSamples);

/// Series resistive circuit solved sample by sample.
PeriodWaveform simulate_period(const InverterConfig& config, const FiringAngles& angles,
                               std::size_t n_samples = kDefaultSamples);

/// Sample angle of index j, in degrees.
inline double sample_phase_deg(std::size_t j, std::size_t n_samples) {
  return 360.0 * static_cast<double>(j) / static_cast<double>(n_samples);
}

}  // namespace mlitune
