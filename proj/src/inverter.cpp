#include "mlitune/inverter.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "mlitune/errors.hpp"

namespace mlitune {

namespace {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

void check_dimensions(const InverterConfig& config, const FiringAngles& angles,
                      std::size_t n_samples) {
  config.validate();
  if (angles.size() != config.bridges) {
    throw ConfigError("firing angle count " + std::to_string(angles.size()) +
                      " does not match bridge count " + std::to_string(config.bridges));
  }
  if (!is_power_of_two(n_samples)) {
    throw ConfigError("n_samples must be a power of two, got " + std::to_string(n_samples));
  }
  if (n_samples < 4 * config.bridges) {
    throw ConfigError("n_samples must be at least 4 * bridges");
  }
}

}  // namespace

void InverterConfig::validate() const {
  if (bridges < 1) throw ConfigError("inverter needs at least one bridge");
  if (vdc.size() != bridges) {
    throw ConfigError("vdc has " + std::to_string(vdc.size()) + " entries for " +
                      std::to_string(bridges) + " bridges");
  }
  for (double v : vdc) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("vdc entries must be finite and >= 0");
  }
  for (double r : r_internal) {
    if (!(r >= 0.0) || !std::isfinite(r)) throw ConfigError("r_internal entries must be >= 0");
  }
  if (!(r_line >= 0.0) || !std::isfinite(r_line)) throw ConfigError("r_line must be >= 0");
  if (!(f0 > 0.0) || !std::isfinite(f0)) throw ConfigError("f0 must be > 0");
  if (const auto* rl = std::get_if<ResistiveLoad>(&load)) {
    if (!(rl->r_load >= 0.0)) throw ConfigError("r_load must be >= 0");
  }
  if (const auto* g = std::get_if<IdealGrid>(&load)) {
    if (!(g->v_rms >= 0.0)) throw ConfigError("grid v_rms must be >= 0");
    if (!(g->frequency > 0.0)) throw ConfigError("grid frequency must be > 0");
  }
}

double InverterConfig::total_internal_resistance() const {
  return std::accumulate(r_internal.begin(), r_internal.end(), 0.0);
}

FiringAngles::FiringAngles(std::vector<double> degrees) : theta_(std::move(degrees)) {
  for (std::size_t k = 0; k < theta_.size(); ++k) {
    const double t = theta_[k];
    if (!(t >= 0.0 && t <= 90.0)) {
      throw ConfigError("firing angle " + std::to_string(t) + " outside [0, 90] degrees");
    }
    if (k > 0 && t < theta_[k - 1]) throw ConfigError("firing angles must be non-decreasing");
  }
}

std::vector<double> synth_staircase(const InverterConfig& config, const FiringAngles& angles,
                                    std::size_t n_samples) {
  check_dimensions(config, angles, n_samples);
  const std::size_t half = n_samples / 2;
  std::vector<double> v(n_samples, 0.0);
  for (std::size_t k = 0; k < config.bridges; ++k) {
    const double theta = angles[k];
    const double vk = config.vdc[k];
    for (std::size_t j = 0; j < half; ++j) {
      const double phi = sample_phase_deg(j, n_samples);
      if (phi >= theta && phi < 180.0 - theta) v[j] += vk;
    }
  }
  for (std::size_t j = 0; j < half; ++j) v[j + half] = -v[j];
  return v;
}

PeriodWaveform simulate_period(const InverterConfig& config, const FiringAngles& angles,
                               std::size_t n_samples) {
  PeriodWaveform out;
  out.n_samples = n_samples;
  out.v_out = synth_staircase(config, angles, n_samples);
  out.i_out.assign(n_samples, 0.0);

  const double r_series = config.total_internal_resistance() + config.r_line;

  if (const auto* rl = std::get_if<ResistiveLoad>(&config.load)) {
    const double r_total = r_series + rl->r_load;
    if (r_total == 0.0) throw SingularCircuitError("resistive load with zero total resistance");
    if (r_series == 0.0) {
      // Exact pass-through keeps v_out bit-identical to the staircase.
      for (std::size_t j = 0; j < n_samples; ++j) out.i_out[j] = out.v_out[j] / rl->r_load;
      return out;
    }
    for (std::size_t j = 0; j < n_samples; ++j) {
      const double i = out.v_out[j] / r_total;
      out.i_out[j] = i;
      out.v_out[j] = i * rl->r_load;
    }
  } else if (const auto* grid = std::get_if<IdealGrid>(&config.load)) {
    if (r_series == 0.0) throw SingularCircuitError("ideal grid with zero series resistance");
    const double peak = std::numbers::sqrt2 * grid->v_rms;
    const double r_int = config.total_internal_resistance();
    // One grid cycle per inverter period; frequency mismatch is not modelled.
    for (std::size_t j = 0; j < n_samples; ++j) {
      const double phi = 2.0 * std::numbers::pi * static_cast<double>(j) /
                         static_cast<double>(n_samples);
      const double v_grid = peak * std::sin(phi + grid->phase);
      const double i = (out.v_out[j] - v_grid) / r_series;
      out.i_out[j] = i;
      out.v_out[j] -= i * r_int;
    }
  }
  return out;
}

}  // namespace mlitune
