#include "mlitune/objective.hpp"

#include <algorithm>
#include <cmath>

#include "mlitune/errors.hpp"

namespace mlitune {

void ObjectiveConfig::validate() const {
  if (!(k_v >= 0.0)) throw ConfigError("k_v must be >= 0");
  if (!(v_target > 0.0)) throw ConfigError("v_target must be > 0");
  if (n_max < 1) throw ConfigError("n_max must be >= 1");
  if (n_samples == 0 || (n_samples & (n_samples - 1)) != 0) {
    throw ConfigError("n_samples must be a power of two");
  }
  if (2 * n_max > n_samples) throw ConfigError("n_max exceeds Nyquist bound of n_samples");
}

Evaluation evaluate_detailed(const InverterConfig& inv, const ObjectiveConfig& obj,
                             const FiringAngles& angles) {
  obj.validate();
  const PeriodWaveform wave = simulate_period(inv, angles, obj.n_samples);
  const HarmonicSpectrum spectrum = dft_spectrum(wave.v_out, obj.n_max);
  const double v_rms = rms(wave.v_out);
  const double vrms_error = std::abs(obj.v_target - v_rms);

  // Relative floor: a fundamental this small is round-off of a null waveform.
  const double floor = 1e-12 * std::max(1.0, v_rms);
  if (!(spectrum.fundamental() > floor)) {
    return {Fitness::degenerate(vrms_error), {0.0, v_rms}};
  }
  const double thd_percent = thd(spectrum);
  return {Fitness(thd_percent, vrms_error, obj.k_v), {thd_percent, v_rms}};
}

}  // namespace mlitune
