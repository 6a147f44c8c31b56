#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mlitune/inverter.hpp"

namespace mlitune {

inline constexpr std::size_t kDefaultHarmonicCutoff = 50;

/// Peak amplitudes of harmonics 1..n_max. Index with `at(n)`, n starting at 1.
struct HarmonicSpectrum {
  std::vector<double> magnitudes;  // magnitudes[n - 1] is harmonic n

  std::size_t n_max() const { return magnitudes.size(); }
  double at(std::size_t n) const { return magnitudes.at(n - 1); }
  double fundamental() const { return magnitudes.at(0); }
};

struct HarmonicMetrics {
  double thd_percent = 0.0;
  double v_rms = 0.0;
  bool operator==(const HarmonicMetrics&) const = default;
};

/// Harmonic amplitudes of the piecewise-constant signal held between the
/// samples of one fundamental period.
///
/// The raw DFT bin 2/N |sum_j x_j e^{-i 2 pi n j / N}| is multiplied by the
/// zero-order-hold gain sin(pi n / N) / (pi n / N). For a staircase whose
/// edges fall on the sample grid this recovers the continuous Fourier
/// amplitudes exactly; for a pure tone it changes bin 1 by under 2e-6.
///
/// Throws ArgumentError unless the length is a power of two and >= 2 * n_max.
HarmonicSpectrum dft_spectrum(std::span<const double> samples,
                              std::size_t n_max = kDefaultHarmonicCutoff);

/// Plain DFT amplitudes 2/N |X_n| with no hold correction.
HarmonicSpectrum raw_dft_spectrum(std::span<const double> samples,
                                  std::size_t n_max = kDefaultHarmonicCutoff);

/// Closed-form spectrum of the quarter-wave symmetric staircase:
/// V_n = 4 / (n pi) * sum_k vdc_k cos(n theta_k) for odd n, zero for even n.
HarmonicSpectrum analytic_spectrum(const InverterConfig& config, const FiringAngles& angles,
                                   std::size_t n_max = kDefaultHarmonicCutoff);

/// 100 * sqrt(sum_{n>=2} V_n^2) / V_1. Even harmonics are included.
/// Throws UndefinedThdError for a zero fundamental.
double thd(const HarmonicSpectrum& spectrum);

double rms(std::span<const double> samples);

HarmonicMetrics measure(std::span<const double> samples,
                        std::size_t n_max = kDefaultHarmonicCutoff);

}  // namespace mlitune
