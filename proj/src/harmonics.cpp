#include "mlitune/harmonics.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>
#include <utility>

#include "mlitune/errors.hpp"

namespace mlitune {

namespace {

// cos/sin tables for bins 1..n_max, row-major by harmonic.
struct Twiddles {
  std::size_t n = 0;
  std::size_t n_max = 0;
  std::vector<double> cos_table;
  std::vector<double> sin_table;
};

const Twiddles& twiddles(std::size_t n, std::size_t n_max) {
  static std::mutex mutex;
  static std::map<std::pair<std::size_t, std::size_t>, std::unique_ptr<Twiddles>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[{n, n_max}];
  if (!slot) {
    auto t = std::make_unique<Twiddles>();
    t->n = n;
    t->n_max = n_max;
    t->cos_table.resize(n * n_max);
    t->sin_table.resize(n * n_max);
    for (std::size_t h = 1; h <= n_max; ++h) {
      for (std::size_t j = 0; j < n; ++j) {
        // Reduce the index first so the argument stays in [0, 2 pi).
        const std::size_t idx = (h * j) % n;
        const double arg = 2.0 * std::numbers::pi * static_cast<double>(idx) / static_cast<double>(n);
        t->cos_table[(h - 1) * n + j] = std::cos(arg);
        t->sin_table[(h - 1) * n + j] = std::sin(arg);
      }
    }
    slot = std::move(t);
  }
  return *slot;
}

void check_dft_args(std::size_t n, std::size_t n_max) {
  if (n == 0 || (n & (n - 1)) != 0) {
    throw ArgumentError("sample count must be a power of two, got " + std::to_string(n));
  }
  if (n_max == 0) throw ArgumentError("n_max must be >= 1");
  if (2 * n_max > n) {
    throw ArgumentError("n_max " + std::to_string(n_max) + " exceeds the Nyquist bound for " +
                        std::to_string(n) + " samples");
  }
}

}  // namespace

HarmonicSpectrum raw_dft_spectrum(std::span<const double> samples, std::size_t n_max) {
  const std::size_t n = samples.size();
  check_dft_args(n, n_max);
  const Twiddles& tw = twiddles(n, n_max);
  HarmonicSpectrum spectrum;
  spectrum.magnitudes.resize(n_max);
  const double scale = 2.0 / static_cast<double>(n);
  for (std::size_t h = 1; h <= n_max; ++h) {
    const double* c = &tw.cos_table[(h - 1) * n];
    const double* s = &tw.sin_table[(h - 1) * n];
    double re = 0.0;
    double im = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      re += samples[j] * c[j];
      im += samples[j] * s[j];
    }
    spectrum.magnitudes[h - 1] = scale * std::hypot(re, im);
  }
  return spectrum;
}

HarmonicSpectrum dft_spectrum(std::span<const double> samples, std::size_t n_max) {
  HarmonicSpectrum spectrum = raw_dft_spectrum(samples, n_max);
  const double n = static_cast<double>(samples.size());
  for (std::size_t h = 1; h <= n_max; ++h) {
    const double x = std::numbers::pi * static_cast<double>(h) / n;
    spectrum.magnitudes[h - 1] *= std::sin(x) / x;
  }
  return spectrum;
}

HarmonicSpectrum analytic_spectrum(const InverterConfig& config, const FiringAngles& angles,
                                   std::size_t n_max) {
  config.validate();
  if (angles.size() != config.bridges) {
    throw ConfigError("firing angle count does not match bridge count");
  }
  HarmonicSpectrum spectrum;
  spectrum.magnitudes.assign(n_max, 0.0);
  constexpr double deg = std::numbers::pi / 180.0;
  for (std::size_t h = 1; h <= n_max; h += 2) {
    double sum = 0.0;
    for (std::size_t k = 0; k < config.bridges; ++k) {
      sum += config.vdc[k] * std::cos(static_cast<double>(h) * angles[k] * deg);
    }
    spectrum.magnitudes[h - 1] = std::abs(4.0 / (static_cast<double>(h) * std::numbers::pi) * sum);
  }
  return spectrum;
}

double thd(const HarmonicSpectrum& spectrum) {
  if (spectrum.magnitudes.empty() || !(spectrum.fundamental() > 0.0)) {
    throw UndefinedThdError("THD undefined: zero fundamental");
  }
  double sum = 0.0;
  for (std::size_t h = 2; h <= spectrum.n_max(); ++h) sum += spectrum.at(h) * spectrum.at(h);
  return 100.0 * std::sqrt(sum) / spectrum.fundamental();
}

double rms(std::span<const double> samples) {
  if (samples.empty()) throw ArgumentError("rms of an empty sequence");
  double sum = 0.0;
  for (double x : samples) sum += x * x;
  return std::sqrt(sum / static_cast<double>(samples.size()));
}

HarmonicMetrics measure(std::span<const double> samples, std::size_t n_max) {
  return {thd(dft_spectrum(samples, n_max)), rms(samples)};
}

}  // namespace mlitune
