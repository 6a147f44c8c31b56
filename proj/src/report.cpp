#include "mlitune/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace mlitune {

namespace {

std::string format_fixed2(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", value);
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace

std::string format_number(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", value);
  return buf;
}

SummaryReport make_summary(const TimeSeriesLog& log, double runtime_s) {
  const RunSummary& s = log.summary;
  SummaryReport r;
  r.angles_deg = s.best_angles.vector();
  r.thd_percent = s.final_metrics.thd_percent;
  r.v_rms = s.final_metrics.v_rms;
  r.vrms_error = s.final_fitness.vrms_error();
  r.of_value = s.final_fitness.of_value();
  r.grid_current_thd = s.grid_current_thd;
  r.evaluations = s.evaluations_used;
  r.runtime_s = runtime_s;
  return r;
}

std::string timeseries_csv(const TimeSeriesLog& log) {
  const std::size_t m = log.final_config.bridges;
  std::ostringstream out;
  out << "t_s,mode,connected,of,thd_pct,vrms_V";
  for (std::size_t k = 1; k <= m; ++k) out << ",theta" << k << "_deg";
  out << '\n';
  for (const auto& r : log.records) {
    out << format_number(r.t) << ',' << (r.mode == Mode::kSteady ? "steady" : "tuning") << ','
        << (r.connected ? 1 : 0) << ',' << format_number(r.of_value) << ','
        << format_number(r.thd_percent) << ',' << format_number(r.v_rms);
    for (double a : r.angles.degrees()) out << ',' << format_number(a);
    out << '\n';
  }
  return out.str();
}

std::string waveform_csv(const TimeSeriesLog& log) {
  const PeriodWaveform wave =
      simulate_period(log.final_config, log.summary.best_angles, log.n_samples);
  std::ostringstream out;
  out << "sample,phi_deg,v_out_V,i_out_A\n";
  for (std::size_t j = 0; j < wave.n_samples; ++j) {
    out << j << ',' << format_number(sample_phase_deg(j, wave.n_samples)) << ','
        << format_number(wave.v_out[j]) << ',' << format_number(wave.i_out[j]) << '\n';
  }
  return out.str();
}

std::string summary_csv(const SummaryReport& s) {
  std::ostringstream out;
  for (std::size_t k = 1; k <= s.angles_deg.size(); ++k) out << "theta" << k << "_deg,";
  out << "thd_pct,vrms_V,vrms_err_V,of,grid_current_thd_pct,evaluations\n";
  for (double a : s.angles_deg) out << format_fixed2(a) << ',';
  out << format_number(s.thd_percent) << ',' << format_number(s.v_rms) << ','
      << format_number(s.vrms_error) << ',' << format_number(s.of_value) << ','
      << (s.grid_current_thd ? format_number(*s.grid_current_thd) : std::string("n/a")) << ','
      << s.evaluations << '\n';
  return out.str();
}

void emit_report(const TimeSeriesLog& log, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("cannot create " + out_dir.string() + ": " + ec.message());
  write_file(out_dir / "timeseries.csv", timeseries_csv(log));
  write_file(out_dir / "waveform.csv", waveform_csv(log));
  write_file(out_dir / "summary.csv", summary_csv(make_summary(log)));
}

}  // namespace mlitune
