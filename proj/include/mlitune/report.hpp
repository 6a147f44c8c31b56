#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mlitune/harness.hpp"

namespace mlitune {

struct SummaryReport {
  std::vector<double> angles_deg;
  double thd_percent = 0.0;
  double v_rms = 0.0;
  double vrms_error = 0.0;
  double of_value = 0.0;
  std::optional<double> grid_current_thd;
  std::size_t evaluations = 0;
  double runtime_s = 0.0;  // wall clock, not written to summary.csv
};

SummaryReport make_summary(const TimeSeriesLog& log, double runtime_s = 0.0);

/// %.6g, the format of every numeric CSV field.
std::string format_number(double value);

std::string timeseries_csv(const TimeSeriesLog& log);
std::string waveform_csv(const TimeSeriesLog& log);
std::string summary_csv(const SummaryReport& summary);

/// Writes timeseries.csv, waveform.csv and summary.csv into `out_dir`
/// (created if missing). Throws std::runtime_error naming the path on I/O
/// failure.
void emit_report(const TimeSeriesLog& log, const std::filesystem::path& out_dir);

}  // namespace mlitune
