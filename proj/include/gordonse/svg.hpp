#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace gordonse {

/// One curve (or shaded band) of a log-y iteration plot.
struct SvgSeries {
  std::string label;
  std::string color;
  std::vector<double> y;      // indexed by iteration; nonpositive points skipped
  std::vector<double> y_hi;   // when nonempty, (y, y_hi) render as a band
  bool dashed = false;
};

/// Writes a minimal static SVG line chart with a log-scaled y axis. Plots are
/// a pure view: they never touch the CSV data path.
void write_log_plot(const std::filesystem::path& path, const std::string& title,
                    const std::string& y_label,
                    const std::vector<SvgSeries>& series);

}  // namespace gordonse
