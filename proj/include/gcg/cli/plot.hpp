#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace gcg {

struct PlotSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;
  std::vector<std::pair<double, double>> band_lo;  // optional shaded band
  std::vector<std::pair<double, double>> band_hi;
};

// Reads metrics or aggregate CSVs and renders a static learning-curve SVG
// (one polyline per input, shaded min/max band for aggregates). The plotted
// series are also written to `<out stem>.points.csv`.
void plot_csvs(const std::vector<std::filesystem::path>& csvs, const std::filesystem::path& out_svg,
               int smooth_window = 1);

// Trailing moving average with a full window: output length is
// max(0, n - window + 1).
std::vector<std::pair<double, double>> smooth_series(
    const std::vector<std::pair<double, double>>& points, int window);

void write_svg(const std::vector<PlotSeries>& series, const std::filesystem::path& out_svg,
               const std::string& x_label, const std::string& y_label);

}  // namespace gcg
