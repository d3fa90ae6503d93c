#include "gcg/cli/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "gcg/cli/csv.hpp"
#include "gcg/errors.hpp"

namespace gcg {

std::vector<std::pair<double, double>> smooth_series(
    const std::vector<std::pair<double, double>>& points, int window) {
  if (window <= 1) return points;
  std::vector<std::pair<double, double>> out;
  if (static_cast<int>(points.size()) < window) return out;
  double sum = 0.0;
  for (int i = 0; i < static_cast<int>(points.size()); ++i) {
    sum += points[i].second;
    if (i >= window) sum -= points[i - window].second;
    if (i >= window - 1) out.emplace_back(points[i].first, sum / window);
  }
  return out;
}

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

struct Axis {
  double lo = 0.0, hi = 1.0;
  double map(double v, double px0, double px1) const {
    if (hi <= lo) return px0;
    return px0 + (v - lo) / (hi - lo) * (px1 - px0);
  }
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

void write_svg(const std::vector<PlotSeries>& series, const std::filesystem::path& out_svg,
               const std::string& x_label, const std::string& y_label) {
  const double W = 880, H = 560, ml = 70, mr = 20, mt = 30, mb = 55;
  Axis xa, ya;
  bool any = false;
  for (const auto& s : series) {
    for (auto pts : {&s.points, &s.band_lo, &s.band_hi}) {
      for (const auto& [x, y] : *pts) {
        if (!any) {
          xa.lo = xa.hi = x;
          ya.lo = ya.hi = y;
          any = true;
        }
        xa.lo = std::min(xa.lo, x);
        xa.hi = std::max(xa.hi, x);
        ya.lo = std::min(ya.lo, y);
        ya.hi = std::max(ya.hi, y);
      }
    }
  }
  if (!any) {
    xa = {0.0, 1.0};
    ya = {0.0, 1.0};
  }
  if (xa.hi == xa.lo) xa.hi = xa.lo + 1.0;
  if (ya.hi == ya.lo) ya.hi = ya.lo + 1.0;
  ya.lo = std::min(ya.lo, 0.0);

  auto px = [&](double x) { return xa.map(x, ml, W - mr); };
  auto py = [&](double y) { return ya.map(y, H - mb, mt); };

  std::ofstream os(out_svg);
  if (!os) throw ConfigError("cannot write svg: " + out_svg.string());
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
     << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  // axes
  os << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr << "\" y2=\"" << H - mb
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << H - mb
     << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    double xv = xa.lo + (xa.hi - xa.lo) * i / 5.0;
    double yv = ya.lo + (ya.hi - ya.lo) * i / 5.0;
    os << "<line x1=\"" << px(xv) << "\" y1=\"" << H - mb << "\" x2=\"" << px(xv) << "\" y2=\""
       << H - mb + 5 << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << px(xv) << "\" y=\"" << H - mb + 20
       << "\" font-size=\"12\" text-anchor=\"middle\">" << fmt(xv) << "</text>\n";
    os << "<line x1=\"" << ml - 5 << "\" y1=\"" << py(yv) << "\" x2=\"" << ml << "\" y2=\"" << py(yv)
       << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << ml - 8 << "\" y=\"" << py(yv) + 4
       << "\" font-size=\"12\" text-anchor=\"end\">" << fmt(yv) << "</text>\n";
  }
  os << "<text x=\"" << (ml + W - mr) / 2 << "\" y=\"" << H - 12
     << "\" font-size=\"14\" text-anchor=\"middle\">" << x_label << "</text>\n";
  os << "<text x=\"18\" y=\"" << (mt + H - mb) / 2
     << "\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 18 " << (mt + H - mb) / 2
     << ")\">" << y_label << "</text>\n";

  int color_idx = 0;
  for (const auto& s : series) {
    const char* color = kPalette[color_idx % 6];
    if (!s.band_lo.empty() && s.band_lo.size() == s.band_hi.size()) {
      os << "<polygon fill=\"" << color << "\" opacity=\"0.15\" stroke=\"none\" points=\"";
      for (const auto& [x, y] : s.band_lo) os << px(x) << "," << py(y) << " ";
      for (auto it = s.band_hi.rbegin(); it != s.band_hi.rend(); ++it) {
        os << px(it->first) << "," << py(it->second) << " ";
      }
      os << "\"/>\n";
    }
    if (!s.points.empty()) {
      os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
      for (const auto& [x, y] : s.points) os << px(x) << "," << py(y) << " ";
      os << "\"/>\n";
    }
    double ly = mt + 18.0 * color_idx;
    os << "<line x1=\"" << W - mr - 150 << "\" y1=\"" << ly << "\" x2=\"" << W - mr - 125 << "\" y2=\""
       << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << W - mr - 120 << "\" y=\"" << ly + 4 << "\" font-size=\"12\" class=\"legend\">"
       << s.label << "</text>\n";
    ++color_idx;
  }
  os << "</svg>\n";
}

void plot_csvs(const std::vector<std::filesystem::path>& csvs, const std::filesystem::path& out_svg,
               int smooth_window) {
  std::vector<PlotSeries> series;
  for (const auto& path : csvs) {
    CsvTable t = read_csv(path);
    PlotSeries s;
    s.label = path.stem().string();
    if (t.column("mean") >= 0) {
      int step_col = t.column("step");
      if (step_col < 0) throw ConfigError("csv " + path.string() + ": missing column 'step'");
      int mean_col = t.column("mean");
      int min_col = t.column("min");
      int max_col = t.column("max");
      for (const auto& row : t.rows) {
        s.points.emplace_back(row[step_col], row[mean_col]);
        if (min_col >= 0 && max_col >= 0) {
          s.band_lo.emplace_back(row[step_col], row[min_col]);
          s.band_hi.emplace_back(row[step_col], row[max_col]);
        }
      }
    } else {
      for (const char* needed : {"step", "episode", "distance_m", "collision"}) {
        if (t.column(needed) < 0) {
          throw ConfigError("csv " + path.string() + ": missing column '" + std::string(needed) + "'");
        }
      }
      int step_col = t.column("step");
      int ep_col = t.column("episode");
      int dist_col = t.column("distance_m");
      int coll_col = t.column("collision");
      for (const auto& row : t.rows) {
        if (row[ep_col] >= 0 && row[coll_col] >= 0) {
          s.points.emplace_back(row[step_col], row[dist_col]);
        }
      }
    }
    s.points = smooth_series(s.points, smooth_window);
    series.push_back(std::move(s));
  }
  write_svg(series, out_svg, "environment steps", "distance per episode (m)");

  std::filesystem::path points_csv = out_svg;
  points_csv.replace_extension(".points.csv");
  std::ofstream os(points_csv);
  os << "series,step,value\n";
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) {
      char buf[160];
      std::snprintf(buf, sizeof(buf), "%s,%.6f,%.6f\n", s.label.c_str(), x, y);
      os << buf;
    }
  }
}

}  // namespace gcg
