// Copyright 2026 The flowrnn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "report.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace flowrnn::cli {

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string rgb(double r, double g, double b) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", static_cast<int>(std::lround(255 * r)),
                static_cast<int>(std::lround(255 * g)), static_cast<int>(std::lround(255 * b)));
  return buf;
}

std::string ramp(double v, double lo, double hi) {
  if (!std::isfinite(v)) return "#dddddd";
  if (lo < 0.0) {
    const double m = std::max(std::abs(lo), std::abs(hi));
    const double u = m > 0.0 ? std::clamp(v / m, -1.0, 1.0) : 0.0;
    if (u >= 0.0) return rgb(1.0, 1.0 - 0.8 * u, 1.0 - 0.85 * u);
    return rgb(1.0 + 0.85 * u, 1.0 + 0.6 * u, 1.0);
  }
  const double u = hi > lo ? std::clamp((v - lo) / (hi - lo), 0.0, 1.0) : 0.0;
  return rgb(1.0 - 0.92 * u, 1.0 - 0.75 * u, 1.0 - 0.45 * u);
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

}  // namespace

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : out_(open_out(path)), width_(header.size()) {
  row(header);
}

void CsvWriter::row(const std::vector<std::string>& fields) {
  if (fields.size() != width_) throw std::logic_error("csv row width mismatch");
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) out_ << ',';
    out_ << csv_field(fields[i]);
  }
  out_ << "\r\n";
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  write_text(path, j.dump(2) + "\n");
}

std::string svg_heatmaps(const std::vector<HeatmapPanel>& panels, int columns,
                         bool shared_scale) {
  constexpr double kCell = 10.0, kGap = 18.0, kTitle = 16.0;
  int max_rows = 1, max_cols = 1;
  double glo = std::numeric_limits<double>::infinity(), ghi = -glo;
  for (const auto& p : panels) {
    max_rows = std::max(max_rows, p.rows);
    max_cols = std::max(max_cols, p.cols);
    for (double v : p.values) {
      glo = std::min(glo, v);
      ghi = std::max(ghi, v);
    }
  }
  columns = std::max(1, std::min<int>(columns, static_cast<int>(panels.size())));
  const int grid_rows = (static_cast<int>(panels.size()) + columns - 1) / columns;
  const double pw = max_cols * kCell + kGap, ph = max_rows * kCell + kGap + kTitle;
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(columns * pw + kGap)
     << "\" height=\"" << num(grid_rows * ph + kGap) << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (std::size_t i = 0; i < panels.size(); ++i) {
    const auto& p = panels[i];
    double lo = glo, hi = ghi;
    if (!shared_scale) {
      lo = std::numeric_limits<double>::infinity();
      hi = -lo;
      for (double v : p.values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
    if (!(lo <= hi)) lo = hi = 0.0;
    const double ox = kGap + static_cast<double>(static_cast<int>(i) % columns) * pw;
    const double oy = kGap + static_cast<double>(static_cast<int>(i) / columns) * ph;
    os << "<text x=\"" << num(ox) << "\" y=\"" << num(oy + 11) << "\">" << xml_escape(p.title)
       << "</text>\n";
    for (int r = 0; r < p.rows; ++r) {
      for (int c = 0; c < p.cols; ++c) {
        const double v = p.values[static_cast<std::size_t>(r * p.cols + c)];
        os << "<rect x=\"" << num(ox + c * kCell) << "\" y=\"" << num(oy + kTitle + r * kCell)
           << "\" width=\"" << num(kCell) << "\" height=\"" << num(kCell) << "\" fill=\""
           << ramp(v, lo, hi) << "\"/>\n";
      }
    }
    os << "<rect x=\"" << num(ox) << "\" y=\"" << num(oy + kTitle) << "\" width=\""
       << num(p.cols * kCell) << "\" height=\"" << num(p.rows * kCell)
       << "\" fill=\"none\" stroke=\"#888\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string svg_line_plot(const std::string& title, const std::string& x_label,
                          const std::string& y_label, const std::vector<Series>& series,
                          bool log_y) {
  constexpr double kW = 560, kH = 340, kL = 70, kR = 150, kT = 30, kB = 45;
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                  "#8c564b", "#e377c2", "#7f7f7f"};
  auto ty = [&](double y) { return log_y ? std::log10(std::max(y, 1e-300)) : y; };
  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo, ylo = xlo, yhi = -xlo;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.y[i]) || (log_y && s.y[i] <= 0.0)) continue;
      xlo = std::min(xlo, s.x[i]);
      xhi = std::max(xhi, s.x[i]);
      ylo = std::min(ylo, ty(s.y[i]));
      yhi = std::max(yhi, ty(s.y[i]));
    }
  }
  if (!(xlo <= xhi)) xlo = 0, xhi = 1;
  if (!(ylo <= yhi)) ylo = 0, yhi = 1;
  if (xhi == xlo) xhi = xlo + 1;
  if (yhi == ylo) yhi = ylo + 1;
  const double pw = kW - kL - kR, ph = kH - kT - kB;
  auto px = [&](double x) { return kL + (x - xlo) / (xhi - xlo) * pw; };
  auto py = [&](double y) { return kT + ph - (ty(y) - ylo) / (yhi - ylo) * ph; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
     << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kL << "\" y=\"18\" font-size=\"13\">" << xml_escape(title) << "</text>\n";
  os << "<rect x=\"" << kL << "\" y=\"" << kT << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = xlo + (xhi - xlo) * k / 4.0;
    const double yv = ylo + (yhi - ylo) * k / 4.0;
    os << "<text x=\"" << num(px(xv)) << "\" y=\"" << num(kT + ph + 14)
       << "\" text-anchor=\"middle\">" << tick(xv) << "</text>\n";
    os << "<text x=\"" << num(kL - 4) << "\" y=\"" << num(kT + ph - (yv - ylo) / (yhi - ylo) * ph + 4)
       << "\" text-anchor=\"end\">" << tick(log_y ? std::pow(10.0, yv) : yv) << "</text>\n";
  }
  os << "<text x=\"" << num(kL + pw / 2) << "\" y=\"" << num(kH - 8)
     << "\" text-anchor=\"middle\">" << xml_escape(x_label) << "</text>\n";
  os << "<text transform=\"translate(14," << num(kT + ph / 2)
     << ") rotate(-90)\" text-anchor=\"middle\">" << xml_escape(y_label) << "</text>\n";
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kColors[s % (sizeof kColors / sizeof *kColors)];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < series[s].x.size(); ++i) {
      const double y = series[s].y[i];
      if (!std::isfinite(y) || (log_y && y <= 0.0)) continue;
      os << num(px(series[s].x[i])) << ',' << num(py(y)) << ' ';
    }
    os << "\"/>\n";
    os << "<text x=\"" << num(kW - kR + 10) << "\" y=\"" << num(kT + 14 + 16.0 * static_cast<double>(s))
       << "\" fill=\"" << color << "\">" << xml_escape(series[s].name) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace flowrnn::cli
