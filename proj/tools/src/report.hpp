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

#ifndef FLOWRNN_TOOLS_REPORT_HPP_
#define FLOWRNN_TOOLS_REPORT_HPP_

#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

namespace flowrnn::cli {

/// Shortest decimal form that parses back to the same double.
std::string fmt(double v);

/// RFC-4180 writer with CRLF line ends and quoting only where needed.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
  void row(const std::vector<std::string>& fields);

 private:
  std::ofstream out_;
  std::size_t width_;
};

void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

struct HeatmapPanel {
  std::string title;
  int rows = 0;
  int cols = 0;
  std::vector<double> values;  // row-major
};

/// Grid of heatmaps. Nonnegative panels use a white-to-blue ramp, signed
/// panels a blue-white-red ramp centered at zero. `shared_scale` uses one
/// range for every panel.
std::string svg_heatmaps(const std::vector<HeatmapPanel>& panels, int columns,
                         bool shared_scale);

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

std::string svg_line_plot(const std::string& title, const std::string& x_label,
                          const std::string& y_label, const std::vector<Series>& series,
                          bool log_y);

}  // namespace flowrnn::cli

#endif  // FLOWRNN_TOOLS_REPORT_HPP_
