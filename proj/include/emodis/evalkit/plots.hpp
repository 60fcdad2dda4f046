#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

namespace emodis::evalkit {

struct Series {
  std::string name;
  std::vector<double> values;
};

// Minimal SVG figures for reports.
std::string scatter_svg(const std::vector<std::array<double, 2>>& points, const std::vector<int>& groups,
                        const std::vector<std::string>& group_names, const std::string& title);
std::string lines_svg(const std::vector<Series>& series, const std::string& title, const std::string& x_label,
                      const std::string& y_label);
std::string heatmap_svg(const std::vector<std::vector<double>>& matrix, const std::vector<std::string>& row_names,
                        const std::vector<std::string>& col_names, const std::string& title);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace emodis::evalkit
