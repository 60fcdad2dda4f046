#include "emodis/evalkit/plots.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace emodis::evalkit {

namespace {

constexpr double kWidth = 640, kHeight = 480, kMargin = 60;
const char* const kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string escape(const std::string& s) {
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

const char* colour(std::size_t i) { return kPalette[i % (sizeof(kPalette) / sizeof(kPalette[0]))]; }

struct Range {
  double lo = 0.0, hi = 1.0;
  void include(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void finish() {
    if (hi - lo < 1e-12) {
      lo -= 0.5;
      hi += 0.5;
    }
  }
};

std::ostringstream begin_svg(const std::string& title) {
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << escape(title)
    << "</text>\n";
  return o;
}

void frame(std::ostringstream& o, const Range& x, const Range& y) {
  o << "<rect x=\"" << kMargin << "\" y=\"" << kMargin << "\" width=\"" << kWidth - 2 * kMargin << "\" height=\""
    << kHeight - 2 * kMargin << "\" fill=\"none\" stroke=\"black\"/>\n";
  o << "<text x=\"" << kMargin << "\" y=\"" << kHeight - kMargin + 16 << "\">" << x.lo << "</text>\n";
  o << "<text x=\"" << kWidth - kMargin << "\" y=\"" << kHeight - kMargin + 16 << "\" text-anchor=\"end\">" << x.hi
    << "</text>\n";
  o << "<text x=\"" << kMargin - 4 << "\" y=\"" << kHeight - kMargin << "\" text-anchor=\"end\">" << y.lo
    << "</text>\n";
  o << "<text x=\"" << kMargin - 4 << "\" y=\"" << kMargin + 10 << "\" text-anchor=\"end\">" << y.hi << "</text>\n";
}

double px(double v, const Range& r) { return kMargin + (v - r.lo) / (r.hi - r.lo) * (kWidth - 2 * kMargin); }
double py(double v, const Range& r) { return kHeight - kMargin - (v - r.lo) / (r.hi - r.lo) * (kHeight - 2 * kMargin); }

void legend(std::ostringstream& o, const std::vector<std::string>& names) {
  for (std::size_t i = 0; i < names.size(); ++i) {
    const double y = kMargin + 14 + 16 * static_cast<double>(i);
    o << "<rect x=\"" << kWidth - kMargin + 6 << "\" y=\"" << y - 9 << "\" width=\"10\" height=\"10\" fill=\""
      << colour(i) << "\"/>\n";
    o << "<text x=\"" << kWidth - kMargin + 20 << "\" y=\"" << y << "\" font-size=\"10\">" << escape(names[i])
      << "</text>\n";
  }
}

}  // namespace

std::string scatter_svg(const std::vector<std::array<double, 2>>& points, const std::vector<int>& groups,
                        const std::vector<std::string>& group_names, const std::string& title) {
  if (points.size() != groups.size()) throw std::invalid_argument("scatter points and groups differ in size");
  Range x{points.empty() ? 0.0 : points[0][0], points.empty() ? 1.0 : points[0][0]};
  Range y{points.empty() ? 0.0 : points[0][1], points.empty() ? 1.0 : points[0][1]};
  for (const auto& p : points) {
    x.include(p[0]);
    y.include(p[1]);
  }
  x.finish();
  y.finish();
  auto o = begin_svg(title);
  frame(o, x, y);
  for (std::size_t i = 0; i < points.size(); ++i) {
    o << "<circle cx=\"" << px(points[i][0], x) << "\" cy=\"" << py(points[i][1], y) << "\" r=\"3\" fill=\""
      << colour(static_cast<std::size_t>(std::max(0, groups[i]))) << "\" fill-opacity=\"0.75\"/>\n";
  }
  legend(o, group_names);
  o << "</svg>\n";
  return o.str();
}

std::string lines_svg(const std::vector<Series>& series, const std::string& title, const std::string& x_label,
                      const std::string& y_label) {
  Range x{0.0, 1.0};
  Range y{0.0, 0.0};
  bool first = true;
  for (const auto& s : series) {
    x.include(static_cast<double>(s.values.size()));
    for (double v : s.values) {
      if (first) {
        y = {v, v};
        first = false;
      }
      y.include(v);
    }
  }
  x.finish();
  y.finish();
  auto o = begin_svg(title);
  frame(o, x, y);
  o << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 20 << "\" text-anchor=\"middle\">" << escape(x_label)
    << "</text>\n";
  o << "<text x=\"16\" y=\"" << kHeight / 2 << "\" transform=\"rotate(-90 16 " << kHeight / 2
    << ")\" text-anchor=\"middle\">" << escape(y_label) << "</text>\n";
  std::vector<std::string> names;
  for (std::size_t i = 0; i < series.size(); ++i) {
    names.push_back(series[i].name);
    o << "<polyline fill=\"none\" stroke=\"" << colour(i) << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t t = 0; t < series[i].values.size(); ++t) {
      o << px(static_cast<double>(t), x) << "," << py(series[i].values[t], y) << " ";
    }
    o << "\"/>\n";
  }
  legend(o, names);
  o << "</svg>\n";
  return o.str();
}

std::string heatmap_svg(const std::vector<std::vector<double>>& matrix, const std::vector<std::string>& row_names,
                        const std::vector<std::string>& col_names, const std::string& title) {
  auto o = begin_svg(title);
  const auto rows = matrix.size();
  const auto cols = rows ? matrix[0].size() : 0;
  if (rows == 0 || cols == 0) {
    o << "</svg>\n";
    return o.str();
  }
  const double cw = (kWidth - 2 * kMargin) / static_cast<double>(cols);
  const double ch = (kHeight - 2 * kMargin) / static_cast<double>(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const double v = std::clamp(matrix[r][c], 0.0, 1.0);
      const int shade = static_cast<int>(std::lround(255.0 * (1.0 - v)));
      const double x = kMargin + cw * static_cast<double>(c);
      const double y = kMargin + ch * static_cast<double>(r);
      o << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << cw << "\" height=\"" << ch << "\" fill=\"rgb("
        << shade << "," << shade << ",255)\" stroke=\"black\"/>\n";
      o << "<text x=\"" << x + cw / 2 << "\" y=\"" << y + ch / 2 << "\" text-anchor=\"middle\" fill=\""
        << (v > 0.5 ? "white" : "black") << "\">" << std::round(matrix[r][c] * 1000.0) / 1000.0 << "</text>\n";
    }
  }
  for (std::size_t r = 0; r < rows && r < row_names.size(); ++r) {
    o << "<text x=\"" << kMargin - 4 << "\" y=\"" << kMargin + ch * (static_cast<double>(r) + 0.5)
      << "\" text-anchor=\"end\">" << escape(row_names[r]) << "</text>\n";
  }
  for (std::size_t c = 0; c < cols && c < col_names.size(); ++c) {
    o << "<text x=\"" << kMargin + cw * (static_cast<double>(c) + 0.5) << "\" y=\"" << kHeight - kMargin + 16
      << "\" text-anchor=\"middle\">" << escape(col_names[c]) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace emodis::evalkit
