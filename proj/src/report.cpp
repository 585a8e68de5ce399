#include "gal/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "gal/common.hpp"

namespace gal {

CsvWriter::CsvWriter(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvWriter::add_row(const std::vector<std::string>& cells) {
  if (cells.size() != header_.size()) throw input_error("csv: row width mismatch");
  rows_.push_back(cells);
}

void CsvWriter::add_row_values(const std::vector<double>& values) {
  std::vector<std::string> cells;
  cells.reserve(values.size());
  for (double v : values) cells.push_back(fmt(v));
  add_row(cells);
}

std::string CsvWriter::fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string CsvWriter::fmt(size_t v) { return std::to_string(v); }

std::string CsvWriter::to_string() const {
  std::string out;
  for (size_t i = 0; i < header_.size(); ++i) {
    out += header_[i];
    out += i + 1 < header_.size() ? ',' : '\n';
  }
  for (const auto& row : rows_) {
    for (size_t i = 0; i < row.size(); ++i) {
      out += row[i];
      out += i + 1 < row.size() ? ',' : '\n';
    }
  }
  return out;
}

void CsvWriter::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw input_error("cannot open for writing: " + path);
  out << to_string();
}

namespace {
std::string svg_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}
}  // namespace

void write_loglog_svg(const std::string& path, const std::string& title,
                      const std::vector<PlotSeries>& series, const std::string& xlabel,
                      const std::string& ylabel) {
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& s : series)
    for (size_t i = 0; i < s.x.size(); ++i) {
      if (!(s.x[i] > 0.0) || !(s.y[i] > 0.0)) continue;
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  if (xmin > xmax || ymin > ymax) throw input_error("svg plot: no positive data");
  const double lx0 = std::log10(xmin), lx1 = std::log10(xmax);
  const double ly0 = std::log10(ymin) - 0.05, ly1 = std::log10(ymax) + 0.05;
  const double W = 720, H = 480, ml = 70, mr = 20, mt = 40, mb = 50;
  auto px = [&](double x) {
    return ml + (std::log10(x) - lx0) / std::max(lx1 - lx0, 1e-12) * (W - ml - mr);
  };
  auto py = [&](double y) {
    return H - mb - (std::log10(y) - ly0) / std::max(ly1 - ly0, 1e-12) * (H - mt - mb);
  };

  std::ofstream out(path, std::ios::binary);
  if (!out) throw input_error("cannot open for writing: " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << title
      << "</text>\n";
  // axes
  out << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr << "\" y2=\""
      << H - mb << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << H - mb
      << "\" stroke=\"black\"/>\n";
  // decade ticks
  for (int e = static_cast<int>(std::floor(lx0)); e <= static_cast<int>(std::ceil(lx1)); ++e) {
    double x = std::pow(10.0, e);
    if (x < xmin / 1.001 || x > xmax * 1.001) continue;
    out << "<line x1=\"" << svg_num(px(x)) << "\" y1=\"" << H - mb << "\" x2=\""
        << svg_num(px(x)) << "\" y2=\"" << H - mb + 6 << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << svg_num(px(x)) << "\" y=\"" << H - mb + 22
        << "\" text-anchor=\"middle\" font-size=\"12\">1e" << e << "</text>\n";
  }
  for (int e = static_cast<int>(std::floor(ly0)); e <= static_cast<int>(std::ceil(ly1)); ++e) {
    double y = std::pow(10.0, e);
    if (std::log10(y) < ly0 || std::log10(y) > ly1) continue;
    out << "<line x1=\"" << ml - 6 << "\" y1=\"" << svg_num(py(y)) << "\" x2=\"" << ml
        << "\" y2=\"" << svg_num(py(y)) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << ml - 10 << "\" y=\"" << svg_num(py(y) + 4)
        << "\" text-anchor=\"end\" font-size=\"12\">1e" << e << "</text>\n";
  }
  out << "<text x=\"" << W / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\" font-size=\"13\">"
      << xlabel << "</text>\n";
  out << "<text x=\"16\" y=\"" << H / 2 << "\" text-anchor=\"middle\" font-size=\"13\" "
      << "transform=\"rotate(-90 16 " << H / 2 << ")\">" << ylabel << "</text>\n";

  double legend_y = mt + 8;
  for (const auto& s : series) {
    if (s.line) {
      out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
      for (size_t i = 0; i < s.x.size(); ++i) {
        if (!(s.x[i] > 0.0) || !(s.y[i] > 0.0)) continue;
        out << svg_num(px(s.x[i])) << "," << svg_num(py(s.y[i])) << " ";
      }
      out << "\"/>\n";
    } else {
      for (size_t i = 0; i < s.x.size(); ++i) {
        if (!(s.x[i] > 0.0) || !(s.y[i] > 0.0)) continue;
        out << "<circle cx=\"" << svg_num(px(s.x[i])) << "\" cy=\"" << svg_num(py(s.y[i]))
            << "\" r=\"3\" fill=\"" << s.color << "\"/>\n";
      }
    }
    out << "<text x=\"" << W - mr - 8 << "\" y=\"" << svg_num(legend_y)
        << "\" text-anchor=\"end\" font-size=\"12\" fill=\"" << s.color << "\">" << s.label
        << "</text>\n";
    legend_y += 16;
  }
  out << "</svg>\n";
}

}  // namespace gal
