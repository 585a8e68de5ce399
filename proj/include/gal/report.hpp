#ifndef GAL_REPORT_HPP
#define GAL_REPORT_HPP

#include <string>
#include <vector>

namespace gal {

// Deterministic CSV writer: %.17g doubles, fixed row order, no locale.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);
  void add_row(const std::vector<std::string>& cells);
  void add_row_values(const std::vector<double>& values);
  size_t rows() const { return rows_.size(); }
  void save(const std::string& path) const;
  std::string to_string() const;

  static std::string fmt(double v);
  static std::string fmt(size_t v);

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

struct PlotSeries {
  std::string label;
  std::vector<double> x, y;
  bool line = false;      // polyline vs markers
  std::string color = "#1f6fb2";
};

// minimal log-log SVG plot, deterministic output
void write_loglog_svg(const std::string& path, const std::string& title,
                      const std::vector<PlotSeries>& series, const std::string& xlabel,
                      const std::string& ylabel);

}  // namespace gal

#endif  // GAL_REPORT_HPP
