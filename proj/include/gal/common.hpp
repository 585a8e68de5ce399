#ifndef GAL_COMMON_HPP
#define GAL_COMMON_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace gal {

// Thrown on malformed inputs (dimension mismatches, empty samples, ...).
// The CLI maps this to exit code 2.
class input_error : public std::invalid_argument {
 public:
  explicit input_error(const std::string& what) : std::invalid_argument(what) {}
};

// Thrown on invalid configuration (non-normalized weights, divergent
// truncation budgets, regularity violations).
class config_error : public std::runtime_error {
 public:
  explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when an optimization run produces non-finite losses.
class training_error : public std::runtime_error {
 public:
  explicit training_error(const std::string& what) : std::runtime_error(what) {}
};

constexpr int kMaxDim = 3;

// A point in [0,1)^d (torus) or [0,1]^d (cube), d <= 3.
struct Point {
  std::array<double, kMaxDim> x{0.0, 0.0, 0.0};
  int dim = 1;

  Point() = default;
  explicit Point(double a) : x{a, 0.0, 0.0}, dim(1) {}
  Point(double a, double b) : x{a, b, 0.0}, dim(2) {}
  Point(double a, double b, double c) : x{a, b, c}, dim(3) {}

  double& operator[](int i) { return x[static_cast<size_t>(i)]; }
  double operator[](int i) const { return x[static_cast<size_t>(i)]; }
};

inline bool operator==(const Point& a, const Point& b) {
  if (a.dim != b.dim) return false;
  for (int i = 0; i < a.dim; ++i)
    if (a[i] != b[i]) return false;
  return true;
}

// x mod 1, result in [0,1).
inline double mod1(double v) {
  double r = v - std::floor(v);
  if (r >= 1.0) r = 0.0;  // guards v = -1e-17 style rounding
  return r;
}

inline double sup_dist(const Point& a, const Point& b) {
  double m = 0.0;
  for (int i = 0; i < a.dim; ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace gal

#endif  // GAL_COMMON_HPP
