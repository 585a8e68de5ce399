#ifndef GAL_DYNAMICS_HPP
#define GAL_DYNAMICS_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "gal/common.hpp"
#include "gal/rational.hpp"

namespace gal {

// Hyperbolic torus automorphism T[x] = [Ax] with A symmetric, integer,
// |det A| = 1 and no eigenvalue on the unit circle.
class TorusAutomorphism {
 public:
  TorusAutomorphism(const std::vector<std::vector<int64_t>>& matrix);

  int dim() const { return dim_; }
  int64_t entry(int i, int j) const { return a_[static_cast<size_t>(i)][static_cast<size_t>(j)]; }
  int64_t det() const { return det_; }

  Point step(const Point& x) const;
  Point step_inverse(const Point& x) const;
  Point iterate(Point x, int n) const;

  // exact-arithmetic orbit step for rational states
  std::array<Rational, kMaxDim> step_exact(const std::array<Rational, kMaxDim>& x) const;

  static TorusAutomorphism cat_map();
  // the standard 3-dimensional example [[2,0,1],[0,1,1],[1,1,2]]
  static TorusAutomorphism example_3d();

 private:
  int dim_;
  std::array<std::array<int64_t, kMaxDim>, kMaxDim> a_{};
  std::array<std::array<int64_t, kMaxDim>, kMaxDim> a_inv_{};  // integer by Cramer
  int64_t det_ = 0;
};

// usual torus metric: min over p in {-1,0,1}^d of |x - y + p|
double torus_distance(const Point& x, const Point& y);

double doubling_step(double x);

struct Trajectory {
  std::vector<Point> states;
  std::string system_id;
  uint64_t seed = 0;
  size_t n() const { return states.size(); }
};

Point random_torus_point(int dim, uint64_t seed);

Trajectory generate_trajectory(const TorusAutomorphism& sys, const Point& x0, size_t n,
                               uint64_t seed = 0);

// Doubling-map orbit x_{i+1} = 2 x_i mod 1, simulated exactly on the binary
// expansion of the seeded initial point. Naive double-precision iteration
// shifts the mantissa out and collapses to 0 after ~53 steps; the bit-stream
// keeps the full orbit. States are read out truncated to 64 bits.
class DoublingOrbit {
 public:
  explicit DoublingOrbit(uint64_t seed);
  double state(size_t i) const;  // x_i
  std::vector<double> states(size_t n) const;

 private:
  uint64_t word(size_t k) const;
  uint64_t seed_;
};

Trajectory generate_doubling_trajectory(uint64_t seed, size_t n);

}  // namespace gal

#endif  // GAL_DYNAMICS_HPP
