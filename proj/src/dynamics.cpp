#include "gal/dynamics.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>

#include "gal/rng.hpp"

namespace gal {

namespace {

int64_t int_det(const std::array<std::array<int64_t, kMaxDim>, kMaxDim>& a, int d) {
  if (d == 1) return a[0][0];
  if (d == 2) return a[0][0] * a[1][1] - a[0][1] * a[1][0];
  return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
         a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
         a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
}

// adjugate / det with |det| = 1; integer inverse by Cramer's rule
std::array<std::array<int64_t, kMaxDim>, kMaxDim> int_inverse(
    const std::array<std::array<int64_t, kMaxDim>, kMaxDim>& a, int d, int64_t det) {
  std::array<std::array<int64_t, kMaxDim>, kMaxDim> inv{};
  if (d == 1) {
    inv[0][0] = det;  // det = +-1
    return inv;
  }
  if (d == 2) {
    inv[0][0] = det * a[1][1];
    inv[0][1] = -det * a[0][1];
    inv[1][0] = -det * a[1][0];
    inv[1][1] = det * a[0][0];
    return inv;
  }
  auto cof = [&](int i, int j) {
    int r0 = (i + 1) % 3, r1 = (i + 2) % 3, c0 = (j + 1) % 3, c1 = (j + 2) % 3;
    if (r0 > r1) std::swap(r0, r1);
    if (c0 > c1) std::swap(c0, c1);
    int64_t minor = a[static_cast<size_t>(r0)][static_cast<size_t>(c0)] *
                        a[static_cast<size_t>(r1)][static_cast<size_t>(c1)] -
                    a[static_cast<size_t>(r0)][static_cast<size_t>(c1)] *
                        a[static_cast<size_t>(r1)][static_cast<size_t>(c0)];
    return (((i + j) % 2) ? -minor : minor);
  };
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) inv[static_cast<size_t>(i)][static_cast<size_t>(j)] = det * cof(j, i);
  return inv;
}

}  // namespace

TorusAutomorphism::TorusAutomorphism(const std::vector<std::vector<int64_t>>& matrix) {
  dim_ = static_cast<int>(matrix.size());
  if (dim_ < 1 || dim_ > kMaxDim) throw input_error("torus automorphism: dimension must be 1..3");
  for (int i = 0; i < dim_; ++i) {
    if (static_cast<int>(matrix[static_cast<size_t>(i)].size()) != dim_)
      throw input_error("torus automorphism: matrix is not square");
    for (int j = 0; j < dim_; ++j)
      a_[static_cast<size_t>(i)][static_cast<size_t>(j)] =
          matrix[static_cast<size_t>(i)][static_cast<size_t>(j)];
  }
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < i; ++j)
      if (entry(i, j) != entry(j, i)) throw input_error("torus automorphism: matrix must be symmetric");
  det_ = int_det(a_, dim_);
  if (det_ != 1 && det_ != -1) throw input_error("torus automorphism: |det A| must be 1");
  a_inv_ = int_inverse(a_, dim_, det_);

  Eigen::MatrixXd m(dim_, dim_);
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j) m(i, j) = static_cast<double>(entry(i, j));
  Eigen::EigenSolver<Eigen::MatrixXd> es(m, false);
  for (int i = 0; i < dim_; ++i) {
    double mod = std::abs(es.eigenvalues()[i]);
    if (std::abs(mod - 1.0) < 1e-9)
      throw input_error("torus automorphism: eigenvalue on the unit circle (not hyperbolic)");
  }
}

Point TorusAutomorphism::step(const Point& x) const {
  if (x.dim != dim_) throw input_error("step: dimension mismatch");
  Point y;
  y.dim = dim_;
  for (int i = 0; i < dim_; ++i) {
    double s = 0.0;
    for (int j = 0; j < dim_; ++j) s += static_cast<double>(entry(i, j)) * x[j];
    y[i] = mod1(s);
  }
  return y;
}

Point TorusAutomorphism::step_inverse(const Point& x) const {
  if (x.dim != dim_) throw input_error("step_inverse: dimension mismatch");
  Point y;
  y.dim = dim_;
  for (int i = 0; i < dim_; ++i) {
    double s = 0.0;
    for (int j = 0; j < dim_; ++j)
      s += static_cast<double>(a_inv_[static_cast<size_t>(i)][static_cast<size_t>(j)]) * x[j];
    y[i] = mod1(s);
  }
  return y;
}

Point TorusAutomorphism::iterate(Point x, int n) const {
  for (int k = 0; k < n; ++k) x = step(x);
  return x;
}

std::array<Rational, kMaxDim> TorusAutomorphism::step_exact(
    const std::array<Rational, kMaxDim>& x) const {
  std::array<Rational, kMaxDim> y{};
  for (int i = 0; i < dim_; ++i) {
    Rational s(0);
    for (int j = 0; j < dim_; ++j) s = s + x[static_cast<size_t>(j)] * entry(i, j);
    y[static_cast<size_t>(i)] = s.mod1();
  }
  return y;
}

TorusAutomorphism TorusAutomorphism::cat_map() { return TorusAutomorphism({{2, 1}, {1, 1}}); }

TorusAutomorphism TorusAutomorphism::example_3d() {
  return TorusAutomorphism({{2, 0, 1}, {0, 1, 1}, {1, 1, 2}});
}

double torus_distance(const Point& x, const Point& y) {
  if (x.dim != y.dim) throw input_error("torus_distance: dimension mismatch");
  // coordinates lie in [0,1), so shifts in {-1,0,1} suffice per axis
  double s = 0.0;
  for (int i = 0; i < x.dim; ++i) {
    double d = std::abs(x[i] - y[i]);
    d = std::min(d, 1.0 - d);
    s += d * d;
  }
  return std::sqrt(s);
}

double doubling_step(double x) { return mod1(2.0 * x); }

Point random_torus_point(int dim, uint64_t seed) {
  Rng rng(seed);
  Point p;
  p.dim = dim;
  for (int i = 0; i < dim; ++i) p[i] = rng.next_double();
  return p;
}

Trajectory generate_trajectory(const TorusAutomorphism& sys, const Point& x0, size_t n,
                               uint64_t seed) {
  if (n == 0) throw input_error("generate_trajectory: n must be >= 1");
  if (x0.dim != sys.dim()) throw input_error("generate_trajectory: dimension mismatch");
  Trajectory t;
  t.system_id = "torus" + std::to_string(sys.dim()) + "d";
  t.seed = seed;
  t.states.reserve(n);
  t.states.push_back(x0);
  for (size_t i = 1; i < n; ++i) t.states.push_back(sys.step(t.states.back()));
  return t;
}

DoublingOrbit::DoublingOrbit(uint64_t seed) : seed_(seed) {}

uint64_t DoublingOrbit::word(size_t k) const {
  uint64_t s = child_seed(seed_, k);
  return splitmix64(s);
}

double DoublingOrbit::state(size_t i) const {
  const size_t w = i / 64;
  const unsigned off = static_cast<unsigned>(i % 64);
  uint64_t bits = word(w) << off;
  if (off != 0) bits |= word(w + 1) >> (64 - off);
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

std::vector<double> DoublingOrbit::states(size_t n) const {
  std::vector<double> out(n);
  uint64_t cur = word(0), nxt = word(1);
  size_t w = 0;
  for (size_t i = 0; i < n; ++i) {
    const size_t wi = i / 64;
    if (wi != w) {
      w = wi;
      cur = nxt;
      nxt = word(w + 1);
    }
    const unsigned off = static_cast<unsigned>(i % 64);
    uint64_t bits = cur << off;
    if (off != 0) bits |= nxt >> (64 - off);
    out[i] = static_cast<double>(bits >> 11) * 0x1.0p-53;
  }
  return out;
}

Trajectory generate_doubling_trajectory(uint64_t seed, size_t n) {
  if (n == 0) throw input_error("generate_doubling_trajectory: n must be >= 1");
  DoublingOrbit orbit(seed);
  Trajectory t;
  t.system_id = "doubling";
  t.seed = seed;
  t.states.reserve(n);
  for (double v : orbit.states(n)) t.states.push_back(Point(v));
  return t;
}

}  // namespace gal
