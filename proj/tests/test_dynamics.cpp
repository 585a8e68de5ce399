#include <doctest.h>

#include <cmath>

#include "gal/dynamics.hpp"
#include "gal/measures.hpp"
#include "gal/rational.hpp"
#include "gal/rng.hpp"

using namespace gal;

TEST_SUITE_BEGIN("dynamics");

TEST_CASE("cat map fixed point and exact rational step") {
  auto cat = TorusAutomorphism::cat_map();
  Point zero(0.0, 0.0);
  CHECK(cat.step(zero) == zero);

  // exact rational oracle: A (1/2, 1/2) = (3/2, 1) mod 1 = (1/2, 0)
  std::array<Rational, kMaxDim> x{Rational(1, 2), Rational(1, 2), Rational(0)};
  auto y = cat.step_exact(x);
  CHECK(y[0] == Rational(1, 2));
  CHECK(y[1] == Rational(0));
  // double path agrees on dyadic input
  Point yd = cat.step(Point(0.5, 0.5));
  CHECK(yd[0] == doctest::Approx(0.5).epsilon(0));
  CHECK(yd[1] == doctest::Approx(0.0).epsilon(0));
}

TEST_CASE("3d example matrix is admissible with fixed point at zero") {
  auto sys = TorusAutomorphism::example_3d();
  CHECK(sys.dim() == 3);
  Point zero(0.0, 0.0, 0.0);
  CHECK(sys.step(zero) == zero);
}

TEST_CASE("matrix validation rejects bad input") {
  CHECK_THROWS_AS(TorusAutomorphism({{2, 1}, {0, 1}}), input_error);      // not symmetric
  CHECK_THROWS_AS(TorusAutomorphism({{2, 0}, {0, 2}}), input_error);      // det 4
  CHECK_THROWS_AS(TorusAutomorphism({{1, 0}, {0, 1}}), input_error);      // eigenvalues 1
  CHECK_THROWS_AS(TorusAutomorphism({{0, 1}, {1, 0}}), input_error);      // |lambda| = 1
}

TEST_CASE("torus distance with wraparound") {
  CHECK(torus_distance(Point(0.3), Point(0.3)) == 0.0);
  CHECK(torus_distance(Point(0.1), Point(0.9)) == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(torus_distance(Point(0.9, 0.9), Point(0.1, 0.1)) ==
        doctest::Approx(0.2 * std::sqrt(2.0)).epsilon(1e-12));
  CHECK_THROWS_AS(torus_distance(Point(0.1), Point(0.1, 0.2)), input_error);
}

TEST_CASE("doubling step") {
  CHECK(doubling_step(0.0) == 0.0);
  CHECK(doubling_step(0.3) == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(doubling_step(0.75) == 0.5);
}

TEST_CASE("trajectory recurrence and endpoints") {
  auto cat = TorusAutomorphism::cat_map();
  CHECK_THROWS_AS(generate_trajectory(cat, Point(0.0, 0.0), 0), input_error);
  auto t1 = generate_trajectory(cat, Point(0.25, 0.75), 1);
  CHECK(t1.states.size() == 1);

  auto fixed = generate_trajectory(cat, Point(0.0, 0.0), 5);
  for (const auto& s : fixed.states) CHECK(s == Point(0.0, 0.0));

  // exact rational iteration: (.5,.5) -> (.5,0) -> (0,.5)
  auto t3 = generate_trajectory(cat, Point(0.5, 0.5), 3);
  CHECK(t3.states[1] == Point(0.5, 0.0));
  CHECK(t3.states[2] == Point(0.0, 0.5));

  // recurrence invariant holds exactly in double arithmetic
  auto t = generate_trajectory(cat, random_torus_point(2, 99), 50);
  for (size_t i = 0; i + 1 < t.states.size(); ++i)
    CHECK(cat.step(t.states[i]) == t.states[i + 1]);
}

TEST_CASE("inverse undoes step") {
  auto cat = TorusAutomorphism::cat_map();
  auto sys3 = TorusAutomorphism::example_3d();
  Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    Point x = random_torus_point(2, rng.next_u64());
    Point y = cat.step_inverse(cat.step(x));
    for (int ax = 0; ax < 2; ++ax) CHECK(std::abs(y[ax] - x[ax]) < 1e-12);
    Point x3 = random_torus_point(3, rng.next_u64());
    Point y3 = sys3.step_inverse(sys3.step(x3));
    for (int ax = 0; ax < 3; ++ax) {
      double d = std::abs(y3[ax] - x3[ax]);
      d = std::min(d, 1.0 - d);
      CHECK(d < 1e-12);
    }
  }
}

TEST_CASE("measure preservation on an invariant lattice") {
  // evenly spaced starts form an A-invariant set mod 1, so the pushed
  // histogram equals the initial one exactly and the check is noise-free
  auto cat = TorusAutomorphism::cat_map();
  const int lattice = 1024;
  const int bins = 32;
  std::vector<uint64_t> counts(static_cast<size_t>(bins * bins), 0);
  for (int i = 0; i < lattice; ++i)
    for (int j = 0; j < lattice; ++j) {
      Point x(static_cast<double>(i) / lattice, static_cast<double>(j) / lattice);
      for (int k = 0; k < 5; ++k) x = cat.step(x);
      int bi = static_cast<int>(x[0] * bins), bj = static_cast<int>(x[1] * bins);
      ++counts[static_cast<size_t>(bi * bins + bj)];
    }
  const double expected = static_cast<double>(lattice) * lattice / (bins * bins);
  double tv = 0.0;
  for (auto c : counts) tv += std::abs(static_cast<double>(c) - expected);
  tv /= 2.0 * lattice * lattice;
  CHECK(tv < 0.01);
}

TEST_CASE("doubling map preserves Lebesgue (1d lattice histogram)") {
  const int lattice = 1 << 20;
  const int bins = 64;
  std::vector<uint64_t> counts(bins, 0);
  for (int i = 0; i < lattice; ++i) {
    double x = static_cast<double>(i) / lattice;
    for (int k = 0; k < 5; ++k) x = doubling_step(x);
    ++counts[static_cast<size_t>(x * bins)];
  }
  const double expected = static_cast<double>(lattice) / bins;
  double tv = 0.0;
  for (auto c : counts) tv += std::abs(static_cast<double>(c) - expected);
  tv /= 2.0 * lattice;
  CHECK(tv < 0.01);
}

TEST_CASE("chaotic separation at the cat map's expansion rate") {
  auto cat = TorusAutomorphism::cat_map();
  const double lam = std::log((3.0 + std::sqrt(5.0)) / 2.0);
  Rng rng(13);
  int fits = 0;
  double slope_sum = 0.0;
  for (int trial = 0; trial < 8; ++trial) {
    Point x = random_torus_point(2, rng.next_u64());
    Point y = x;
    y[0] = x[0] + 1e-9;
    double sx = 0, sy = 0, sxy = 0, sxx = 0;
    for (int k = 1; k <= 15; ++k) {
      x = cat.step(x);
      y = cat.step(y);
      double d = torus_distance(x, y);
      sx += k;
      sy += std::log(d);
      sxy += k * std::log(d);
      sxx += static_cast<double>(k) * k;
    }
    double slope = (15.0 * sxy - sx * sy) / (15.0 * sxx - sx * sx);
    slope_sum += slope;
    ++fits;
  }
  double mean_slope = slope_sum / fits;
  CHECK(mean_slope == doctest::Approx(lam).epsilon(0.10));
}

TEST_CASE("doubling orbit: bit-stream states satisfy the recurrence") {
  DoublingOrbit orbit(42);
  auto xs = orbit.states(3000);
  for (size_t i = 0; i + 1 < xs.size(); ++i) {
    double diff = std::abs(mod1(2.0 * xs[i]) - xs[i + 1]);
    CHECK(diff <= std::ldexp(1.0, -52));
  }
  // no mantissa exhaustion: the orbit never collapses to zero
  size_t zeros = 0;
  for (double x : xs)
    if (x == 0.0) ++zeros;
  CHECK(zeros == 0);
  // random access agrees with the streamed states
  CHECK(orbit.state(2345) == xs[2345]);
  // distribution stays uniform
  std::vector<double> tail(xs.begin(), xs.end());
  GridDensity h = density_from_values(tail, 64);
  GridDensity u = GridDensity::uniform(1, 64);
  CHECK(tv(h, u) < 0.05);
}

TEST_SUITE_END();
