#include "gal/concentration.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "gal/parallel.hpp"
#include "gal/rng.hpp"

namespace gal {

namespace {

double point_dist(const Point& a, const Point& b, ObsMetric metric) {
  if (metric == ObsMetric::Torus) return torus_distance(a, b);
  double s = 0.0;
  for (int i = 0; i < a.dim; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

}  // namespace

void SeparatelyLipschitzObservable::validate(int trials, int dim, uint64_t seed) const {
  const size_t n = coefficients.size();
  Rng rng(seed);
  for (int trial = 0; trial < trials; ++trial) {
    std::vector<Point> base(n);
    for (auto& p : base) {
      p.dim = dim;
      for (int ax = 0; ax < dim; ++ax) p[ax] = rng.next_double();
    }
    size_t i = rng.next_below(n);
    std::vector<Point> pert = base;
    Point& q = pert[i];
    for (int ax = 0; ax < dim; ++ax) q[ax] = rng.next_double();
    double lhs = std::abs(eval(base) - eval(pert));
    double rhs = lipschitz ? coefficients[i] * point_dist(base[i], q, metric) : coefficients[i];
    if (lhs > rhs + 1e-12)
      throw input_error("separately Lipschitz observable violates its declared coefficients");
  }
}

SeparatelyLipschitzObservable birkhoff_mean(const std::function<double(const Point&)>& f,
                                            double lip_f, size_t n, ObsMetric metric) {
  SeparatelyLipschitzObservable obs;
  obs.metric = metric;
  obs.lipschitz = true;
  obs.coefficients.assign(n, lip_f / static_cast<double>(n));
  obs.eval = [f, n](const std::vector<Point>& pts) {
    double s = 0.0;
    for (size_t i = 0; i < n; ++i) s += f(pts[i]);
    return s / static_cast<double>(n);
  };
  return obs;
}

double mcdiarmid_bound(const std::vector<double>& c) {
  double s = 0.0;
  for (double v : c) {
    if (v < 0.0) throw input_error("mcdiarmid_bound: coefficients must be nonnegative");
    s += v * v;
  }
  return 0.25 * s;
}

double chazottes_gouezel_bound(const std::vector<double>& lips, double c_sys, double l_obs) {
  if (!(c_sys > 0.0)) throw input_error("chazottes_gouezel_bound: C must be positive");
  double s = 0.0;
  for (double v : lips) {
    if (v < 0.0) throw input_error("chazottes_gouezel_bound: coefficients must be nonnegative");
    s += v * v;
  }
  return c_sys * l_obs * l_obs * s;
}

std::vector<double> default_t_grid(double sd, int points) {
  std::vector<double> grid(static_cast<size_t>(points));
  for (int i = 0; i < points; ++i)
    grid[static_cast<size_t>(i)] = sd * (0.5 + 3.5 * static_cast<double>(i) / (points - 1));
  return grid;
}

SubgaussianEstimate empirical_tail_check(const SeparatelyLipschitzObservable& obs,
                                         const ReplicaSource& source, size_t replicas,
                                         const std::vector<double>& t_grid,
                                         double variance_proxy_bound, uint64_t seed) {
  if (replicas < 100) throw input_error("empirical_tail_check: need at least 100 replicas");
  std::vector<double> values(replicas);
  par::for_each(replicas, [&](size_t r) { values[r] = obs.eval(source(child_seed(seed, r))); });
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(replicas);
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= static_cast<double>(replicas);

  SubgaussianEstimate est;
  est.variance_proxy_bound = variance_proxy_bound;
  est.empirical_mean = mean;
  est.empirical_sd = std::sqrt(var);
  est.replicas = replicas;
  const double inv_r = 1.0 / static_cast<double>(replicas);
  for (double t : t_grid) {
    TailRow row;
    row.t = t;
    size_t up = 0, down = 0;
    for (double v : values) {
      if (v - mean >= t) ++up;
      if (mean - v >= t) ++down;
    }
    row.empirical_upper = static_cast<double>(up) * inv_r;
    row.empirical_lower = static_cast<double>(down) * inv_r;
    row.bound = std::exp(-t * t / (2.0 * variance_proxy_bound));
    row.pass = row.empirical_upper <= row.bound && row.empirical_lower <= row.bound;
    est.all_pass = est.all_pass && row.pass;
    est.rows.push_back(row);
  }
  return est;
}

VarianceScaling birkhoff_variance_scaling(const ReplicaSource& source_for_n,
                                          const std::function<double(const Point&)>& f,
                                          const std::vector<size_t>& n_grid, size_t replicas,
                                          uint64_t seed) {
  if (n_grid.size() < 4) throw input_error("birkhoff_variance_scaling: need >= 4 grid points");
  if (replicas < 500) throw input_error("birkhoff_variance_scaling: need >= 500 replicas");
  VarianceScaling out;
  out.n_grid = n_grid;
  out.variances.resize(n_grid.size());
  for (size_t gi = 0; gi < n_grid.size(); ++gi) {
    const size_t n = n_grid[gi];
    std::vector<double> means(replicas);
    par::for_each(replicas, [&](size_t r) {
      auto traj = source_for_n(child_seed(seed ^ (0x51ULL * gi + 1), r));
      double s = 0.0;
      for (size_t i = 0; i < n && i < traj.size(); ++i) s += f(traj[i]);
      means[r] = s / static_cast<double>(n);
    });
    double m = 0.0;
    for (double v : means) m += v;
    m /= static_cast<double>(replicas);
    double var = 0.0;
    for (double v : means) var += (v - m) * (v - m);
    var /= static_cast<double>(replicas - 1);
    out.variances[gi] = var;
  }
  for (double v : out.variances) out.degenerate = out.degenerate || v < 1e-28;
  if (out.degenerate) return out;
  double sx = 0, sy = 0, sxy = 0, sxx = 0;
  const double m = static_cast<double>(n_grid.size());
  for (size_t i = 0; i < n_grid.size(); ++i) {
    double x = std::log(static_cast<double>(n_grid[i]));
    double y = std::log(out.variances[i]);
    sx += x;
    sy += y;
    sxy += x * y;
    sxx += x * x;
  }
  out.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  return out;
}

namespace {
ReplicaSource make_system_source(const TorusAutomorphism& sys, size_t n) {
  return [&sys, n](uint64_t rseed) {
    Point x0 = random_torus_point(sys.dim(), rseed);
    return generate_trajectory(sys, x0, n, rseed).states;
  };
}
}  // namespace

VarianceScaling birkhoff_variance_scaling_system(const TorusAutomorphism& sys,
                                                 const std::function<double(const Point&)>& f,
                                                 const std::vector<size_t>& n_grid,
                                                 size_t replicas, uint64_t seed) {
  size_t n_max = 0;
  for (size_t n : n_grid) n_max = std::max(n_max, n);
  ReplicaSource source = make_system_source(sys, n_max);
  return birkhoff_variance_scaling(source, f, n_grid, replicas, seed);
}

FittedConstant fit_cg_constant(const TorusAutomorphism& sys,
                               const std::function<double(const Point&)>& f, double lip_f,
                               size_t n, size_t replicas, uint64_t seed) {
  std::vector<double> values(replicas);
  par::for_each(replicas, [&](size_t r) {
    Point x0 = random_torus_point(sys.dim(), child_seed(seed, r));
    Point x = x0;
    double s = f(x);
    for (size_t i = 1; i < n; ++i) {
      x = sys.step(x);
      s += f(x);
    }
    values[r] = s / static_cast<double>(n);
  });
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(replicas);
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= static_cast<double>(replicas);
  double sd = std::sqrt(var);

  // minimal C with both empirical tails below exp(-t^2 n / (2C)) over the
  // grid points carrying at least 10 hits
  FittedConstant fc;
  fc.n = n;
  const double inv_r = 1.0 / static_cast<double>(replicas);
  const double min_mass = 10.0 * inv_r;
  for (double t : default_t_grid(sd)) {
    size_t up = 0, down = 0;
    for (double v : values) {
      if (v - mean >= t) ++up;
      if (mean - v >= t) ++down;
    }
    for (double p : {static_cast<double>(up) * inv_r, static_cast<double>(down) * inv_r}) {
      if (p < min_mass) continue;
      double c_need = t * t * static_cast<double>(n) / (2.0 * (-std::log(p)));
      if (c_need > fc.c_hat) fc.c_hat = c_need;
      ++fc.grid_points_used;
    }
  }
  fc.c_hat_normalized = fc.c_hat / (lip_f * lip_f);
  return fc;
}

void save_tail_rows(const std::vector<TailRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw input_error("cannot open for writing: " + path);
  out << "t,empirical_tail,bound_tail,pass\n";
  char buf[128];
  for (const auto& r : rows) {
    double emp = std::max(r.empirical_upper, r.empirical_lower);
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%d\n", r.t, emp, r.bound, r.pass ? 1 : 0);
    out << buf;
  }
}

}  // namespace gal
