#include "gal/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "gal/parallel.hpp"
#include "gal/rng.hpp"

namespace gal {

double FunctionTable::at(double x) const {
  const size_t m = values.size() - 1;
  double t = x * static_cast<double>(m);
  auto j = static_cast<size_t>(t);
  if (j >= m) return values[m];
  double frac = t - static_cast<double>(j);
  return values[j] * (1.0 - frac) + values[j + 1] * frac;
}

double FunctionTable::sup_dist(const FunctionTable& o) const {
  // both tables are piecewise linear on the same mesh, so the sup over [0,1]
  // is attained at a node
  double mx = 0.0;
  for (size_t i = 0; i < values.size(); ++i) mx = std::max(mx, std::abs(values[i] - o.values[i]));
  return mx;
}

SupNet build_sup_net(const HolderBall& ball, double epsilon, size_t materialize_limit) {
  if (ball.d != 1) throw input_error("build_sup_net: net construction supports d = 1");
  if (ball.k != 0) throw input_error("build_sup_net: value-chain nets require k = 0");
  if (!(epsilon > 0.0)) throw input_error("build_sup_net: epsilon must be positive");
  if (!(ball.alpha > 0.0 && ball.alpha <= 1.0)) throw input_error("build_sup_net: bad alpha");
  SupNet net;
  net.epsilon = epsilon;
  net.radius = ball.radius;
  net.alpha = ball.alpha;
  if (epsilon >= ball.radius) {
    // the zero function alone covers the ball
    net.nodes = 2;
    net.levels = 1;
    net.quantum = 2.0 * ball.radius;
    net.pitch = 1.0;
    net.log_cardinality = 0.0;
    net.materialized = true;
    net.members.push_back(FunctionTable{{0.0, 0.0}});
    return net;
  }
  // quantum delta and mesh pitch h with r h^alpha <= delta; chain steps are
  // one quantum, which keeps node errors below delta/2 under recursive
  // rounding, and the piecewise-linear interpolant within 2.5 delta
  const double delta = 0.4 * epsilon;
  const double h = std::pow(delta / ball.radius, 1.0 / ball.alpha);
  int m = static_cast<int>(std::ceil(1.0 / h));
  net.pitch = 1.0 / m;
  net.quantum = delta;
  net.nodes = m + 1;
  net.levels = 2 * static_cast<int>(std::floor(ball.radius / delta)) + 1;

  // chain counting: value levels -delta*(L-1)/2 .. +delta*(L-1)/2
  std::vector<long double> count(static_cast<size_t>(net.levels), 1.0L);
  for (int step = 0; step < m; ++step) {
    std::vector<long double> next(static_cast<size_t>(net.levels), 0.0L);
    for (int v = 0; v < net.levels; ++v) {
      for (int dv = -1; dv <= 1; ++dv) {
        int w = v + dv;
        if (w < 0 || w >= net.levels) continue;
        next[static_cast<size_t>(w)] += count[static_cast<size_t>(v)];
      }
    }
    count.swap(next);
  }
  long double total = 0.0L;
  for (long double c : count) total += c;
  net.log_cardinality = static_cast<double>(std::log(total));

  if (total <= static_cast<long double>(materialize_limit)) {
    net.materialized = true;
    const double lo = -delta * (net.levels - 1) / 2.0;
    std::vector<double> chain(static_cast<size_t>(net.nodes));
    std::function<void(int, int)> rec = [&](int node, int level) {
      chain[static_cast<size_t>(node)] = lo + delta * level;
      if (node == m) {
        net.members.push_back(FunctionTable{chain});
        return;
      }
      for (int dv = -1; dv <= 1; ++dv) {
        int w = level + dv;
        if (w < 0 || w >= net.levels) continue;
        rec(node + 1, w);
      }
    };
    for (int v = 0; v < net.levels; ++v) rec(0, v);
  }
  return net;
}

FunctionTable SupNet::project(const Fn1D& f) const {
  FunctionTable out;
  out.values.resize(static_cast<size_t>(nodes));
  if (levels == 1) {
    std::fill(out.values.begin(), out.values.end(), 0.0);
    return out;
  }
  const double lo = -quantum * (levels - 1) / 2.0;
  auto clamp_level = [&](double level) {
    long l = std::lround(level);
    if (l < 0) l = 0;
    if (l >= levels) l = levels - 1;
    return static_cast<int>(l);
  };
  int level = clamp_level((f(0.0) - lo) / quantum);
  out.values[0] = lo + quantum * level;
  for (int j = 1; j < nodes; ++j) {
    double x = static_cast<double>(j) * pitch;
    if (x > 1.0) x = 1.0;
    double want = (f(x) - out.values[static_cast<size_t>(j - 1)]) / quantum;
    int dv = want > 0.5 ? 1 : (want < -0.5 ? -1 : 0);
    int next = clamp_level(level + dv);
    if (std::abs(next - level) > 1) next = level;  // clipped move stays adjacent
    level = next;
    out.values[static_cast<size_t>(j)] = lo + quantum * level;
  }
  return out;
}

C1Net build_c1_net(const HolderBall& ball, double epsilon) {
  if (ball.d != 1) throw input_error("build_c1_net: d must be 1");
  if (ball.k != 1) throw input_error("build_c1_net: expects a C^{1,alpha} ball");
  C1Net net;
  net.epsilon = epsilon;
  // derivative ball is a C^{0,alpha} ball of the same radius
  HolderBall dball{1, 0, ball.alpha, ball.radius};
  net.derivative_net = build_sup_net(dball, epsilon / 8.0);
  const double step = epsilon / 2.0;
  for (double c = -ball.radius + epsilon / 4.0; c <= ball.radius; c += step)
    net.constants.push_back(c);
  if (net.constants.empty()) net.constants.push_back(0.0);
  net.log_cardinality =
      net.derivative_net.log_cardinality + std::log(static_cast<double>(net.constants.size()));
  return net;
}

double C1Net::Member::value(double x) const {
  // trapezoid integral of the piecewise-linear derivative table, exact
  const size_t m = derivative.values.size() - 1;
  double t = x * static_cast<double>(m);
  auto full = static_cast<size_t>(t);
  if (full > m) full = m;
  double acc = 0.0;
  const double h = 1.0 / static_cast<double>(m);
  for (size_t j = 0; j < full; ++j)
    acc += 0.5 * (derivative.values[j] + derivative.values[j + 1]) * h;
  double frac = t - static_cast<double>(full);
  if (full < m && frac > 0.0) {
    double va = derivative.values[full];
    double vb = derivative.values[full] * (1.0 - frac) + derivative.values[full + 1] * frac;
    acc += 0.5 * (va + vb) * frac * h;
  }
  return constant + acc;
}

C1Net::Member C1Net::project(const Fn1D& f, const Fn1D& df) const {
  Member m;
  m.derivative = derivative_net.project(df);
  double f0 = f(0.0);
  double best = constants.front();
  for (double c : constants)
    if (std::abs(c - f0) < std::abs(best - f0)) best = c;
  m.constant = best;
  return m;
}

FunctionTable random_holder_member(const HolderBall& ball, int nodes, uint64_t seed) {
  // random walk with per-step increments capped by the Hölder modulus and
  // values reflected into [-radius, radius]
  Rng rng(seed);
  FunctionTable f;
  f.values.resize(static_cast<size_t>(nodes));
  const double h = 1.0 / static_cast<double>(nodes - 1);
  const double max_step = ball.radius * std::pow(h, ball.alpha);
  double v = (2.0 * rng.next_double() - 1.0) * ball.radius * 0.9;
  f.values[0] = v;
  for (int j = 1; j < nodes; ++j) {
    v += (2.0 * rng.next_double() - 1.0) * max_step;
    if (v > ball.radius) v = 2.0 * ball.radius - v;
    if (v < -ball.radius) v = -2.0 * ball.radius - v;
    f.values[static_cast<size_t>(j)] = v;
  }
  return f;
}

CoveringReport verify_sup_net(const HolderBall& ball, double epsilon, size_t probes,
                              uint64_t seed, double gamma_for_bound) {
  SupNet net = build_sup_net(ball, epsilon);
  CoveringReport rep;
  rep.epsilon = epsilon;
  rep.log_net_size = net.log_cardinality;
  rep.log_bound =
      gamma_for_bound * std::pow(epsilon, -static_cast<double>(ball.d) / (ball.alpha + ball.k));
  rep.probes = probes;
  // probe mesh finer than the net mesh so interpolation error is exercised
  const int probe_nodes = (net.nodes - 1) * 4 + 1;
  std::vector<uint8_t> covered(probes, 0);
  par::for_each(probes, [&](size_t p) {
    FunctionTable f = random_holder_member(ball, probe_nodes, child_seed(seed, p));
    Fn1D fn = [&](double x) { return f.at(x); };
    if (net.materialized) {
      // exhaustive nearest-member search
      double best = 1e300;
      for (const auto& member : net.members) {
        double d = 0.0;
        for (int j = 0; j < probe_nodes && d < best; ++j) {
          double x = static_cast<double>(j) / (probe_nodes - 1);
          d = std::max(d, std::abs(f.at(x) - member.at(x)));
        }
        best = std::min(best, d);
        if (best <= epsilon * 0.5) break;
      }
      covered[p] = best <= epsilon ? 1 : 0;
    } else {
      FunctionTable member = net.project(fn);
      double d = 0.0;
      for (int j = 0; j < probe_nodes; ++j) {
        double x = static_cast<double>(j) / (probe_nodes - 1);
        d = std::max(d, std::abs(f.at(x) - member.at(x)));
      }
      covered[p] = d <= epsilon ? 1 : 0;
    }
  });
  size_t hits = 0;
  for (auto c : covered) hits += c;
  rep.verified_fraction = static_cast<double>(hits) / static_cast<double>(probes);
  return rep;
}

CoveringReport verify_c1_net(const HolderBall& ball, double epsilon, size_t probes,
                             uint64_t seed, double gamma_for_bound) {
  C1Net net = build_c1_net(ball, epsilon);
  CoveringReport rep;
  rep.epsilon = epsilon;
  rep.log_net_size = net.log_cardinality;
  rep.log_bound =
      gamma_for_bound * std::pow(epsilon, -static_cast<double>(ball.d) / (ball.alpha + ball.k));
  rep.probes = probes;
  HolderBall dball{1, 0, ball.alpha, ball.radius};
  const int probe_nodes = 513;
  std::vector<uint8_t> covered(probes, 0);
  par::for_each(probes, [&](size_t p) {
    // build F with derivative in the smaller ball and F(0) in range; scale
    // the derivative so that sup |F| stays within the C^{1,alpha} budget
    FunctionTable df = random_holder_member(dball, probe_nodes, child_seed(seed, p));
    Rng rng(child_seed(seed ^ 0x31, p));
    double f0 = (2.0 * rng.next_double() - 1.0) * 0.5 * ball.radius;
    C1Net::Member probe;
    probe.constant = f0;
    probe.derivative = df;
    Fn1D f = [&](double x) { return probe.value(x); };
    Fn1D dfn = [&](double x) { return df.at(x); };
    C1Net::Member member = net.project(f, dfn);
    double dist = 0.0;
    for (int j = 0; j < probe_nodes; ++j) {
      double x = static_cast<double>(j) / (probe_nodes - 1);
      dist = std::max(dist, std::abs(f(x) - member.value(x)));
      dist = std::max(dist, std::abs(dfn(x) - member.derivative.at(x)));
    }
    covered[p] = dist <= epsilon ? 1 : 0;
  });
  size_t hits = 0;
  for (auto c : covered) hits += c;
  rep.verified_fraction = static_cast<double>(hits) / static_cast<double>(probes);
  return rep;
}

// ---------------------------------------------------------------------------
// finite metric spaces

FiniteMetricSpace random_finite_space(size_t points, int dim, uint64_t seed) {
  Rng rng(seed);
  std::vector<Point> pts(points);
  for (auto& p : pts) {
    p.dim = dim;
    for (int ax = 0; ax < dim; ++ax) p[ax] = rng.next_double();
  }
  FiniteMetricSpace sp;
  sp.dist.assign(points, std::vector<double>(points, 0.0));
  for (size_t i = 0; i < points; ++i)
    for (size_t j = 0; j < points; ++j) {
      double s = 0.0;
      for (int ax = 0; ax < dim; ++ax) s += (pts[i][ax] - pts[j][ax]) * (pts[i][ax] - pts[j][ax]);
      sp.dist[i][j] = std::sqrt(s);
    }
  return sp;
}

namespace {
// does some subset of `candidates` of size k cover all of `targets`?
bool exists_cover(const FiniteMetricSpace& sp, const std::vector<int>& targets,
                  const std::vector<int>& candidates, double eps, size_t k) {
  // coverage masks per candidate center
  std::vector<uint32_t> masks;
  for (int c : candidates) {
    uint32_t m = 0;
    for (size_t t = 0; t < targets.size(); ++t)
      if (sp.dist[static_cast<size_t>(c)][static_cast<size_t>(targets[t])] <= eps)
        m |= (1u << t);
    masks.push_back(m);
  }
  const uint32_t full = targets.size() == 32 ? 0xffffffffu : ((1u << targets.size()) - 1u);
  std::function<bool(size_t, uint32_t, size_t)> rec = [&](size_t idx, uint32_t acc,
                                                          size_t left) -> bool {
    if (acc == full) return true;
    if (left == 0 || idx >= masks.size()) return false;
    return rec(idx + 1, acc | masks[idx], left - 1) || rec(idx + 1, acc, left);
  };
  return rec(0, 0u, k);
}
}  // namespace

int exact_covering_number(const FiniteMetricSpace& space, const std::vector<int>& subset,
                          double epsilon) {
  if (subset.empty()) throw input_error("exact_covering_number: empty subset");
  if (subset.size() > 20) throw input_error("exact_covering_number: instance too large");
  for (size_t k = 1; k <= subset.size(); ++k)
    if (exists_cover(space, subset, subset, epsilon, k)) return static_cast<int>(k);
  return static_cast<int>(subset.size());
}

int greedy_covering_number(const FiniteMetricSpace& space, const std::vector<int>& subset,
                           double epsilon) {
  std::vector<int> uncovered = subset;
  int centers = 0;
  while (!uncovered.empty()) {
    size_t best_cover = 0;
    int best_center = uncovered.front();
    for (int c : subset) {
      size_t cov = 0;
      for (int u : uncovered)
        if (space.dist[static_cast<size_t>(c)][static_cast<size_t>(u)] <= epsilon) ++cov;
      if (cov > best_cover) {
        best_cover = cov;
        best_center = c;
      }
    }
    std::vector<int> rest;
    for (int u : uncovered)
      if (space.dist[static_cast<size_t>(best_center)][static_cast<size_t>(u)] > epsilon)
        rest.push_back(u);
    uncovered.swap(rest);
    ++centers;
  }
  return centers;
}

SubsetInequalityReport covering_subset_inequality_check(int spaces, size_t max_points,
                                                        const std::vector<double>& epsilons,
                                                        uint64_t seed) {
  if (max_points > 20) throw input_error("covering_subset_inequality_check: too many points");
  SubsetInequalityReport rep;
  rep.spaces = spaces;
  Rng rng(seed);
  for (int s = 0; s < spaces; ++s) {
    size_t npts = 4 + rng.next_below(max_points - 3);
    FiniteMetricSpace sp = random_finite_space(npts, 2, rng.next_u64());
    std::vector<int> all(npts);
    for (size_t i = 0; i < npts; ++i) all[i] = static_cast<int>(i);
    // random nonempty subset
    std::vector<int> subset;
    for (size_t i = 0; i < npts; ++i)
      if (rng.next_double() < 0.6) subset.push_back(static_cast<int>(i));
    if (subset.empty()) subset.push_back(static_cast<int>(rng.next_below(npts)));
    for (double eps : epsilons) {
      int lhs = exact_covering_number(sp, subset, eps);
      int rhs = exact_covering_number(sp, all, eps / 2.0);
      ++rep.comparisons;
      if (lhs > rhs) ++rep.violations;
    }
  }
  rep.pass = rep.violations == 0;
  return rep;
}

// ---------------------------------------------------------------------------
// Dudley integral and rate constants

namespace {
// 16-point Gauss-Legendre nodes/weights on [-1,1]
const double kGx[8] = {0.0950125098376374, 0.2816035507792589, 0.4580167776572274,
                       0.6178762444026438, 0.7554044083550030, 0.8656312023878318,
                       0.9445750230732326, 0.9894009349916499};
const double kGw[8] = {0.1894506104550685, 0.1826034150449236, 0.1691565193950025,
                       0.1495959888165767, 0.1246289712555339, 0.0951585116824928,
                       0.0622535239386479, 0.0271524594117541};

double gauss16(const std::function<double(double)>& f, double a, double b) {
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double s = 0.0;
  for (int i = 0; i < 8; ++i)
    s += kGw[i] * (f(mid + half * kGx[i]) + f(mid - half * kGx[i]));
  return s * half;
}
}  // namespace

DudleyResult dudley_integral(double gamma, double s, double delta) {
  if (gamma < 0.0) throw input_error("dudley_integral: gamma must be >= 0");
  if (delta < 0.0) throw input_error("dudley_integral: delta must be >= 0");
  if (s >= 2.0)
    throw input_error(
        "dudley_integral: entropy exponent >= 2, the integral diverges (high-regularity "
        "condition violated)");
  DudleyResult res;
  res.closed_form = std::sqrt(gamma) * std::pow(delta, 1.0 - 0.5 * s) / (1.0 - 0.5 * s);
  if (gamma == 0.0 || delta == 0.0) {
    res.quadrature = 0.0;
    return res;
  }
  // dyadic panels toward the endpoint singularity; the remainder below the
  // last panel is bounded by the local antiderivative
  auto integrand = [&](double e) { return std::sqrt(gamma * std::pow(e, -s)); };
  double total = 0.0;
  double hi = delta;
  for (int level = 0; level < 2000; ++level) {
    double lo = hi * 0.5;
    total += gauss16(integrand, lo, hi);
    hi = lo;
    double remainder = std::sqrt(gamma) * std::pow(hi, 1.0 - 0.5 * s) / (1.0 - 0.5 * s);
    if (remainder < 1e-13 * (total + 1e-300)) {
      total += remainder;
      break;
    }
  }
  res.quadrature = total;
  return res;
}

RateConstants rate_constants(const ModelConfig& cfg, double c_sys, double l_obs,
                             double gamma_upper, double delta_rho) {
  cfg.validate();
  if (!cfg.high_regularity())
    throw config_error(
        "rate_constants: regularity too low, k must exceed 2 - alpha + d/2 for the entropy "
        "integral to converge");
  if (!(c_sys > 0.0) || !(l_obs > 0.0) || !(gamma_upper > 0.0) || !(delta_rho > 0.0))
    throw input_error("rate_constants: constants must be positive");
  RateConstants rc;
  const double d = static_cast<double>(cfg.d);
  const double denom = cfg.alpha + static_cast<double>(cfg.k) - 2.0;
  rc.entropy_exponent = d / denom;
  const double rho_scale =
      std::sqrt(c_sys) * l_obs * (cfg.C1 / (cfg.B * cfg.B) + std::sqrt(d) / cfg.B);
  rc.gamma1_hat = gamma_upper * std::pow(2.0 * cfg.C2 * rho_scale, rc.entropy_exponent);
  const double s = rc.entropy_exponent;
  rc.gamma2_hat = 24.0 * std::sqrt(rc.gamma1_hat) * std::pow(delta_rho, 1.0 - 0.5 * s) /
                  (1.0 - 0.5 * s);
  rc.gamma3_hat =
      cfg.B * cfg.B / (2.0 * c_sys * l_obs * l_obs * cfg.C1 * cfg.C1);
  rc.tau_threshold_mu = 1.0 / std::sqrt(rc.gamma3_hat);
  rc.tau_threshold_lambda = std::sqrt(2.0) * std::abs(std::log(cfg.B));
  return rc;
}

double discriminator_rho_diameter(const ModelConfig& cfg, double c_sys, double l_obs,
                                  int pairs, uint64_t seed) {
  const double rho_scale = std::sqrt(c_sys) * l_obs *
                           (cfg.C1 / (cfg.B * cfg.B) + std::sqrt(static_cast<double>(cfg.d)) /
                                                           cfg.B);
  double diam = 0.0;
  Rng rng(seed);
  const int grid = cfg.d == 1 ? 512 : 48;
  for (int p = 0; p < pairs; ++p) {
    auto a = DiscriminatorParams::random(cfg, rng.next_u64(), 2.0 + (p % 3));
    auto b = DiscriminatorParams::random(cfg, rng.next_u64(), 2.0 + ((p + 1) % 3));
    double c1 = 0.0;
    auto probe = [&](const Point& y) {
      double ga[2], gb[2];
      c1 = std::max(c1, std::abs(a.value(y) - b.value(y)));
      a.gradient_y(y, ga);
      b.gradient_y(y, gb);
      for (int ax = 0; ax < cfg.d; ++ax) c1 = std::max(c1, std::abs(ga[ax] - gb[ax]));
    };
    if (cfg.d == 1) {
      for (int i = 0; i <= grid; ++i) probe(Point(static_cast<double>(i) / grid));
    } else {
      for (int i = 0; i <= grid; ++i)
        for (int j = 0; j <= grid; ++j)
          probe(Point(static_cast<double>(i) / grid, static_cast<double>(j) / grid));
    }
    diam = std::max(diam, c1);
  }
  return rho_scale * diam;
}

void save_covering_reports(const std::vector<CoveringReport>& reports, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw input_error("cannot open for writing: " + path);
  out << "epsilon,log_net_size,log_bound,verified_fraction\n";
  char buf[160];
  for (const auto& r : reports) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", r.epsilon, r.log_net_size,
                  r.log_bound, r.verified_fraction);
    out << buf;
  }
}

}  // namespace gal
