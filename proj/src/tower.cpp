#include "gal/tower.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "gal/dynamics.hpp"
#include "gal/parallel.hpp"
#include "gal/rng.hpp"

namespace gal {

void TowerSpec::validate() const {
  if (cells.empty()) throw input_error("TowerSpec: no cells");
  double mass = truncation_tail_mass;
  for (const auto& c : cells) {
    if (c.return_time < 1) throw input_error("TowerSpec: return time must be >= 1");
    if (c.weight < 0.0) throw input_error("TowerSpec: negative weight");
    mass += c.weight;
  }
  if (std::abs(mass - 1.0) > 1e-12)
    throw input_error("TowerSpec: weights plus truncation mass must sum to 1");
}

const TowerCell* TowerSpec::cell_of_point(double x) const {
  for (const auto& c : cells)
    if (c.has_interval && x >= c.a && x < c.b) return &c;
  return nullptr;
}

const TowerCell& TowerSpec::cell_by_index(int idx) const {
  for (const auto& c : cells)
    if (c.index == idx) return c;
  throw input_error("TowerSpec: no cell with index " + std::to_string(idx));
}

TowerSpec doubling_tower(int n_cells) {
  // 62 keeps every dyadic weight exactly representable on int64
  if (n_cells < 2 || n_cells > 62) throw input_error("doubling_tower: n_cells must be 2..62");
  TowerSpec spec;
  spec.has_exact = true;
  for (int i = 1; i <= n_cells; ++i) {
    TowerCell c;
    c.index = i;
    c.return_time = i + 1;
    c.weight = std::ldexp(1.0, -i);  // 2^-i
    c.a = std::ldexp(1.0, -i);
    c.b = std::ldexp(1.0, 1 - i);
    c.has_interval = true;
    spec.cells.push_back(c);
    spec.exact_weights.push_back(Rational(1, int64_t(1) << i));
  }
  spec.truncation_tail_mass = std::ldexp(1.0, -n_cells);
  spec.exact_truncation = Rational(1, int64_t(1) << n_cells);
  return spec;
}

Map1D make_return_map(const TowerSpec& spec, const Map1D& underlying_map) {
  return [&spec, underlying_map](double x) {
    const TowerCell* c = spec.cell_of_point(x);
    if (c == nullptr) throw input_error("return map: point not in any base cell");
    double y = x;
    for (int k = 0; k < c->return_time; ++k) y = underlying_map(y);
    return y;
  };
}

TowerState make_state(const TowerSpec& spec, double x, int level) {
  const TowerCell* c = spec.cell_of_point(x);
  if (c == nullptr) throw input_error("make_state: point not in any base cell");
  if (level < 0 || level >= c->return_time)
    throw input_error("make_state: level outside {0,...,R-1}");
  TowerState s;
  s.base_point = x;
  s.cell = c->index;
  s.level = level;
  return s;
}

TowerState tower_step(const TowerSpec& spec, const TowerState& s, const Map1D& return_map) {
  const TowerCell& c = spec.cell_by_index(s.cell);
  if (s.level < 0 || s.level >= c.return_time) throw input_error("tower_step: invalid state");
  if (c.has_interval && !(s.base_point >= c.a && s.base_point < c.b))
    throw input_error("tower_step: base point outside its cell");
  TowerState out = s;
  if (s.level + 1 < c.return_time) {
    out.level = s.level + 1;
    return out;
  }
  double returned = return_map(s.base_point);
  const TowerCell* target = spec.cell_of_point(returned);
  if (target == nullptr)
    throw input_error("tower_step: return map left the base partition");
  out.base_point = returned;
  out.cell = target->index;
  out.level = 0;
  return out;
}

double project(const TowerSpec& spec, const TowerState& s, const Map1D& underlying_map) {
  (void)spec;
  double y = s.base_point;
  for (int l = 0; l < s.level; ++l) y = underlying_map(y);
  return y;
}

SemiconjugacyReport check_semiconjugacy(const TowerSpec& spec, const Map1D& underlying_map,
                                        const Map1D& return_map, size_t samples, uint64_t seed) {
  if (samples < 1) throw input_error("check_semiconjugacy: samples must be >= 1");
  const size_t block = 1024;
  const size_t nb = par::num_blocks(samples, block);
  std::vector<double> partial(nb, 0.0);
  par::for_each(nb, [&](size_t b) {
    Rng rng(child_seed(seed, b));
    const size_t lo = b * block;
    const size_t hi = std::min(samples, lo + block);
    double mx = 0.0;
    for (size_t i = lo; i < hi; ++i) {
      // draw a cell by weight, a point uniformly in it, a level uniformly
      double u = rng.next_double();
      const TowerCell* cell = &spec.cells.back();
      double acc = 0.0;
      for (const auto& c : spec.cells) {
        acc += c.weight;
        if (u < acc) {
          cell = &c;
          break;
        }
      }
      double x = cell->has_interval ? cell->a + rng.next_double() * (cell->b - cell->a) : 0.0;
      TowerState s;
      s.base_point = x;
      s.cell = cell->index;
      s.level = static_cast<int>(rng.next_below(static_cast<uint64_t>(cell->return_time)));
      double lhs = underlying_map(project(spec, s, underlying_map));
      TowerState s2 = tower_step(spec, s, return_map);
      double rhs = project(spec, s2, underlying_map);
      mx = std::max(mx, std::abs(lhs - rhs));
    }
    partial[b] = mx;
  });
  SemiconjugacyReport rep;
  rep.samples = samples;
  for (double m : partial) rep.max_discrepancy = std::max(rep.max_discrepancy, m);
  return rep;
}

double tail_distribution(const TowerSpec& spec, int n) {
  if (n < 0) throw input_error("tail_distribution: n must be >= 0");
  double s = spec.truncation_tail_mass;
  for (const auto& c : spec.cells)
    if (c.return_time > n) s += c.weight;
  return s;
}

Rational tail_distribution_exact(const TowerSpec& spec, int n) {
  if (!spec.has_exact) throw input_error("tail_distribution_exact: spec has no rational weights");
  Rational s = spec.exact_truncation;
  for (size_t i = 0; i < spec.cells.size(); ++i)
    if (spec.cells[i].return_time > n) s = s + spec.exact_weights[i];
  return s;
}

TailFit fit_tail_rate(const TowerSpec& spec, int n_max) {
  if (n_max < 2) throw input_error("fit_tail_rate: n_max must be >= 2");
  std::vector<double> xs, ys;
  for (int n = 1; n <= n_max; ++n) {
    double t = tail_distribution(spec, n);
    if (t <= 0.0) break;  // fit over the positive prefix only
    xs.push_back(static_cast<double>(n));
    ys.push_back(std::log(t));
  }
  if (xs.size() < 2) throw input_error("fit_tail_rate: tail vanishes before two points");
  double mx = 0, my = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(xs.size());
  my /= static_cast<double>(xs.size());
  double sxy = 0, sxx = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  double slope = sxy / sxx;
  double intercept = my - slope * mx;
  TailFit fit;
  fit.tau = std::exp(slope);
  fit.c = std::exp(intercept);
  fit.exponential = fit.tau < 1.0;
  fit.fitted_prefix = static_cast<int>(xs.size());
  return fit;
}

bool is_aperiodic(const TowerSpec& spec) {
  if (spec.cells.empty()) throw input_error("is_aperiodic: no cells");
  int g = 0;
  for (const auto& c : spec.cells) g = std::gcd(g, c.return_time);
  return g == 1;
}

InvarianceReport lift_and_push_measure(const TowerSpec& spec, const Map1D& underlying_map,
                                       size_t samples, uint64_t seed, int bins,
                                       bool weight_by_return_time) {
  spec.validate();
  // normalized tower measure: cell weight x uniform over levels
  double W = 0.0;
  for (const auto& c : spec.cells)
    W += c.weight * (weight_by_return_time ? c.return_time : 1);
  if (!(W > 0.0) || !std::isfinite(W))
    throw config_error("lift_and_push_measure: level-weighted mass does not converge");
  if (spec.truncation_tail_mass > 0.0) {
    double max_r = 0.0;
    for (const auto& c : spec.cells) max_r = std::max(max_r, static_cast<double>(c.return_time));
    if (spec.truncation_tail_mass * (max_r + 1.0) > 0.01 * W)
      throw config_error("lift_and_push_measure: truncation budget too coarse for the lift");
  }
  std::vector<double> cdf;
  std::vector<const TowerCell*> order;
  double acc = 0.0;
  for (const auto& c : spec.cells) {
    acc += c.weight * (weight_by_return_time ? c.return_time : 1) / W;
    cdf.push_back(acc);
    order.push_back(&c);
  }

  auto draw_projected = [&](Rng& rng, bool push) {
    double u = rng.next_double() * cdf.back();
    size_t k = static_cast<size_t>(std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    if (k >= order.size()) k = order.size() - 1;
    const TowerCell* c = order[k];
    double x = c->a + rng.next_double() * (c->b - c->a);
    int level = static_cast<int>(rng.next_below(static_cast<uint64_t>(c->return_time)));
    double y = x;
    for (int l = 0; l < level; ++l) y = underlying_map(y);
    if (push) y = underlying_map(y);
    return y;
  };

  auto histo = [&](bool push) {
    const size_t block = 4096;
    const size_t nb = par::num_blocks(samples, block);
    std::vector<std::vector<uint64_t>> partial(nb);
    par::for_each(nb, [&](size_t b) {
      Rng rng(child_seed(seed ^ (push ? 0x50ULL : 0x0ULL), b));
      const size_t lo = b * block;
      const size_t hi = std::min(samples, lo + block);
      std::vector<uint64_t> local(static_cast<size_t>(bins), 0);
      for (size_t i = lo; i < hi; ++i) {
        double y = draw_projected(rng, push);
        auto idx = static_cast<long long>(y * bins);
        if (idx < 0) idx = 0;
        if (idx >= bins) idx = bins - 1;
        ++local[static_cast<size_t>(idx)];
      }
      partial[b] = std::move(local);
    });
    std::vector<uint64_t> counts(static_cast<size_t>(bins), 0);
    for (auto& p : partial)
      for (size_t k = 0; k < counts.size(); ++k) counts[k] += p[k];
    return counts;
  };

  auto before = histo(false);
  auto after = histo(true);
  double tvd = 0.0;
  for (size_t k = 0; k < before.size(); ++k)
    tvd += std::abs(static_cast<double>(before[k]) - static_cast<double>(after[k]));
  tvd /= 2.0 * static_cast<double>(samples);
  InvarianceReport rep;
  rep.tv_distance = tvd;
  rep.samples = samples;
  rep.bins = bins;
  return rep;
}

std::vector<int> level_cardinalities(const TowerSpec& spec) {
  int max_r = 0;
  for (const auto& c : spec.cells) max_r = std::max(max_r, c.return_time);
  std::vector<int> counts(static_cast<size_t>(max_r), 0);
  for (const auto& c : spec.cells)
    for (int l = 0; l < c.return_time; ++l) ++counts[static_cast<size_t>(l)];
  return counts;
}

TowerSpec load_tower_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open: " + path);
  TowerSpec spec;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream is(line);
    std::string kw;
    is >> kw;
    if (kw == "cell") {
      TowerCell c;
      if (!(is >> c.index >> c.return_time >> c.weight))
        throw input_error("tower spec: bad cell line: " + line);
      if (is >> c.a >> c.b) c.has_interval = true;
      spec.cells.push_back(c);
    } else if (kw == "truncation") {
      is >> spec.truncation_tail_mass;
    } else {
      throw input_error("tower spec: unknown keyword: " + kw);
    }
  }
  spec.validate();
  return spec;
}

void save_tower_spec(const TowerSpec& spec, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw input_error("cannot open for writing: " + path);
  char buf[128];
  for (const auto& c : spec.cells) {
    if (c.has_interval)
      std::snprintf(buf, sizeof buf, "cell %d %d %.17g %.17g %.17g", c.index, c.return_time,
                    c.weight, c.a, c.b);
    else
      std::snprintf(buf, sizeof buf, "cell %d %d %.17g", c.index, c.return_time, c.weight);
    out << buf << "\n";
  }
  if (spec.truncation_tail_mass > 0.0) {
    std::snprintf(buf, sizeof buf, "truncation %.17g", spec.truncation_tail_mass);
    out << buf << "\n";
  }
}

std::vector<CheckRow> tower_check_suite(const TowerSpec& spec, size_t samples, uint64_t seed) {
  std::vector<CheckRow> rows;
  auto add = [&](const std::string& name, double value, double threshold, bool pass) {
    rows.push_back({name, value, threshold, pass});
  };
  TailFit fit = fit_tail_rate(spec, 40);
  add("tail_tau_below_1", fit.tau, 1.0, fit.exponential);
  add("aperiodic", is_aperiodic(spec) ? 1.0 : 0.0, 1.0, is_aperiodic(spec));
  bool interval_based = true;
  for (const auto& c : spec.cells) interval_based = interval_based && c.has_interval;
  if (interval_based) {
    Map1D dbl = [](double x) { return doubling_step(x); };
    auto rep = check_semiconjugacy(spec, dbl, make_return_map(spec, dbl),
                                   std::min<size_t>(samples, 10000), seed);
    add("semiconjugacy_max_discrepancy", rep.max_discrepancy, 1e-12,
        rep.max_discrepancy <= 1e-12);
    auto inv = lift_and_push_measure(spec, dbl, samples, seed);
    add("lifted_measure_tv", inv.tv_distance, 0.01, inv.tv_distance < 0.01);
  }
  return rows;
}

void save_check_rows(const std::vector<CheckRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw input_error("cannot open for writing: " + path);
  out << "check,value,threshold,pass\n";
  char buf[64];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g", r.value);
    out << r.check << "," << buf << ",";
    std::snprintf(buf, sizeof buf, "%.17g", r.threshold);
    out << buf << "," << (r.pass ? 1 : 0) << "\n";
  }
}

}  // namespace gal
