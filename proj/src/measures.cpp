#include "gal/measures.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "gal/parallel.hpp"
#include "gal/rng.hpp"

namespace gal {

namespace {
size_t pow_res(int res, int dim) {
  size_t c = 1;
  for (int i = 0; i < dim; ++i) c *= static_cast<size_t>(res);
  return c;
}
}  // namespace

GridDensity::GridDensity(int dim, int resolution, Domain domain)
    : dim_(dim), res_(resolution), domain_(domain) {
  if (dim < 1 || dim > kMaxDim) throw input_error("GridDensity: dim must be 1..3");
  if (resolution < 1) throw input_error("GridDensity: resolution must be >= 1");
  values_.assign(pow_res(res_, dim_), 0.0);
  vol_ = 1.0;
  for (int i = 0; i < dim_; ++i) vol_ /= static_cast<double>(res_);
}

GridDensity GridDensity::uniform(int dim, int resolution, Domain domain) {
  GridDensity g(dim, resolution, domain);
  std::fill(g.values_.begin(), g.values_.end(), 1.0);
  return g;
}

GridDensity GridDensity::from_function(int dim, int resolution,
                                       const std::function<double(const Point&)>& f,
                                       Domain domain) {
  GridDensity g(dim, resolution, domain);
  par::for_each(g.cells(), [&](size_t i) {
    double v = f(g.center(i));
    g.values_[i] = v;
  });
  for (double v : g.values_)
    if (v < 0.0) throw input_error("GridDensity::from_function: negative value");
  g.normalize();
  return g;
}

Point GridDensity::center(size_t flat) const {
  Point p;
  p.dim = dim_;
  size_t rem = flat;
  for (int ax = dim_ - 1; ax >= 0; --ax) {
    size_t idx = rem % static_cast<size_t>(res_);
    rem /= static_cast<size_t>(res_);
    p[ax] = (static_cast<double>(idx) + 0.5) / static_cast<double>(res_);
  }
  return p;
}

size_t GridDensity::flat_index(const Point& p) const {
  if (p.dim != dim_) throw input_error("GridDensity: point dimension mismatch");
  size_t flat = 0;
  for (int ax = 0; ax < dim_; ++ax) {
    double c = p[ax];
    auto idx = static_cast<long long>(c * res_);
    if (idx < 0) idx = 0;
    if (idx >= res_) idx = res_ - 1;  // right endpoint belongs to the last cell
    flat = flat * static_cast<size_t>(res_) + static_cast<size_t>(idx);
  }
  return flat;
}

double GridDensity::at(const Point& p) const { return values_[flat_index(p)]; }

double GridDensity::mass() const {
  double s = par::block_sum(values_.size(), [&](size_t lo, size_t hi) {
    double acc = 0.0;
    for (size_t i = lo; i < hi; ++i) acc += values_[i];
    return acc;
  });
  return s * vol_;
}

double GridDensity::min_value() const {
  double m = std::numeric_limits<double>::infinity();
  for (double v : values_) m = std::min(m, v);
  return m;
}

void GridDensity::normalize() {
  double m = mass();
  if (!(m > 0.0)) throw input_error("GridDensity: cannot normalize zero mass");
  for (double& v : values_) v /= m;
}

void GridDensity::validate() const {
  for (double v : values_)
    if (!(v >= 0.0)) throw input_error("GridDensity: negative or NaN value");
  if (std::abs(mass() - 1.0) > 1e-9) throw input_error("GridDensity: mass differs from 1");
}

namespace {
void check_pair(const GridDensity& p, const GridDensity& q) {
  if (!p.same_grid(q)) throw input_error("divergence: grid mismatch");
  if (p.cells() == 0) throw input_error("divergence: empty grid");
}
}  // namespace

double kl(const GridDensity& p, const GridDensity& q) {
  check_pair(p, q);
  double bad = par::block_sum(p.cells(), [&](size_t lo, size_t hi) {
    double n = 0.0;
    for (size_t i = lo; i < hi; ++i)
      if (p.value(i) > 0.0 && q.value(i) <= 0.0) n += 1.0;
    return n;
  });
  if (bad > 0.0) return std::numeric_limits<double>::infinity();
  double s = par::block_sum(p.cells(), [&](size_t lo, size_t hi) {
    double acc = 0.0;
    for (size_t i = lo; i < hi; ++i) {
      double pi = p.value(i), qi = q.value(i);
      if (pi <= 0.0) continue;
      acc += pi * std::log(pi / qi);
    }
    return acc;
  });
  return s * p.cell_volume();
}

double jsd(const GridDensity& p, const GridDensity& q) {
  check_pair(p, q);
  double s = par::block_sum(p.cells(), [&](size_t lo, size_t hi) {
    double acc = 0.0;
    for (size_t i = lo; i < hi; ++i) {
      double pi = p.value(i), qi = q.value(i);
      double mi = 0.5 * (pi + qi);
      if (pi > 0.0) acc += 0.5 * pi * std::log(pi / mi);
      if (qi > 0.0) acc += 0.5 * qi * std::log(qi / mi);
    }
    return acc;
  });
  return s * p.cell_volume();
}

double tv(const GridDensity& p, const GridDensity& q) {
  check_pair(p, q);
  double s = par::block_sum(p.cells(), [&](size_t lo, size_t hi) {
    double acc = 0.0;
    for (size_t i = lo; i < hi; ++i) acc += std::abs(p.value(i) - q.value(i));
    return acc;
  });
  return 0.5 * s * p.cell_volume();
}

GridDensity density_from_samples(const std::vector<Point>& samples, int resolution,
                                 Domain domain) {
  if (samples.empty()) throw input_error("density_from_samples: empty input");
  const int dim = samples.front().dim;
  GridDensity g(dim, resolution, domain);
  auto counts = par::block_histogram(samples.size(), g.cells(),
                                     [&](size_t i) { return g.flat_index(samples[i]); });
  const double scale = 1.0 / (static_cast<double>(samples.size()) * g.cell_volume());
  for (size_t i = 0; i < g.cells(); ++i) g.value(i) = static_cast<double>(counts[i]) * scale;
  return g;
}

GridDensity density_from_values(const std::vector<double>& samples, int resolution,
                                Domain domain) {
  if (samples.empty()) throw input_error("density_from_samples: empty input");
  GridDensity g(1, resolution, domain);
  auto counts = par::block_histogram(samples.size(), g.cells(), [&](size_t i) {
    auto idx = static_cast<long long>(samples[i] * resolution);
    if (idx < 0) idx = 0;
    if (idx >= resolution) idx = resolution - 1;
    return static_cast<size_t>(idx);
  });
  const double scale = 1.0 / (static_cast<double>(samples.size()) * g.cell_volume());
  for (size_t i = 0; i < g.cells(); ++i) g.value(i) = static_cast<double>(counts[i]) * scale;
  return g;
}

std::vector<Point> sample_density(const GridDensity& f, size_t n, uint64_t seed) {
  // cumulative cell masses; binary search per draw
  std::vector<double> cdf(f.cells());
  double acc = 0.0;
  for (size_t i = 0; i < f.cells(); ++i) {
    acc += f.value(i) * f.cell_volume();
    cdf[i] = acc;
  }
  if (!(acc > 0.0)) throw input_error("sample_density: zero mass");
  std::vector<Point> out(n);
  par::for_each(n, [&](size_t i) {
    Rng rng(child_seed(seed, i));
    double u = rng.next_double() * acc;
    size_t cell = static_cast<size_t>(
        std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    if (cell >= f.cells()) cell = f.cells() - 1;
    Point c = f.center(cell);
    Point p;
    p.dim = f.dim();
    const double h = 1.0 / f.resolution();
    for (int ax = 0; ax < f.dim(); ++ax) p[ax] = c[ax] + (rng.next_double() - 0.5) * h;
    out[i] = p;
  });
  return out;
}

double integrate(const GridDensity& f, const std::function<double(const Point&)>& g) {
  double s = par::block_sum(f.cells(), [&](size_t lo, size_t hi) {
    double acc = 0.0;
    for (size_t i = lo; i < hi; ++i) acc += f.value(i) * g(f.center(i));
    return acc;
  });
  return s * f.cell_volume();
}

void save_density_csv(const GridDensity& f, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw input_error("cannot open for writing: " + path);
  out << "# dim=" << f.dim() << " resolution=" << f.resolution()
      << " domain=" << (f.domain() == Domain::Torus ? "torus" : "cube") << "\n";
  char buf[64];
  for (size_t i = 0; i < f.cells(); ++i) {
    size_t rem = i;
    std::vector<size_t> idx(static_cast<size_t>(f.dim()));
    for (int ax = f.dim() - 1; ax >= 0; --ax) {
      idx[static_cast<size_t>(ax)] = rem % static_cast<size_t>(f.resolution());
      rem /= static_cast<size_t>(f.resolution());
    }
    for (size_t k = 0; k < idx.size(); ++k) out << idx[k] << ",";
    std::snprintf(buf, sizeof buf, "%.17g", f.value(i));
    out << buf << "\n";
  }
}

GridDensity load_density_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open: " + path);
  std::string header;
  std::getline(in, header);
  int dim = 0, res = 0;
  Domain dom = Domain::Cube;
  {
    std::istringstream hs(header);
    std::string tok;
    while (hs >> tok) {
      if (tok.rfind("dim=", 0) == 0) dim = std::stoi(tok.substr(4));
      if (tok.rfind("resolution=", 0) == 0) res = std::stoi(tok.substr(11));
      if (tok == "domain=torus") dom = Domain::Torus;
    }
  }
  if (dim == 0 || res == 0) throw input_error("density csv: bad header in " + path);
  GridDensity g(dim, res, dom);
  std::string line;
  size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    size_t pos = line.rfind(',');
    if (pos == std::string::npos) throw input_error("density csv: bad row in " + path);
    g.value(row++) = std::stod(line.substr(pos + 1));
  }
  if (row != g.cells()) throw input_error("density csv: row count mismatch in " + path);
  return g;
}

}  // namespace gal
