#ifndef GAL_MEASURES_HPP
#define GAL_MEASURES_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "gal/common.hpp"

namespace gal {

enum class Domain { Cube, Torus };

// Probability density tabulated at the cell centers of a uniform tensor grid
// on [0,1]^d. Midpoint quadrature throughout.
class GridDensity {
 public:
  GridDensity() = default;
  GridDensity(int dim, int resolution, Domain domain = Domain::Cube);

  static GridDensity uniform(int dim, int resolution, Domain domain = Domain::Cube);
  // tabulate and normalize a nonnegative function
  static GridDensity from_function(int dim, int resolution,
                                   const std::function<double(const Point&)>& f,
                                   Domain domain = Domain::Cube);

  int dim() const { return dim_; }
  int resolution() const { return res_; }
  Domain domain() const { return domain_; }
  size_t cells() const { return values_.size(); }
  double cell_volume() const { return vol_; }

  double& value(size_t flat) { return values_[flat]; }
  double value(size_t flat) const { return values_[flat]; }
  const std::vector<double>& values() const { return values_; }

  Point center(size_t flat) const;
  size_t flat_index(const Point& p) const;  // cell containing p
  double at(const Point& p) const;          // value of the containing cell

  double mass() const;        // Riemann sum
  double min_value() const;   // kappa on the grid
  void normalize();           // rescale to mass 1
  void validate() const;      // nonneg + mass within 1e-9

  bool same_grid(const GridDensity& o) const {
    return dim_ == o.dim_ && res_ == o.res_ && domain_ == o.domain_;
  }

 private:
  int dim_ = 1;
  int res_ = 0;
  Domain domain_ = Domain::Cube;
  double vol_ = 0.0;
  std::vector<double> values_;
};

// Kullback-Leibler divergence (natural log); +infinity if q vanishes where
// p does not. 0 log(0/q) = 0.
double kl(const GridDensity& p, const GridDensity& q);

// Jensen-Shannon divergence, in [0, ln 2], symmetric, always finite.
double jsd(const GridDensity& p, const GridDensity& q);

// total variation distance, in [0,1]
double tv(const GridDensity& p, const GridDensity& q);

GridDensity density_from_samples(const std::vector<Point>& samples, int resolution,
                                 Domain domain = Domain::Cube);
GridDensity density_from_values(const std::vector<double>& samples, int resolution,
                                Domain domain = Domain::Cube);

// exact sampler for a grid density (cell by mass, uniform within the cell)
std::vector<Point> sample_density(const GridDensity& f, size_t n, uint64_t seed);

// quadrature of g against the density: sum f * g(center) * vol
double integrate(const GridDensity& f, const std::function<double(const Point&)>& g);

void save_density_csv(const GridDensity& f, const std::string& path);
GridDensity load_density_csv(const std::string& path);

}  // namespace gal

#endif  // GAL_MEASURES_HPP
