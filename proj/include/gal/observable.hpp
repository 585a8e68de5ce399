#ifndef GAL_OBSERVABLE_HPP
#define GAL_OBSERVABLE_HPP

#include <optional>

#include "gal/common.hpp"
#include "gal/hypothesis.hpp"
#include "gal/measures.hpp"

namespace gal {

// Lipschitz observable g = (optional warp) o (component-wise tent map psi_eps)
// from the torus into the cube. psi makes g well-defined on the torus; the
// warp makes the learning target non-uniform while keeping its density
// analytic (torus automorphisms have Lebesgue as invariant measure, so the
// unwarped target would be uniform and the learning problem degenerate).
struct ObservableConfig {
  double eps = 0.25;  // in (0, 1/2)
  int dim = 1;
  std::optional<GeneratorParams> warp;

  void validate() const;
  double lipschitz_constant(double warp_lip = 0.0) const;
};

// psi(x) = x/(1-eps) on [0, 1-eps], (1-x)/eps on [1-eps, 1]
double psi(double x, double eps);

Point apply_g(const ObservableConfig& cfg, const Point& x);

// analytic pushforward density of f_nu under g (and the warp, if set):
// f_mu = sum_{i in {1,2}^d} (f_nu o h_i) (1-eps)^{m(i)} eps^{d-m(i)}
GridDensity pushforward_density(const ObservableConfig& cfg, const GridDensity& f_nu);

// (ln 2 / 2) (2^d + d - 1) M eps
double jsd_approximation_bound(const ObservableConfig& cfg, double m_norm);

}  // namespace gal

#endif  // GAL_OBSERVABLE_HPP
