#include "gal/observable.hpp"

#include <cmath>

#include "gal/parallel.hpp"

namespace gal {

void ObservableConfig::validate() const {
  if (!(eps > 0.0 && eps < 0.5)) throw input_error("ObservableConfig: eps must be in (0,1/2)");
  if (dim < 1 || dim > 2) throw input_error("ObservableConfig: dim must be 1 or 2");
  if (warp) {
    if (warp->dim() != dim) throw input_error("ObservableConfig: warp dimension mismatch");
    warp->validate();
  }
}

double ObservableConfig::lipschitz_constant(double warp_lip) const {
  double base = 1.0 / eps;
  if (warp && warp_lip > 0.0) return warp_lip * base;
  return base;
}

double psi(double x, double eps) {
  if (x < 0.0 || x > 1.0) throw input_error("psi: x outside [0,1]");
  if (x <= 1.0 - eps) return x / (1.0 - eps);
  return (1.0 - x) / eps;
}

Point apply_g(const ObservableConfig& cfg, const Point& x) {
  if (x.dim != cfg.dim) throw input_error("apply_g: dimension mismatch");
  Point y;
  y.dim = cfg.dim;
  for (int i = 0; i < cfg.dim; ++i) y[i] = psi(x[i], cfg.eps);
  if (cfg.warp) y = cfg.warp->apply(y);
  return y;
}

GridDensity pushforward_density(const ObservableConfig& cfg, const GridDensity& f_nu) {
  cfg.validate();
  if (f_nu.dim() != cfg.dim) throw input_error("pushforward_density: dimension mismatch");
  if (std::abs(f_nu.mass() - 1.0) > 1e-9)
    throw input_error("pushforward_density: input density is not normalized");
  const double eps = cfg.eps;
  const int d = cfg.dim;
  GridDensity mid(f_nu.dim(), f_nu.resolution(), Domain::Cube);
  // local affine inverses per branch: h_1(y) = (1-eps) y, h_2(y) = 1 - eps y
  par::for_each(mid.cells(), [&](size_t i) {
    Point y = mid.center(i);
    double total = 0.0;
    const int branches = 1 << d;
    for (int mask = 0; mask < branches; ++mask) {
      Point h;
      h.dim = d;
      double coeff = 1.0;
      for (int ax = 0; ax < d; ++ax) {
        if ((mask >> ax) & 1) {
          h[ax] = 1.0 - eps * y[ax];
          coeff *= eps;
        } else {
          h[ax] = (1.0 - eps) * y[ax];
          coeff *= 1.0 - eps;
        }
      }
      total += coeff * f_nu.at(h);
    }
    mid.value(i) = total;
  });
  if (!cfg.warp) return mid;
  // mu = warp_* (g_psi_* nu): f_mu(u) = f_mid(w^{-1}(u)) |det Dw^{-1}(u)|
  const GeneratorParams& w = *cfg.warp;
  GridDensity out(mid.dim(), mid.resolution(), Domain::Cube);
  if (d == 1) {
    ConditionalMap m = w.first_map();
    par::for_each(out.cells(), [&](size_t i) {
      double u = out.center(i)[0];
      double pre = m.forward(u);  // w^{-1}(u) in the CDF direction
      out.value(i) = mid.at(Point(pre)) * m.deriv(u);
    });
  } else {
    par::for_each(static_cast<size_t>(out.resolution()), [&](size_t row) {
      double u1 = (static_cast<double>(row) + 0.5) / out.resolution();
      ConditionalMap m1 = w.first_map();
      ConditionalMap m2 = w.slice_second(u1);
      double pre1 = m1.forward(u1);
      double d1 = m1.deriv(u1);
      for (int col = 0; col < out.resolution(); ++col) {
        double u2 = (static_cast<double>(col) + 0.5) / out.resolution();
        Point pre(pre1, m2.forward(u2));
        out.value(row * static_cast<size_t>(out.resolution()) + static_cast<size_t>(col)) =
            mid.at(pre) * d1 * m2.deriv(u2);
      }
    });
  }
  return out;
}

double jsd_approximation_bound(const ObservableConfig& cfg, double m_norm) {
  if (m_norm < 0.0) throw input_error("jsd_approximation_bound: M must be >= 0");
  const double d = static_cast<double>(cfg.dim);
  return 0.5 * std::log(2.0) * (std::pow(2.0, d) + d - 1.0) * m_norm * cfg.eps;
}

}  // namespace gal
