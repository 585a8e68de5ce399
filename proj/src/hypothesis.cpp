#include "gal/hypothesis.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "gal/parallel.hpp"
#include "gal/rng.hpp"

namespace gal {

void ModelConfig::validate() const {
  if (d < 1 || d > 2) throw config_error("ModelConfig: d must be 1 or 2");
  if (k < 2) throw config_error("ModelConfig: k must be >= 2");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw config_error("ModelConfig: alpha must be in (0,1]");
  if (!(B > 0.0 && B < 0.5)) throw config_error("ModelConfig: B must be in (0,1/2)");
  if (!(K > 0 && K_hat > 0 && C1 > 0 && C2 > 0 && kappa > 0))
    throw config_error("ModelConfig: K, K_hat, C1, C2, kappa must be positive");
  if (gen_basis < gen_degree + 1) throw config_error("ModelConfig: gen_basis too small");
}

// ---------------------------------------------------------------------------
// B-spline basis (clamped, uniform interior knots)

namespace {

int generic_span(const std::vector<double>& knots, int p, int n, double t) {
  // index s with knots[s] <= t < knots[s+1], clamped to [p, n-1]
  if (t >= knots[static_cast<size_t>(n)]) return n - 1;
  if (t <= knots[static_cast<size_t>(p)]) return p;
  int lo = p, hi = n;
  while (hi - lo > 1) {
    int mid = (lo + hi) / 2;
    if (t < knots[static_cast<size_t>(mid)])
      hi = mid;
    else
      lo = mid;
  }
  return lo;
}

void generic_basis(const std::vector<double>& knots, int p, int span, double t, double* N) {
  double left[8], right[8];
  N[0] = 1.0;
  for (int j = 1; j <= p; ++j) {
    left[j] = t - knots[static_cast<size_t>(span + 1 - j)];
    right[j] = knots[static_cast<size_t>(span + j)] - t;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      double temp = N[r] / (right[r + 1] + left[j - r]);
      N[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    N[j] = saved;
  }
}

// basis values and derivatives up to order 2 (NURBS book A2.3, trimmed)
void generic_basis_ders(const std::vector<double>& knots, int p, int span, double t, int order,
                        double ders[3][8]) {
  double ndu[8][8], left[8], right[8];
  ndu[0][0] = 1.0;
  for (int j = 1; j <= p; ++j) {
    left[j] = t - knots[static_cast<size_t>(span + 1 - j)];
    right[j] = knots[static_cast<size_t>(span + j)] - t;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      ndu[j][r] = right[r + 1] + left[j - r];
      double temp = ndu[r][j - 1] / ndu[j][r];
      ndu[r][j] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    ndu[j][j] = saved;
  }
  for (int j = 0; j <= p; ++j) ders[0][j] = ndu[j][p];
  double a[2][8];
  for (int r = 0; r <= p; ++r) {
    int s1 = 0, s2 = 1;
    a[0][0] = 1.0;
    for (int kk = 1; kk <= order; ++kk) {
      double dv = 0.0;
      int rk = r - kk, pk = p - kk;
      if (r >= kk) {
        a[s2][0] = a[s1][0] / ndu[pk + 1][rk];
        dv = a[s2][0] * ndu[rk][pk];
      }
      int j1 = (rk >= -1) ? 1 : -rk;
      int j2 = (r - 1 <= pk) ? kk - 1 : p - r;
      for (int j = j1; j <= j2; ++j) {
        a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][rk + j];
        dv += a[s2][j] * ndu[rk + j][pk];
      }
      if (r <= pk) {
        a[s2][kk] = -a[s1][kk - 1] / ndu[pk + 1][r];
        dv += a[s2][kk] * ndu[r][pk];
      }
      ders[kk][r] = dv;
      std::swap(s1, s2);
    }
  }
  double fac = static_cast<double>(p);
  for (int kk = 1; kk <= order; ++kk) {
    for (int j = 0; j <= p; ++j) ders[kk][j] *= fac;
    fac *= static_cast<double>(p - kk);
  }
}

}  // namespace

BSplineBasis::BSplineBasis(int n_ctrl, int degree) : n_(n_ctrl), p_(degree) {
  if (p_ < 1 || p_ > 5) throw config_error("BSplineBasis: degree must be 1..5");
  if (n_ < p_ + 1) throw config_error("BSplineBasis: need at least degree+1 control points");
  knots_.assign(static_cast<size_t>(n_ + p_ + 1), 0.0);
  const int segments = n_ - p_;
  for (int i = 0; i <= p_; ++i) {
    knots_[static_cast<size_t>(i)] = 0.0;
    knots_[static_cast<size_t>(n_ + i)] = 1.0;
  }
  for (int j = 1; j < segments; ++j)
    knots_[static_cast<size_t>(p_ + j)] = static_cast<double>(j) / segments;
  // antiderivative lives on the degree p+1 clamped vector
  int_knots_.clear();
  int_knots_.push_back(0.0);
  int_knots_.insert(int_knots_.end(), knots_.begin(), knots_.end());
  int_knots_.push_back(1.0);
  int_weights_.assign(static_cast<size_t>(n_), 0.0);
  for (int i = 0; i < n_; ++i)
    int_weights_[static_cast<size_t>(i)] =
        (knots_[static_cast<size_t>(i + p_ + 1)] - knots_[static_cast<size_t>(i)]) / (p_ + 1);
}

int BSplineBasis::find_span(double t) const { return generic_span(knots_, p_, n_, t); }

void BSplineBasis::eval(double t, int& first, double* vals) const {
  int span = find_span(t);
  first = span - p_;
  generic_basis(knots_, p_, span, t, vals);
}

void BSplineBasis::eval_with_derivs(double t, int& first, double* vals, double* d1,
                                    double* d2) const {
  int span = find_span(t);
  first = span - p_;
  double ders[3][8];
  generic_basis_ders(knots_, p_, span, t, 2, ders);
  for (int j = 0; j <= p_; ++j) {
    vals[j] = ders[0][j];
    d1[j] = ders[1][j];
    d2[j] = ders[2][j];
  }
}

double BSplineBasis::value(const std::vector<double>& c, double t) const {
  int first;
  double N[8];
  eval(t, first, N);
  double s = 0.0;
  for (int j = 0; j <= p_; ++j) s += c[static_cast<size_t>(first + j)] * N[j];
  return s;
}

double BSplineBasis::derivative(const std::vector<double>& c, double t) const {
  int first;
  double N[8], D1[8], D2[8];
  eval_with_derivs(t, first, N, D1, D2);
  double s = 0.0;
  for (int j = 0; j <= p_; ++j) s += c[static_cast<size_t>(first + j)] * D1[j];
  return s;
}

double BSplineBasis::second_derivative(const std::vector<double>& c, double t) const {
  int first;
  double N[8], D1[8], D2[8];
  eval_with_derivs(t, first, N, D1, D2);
  double s = 0.0;
  for (int j = 0; j <= p_; ++j) s += c[static_cast<size_t>(first + j)] * D2[j];
  return s;
}

double BSplineBasis::antiderivative(const std::vector<double>& c, double y) const {
  // prefix control points of the integral spline (degree p+1)
  if (y <= 0.0) return 0.0;
  const int np = n_ + 1;
  double D[40];
  D[0] = 0.0;
  for (int i = 1; i <= n_; ++i)
    D[i] = D[i - 1] + c[static_cast<size_t>(i - 1)] * int_weights_[static_cast<size_t>(i - 1)];
  if (y >= 1.0) return D[n_];
  int span = generic_span(int_knots_, p_ + 1, np, y);
  double N[8];
  generic_basis(int_knots_, p_ + 1, span, y, N);
  int first = span - (p_ + 1);
  double s = 0.0;
  for (int j = 0; j <= p_ + 1; ++j) {
    int idx = first + j;
    if (idx >= 0 && idx < np) s += D[idx] * N[j];
  }
  return s;
}

void BSplineBasis::antiderivative_grad(double y, std::vector<double>& grad) const {
  grad.assign(static_cast<size_t>(n_), 0.0);
  if (y <= 0.0) return;
  // dA/dc_i = w_i * sum_{j > i} B_{j,p+1}(y); partition of unity gives the
  // suffix sums from the p+2 nonzero values
  if (y >= 1.0) {
    for (int i = 0; i < n_; ++i) grad[static_cast<size_t>(i)] = int_weights_[static_cast<size_t>(i)];
    return;
  }
  const int np = n_ + 1;
  int span = generic_span(int_knots_, p_ + 1, np, y);
  double N[8];
  generic_basis(int_knots_, p_ + 1, span, y, N);
  int first = span - (p_ + 1);
  for (int i = 0; i < n_; ++i) {
    double suffix;
    if (i < first) {
      suffix = 1.0;
    } else {
      suffix = 0.0;
      for (int j = 0; j <= p_ + 1; ++j)
        if (first + j > i) suffix += N[j];
    }
    grad[static_cast<size_t>(i)] = int_weights_[static_cast<size_t>(i)] * suffix;
  }
}

// ---------------------------------------------------------------------------
// ConditionalMap

double ConditionalMap::total() const { return basis->antiderivative(coef, 1.0); }

double ConditionalMap::forward(double y) const {
  return basis->antiderivative(coef, y) / total();
}

double ConditionalMap::deriv(double y) const { return basis->value(coef, y) / total(); }

double ConditionalMap::second(double y) const { return basis->derivative(coef, y) / total(); }

double ConditionalMap::third(double y) const {
  return basis->second_derivative(coef, y) / total();
}

double ConditionalMap::inverse(double z) const { return inverse_from(z, z); }

double ConditionalMap::inverse_from(double z, double guess) const {
  if (z <= 0.0) return 0.0;
  if (z >= 1.0) return 1.0;
  const double N = total();
  const double target = z * N;
  double lo = 0.0, hi = 1.0;
  double y = std::min(1.0, std::max(0.0, guess));
  for (int it = 0; it < 100; ++it) {
    double f = basis->antiderivative(coef, y) - target;
    if (std::abs(f) <= 1e-15 * N) return y;
    if (f > 0.0)
      hi = y;
    else
      lo = y;
    double ynext = y - f / basis->value(coef, y);
    if (!(ynext > lo && ynext < hi)) ynext = 0.5 * (lo + hi);
    if (ynext == y) return y;
    y = ynext;
  }
  return y;
}

// ---------------------------------------------------------------------------
// GeneratorParams

GeneratorParams::GeneratorParams(int dim, int basis, int degree, double floor)
    : dim_(dim), basis_(basis, degree), floor_(floor) {
  if (dim < 1 || dim > 2) throw input_error("GeneratorParams: dim must be 1 or 2");
  coef1_.assign(static_cast<size_t>(basis), 1.0);
  if (dim == 2) coef2_.assign(static_cast<size_t>(basis) * static_cast<size_t>(basis), 1.0);
}

GeneratorParams GeneratorParams::identity(const ModelConfig& cfg) {
  return GeneratorParams(cfg.d, cfg.gen_basis, cfg.gen_degree);
}

GeneratorParams GeneratorParams::random(const ModelConfig& cfg, uint64_t seed, double strength) {
  GeneratorParams g(cfg.d, cfg.gen_basis, cfg.gen_degree);
  Rng rng(seed);
  for (double& c : g.coef1_) c = std::exp(strength * (2.0 * rng.next_double() - 1.0));
  for (double& c : g.coef2_) c = std::exp(strength * (2.0 * rng.next_double() - 1.0));
  g.project();
  return g;
}

void GeneratorParams::project() {
  for (double& c : coef1_) c = std::min(coef_cap, std::max(floor_, c));
  for (double& c : coef2_) c = std::min(coef_cap, std::max(floor_, c));
}

void GeneratorParams::validate() const {
  for (double c : coef1_)
    if (!(c >= floor_)) throw config_error("degenerate generator: field below floor");
  for (double c : coef2_)
    if (!(c >= floor_)) throw config_error("degenerate generator: field below floor");
}

ConditionalMap GeneratorParams::first_map() const {
  ConditionalMap m;
  m.basis = &basis_;
  m.coef = coef1_;
  m.floor = floor_;
  return m;
}

ConditionalMap GeneratorParams::slice_second(double y1) const {
  const int n = basis_.size();
  ConditionalMap m;
  m.basis = &basis_;
  m.floor = floor_;
  m.coef.assign(static_cast<size_t>(n), 0.0);
  int first;
  double N[8];
  basis_.eval(y1, first, N);
  for (int j = 0; j < n; ++j) {
    double s = 0.0;
    for (int a = 0; a <= basis_.degree(); ++a)
      s += coef2_[static_cast<size_t>(first + a) * static_cast<size_t>(n) + static_cast<size_t>(j)] *
           N[a];
    m.coef[static_cast<size_t>(j)] = s;
  }
  return m;
}

Point GeneratorParams::apply(const Point& z) const {
  if (z.dim != dim_) throw input_error("apply_generator: dimension mismatch");
  Point y;
  y.dim = dim_;
  ConditionalMap m1 = first_map();
  y[0] = m1.inverse(z[0]);
  if (dim_ == 2) {
    ConditionalMap m2 = slice_second(y[0]);
    y[1] = m2.inverse(z[1]);
  }
  return y;
}

Point GeneratorParams::apply_inverse(const Point& y) const {
  if (y.dim != dim_) throw input_error("apply_inverse: dimension mismatch");
  Point z;
  z.dim = dim_;
  ConditionalMap m1 = first_map();
  z[0] = m1.forward(y[0]);
  if (dim_ == 2) {
    ConditionalMap m2 = slice_second(y[0]);
    z[1] = m2.forward(y[1]);
  }
  return z;
}

double GeneratorParams::density_at(const Point& y) const {
  ConditionalMap m1 = first_map();
  double f = m1.deriv(y[0]);
  if (dim_ == 2) {
    ConditionalMap m2 = slice_second(y[0]);
    f *= m2.deriv(y[1]);
  }
  return f;
}

GridDensity generator_density(const GeneratorParams& g, int resolution) {
  g.validate();
  int res = resolution;
  if (res == 0) res = g.dim() == 1 ? 512 : 256;
  GridDensity out(g.dim(), res);
  if (g.dim() == 1) {
    ConditionalMap m = g.first_map();
    par::for_each(out.cells(), [&](size_t i) { out.value(i) = m.deriv(out.center(i)[0]); });
  } else {
    // one slice per y1 grid line
    par::for_each(static_cast<size_t>(res), [&](size_t row) {
      double y1 = (static_cast<double>(row) + 0.5) / res;
      ConditionalMap m1 = g.first_map();
      ConditionalMap m2 = g.slice_second(y1);
      double d1 = m1.deriv(y1);
      for (int col = 0; col < res; ++col) {
        double y2 = (static_cast<double>(col) + 0.5) / res;
        out.value(row * static_cast<size_t>(res) + static_cast<size_t>(col)) = d1 * m2.deriv(y2);
      }
    });
  }
  return out;
}

// ---------------------------------------------------------------------------
// Rosenblatt transport

namespace {

// least squares fit of spline coefficients to values on cell centers
std::vector<double> fit_spline_ls(const BSplineBasis& basis, const std::vector<double>& centers,
                                  const std::vector<double>& values, double floor_val,
                                  double cap) {
  const int n = basis.size();
  Eigen::MatrixXd M(centers.size(), n);
  M.setZero();
  for (size_t r = 0; r < centers.size(); ++r) {
    int first;
    double N[8];
    basis.eval(centers[r], first, N);
    for (int j = 0; j <= basis.degree(); ++j) M(static_cast<long>(r), first + j) = N[j];
  }
  Eigen::VectorXd b(values.size());
  for (size_t r = 0; r < values.size(); ++r) b(static_cast<long>(r)) = values[r];
  Eigen::VectorXd c = M.colPivHouseholderQr().solve(b);
  std::vector<double> out(static_cast<size_t>(n));
  for (int j = 0; j < n; ++j)
    out[static_cast<size_t>(j)] = std::min(cap, std::max(floor_val, c(j)));
  return out;
}

// tabulated inverse CDF of a 1-d piecewise-constant density given at centers
struct TabulatedTransport {
  std::vector<double> cdf;  // at cell right edges, cdf[res-1] = 1
  double h;

  double inverse(double z) const {
    if (z <= 0.0) return 0.0;
    if (z >= 1.0) return 1.0;
    size_t cell = static_cast<size_t>(std::lower_bound(cdf.begin(), cdf.end(), z) - cdf.begin());
    if (cell >= cdf.size()) cell = cdf.size() - 1;
    double lo = cell == 0 ? 0.0 : cdf[cell - 1];
    double hi = cdf[cell];
    double frac = hi > lo ? (z - lo) / (hi - lo) : 0.5;
    return (static_cast<double>(cell) + frac) * h;
  }
};

TabulatedTransport tabulate_transport(const std::vector<double>& density_values) {
  TabulatedTransport t;
  t.h = 1.0 / static_cast<double>(density_values.size());
  t.cdf.resize(density_values.size());
  double acc = 0.0;
  for (size_t i = 0; i < density_values.size(); ++i) {
    acc += density_values[i] * t.h;
    t.cdf[i] = acc;
  }
  for (double& v : t.cdf) v /= acc;
  return t;
}

}  // namespace

TransportFit rosenblatt_transport(const GridDensity& f, const ModelConfig& cfg) {
  if (f.dim() > 2) throw input_error("rosenblatt_transport: d must be 1 or 2");
  if (!(f.min_value() > 0.0))
    throw input_error("rosenblatt_transport: density not bounded below by a positive kappa");
  TransportFit fit;
  fit.params = GeneratorParams(f.dim(), cfg.gen_basis, cfg.gen_degree);
  const int res = f.resolution();
  std::vector<double> centers(static_cast<size_t>(res));
  for (int i = 0; i < res; ++i) centers[static_cast<size_t>(i)] = (i + 0.5) / res;

  if (f.dim() == 1) {
    fit.params.coef1() =
        fit_spline_ls(fit.params.basis(), centers, f.values(), fit.params.floor_value(),
                      fit.params.coef_cap);
    // sup error of the fitted transport against the tabulated inverse CDF
    auto tab = tabulate_transport(f.values());
    ConditionalMap m = fit.params.first_map();
    const int probes = 2001;
    double sup = 0.0;
    for (int i = 0; i < probes; ++i) {
      double z = static_cast<double>(i) / (probes - 1);
      sup = std::max(sup, std::abs(m.inverse(z) - tab.inverse(z)));
    }
    fit.sup_error = sup;
    return fit;
  }

  // d = 2: fit the marginal in y1, then the conditional field in (y1, y2)
  const int n = cfg.gen_basis;
  std::vector<double> marginal(static_cast<size_t>(res), 0.0);
  for (int r = 0; r < res; ++r) {
    double s = 0.0;
    for (int c = 0; c < res; ++c)
      s += f.value(static_cast<size_t>(r) * static_cast<size_t>(res) + static_cast<size_t>(c));
    marginal[static_cast<size_t>(r)] = s / res;
  }
  fit.params.coef1() = fit_spline_ls(fit.params.basis(), centers, marginal,
                                     fit.params.floor_value(), fit.params.coef_cap);

  // per-column conditional coefficients, then smooth across y1
  Eigen::MatrixXd col_coefs(res, n);
  std::vector<double> cond(static_cast<size_t>(res));
  for (int r = 0; r < res; ++r) {
    for (int c = 0; c < res; ++c)
      cond[static_cast<size_t>(c)] =
          f.value(static_cast<size_t>(r) * static_cast<size_t>(res) + static_cast<size_t>(c)) /
          std::max(marginal[static_cast<size_t>(r)], 1e-300);
    auto cc = fit_spline_ls(fit.params.basis(), centers, cond, fit.params.floor_value(),
                            fit.params.coef_cap);
    for (int j = 0; j < n; ++j) col_coefs(r, j) = cc[static_cast<size_t>(j)];
  }
  std::vector<double> column(static_cast<size_t>(res));
  for (int j = 0; j < n; ++j) {
    for (int r = 0; r < res; ++r) column[static_cast<size_t>(r)] = col_coefs(r, j);
    auto cj = fit_spline_ls(fit.params.basis(), centers, column, fit.params.floor_value(),
                            fit.params.coef_cap);
    for (int i = 0; i < n; ++i)
      fit.params.coef2()[static_cast<size_t>(i) * static_cast<size_t>(n) +
                         static_cast<size_t>(j)] = cj[static_cast<size_t>(i)];
  }

  // sup error over marginal + a bundle of conditional slices
  auto tab1 = tabulate_transport(marginal);
  ConditionalMap m1 = fit.params.first_map();
  double sup = 0.0;
  for (int i = 0; i <= 512; ++i) {
    double z = static_cast<double>(i) / 512;
    sup = std::max(sup, std::abs(m1.inverse(z) - tab1.inverse(z)));
  }
  for (int r = 0; r < res; r += res / 16) {
    for (int c = 0; c < res; ++c)
      cond[static_cast<size_t>(c)] =
          f.value(static_cast<size_t>(r) * static_cast<size_t>(res) + static_cast<size_t>(c));
    auto tab2 = tabulate_transport(cond);
    ConditionalMap m2 = fit.params.slice_second(centers[static_cast<size_t>(r)]);
    for (int i = 0; i <= 128; ++i) {
      double z = static_cast<double>(i) / 128;
      sup = std::max(sup, std::abs(m2.inverse(z) - tab2.inverse(z)));
    }
  }
  fit.sup_error = sup;
  return fit;
}

// ---------------------------------------------------------------------------
// DiscriminatorParams (Chebyshev tensor basis, logistic squashing)

namespace {

inline double logistic(double u) { return 1.0 / (1.0 + std::exp(-u)); }

// T_k(2y-1) and d/dy via d/dx T_k = k U_{k-1}, up to degree deg inclusive
void cheb_vals(double y, int deg, double* T, double* dT) {
  double x = 2.0 * y - 1.0;
  T[0] = 1.0;
  if (deg >= 1) T[1] = x;
  for (int k = 2; k <= deg; ++k) T[k] = 2.0 * x * T[k - 1] - T[k - 2];
  if (dT) {
    double U[16];
    U[0] = 1.0;
    if (deg >= 2) U[1] = 2.0 * x;
    for (int k = 2; k <= deg - 1; ++k) U[k] = 2.0 * x * U[k - 1] - U[k - 2];
    dT[0] = 0.0;
    for (int k = 1; k <= deg; ++k) dT[k] = 2.0 * k * U[k - 1];
  }
}

}  // namespace

DiscriminatorParams::DiscriminatorParams(int dim, int degree, double B)
    : dim_(dim), degree_(degree), B_(B) {
  if (dim < 1 || dim > 2) throw input_error("DiscriminatorParams: dim must be 1 or 2");
  if (degree < 0 || degree > 15) throw input_error("DiscriminatorParams: degree out of range");
  size_t n = static_cast<size_t>(degree + 1);
  coef_.assign(dim == 1 ? n : n * n, 0.0);
}

DiscriminatorParams DiscriminatorParams::constant_half(const ModelConfig& cfg) {
  return DiscriminatorParams(cfg.d, cfg.disc_degree, cfg.B);
}

DiscriminatorParams DiscriminatorParams::random(const ModelConfig& cfg, uint64_t seed,
                                                double strength) {
  DiscriminatorParams xi(cfg.d, cfg.disc_degree, cfg.B);
  Rng rng(seed);
  if (cfg.d == 1) {
    for (int k = 0; k <= cfg.disc_degree; ++k)
      xi.coef_[static_cast<size_t>(k)] =
          strength * (2.0 * rng.next_double() - 1.0) / (1.0 + 0.5 * k * k);
  } else {
    int n = cfg.disc_degree + 1;
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        xi.coef_[static_cast<size_t>(j * n + k)] =
            strength * (2.0 * rng.next_double() - 1.0) / (1.0 + 0.5 * (j * j + k * k));
  }
  xi.project(cfg);
  return xi;
}

double DiscriminatorParams::poly(const Point& y) const {
  double T1[16], T2[16];
  cheb_vals(y[0], degree_, T1, nullptr);
  if (dim_ == 1) {
    double s = 0.0;
    for (int k = 0; k <= degree_; ++k) s += coef_[static_cast<size_t>(k)] * T1[k];
    return s;
  }
  cheb_vals(y[1], degree_, T2, nullptr);
  int n = degree_ + 1;
  double s = 0.0;
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) s += coef_[static_cast<size_t>(j * n + k)] * T1[j] * T2[k];
  return s;
}

void DiscriminatorParams::poly_basis(const Point& y, std::vector<double>& basis) const {
  double T1[16], T2[16];
  cheb_vals(y[0], degree_, T1, nullptr);
  basis.resize(coef_.size());
  if (dim_ == 1) {
    for (int k = 0; k <= degree_; ++k) basis[static_cast<size_t>(k)] = T1[k];
    return;
  }
  cheb_vals(y[1], degree_, T2, nullptr);
  int n = degree_ + 1;
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) basis[static_cast<size_t>(j * n + k)] = T1[j] * T2[k];
}

double DiscriminatorParams::value(const Point& y) const {
  return B_ + (1.0 - 2.0 * B_) * logistic(poly(y));
}

void DiscriminatorParams::gradient_y(const Point& y, double* grad) const {
  double T1[16], dT1[16], T2[16], dT2[16];
  cheb_vals(y[0], degree_, T1, dT1);
  double p = 0.0;
  if (dim_ == 1) {
    double dp = 0.0;
    for (int k = 0; k <= degree_; ++k) {
      p += coef_[static_cast<size_t>(k)] * T1[k];
      dp += coef_[static_cast<size_t>(k)] * dT1[k];
    }
    double sig = logistic(p);
    grad[0] = (1.0 - 2.0 * B_) * sig * (1.0 - sig) * dp;
    return;
  }
  cheb_vals(y[1], degree_, T2, dT2);
  int n = degree_ + 1;
  double dp1 = 0.0, dp2 = 0.0;
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      double c = coef_[static_cast<size_t>(j * n + k)];
      p += c * T1[j] * T2[k];
      dp1 += c * dT1[j] * T2[k];
      dp2 += c * T1[j] * dT2[k];
    }
  double sig = logistic(p);
  double f = (1.0 - 2.0 * B_) * sig * (1.0 - sig);
  grad[0] = f * dp1;
  grad[1] = f * dp2;
}

void DiscriminatorParams::gradient_coef(const Point& y, std::vector<double>& grad) const {
  poly_basis(y, grad);
  double p = 0.0;
  for (size_t i = 0; i < coef_.size(); ++i) p += coef_[i] * grad[i];
  double sig = logistic(p);
  double f = (1.0 - 2.0 * B_) * sig * (1.0 - sig);
  for (double& g : grad) g *= f;
}

double DiscriminatorParams::lipschitz_bound() const {
  // |T_k'(x)| <= k^2 on [-1,1]; factor 2 from rescaling to [0,1]
  if (dim_ == 1) {
    double s = 0.0;
    for (int k = 0; k <= degree_; ++k)
      s += std::abs(coef_[static_cast<size_t>(k)]) * 2.0 * k * k;
    return 0.25 * (1.0 - 2.0 * B_) * s;
  }
  int n = degree_ + 1;
  double s1 = 0.0, s2 = 0.0;
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      double a = std::abs(coef_[static_cast<size_t>(j * n + k)]);
      s1 += a * 2.0 * j * j;
      s2 += a * 2.0 * k * k;
    }
  return 0.25 * (1.0 - 2.0 * B_) * std::sqrt(s1 * s1 + s2 * s2);
}

double DiscriminatorParams::second_derivative_bound() const {
  // |T_k''| <= k^2 (k^2 - 1) / 3 on [-1,1]; factor 4 from rescaling
  double sum1 = 0.0, sum2 = 0.0;  // sum |c| k^2 terms and second-derivative terms
  if (dim_ == 1) {
    for (int k = 0; k <= degree_; ++k) {
      double a = std::abs(coef_[static_cast<size_t>(k)]);
      sum1 += a * 2.0 * k * k;
      sum2 += a * 4.0 * k * k * std::max(0.0, static_cast<double>(k * k - 1)) / 3.0;
    }
  } else {
    int n = degree_ + 1;
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double a = std::abs(coef_[static_cast<size_t>(j * n + k)]);
        sum1 += a * 2.0 * (j * j + k * k);
        sum2 += a * (4.0 * j * j * std::max(0.0, static_cast<double>(j * j - 1)) / 3.0 +
                     4.0 * k * k * std::max(0.0, static_cast<double>(k * k - 1)) / 3.0 +
                     4.0 * j * j * k * k);
      }
  }
  // |xi''| <= (1-2B) (|sigma''| P1^2 + |sigma'| P2)
  return (1.0 - 2.0 * B_) * (0.09623 * sum1 * sum1 + 0.25 * sum2);
}

void DiscriminatorParams::project(const ModelConfig& cfg) {
  double scale = 1.0;
  double lip = lipschitz_bound();
  if (lip > cfg.C1) scale = std::min(scale, cfg.C1 / lip);
  // certified C^{1,1}-style norm: max(sup, lip) + second-derivative bound
  double c2norm = std::max(1.0 - B_, lip) + second_derivative_bound();
  if (c2norm > cfg.C2) {
    // second-derivative term is quadratic in the coefficients; a linear
    // shrink is conservative but monotone
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 40; ++it) {
      double mid = 0.5 * (lo + hi);
      DiscriminatorParams trial = *this;
      for (double& c : trial.coef_) c *= mid;
      double v = std::max(1.0 - B_, trial.lipschitz_bound()) + trial.second_derivative_bound();
      if (v > cfg.C2)
        hi = mid;
      else
        lo = mid;
    }
    scale = std::min(scale, lo);
  }
  if (scale < 1.0)
    for (double& c : coef_) c *= scale;
}

GridDensity optimal_discriminator(const GridDensity& f_mu, const GridDensity& f_phi) {
  if (!f_mu.same_grid(f_phi)) throw input_error("optimal_discriminator: grid mismatch");
  GridDensity xi(f_mu.dim(), f_mu.resolution(), f_mu.domain());
  for (size_t i = 0; i < xi.cells(); ++i) {
    double den = f_mu.value(i) + f_phi.value(i);
    if (!(den > 0.0)) throw input_error("optimal_discriminator: zero denominator");
    xi.value(i) = f_mu.value(i) / den;
  }
  return xi;
}

// ---------------------------------------------------------------------------
// Hölder norms

namespace {

std::vector<std::array<int, 2>> multi_indices(int dim, int order) {
  std::vector<std::array<int, 2>> out;
  if (dim == 1) {
    out.push_back({order, 0});
  } else {
    for (int a = 0; a <= order; ++a) out.push_back({a, order - a});
  }
  return out;
}

}  // namespace

HolderNormEstimate holder_norm(const ScalarField& f, int k_order, double alpha, int grid_res,
                               int pair_samples, uint64_t seed) {
  std::vector<ScalarField> one{f};
  return holder_norm_vector(one, k_order, alpha, grid_res, pair_samples, seed);
}

HolderNormEstimate holder_norm_vector(const std::vector<ScalarField>& comps, int k_order,
                                      double alpha, int grid_res, int pair_samples,
                                      uint64_t seed) {
  if (comps.empty()) throw input_error("holder_norm: no components");
  const int dim = comps.front().dim;
  auto grid_points = [&](int res) {
    std::vector<Point> pts;
    if (dim == 1) {
      for (int i = 0; i <= res; ++i) pts.push_back(Point(static_cast<double>(i) / res));
    } else {
      int r = static_cast<int>(std::sqrt(static_cast<double>(res))) + 1;
      for (int i = 0; i <= r; ++i)
        for (int j = 0; j <= r; ++j)
          pts.push_back(Point(static_cast<double>(i) / r, static_cast<double>(j) / r));
    }
    return pts;
  };
  auto vec_deriv = [&](const Point& p, const std::array<int, 2>& beta) {
    double s = 0.0;
    for (const auto& c : comps) {
      double v = c.deriv(p, beta);
      s += v * v;
    }
    return std::sqrt(s);
  };

  HolderNormEstimate est;
  auto pts = grid_points(grid_res);
  for (int ord = 0; ord <= k_order; ++ord) {
    for (const auto& beta : multi_indices(dim, ord)) {
      for (const auto& p : pts) est.ck_part = std::max(est.ck_part, vec_deriv(p, beta));
    }
  }
  // Hölder coefficient of the top derivatives over random + neighbor pairs
  Rng rng(seed);
  auto top = multi_indices(dim, k_order);
  double holder = 0.0;
  for (int s = 0; s < pair_samples; ++s) {
    Point a, b;
    a.dim = b.dim = dim;
    for (int i = 0; i < dim; ++i) {
      a[i] = rng.next_double();
      if (s % 2 == 0) {
        b[i] = rng.next_double();
      } else {
        b[i] = std::min(1.0, std::max(0.0, a[i] + (rng.next_double() - 0.5) * 0.02));
      }
    }
    double dist = 0.0;
    for (int i = 0; i < dim; ++i) dist += (a[i] - b[i]) * (a[i] - b[i]);
    dist = std::sqrt(dist);
    if (dist < 1e-12) continue;
    for (const auto& beta : top) {
      double q = std::abs(vec_deriv(a, beta) - vec_deriv(b, beta)) / std::pow(dist, alpha);
      holder = std::max(holder, q);
    }
  }
  est.holder_part = holder;
  est.lower = est.ck_part + est.holder_part;
  // heuristic upper: next-derivative bound when the field supports it
  double next = 0.0;
  bool have_next = true;
  try {
    for (const auto& beta : multi_indices(dim, k_order + 1))
      for (size_t pi = 0; pi < pts.size(); pi += 7) next = std::max(next, vec_deriv(pts[pi], beta));
  } catch (...) {
    have_next = false;
  }
  const double diam = std::sqrt(static_cast<double>(dim));
  if (have_next && next > 0.0) {
    double hol_up = std::sqrt(static_cast<double>(dim)) * next * std::pow(diam, 1.0 - alpha);
    est.upper = est.ck_part * 1.02 + std::max(est.holder_part, hol_up);
  } else {
    est.upper = est.lower * 1.25;
  }
  if (est.upper < est.lower) est.upper = est.lower;
  return est;
}

ScalarField discriminator_field(const DiscriminatorParams& xi) {
  ScalarField f;
  f.dim = xi.dim();
  DiscriminatorParams copy = xi;
  f.deriv = [copy](const Point& p, const std::array<int, 2>& beta) {
    int total = beta[0] + beta[1];
    if (total == 0) return copy.value(p);
    if (total == 1) {
      double g[2] = {0, 0};
      copy.gradient_y(p, g);
      return beta[0] == 1 ? g[0] : g[1];
    }
    // central differences of the analytic gradient for order 2..3
    const double h = 1e-4;
    auto lower = [&](const Point& q, const std::array<int, 2>& b) {
      double g[2] = {0, 0};
      copy.gradient_y(q, g);
      return b[0] >= 1 ? g[0] : g[1];
    };
    std::array<int, 2> rest = beta;
    int axis = rest[0] > 0 ? 0 : 1;
    rest[axis] -= 1;
    if (rest[0] + rest[1] == 0) {
      double g[2] = {0, 0};
      copy.gradient_y(p, g);
      return axis == 0 ? g[0] : g[1];
    }
    Point pp = p, pm = p;
    pp[axis] = std::min(1.0, p[axis] + h);
    pm[axis] = std::max(0.0, p[axis] - h);
    std::array<int, 2> b2 = rest;
    return (lower(pp, b2) - lower(pm, b2)) / (pp[axis] - pm[axis]);
  };
  return f;
}

ScalarField generator_inverse_field(const GeneratorParams& g, int coord) {
  ScalarField f;
  f.dim = g.dim();
  GeneratorParams copy = g;
  f.deriv = [copy, coord](const Point& p, const std::array<int, 2>& beta) {
    int total = beta[0] + beta[1];
    if (copy.dim() == 1) {
      ConditionalMap m = copy.first_map();
      switch (total) {
        case 0: return m.forward(p[0]);
        case 1: return m.deriv(p[0]);
        case 2: return m.second(p[0]);
        case 3: return m.third(p[0]);
        default: throw input_error("generator field: derivative order too high");
      }
    }
    if (coord == 0) {
      ConditionalMap m = copy.first_map();
      if (beta[1] > 0) return 0.0;  // psi_1 does not depend on y2
      switch (beta[0]) {
        case 0: return m.forward(p[0]);
        case 1: return m.deriv(p[0]);
        case 2: return m.second(p[0]);
        case 3: return m.third(p[0]);
        default: throw input_error("generator field: derivative order too high");
      }
    }
    // psi_2(y1, y2): y2-derivatives analytic per slice; y1-derivatives by
    // central differences of the slice family
    auto slice_val = [&](double y1, const std::array<int, 2>& b) {
      ConditionalMap m = copy.slice_second(y1);
      switch (b[1]) {
        case 0: return m.forward(p[1]);
        case 1: return m.deriv(p[1]);
        case 2: return m.second(p[1]);
        case 3: return m.third(p[1]);
        default: throw input_error("generator field: derivative order too high");
      }
    };
    if (beta[0] == 0) return slice_val(p[0], beta);
    const double h = 1e-4;
    double lo = std::max(0.0, p[0] - h), hi = std::min(1.0, p[0] + h);
    std::array<int, 2> b1{beta[0] - 1, beta[1]};
    if (b1[0] == 0) return (slice_val(hi, beta) - slice_val(lo, beta)) / (hi - lo);
    throw input_error("generator field: mixed derivative order too high");
  };
  return f;
}

// ---------------------------------------------------------------------------
// save / load

void save_generator(const GeneratorParams& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw input_error("cannot open for writing: " + path);
  char buf[64];
  out << "type = generator\n";
  out << "dim = " << g.dim() << "\n";
  out << "basis = " << g.basis_size() << "\n";
  out << "degree = " << g.basis().degree() << "\n";
  std::snprintf(buf, sizeof buf, "%.17g", g.floor_value());
  out << "floor = " << buf << "\n";
  out << "coef1 =";
  for (double c : g.coef1()) {
    std::snprintf(buf, sizeof buf, " %.17g", c);
    out << buf;
  }
  out << "\n";
  if (g.dim() == 2) {
    out << "coef2 =";
    for (double c : g.coef2()) {
      std::snprintf(buf, sizeof buf, " %.17g", c);
      out << buf;
    }
    out << "\n";
  }
}

namespace {
std::vector<double> parse_list(const std::string& s) {
  std::istringstream is(s);
  std::vector<double> out;
  double v;
  while (is >> v) out.push_back(v);
  return out;
}
}  // namespace

GeneratorParams load_generator(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open: " + path);
  int dim = 0, basis = 0, degree = 0;
  double floor_val = 1e-6;
  std::vector<double> c1, c2;
  std::string line;
  while (std::getline(in, line)) {
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = line.substr(0, eq);
    std::string val = line.substr(eq + 1);
    key.erase(key.find_last_not_of(" \t") + 1);
    if (key == "dim") dim = std::stoi(val);
    else if (key == "basis") basis = std::stoi(val);
    else if (key == "degree") degree = std::stoi(val);
    else if (key == "floor") floor_val = std::stod(val);
    else if (key == "coef1") c1 = parse_list(val);
    else if (key == "coef2") c2 = parse_list(val);
  }
  if (dim == 0 || basis == 0) throw input_error("generator file: missing fields in " + path);
  GeneratorParams g(dim, basis, degree, floor_val);
  if (c1.size() != g.coef1().size()) throw input_error("generator file: coef1 size mismatch");
  g.coef1() = c1;
  if (dim == 2) {
    if (c2.size() != g.coef2().size()) throw input_error("generator file: coef2 size mismatch");
    g.coef2() = c2;
  }
  g.validate();
  return g;
}

void save_discriminator(const DiscriminatorParams& xi, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw input_error("cannot open for writing: " + path);
  char buf[64];
  out << "type = discriminator\n";
  out << "dim = " << xi.dim() << "\n";
  out << "degree = " << xi.degree() << "\n";
  std::snprintf(buf, sizeof buf, "%.17g", xi.clamp());
  out << "B = " << buf << "\n";
  out << "coef =";
  for (double c : xi.coef()) {
    std::snprintf(buf, sizeof buf, " %.17g", c);
    out << buf;
  }
  out << "\n";
}

DiscriminatorParams load_discriminator(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open: " + path);
  int dim = 0, degree = -1;
  double B = 0.1;
  std::vector<double> c;
  std::string line;
  while (std::getline(in, line)) {
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = line.substr(0, eq);
    std::string val = line.substr(eq + 1);
    key.erase(key.find_last_not_of(" \t") + 1);
    if (key == "dim") dim = std::stoi(val);
    else if (key == "degree") degree = std::stoi(val);
    else if (key == "B") B = std::stod(val);
    else if (key == "coef") c = parse_list(val);
  }
  if (dim == 0 || degree < 0) throw input_error("discriminator file: missing fields in " + path);
  DiscriminatorParams xi(dim, degree, B);
  if (c.size() != xi.coef().size()) throw input_error("discriminator file: coef size mismatch");
  xi.coef() = c;
  return xi;
}

}  // namespace gal
