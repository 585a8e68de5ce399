#include "gal/risk.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "gal/parallel.hpp"
#include "gal/rng.hpp"

namespace gal {

namespace {

// mean over samples accumulated in sorted order, so the result is invariant
// under permutations of the sample sequence
double sorted_mean(std::vector<double>& vals) {
  std::sort(vals.begin(), vals.end());
  double s = 0.0;
  for (double v : vals) s += v;
  return s / static_cast<double>(vals.size());
}

struct BinnedData {
  std::vector<Point> centers;
  std::vector<double> weights;  // sums to 1
};

BinnedData bin_samples(const std::vector<Point>& samples, int dim, int bins_per_axis) {
  BinnedData out;
  const size_t bins = dim == 1 ? static_cast<size_t>(bins_per_axis)
                               : static_cast<size_t>(bins_per_axis) * bins_per_axis;
  auto counts = par::block_histogram(samples.size(), bins, [&](size_t i) {
    const Point& p = samples[i];
    size_t flat = 0;
    for (int ax = 0; ax < dim; ++ax) {
      auto idx = static_cast<long long>(p[ax] * bins_per_axis);
      if (idx < 0) idx = 0;
      if (idx >= bins_per_axis) idx = bins_per_axis - 1;
      flat = flat * static_cast<size_t>(bins_per_axis) + static_cast<size_t>(idx);
    }
    return flat;
  });
  const double inv_n = 1.0 / static_cast<double>(samples.size());
  for (size_t b = 0; b < bins; ++b) {
    if (counts[b] == 0) continue;
    Point c;
    c.dim = dim;
    size_t rem = b;
    for (int ax = dim - 1; ax >= 0; --ax) {
      c[ax] = (static_cast<double>(rem % static_cast<size_t>(bins_per_axis)) + 0.5) /
              bins_per_axis;
      rem /= static_cast<size_t>(bins_per_axis);
    }
    out.centers.push_back(c);
    out.weights.push_back(static_cast<double>(counts[b]) * inv_n);
  }
  return out;
}

// phi(z) together with d phi / d (generator params), via the implicit
// function theorem on psi(phi(z)) = z
struct GenPoint {
  Point y;
  // dy[coord][param], params ordered coef1 then coef2
  std::vector<double> dy1, dy2;
};

void eval_generator_with_grad(const GeneratorParams& g, const Point& z, GenPoint& out,
                              const Point* warm) {
  const BSplineBasis& basis = g.basis();
  const int n = g.basis_size();
  const size_t np = g.n_params();
  out.y.dim = g.dim();
  out.dy1.assign(np, 0.0);
  ConditionalMap m1 = g.first_map();
  double y1 = warm ? m1.inverse_from(z[0], (*warm)[0]) : m1.inverse(z[0]);
  out.y[0] = y1;
  const double n1 = m1.total();
  std::vector<double> a_grad;
  basis.antiderivative_grad(y1, a_grad);
  std::vector<double> a_grad1;
  basis.antiderivative_grad(1.0, a_grad1);
  const double a_y = basis.antiderivative(m1.coef, y1);
  const double w1 = basis.value(m1.coef, y1);
  // psi1(y) = A(y)/A(1); dpsi1/dc_i = (A_i(y) A(1) - A(y) A_i(1)) / A(1)^2
  // dy1/dc_i = -dpsi1/dc_i / psi1'(y1), psi1' = w1 / A(1)
  for (int i = 0; i < n; ++i) {
    double dpsi =
        (a_grad[static_cast<size_t>(i)] * n1 - a_y * a_grad1[static_cast<size_t>(i)]) /
        (n1 * n1);
    out.dy1[static_cast<size_t>(i)] = -dpsi * n1 / w1;
  }
  if (g.dim() == 1) return;

  out.dy2.assign(np, 0.0);
  ConditionalMap m2 = g.slice_second(y1);
  double y2 = warm ? m2.inverse_from(z[1], (*warm)[1]) : m2.inverse(z[1]);
  out.y[1] = y2;
  const double n2 = m2.total();
  const double w2 = basis.value(m2.coef, y2);
  std::vector<double> g_grad, g_grad1;
  basis.antiderivative_grad(y2, g_grad);
  basis.antiderivative_grad(1.0, g_grad1);
  const double a2 = basis.antiderivative(m2.coef, y2);
  // sensitivity of psi2 to the slice coefficients
  std::vector<double> dpsi_dslice(static_cast<size_t>(n));
  for (int j = 0; j < n; ++j)
    dpsi_dslice[static_cast<size_t>(j)] = (g_grad[static_cast<size_t>(j)] * n2 -
                                           a2 * g_grad1[static_cast<size_t>(j)]) /
                                          (n2 * n2);
  // basis values and derivatives in y1
  int first;
  double bv[8], bd1[8], bd2[8];
  basis.eval_with_derivs(y1, first, bv, bd1, bd2);
  // dpsi2/dy1 = sum_j (dslice_j/dy1) dpsi2/dslice_j
  double dpsi2_dy1 = 0.0;
  for (int j = 0; j < n; ++j) {
    double dcj = 0.0;
    for (int a = 0; a <= basis.degree(); ++a)
      dcj += g.coef2()[static_cast<size_t>(first + a) * static_cast<size_t>(n) +
                       static_cast<size_t>(j)] *
             bd1[a];
    dpsi2_dy1 += dcj * dpsi_dslice[static_cast<size_t>(j)];
  }
  const double psi2p = w2 / n2;
  // params of coef1 move y2 only through y1
  for (int i = 0; i < n; ++i)
    out.dy2[static_cast<size_t>(i)] =
        -dpsi2_dy1 * out.dy1[static_cast<size_t>(i)] / psi2p;
  // params of coef2: dpsi2/dc2_{ij} = B_i(y1) dpsi2/dslice_j
  for (int a = 0; a <= basis.degree(); ++a) {
    int i = first + a;
    for (int j = 0; j < n; ++j) {
      size_t pidx = static_cast<size_t>(n) + static_cast<size_t>(i) * static_cast<size_t>(n) +
                    static_cast<size_t>(j);
      out.dy2[pidx] = -bv[a] * dpsi_dslice[static_cast<size_t>(j)] / psi2p;
    }
  }
}

}  // namespace

double population_risk_mu(const GridDensity& f_mu, const ScalarFn& xi) {
  return integrate(f_mu, [&](const Point& y) { return std::log(xi(y)); });
}

double population_risk_lambda(const GeneratorParams& g, const ScalarFn& xi, int z_res) {
  // midpoint quadrature over the noise cube
  if (g.dim() == 1) {
    ConditionalMap m = g.first_map();
    double warm = 0.5;
    double s = 0.0;
    for (int i = 0; i < z_res; ++i) {
      double z = (i + 0.5) / z_res;
      warm = m.inverse_from(z, warm);
      s += std::log(1.0 - xi(Point(warm)));
    }
    return s / z_res;
  }
  const int r = 64;
  double s = 0.0;
  ConditionalMap m1 = g.first_map();
  for (int i = 0; i < r; ++i) {
    double z1 = (i + 0.5) / r;
    double y1 = m1.inverse(z1);
    ConditionalMap m2 = g.slice_second(y1);
    double warm = 0.5;
    for (int j = 0; j < r; ++j) {
      double z2 = (j + 0.5) / r;
      warm = m2.inverse_from(z2, warm);
      s += std::log(1.0 - xi(Point(y1, warm)));
    }
  }
  return s / (r * r);
}

double population_risk_lambda_density(const GridDensity& f_phi, const ScalarFn& xi) {
  return integrate(f_phi, [&](const Point& y) { return std::log(1.0 - xi(y)); });
}

RiskBreakdown population_risk(const GridDensity& f_mu, const GeneratorParams& g,
                              const DiscriminatorParams& xi) {
  RiskBreakdown r;
  r.population = true;
  ScalarFn fxi = [&](const Point& y) { return xi.value(y); };
  r.L_mu = population_risk_mu(f_mu, fxi);
  GridDensity f_phi = generator_density(g, f_mu.resolution());
  r.L_lambda = population_risk_lambda_density(f_phi, fxi);
  r.L = 0.5 * (r.L_mu + r.L_lambda);
  return r;
}

RiskBreakdown population_risk_grid(const GridDensity& f_mu, const GridDensity& f_phi,
                                   const GridDensity& xi_values) {
  if (!f_mu.same_grid(f_phi) || !f_mu.same_grid(xi_values))
    throw input_error("population_risk_grid: grid mismatch");
  double lmu = 0.0, llam = 0.0;
  for (size_t i = 0; i < f_mu.cells(); ++i) {
    lmu += f_mu.value(i) * std::log(xi_values.value(i));
    llam += f_phi.value(i) * std::log(1.0 - xi_values.value(i));
  }
  RiskBreakdown r;
  r.population = true;
  r.L_mu = lmu * f_mu.cell_volume();
  r.L_lambda = llam * f_mu.cell_volume();
  r.L = 0.5 * (r.L_mu + r.L_lambda);
  return r;
}

RiskBreakdown empirical_risk(const std::vector<Point>& samples_y,
                             const std::vector<Point>& samples_z, const GeneratorParams& g,
                             const DiscriminatorParams& xi) {
  return empirical_risk_fn(
      samples_y, samples_z, [&](const Point& y) { return xi.value(y); },
      [&](const Point& z) { return g.apply(z); });
}

RiskBreakdown empirical_risk_fn(const std::vector<Point>& samples_y,
                                const std::vector<Point>& samples_z, const ScalarFn& xi,
                                const std::function<Point(const Point&)>& phi) {
  if (samples_y.empty() || samples_z.empty()) throw input_error("empirical_risk: empty samples");
  if (samples_y.size() != samples_z.size())
    throw input_error("empirical_risk: sample counts differ");
  std::vector<double> ly(samples_y.size()), lz(samples_z.size());
  par::for_each(samples_y.size(), [&](size_t i) { ly[i] = std::log(xi(samples_y[i])); });
  par::for_each(samples_z.size(), [&](size_t i) {
    lz[i] = std::log(1.0 - xi(phi(samples_z[i])));
  });
  RiskBreakdown r;
  r.population = false;
  r.n = samples_y.size();
  r.L_mu = sorted_mean(ly);
  r.L_lambda = sorted_mean(lz);
  r.L = 0.5 * (r.L_mu + r.L_lambda);
  return r;
}

std::vector<Point> draw_noise(size_t n, int dim, uint64_t noise_seed) {
  std::vector<Point> z(n);
  par::for_each(n, [&](size_t i) {
    Rng rng(child_seed(noise_seed, i));
    Point p;
    p.dim = dim;
    for (int ax = 0; ax < dim; ++ax) p[ax] = rng.next_double();
    z[i] = p;
  });
  return z;
}

// ---------------------------------------------------------------------------
// training

namespace {

struct GdaState {
  GeneratorParams gen;
  DiscriminatorParams disc;
  double inner_value = 0.0;
  double grad_gen = 0.0, grad_disc = 0.0;
  bool finite = true;
};

double binned_risk_mu(const BinnedData& y, const DiscriminatorParams& disc) {
  double s = 0.0;
  for (size_t b = 0; b < y.centers.size(); ++b)
    s += y.weights[b] * std::log(disc.value(y.centers[b]));
  return s;
}

// ascent steps on the discriminator for fixed generated points
void disc_ascent(const BinnedData& y, const std::vector<Point>& gen_pts,
                 const std::vector<double>& gen_w, DiscriminatorParams& disc,
                 const ModelConfig& mcfg, double lr, int steps, double* grad_norm_out) {
  std::vector<double> grad(disc.n_params()), tmp(disc.n_params());
  for (int s = 0; s < steps; ++s) {
    std::fill(grad.begin(), grad.end(), 0.0);
    for (size_t b = 0; b < y.centers.size(); ++b) {
      disc.gradient_coef(y.centers[b], tmp);
      double v = disc.value(y.centers[b]);
      double f = 0.5 * y.weights[b] / v;
      for (size_t k = 0; k < grad.size(); ++k) grad[k] += f * tmp[k];
    }
    for (size_t b = 0; b < gen_pts.size(); ++b) {
      disc.gradient_coef(gen_pts[b], tmp);
      double v = disc.value(gen_pts[b]);
      double f = -0.5 * gen_w[b] / (1.0 - v);
      for (size_t k = 0; k < grad.size(); ++k) grad[k] += f * tmp[k];
    }
    double g2 = 0.0;
    for (double gv : grad) g2 += gv * gv;
    if (grad_norm_out) *grad_norm_out = std::sqrt(g2);
    for (size_t k = 0; k < grad.size(); ++k) disc.coef()[k] += lr * grad[k];
    disc.project(mcfg);
  }
}

GdaState run_restart(const std::vector<Point>& samples_y, const BinnedData& by,
                     const BinnedData& bz, const ModelConfig& mcfg, const TrainConfig& tcfg,
                     int restart_index, std::ofstream* log) {
  GdaState st;
  // restart ladder: identity first, then random perturbations; optionally one
  // histogram-transport warm start in slot 1
  if (restart_index == 0) {
    st.gen = GeneratorParams::identity(mcfg);
  } else if (restart_index == 1 && tcfg.warm_start) {
    int hist_res = mcfg.d == 1 ? 64 : 32;
    GridDensity hist = density_from_samples(samples_y, hist_res);
    // half a count per cell keeps the transport fit well-posed at small n
    const double smooth = 0.5 / (static_cast<double>(samples_y.size()) * hist.cell_volume());
    for (size_t i = 0; i < hist.cells(); ++i) hist.value(i) += smooth;
    hist.normalize();
    st.gen = rosenblatt_transport(hist, mcfg).params;
  } else {
    st.gen = GeneratorParams::random(mcfg, child_seed(tcfg.seed, 1000 + restart_index), 0.5);
  }
  st.disc = DiscriminatorParams::constant_half(mcfg);
  if (restart_index >= 2) {
    st.disc = DiscriminatorParams::random(mcfg, child_seed(tcfg.seed, 2000 + restart_index), 0.5);
  }

  const size_t np = st.gen.n_params();
  std::vector<GenPoint> cache(bz.centers.size());
  auto refresh_cache = [&](bool with_warm) {
    for (size_t b = 0; b < bz.centers.size(); ++b) {
      const Point* warm = with_warm ? &cache[b].y : nullptr;
      eval_generator_with_grad(st.gen, bz.centers[b], cache[b], warm);
    }
  };
  refresh_cache(false);

  std::vector<double> ggrad(np);
  std::vector<Point> gen_pts(bz.centers.size());
  for (int it = 0; it < tcfg.iterations; ++it) {
    const double decay = 1.0 / (1.0 + 2.0 * static_cast<double>(it) / tcfg.iterations);
    for (size_t b = 0; b < bz.centers.size(); ++b) gen_pts[b] = cache[b].y;
    disc_ascent(by, gen_pts, bz.weights, st.disc, mcfg, tcfg.lr_disc * decay, tcfg.disc_steps,
                &st.grad_disc);
    // generator descent on (1/2) sum w log(1 - xi(phi(z)))
    std::fill(ggrad.begin(), ggrad.end(), 0.0);
    for (size_t b = 0; b < bz.centers.size(); ++b) {
      const GenPoint& gp = cache[b];
      double xg[2] = {0.0, 0.0};
      st.disc.gradient_y(gp.y, xg);
      double v = st.disc.value(gp.y);
      double f = -0.5 * bz.weights[b] / (1.0 - v);
      for (size_t k = 0; k < np; ++k) {
        double dy = xg[0] * gp.dy1[k];
        if (st.gen.dim() == 2) dy += xg[1] * gp.dy2[k];
        ggrad[k] += f * dy;
      }
    }
    double g2 = 0.0;
    for (double gv : ggrad) g2 += gv * gv;
    st.grad_gen = std::sqrt(g2);
    auto& c1 = st.gen.coef1();
    for (size_t k = 0; k < c1.size(); ++k) c1[k] -= tcfg.lr_gen * decay * ggrad[k];
    if (st.gen.dim() == 2) {
      auto& c2 = st.gen.coef2();
      for (size_t k = 0; k < c2.size(); ++k)
        c2[k] -= tcfg.lr_gen * decay * ggrad[c1.size() + k];
    }
    st.gen.project();
    refresh_cache(true);

    if (log && tcfg.log_every > 0 && (it % tcfg.log_every == 0 || it + 1 == tcfg.iterations)) {
      double lmu = binned_risk_mu(by, st.disc);
      double llam = 0.0;
      for (size_t b = 0; b < bz.centers.size(); ++b)
        llam += bz.weights[b] * std::log(1.0 - st.disc.value(cache[b].y));
      char buf[192];
      std::snprintf(buf, sizeof buf, "%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g\n", restart_index, it,
                    0.5 * (lmu + llam), lmu, llam, st.grad_gen, st.grad_disc);
      (*log) << buf;
    }
  }

  // selection value: inner-maximized empirical risk (binned), ascent to
  // convergence from the current discriminator and from the constant one
  double best_inner = -1e300;
  for (int start = 0; start < 2; ++start) {
    DiscriminatorParams probe =
        start == 0 ? st.disc : DiscriminatorParams::constant_half(mcfg);
    for (size_t b = 0; b < bz.centers.size(); ++b) gen_pts[b] = cache[b].y;
    disc_ascent(by, gen_pts, bz.weights, probe, mcfg, tcfg.lr_disc, tcfg.polish_iters, nullptr);
    double lmu = binned_risk_mu(by, probe);
    double llam = 0.0;
    for (size_t b = 0; b < bz.centers.size(); ++b)
      llam += bz.weights[b] * std::log(1.0 - probe.value(cache[b].y));
    double inner = 0.5 * (lmu + llam);
    if (inner > best_inner) {
      best_inner = inner;
      st.disc = probe;
    }
  }
  st.inner_value = best_inner;
  for (double c : st.gen.coef1()) st.finite = st.finite && std::isfinite(c);
  for (double c : st.disc.coef()) st.finite = st.finite && std::isfinite(c);
  st.finite = st.finite && std::isfinite(st.inner_value);
  return st;
}

}  // namespace

TrainResult train_gal(const std::vector<Point>& samples_y, uint64_t noise_seed,
                      const ModelConfig& mcfg, const TrainConfig& tcfg) {
  mcfg.validate();
  if (samples_y.size() < tcfg.min_n)
    throw input_error("train_gal: fewer samples than config.min_n");
  const int dim = mcfg.d;
  for (const auto& p : samples_y)
    if (p.dim != dim) throw input_error("train_gal: sample dimension mismatch");

  std::vector<Point> samples_z = draw_noise(samples_y.size(), dim, noise_seed);
  const int bins = dim == 1 ? tcfg.bins : 64;
  BinnedData by = bin_samples(samples_y, dim, bins);
  BinnedData bz = bin_samples(samples_z, dim, bins);

  std::ofstream log;
  if (tcfg.log_every > 0 && !tcfg.log_path.empty()) {
    log.open(tcfg.log_path);
    log << "restart,iteration,L_hat,L_hat_mu,L_hat_lambda,grad_norm_gen,grad_norm_disc\n";
  }

  std::vector<GdaState> states(static_cast<size_t>(tcfg.restarts));
  // restarts are independent; the log is only written in the serial path
  if (log.is_open()) {
    for (int r = 0; r < tcfg.restarts; ++r)
      states[static_cast<size_t>(r)] = run_restart(samples_y, by, bz, mcfg, tcfg, r, &log);
  } else {
    par::for_each_task(static_cast<size_t>(tcfg.restarts), [&](size_t r) {
      states[r] = run_restart(samples_y, by, bz, mcfg, tcfg, static_cast<int>(r), nullptr);
    });
  }

  TrainResult res;
  res.best_restart = -1;
  double best = 1e300;
  for (int r = 0; r < tcfg.restarts; ++r) {
    const GdaState& st = states[static_cast<size_t>(r)];
    if (!st.finite) throw training_error("train_gal: non-finite loss in restart " +
                                         std::to_string(r));
    res.restart_values.push_back(st.inner_value);
    if (st.inner_value < best) {  // ties keep the lowest restart index
      best = st.inner_value;
      res.best_restart = r;
    }
  }
  const GdaState& win = states[static_cast<size_t>(res.best_restart)];
  res.generator = win.gen;
  res.discriminator = win.disc;
  res.inner_value = win.inner_value;
  res.grad_norm_gen = win.grad_gen;
  res.grad_norm_disc = win.grad_disc;
  res.converged = win.grad_gen < 1.0;
  return res;
}

// ---------------------------------------------------------------------------
// generalization errors

namespace {

std::vector<DiscriminatorParams> fixed_disc_net(const ModelConfig& mcfg, int size,
                                                uint64_t seed) {
  std::vector<DiscriminatorParams> net;
  net.reserve(static_cast<size_t>(size));
  const double strengths[4] = {0.5, 1.0, 2.0, 3.5};
  for (int k = 0; k < size; ++k)
    net.push_back(DiscriminatorParams::random(mcfg, child_seed(seed, static_cast<uint64_t>(k)),
                                              strengths[k % 4]));
  return net;
}

double exact_lhat_mu(const std::vector<Point>& samples, const DiscriminatorParams& xi) {
  std::vector<double> vals(samples.size());
  par::for_each(samples.size(), [&](size_t i) { vals[i] = std::log(xi.value(samples[i])); });
  return sorted_mean(vals);
}

}  // namespace

SupEstimate generalization_error_mu(const std::vector<Point>& samples_y,
                                    const GridDensity& f_mu, const ModelConfig& mcfg,
                                    const SupSearchConfig& scfg) {
  if (samples_y.empty()) throw input_error("generalization_error_mu: empty samples");
  auto pop = [&](const DiscriminatorParams& xi) {
    return population_risk_mu(f_mu, [&](const Point& y) { return xi.value(y); });
  };
  auto exact_gap = [&](const DiscriminatorParams& xi) {
    return std::abs(exact_lhat_mu(samples_y, xi) - pop(xi));
  };

  auto net = fixed_disc_net(mcfg, scfg.net_size, scfg.seed);
  std::vector<double> net_vals(net.size());
  par::for_each_task(net.size(), [&](size_t k) { net_vals[k] = exact_gap(net[k]); });
  SupEstimate est;
  for (double v : net_vals) est.net_value = std::max(est.net_value, v);
  est.value = est.net_value;
  est.candidates = static_cast<int>(net.size());

  // projected gradient ascent on s (L_hat - L), binned statistics for the
  // search, exact sums for the reported values
  BinnedData by = bin_samples(samples_y, mcfg.d, mcfg.d == 1 ? scfg.bins : 64);
  const int total_runs = 2 * scfg.restarts;
  std::vector<double> run_vals(static_cast<size_t>(total_runs), 0.0);
  par::for_each_task(static_cast<size_t>(total_runs), [&](size_t run) {
    double sign = run % 2 == 0 ? 1.0 : -1.0;
    DiscriminatorParams xi =
        run < 2 ? DiscriminatorParams::constant_half(mcfg)
                : DiscriminatorParams::random(mcfg, child_seed(scfg.seed, 5000 + run), 1.0);
    std::vector<double> grad(xi.n_params()), tmp(xi.n_params());
    for (int it = 0; it < scfg.iters; ++it) {
      std::fill(grad.begin(), grad.end(), 0.0);
      for (size_t b = 0; b < by.centers.size(); ++b) {
        xi.gradient_coef(by.centers[b], tmp);
        double f = sign * by.weights[b] / xi.value(by.centers[b]);
        for (size_t k = 0; k < grad.size(); ++k) grad[k] += f * tmp[k];
      }
      // population term by quadrature on the density grid
      for (size_t c = 0; c < f_mu.cells(); ++c) {
        Point y = f_mu.center(c);
        xi.gradient_coef(y, tmp);
        double f = -sign * f_mu.value(c) * f_mu.cell_volume() / xi.value(y);
        for (size_t k = 0; k < grad.size(); ++k) grad[k] += f * tmp[k];
      }
      for (size_t k = 0; k < grad.size(); ++k) xi.coef()[k] += scfg.lr * grad[k];
      xi.project(mcfg);
    }
    run_vals[run] = exact_gap(xi);
  });
  for (double v : run_vals) est.value = std::max(est.value, v);
  est.candidates += total_runs;
  return est;
}

SupEstimate generalization_error_lambda(const std::vector<Point>& samples_z,
                                        const ModelConfig& mcfg, const SupSearchConfig& scfg) {
  if (samples_z.empty()) throw input_error("generalization_error_lambda: empty samples");
  // sorted copy: warm-started transport solves and permutation invariance
  std::vector<Point> zs = samples_z;
  std::sort(zs.begin(), zs.end(), [](const Point& a, const Point& b) {
    for (int i = 0; i < a.dim; ++i) {
      if (a[i] < b[i]) return true;
      if (a[i] > b[i]) return false;
    }
    return false;
  });

  auto exact_gap = [&](const GeneratorParams& g, const DiscriminatorParams& xi) {
    std::vector<double> vals(zs.size());
    if (mcfg.d == 1) {
      ConditionalMap m = g.first_map();
      double warm = 0.5;
      for (size_t i = 0; i < zs.size(); ++i) {
        warm = m.inverse_from(zs[i][0], warm);
        vals[i] = std::log(1.0 - xi.value(Point(warm)));
      }
    } else {
      par::for_each(zs.size(), [&](size_t i) {
        vals[i] = std::log(1.0 - xi.value(g.apply(zs[i])));
      });
    }
    double lhat = sorted_mean(vals);
    double lpop =
        population_risk_lambda(g, [&](const Point& y) { return xi.value(y); },
                               mcfg.d == 1 ? 2048 : 64);
    return std::abs(lhat - lpop);
  };

  SupEstimate est;
  auto net_disc = fixed_disc_net(mcfg, scfg.net_size, scfg.seed ^ 0xabcdULL);
  std::vector<double> net_vals(net_disc.size());
  par::for_each_task(net_disc.size(), [&](size_t k) {
    GeneratorParams g =
        k % 3 == 0 ? GeneratorParams::identity(mcfg)
                   : GeneratorParams::random(mcfg, child_seed(scfg.seed, 9000 + k), 0.8);
    net_vals[k] = exact_gap(g, net_disc[k]);
  });
  for (double v : net_vals) est.net_value = std::max(est.net_value, v);
  est.value = est.net_value;
  est.candidates = static_cast<int>(net_disc.size());

  BinnedData bz = bin_samples(zs, mcfg.d, mcfg.d == 1 ? scfg.bins : 64);
  const int total_runs = 2 * scfg.restarts;
  std::vector<double> run_vals(static_cast<size_t>(total_runs), 0.0);
  par::for_each_task(static_cast<size_t>(total_runs), [&](size_t run) {
    double sign = run % 2 == 0 ? 1.0 : -1.0;
    GeneratorParams g = run < 2
                            ? GeneratorParams::identity(mcfg)
                            : GeneratorParams::random(mcfg, child_seed(scfg.seed, 7000 + run), 0.6);
    DiscriminatorParams xi =
        run < 2 ? DiscriminatorParams::constant_half(mcfg)
                : DiscriminatorParams::random(mcfg, child_seed(scfg.seed, 7100 + run), 1.0);
    const size_t np = g.n_params();
    std::vector<GenPoint> cache(bz.centers.size());
    for (size_t b = 0; b < bz.centers.size(); ++b)
      eval_generator_with_grad(g, bz.centers[b], cache[b], nullptr);
    // population side on a fixed z-quadrature grid
    const int qres = mcfg.d == 1 ? 512 : 24;
    std::vector<Point> qz;
    if (mcfg.d == 1) {
      for (int i = 0; i < qres; ++i) qz.push_back(Point((i + 0.5) / qres));
    } else {
      for (int i = 0; i < qres; ++i)
        for (int j = 0; j < qres; ++j)
          qz.push_back(Point((i + 0.5) / qres, (j + 0.5) / qres));
    }
    std::vector<GenPoint> qcache(qz.size());
    for (size_t b = 0; b < qz.size(); ++b)
      eval_generator_with_grad(g, qz[b], qcache[b], nullptr);
    std::vector<double> dgrad(xi.n_params()), dtmp(xi.n_params()), ggrad(np);
    const double qw = 1.0 / static_cast<double>(qz.size());
    for (int it = 0; it < scfg.iters; ++it) {
      std::fill(dgrad.begin(), dgrad.end(), 0.0);
      std::fill(ggrad.begin(), ggrad.end(), 0.0);
      auto accumulate = [&](const GenPoint& gp, double w) {
        double v = xi.value(gp.y);
        double f = -w / (1.0 - v);
        xi.gradient_coef(gp.y, dtmp);
        for (size_t k = 0; k < dgrad.size(); ++k) dgrad[k] += f * dtmp[k];
        double xg[2] = {0.0, 0.0};
        xi.gradient_y(gp.y, xg);
        for (size_t k = 0; k < np; ++k) {
          double dy = xg[0] * gp.dy1[k];
          if (g.dim() == 2) dy += xg[1] * gp.dy2[k];
          ggrad[k] += f * dy;
        }
      };
      for (size_t b = 0; b < bz.centers.size(); ++b) accumulate(cache[b], sign * bz.weights[b]);
      for (size_t b = 0; b < qcache.size(); ++b) accumulate(qcache[b], -sign * qw);
      for (size_t k = 0; k < dgrad.size(); ++k) xi.coef()[k] += scfg.lr * dgrad[k];
      xi.project(mcfg);
      auto& c1 = g.coef1();
      for (size_t k = 0; k < c1.size(); ++k) c1[k] += scfg.lr * ggrad[k];
      if (g.dim() == 2) {
        auto& c2 = g.coef2();
        for (size_t k = 0; k < c2.size(); ++k) c2[k] += scfg.lr * ggrad[c1.size() + k];
      }
      g.project();
      for (size_t b = 0; b < bz.centers.size(); ++b)
        eval_generator_with_grad(g, bz.centers[b], cache[b], &cache[b].y);
      for (size_t b = 0; b < qz.size(); ++b)
        eval_generator_with_grad(g, qz[b], qcache[b], &qcache[b].y);
    }
    run_vals[run] = exact_gap(g, xi);
  });
  for (double v : run_vals) est.value = std::max(est.value, v);
  est.candidates += total_runs;
  return est;
}

// ---------------------------------------------------------------------------
// decomposition audit and Lipschitz checks

DecompositionReport decomposition_audit(const GridDensity& f_mu, const GeneratorParams& trained,
                                        double eps_gen_mu, double eps_gen_lambda,
                                        const ModelConfig& mcfg, uint64_t seed) {
  for (double v : {eps_gen_mu, eps_gen_lambda})
    if (!std::isfinite(v)) throw input_error("decomposition_audit: non-finite input");
  DecompositionReport rep;
  rep.eps_gen_mu = eps_gen_mu;
  rep.eps_gen_lambda = eps_gen_lambda;
  GridDensity f_trained = generator_density(trained, f_mu.resolution());
  rep.jsd_achieved = jsd(f_mu, f_trained);

  // generator-side model error: best Rosenblatt fit inside the family
  TransportFit fit = rosenblatt_transport(f_mu, mcfg);
  rep.eps_model_g = jsd(f_mu, generator_density(fit.params, f_mu.resolution()));

  // discriminator-side model error: optimal-discriminator risk minus the
  // best trained family member, maximized over probe generators
  std::vector<GeneratorParams> probes;
  probes.push_back(GeneratorParams::identity(mcfg));
  probes.push_back(fit.params);
  probes.push_back(GeneratorParams::random(mcfg, child_seed(seed, 1), 0.8));
  probes.push_back(GeneratorParams::random(mcfg, child_seed(seed, 2), 1.5));
  double worst = 0.0;
  for (const auto& probe : probes) {
    GridDensity f_phi = generator_density(probe, f_mu.resolution());
    GridDensity xi_opt = optimal_discriminator(f_mu, f_phi);
    double l_opt = population_risk_grid(f_mu, f_phi, xi_opt).L;
    // inner maximization over the parametric family
    double best_family = -1e300;
    for (int start = 0; start < 3; ++start) {
      DiscriminatorParams xi =
          start == 0 ? DiscriminatorParams::constant_half(mcfg)
                     : DiscriminatorParams::random(mcfg, child_seed(seed, 100 + start), 1.0);
      std::vector<double> grad(xi.n_params()), tmp(xi.n_params());
      for (int it = 0; it < 300; ++it) {
        std::fill(grad.begin(), grad.end(), 0.0);
        for (size_t c = 0; c < f_mu.cells(); ++c) {
          Point y = f_mu.center(c);
          xi.gradient_coef(y, tmp);
          double v = xi.value(y);
          double f = 0.5 * f_mu.cell_volume() *
                     (f_mu.value(c) / v - f_phi.value(c) / (1.0 - v));
          for (size_t k = 0; k < grad.size(); ++k) grad[k] += f * tmp[k];
        }
        for (size_t k = 0; k < grad.size(); ++k) xi.coef()[k] += 0.1 * grad[k];
        xi.project(mcfg);
      }
      double l_fam = population_risk_grid(f_mu, f_phi, [&] {
                       GridDensity vals(f_mu.dim(), f_mu.resolution(), f_mu.domain());
                       for (size_t c = 0; c < vals.cells(); ++c)
                         vals.value(c) = xi.value(vals.center(c));
                       return vals;
                     }()).L;
      best_family = std::max(best_family, l_fam);
    }
    worst = std::max(worst, l_opt - best_family);
  }
  rep.eps_model_d = worst;

  double rhs = rep.eps_model_g + rep.eps_model_d + rep.eps_gen_mu + rep.eps_gen_lambda;
  rep.slack = rhs + kAuditTolerance - rep.jsd_achieved;
  rep.pass = rep.slack >= 0.0;
  return rep;
}

LipschitzCheckReport lipschitz_bounds_check(int pairs, const ModelConfig& mcfg, uint64_t seed,
                                            size_t empirical_n) {
  if (pairs < 1) throw input_error("lipschitz_bounds_check: pairs must be >= 1");
  LipschitzCheckReport rep;
  rep.pairs = pairs;
  GridDensity f_mu = GridDensity::from_function(
      mcfg.d, mcfg.grid_resolution(),
      [](const Point& y) { return 1.0 + 0.5 * std::sin(6.283185307179586 * y[0]); });
  std::vector<Point> ysamp, zsamp;
  {
    Rng rng(child_seed(seed, 4242));
    for (size_t i = 0; i < empirical_n; ++i) {
      Point a, b;
      a.dim = b.dim = mcfg.d;
      for (int ax = 0; ax < mcfg.d; ++ax) {
        a[ax] = rng.next_double();
        b[ax] = rng.next_double();
      }
      ysamp.push_back(a);
      zsamp.push_back(b);
    }
  }
  auto sup_disc_dist = [&](const DiscriminatorParams& a, const DiscriminatorParams& b) {
    double mx = 0.0;
    if (mcfg.d == 1) {
      const int grid = 2048;
      for (int i = 0; i <= grid; ++i) {
        Point y(static_cast<double>(i) / grid);
        mx = std::max(mx, std::abs(a.value(y) - b.value(y)));
      }
    } else {
      const int grid = 96;
      for (int i = 0; i <= grid; ++i)
        for (int j = 0; j <= grid; ++j) {
          Point y(static_cast<double>(i) / grid, static_cast<double>(j) / grid);
          mx = std::max(mx, std::abs(a.value(y) - b.value(y)));
        }
    }
    return mx;
  };
  auto sup_gen_dist = [&](const GeneratorParams& a, const GeneratorParams& b) {
    double mx = 0.0;
    const int zg = 512;
    if (mcfg.d == 1) {
      ConditionalMap ma = a.first_map(), mb = b.first_map();
      double wa = 0.5, wb = 0.5;
      for (int i = 0; i <= zg; ++i) {
        double z = static_cast<double>(i) / zg;
        wa = ma.inverse_from(z, wa);
        wb = mb.inverse_from(z, wb);
        mx = std::max(mx, std::abs(wa - wb));
      }
    } else {
      for (int i = 0; i < 24; ++i)
        for (int j = 0; j < 24; ++j) {
          Point z((i + 0.5) / 24, (j + 0.5) / 24);
          Point pa = a.apply(z), pb = b.apply(z);
          double d = std::hypot(pa[0] - pb[0], pa[1] - pb[1]);
          mx = std::max(mx, d);
        }
    }
    return mx;
  };

  Rng rng(seed);
  for (int p = 0; p < pairs; ++p) {
    auto xi = DiscriminatorParams::random(mcfg, rng.next_u64(), 1.5);
    auto xi2 = DiscriminatorParams::random(mcfg, rng.next_u64(), 1.5);
    auto g = GeneratorParams::random(mcfg, rng.next_u64(), 1.0);
    auto g2 = GeneratorParams::random(mcfg, rng.next_u64(), 1.0);
    double dxi = sup_disc_dist(xi, xi2);
    double dphi = sup_gen_dist(g, g2);
    const double invB = 1.0 / mcfg.B;

    auto fx1 = [&](const Point& y) { return xi.value(y); };
    auto fx2 = [&](const Point& y) { return xi2.value(y); };
    double lmu1 = population_risk_mu(f_mu, fx1), lmu2 = population_risk_mu(f_mu, fx2);
    double bound_mu = invB * dxi;
    double lam1 = population_risk_lambda(g, fx1), lam2 = population_risk_lambda(g2, fx2);
    double bound_lam = invB * (dxi + mcfg.C1 * dphi);

    std::vector<double> v1(ysamp.size()), v2(ysamp.size());
    for (size_t i = 0; i < ysamp.size(); ++i) {
      v1[i] = std::log(xi.value(ysamp[i]));
      v2[i] = std::log(xi2.value(ysamp[i]));
    }
    double em1 = sorted_mean(v1), em2 = sorted_mean(v2);
    std::vector<double> w1(zsamp.size()), w2(zsamp.size());
    for (size_t i = 0; i < zsamp.size(); ++i) {
      w1[i] = std::log(1.0 - xi.value(g.apply(zsamp[i])));
      w2[i] = std::log(1.0 - xi2.value(g2.apply(zsamp[i])));
    }
    double el1 = sorted_mean(w1), el2 = sorted_mean(w2);

    const double tol = 1e-9;
    struct Row {
      double diff, bound;
    } rows[4] = {{std::abs(lmu1 - lmu2), bound_mu},
                 {std::abs(em1 - em2), bound_mu},
                 {std::abs(lam1 - lam2), bound_lam},
                 {std::abs(el1 - el2), bound_lam}};
    for (const auto& r : rows) {
      double ratio = r.bound > 0 ? r.diff / r.bound : (r.diff > 0 ? 1e300 : 0.0);
      rep.max_ratio = std::max(rep.max_ratio, ratio);
      if (r.diff > r.bound + tol) ++rep.violations;
    }
  }
  rep.pass = rep.violations == 0;
  return rep;
}

}  // namespace gal
