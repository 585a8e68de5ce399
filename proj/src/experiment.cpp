#include "gal/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "gal/dynamics.hpp"
#include "gal/parallel.hpp"
#include "gal/report.hpp"
#include "gal/rng.hpp"

namespace gal {

void ExperimentConfig::validate() const {
  observable.validate();
  model.validate();
  if (n_grid.size() < 2) throw input_error("experiment: n_grid needs >= 2 entries");
  for (size_t i = 1; i < n_grid.size(); ++i)
    if (n_grid[i] <= n_grid[i - 1])
      throw input_error("experiment: n_grid must be strictly increasing");
  if (seeds.empty()) throw input_error("experiment: need at least one seed");
  if (source == DataSource::CatTrajectory && model.d != 2)
    throw input_error("experiment: cat-map data requires d = 2");
  if (source == DataSource::DoublingTrajectory && model.d != 1)
    throw input_error("experiment: doubling-map data requires d = 1");
}

ExperimentConfig ExperimentConfig::from_config(const Config& c) {
  ExperimentConfig e;
  std::string src = c.get_str("experiment.system", "doubling");
  if (src == "doubling")
    e.source = DataSource::DoublingTrajectory;
  else if (src == "cat")
    e.source = DataSource::CatTrajectory;
  else if (src == "iid")
    e.source = DataSource::Iid;
  else
    throw input_error("experiment.system must be doubling, cat or iid");

  e.model.d = c.get_int("model.d", src == "cat" ? 2 : 1);
  e.model.k = c.get_int("model.k", 2);
  e.model.alpha = c.get_double("model.alpha", 1.0);
  e.model.B = c.get_double("model.B", 0.1);
  e.model.C1 = c.get_double("model.C1", 8.0);
  e.model.C2 = c.get_double("model.C2", 80.0);
  e.model.K = c.get_double("model.K", 1e4);
  e.model.K_hat = c.get_double("model.K_hat", 1e4);
  e.model.kappa = c.get_double("model.kappa", 1e-3);
  e.model.gen_basis = c.get_int("model.gen_basis", 8);
  e.model.gen_degree = c.get_int("model.gen_degree", 3);
  e.model.disc_degree = c.get_int("model.disc_degree", e.model.d == 1 ? 6 : 4);

  e.observable.eps = c.get_double("observable.eps", 0.25);
  e.observable.dim = e.model.d;
  e.warp_seed = c.get_u64("observable.warp_seed", 2718);
  e.warp_strength = c.get_double("observable.warp_strength", 0.9);
  if (e.warp_strength > 0.0)
    e.observable.warp = GeneratorParams::random(e.model, e.warp_seed, e.warp_strength);

  e.train.iterations = c.get_int("train.iterations", 20000);
  e.train.disc_steps = c.get_int("train.disc_steps", 5);
  e.train.lr_gen = c.get_double("train.lr_gen", 1e-2);
  e.train.lr_disc = c.get_double("train.lr_disc", 3e-2);
  e.train.restarts = c.get_int("train.restarts", 4);
  e.train.bins = c.get_int("train.bins", 2048);
  e.train.polish_iters = c.get_int("train.polish_iters", 400);
  e.train.warm_start = c.get_bool("train.warm_start", false);

  e.sup_search.restarts = c.get_int("sup_search.restarts", 4);
  e.sup_search.iters = c.get_int("sup_search.iters", 200);
  e.sup_search.lr = c.get_double("sup_search.lr", 0.08);
  e.sup_search.net_size = c.get_int("sup_search.net_size", 64);
  e.sup_search.bins = c.get_int("sup_search.bins", 4096);

  auto ns = c.get_u64s("experiment.n_grid", {});
  if (!ns.empty()) {
    e.n_grid.clear();
    for (uint64_t n : ns) e.n_grid.push_back(static_cast<size_t>(n));
  }
  auto seeds = c.get_u64s("experiment.seeds", {});
  if (!seeds.empty()) e.seeds = seeds;
  e.out_dir = c.get_str("experiment.out", "out");
  e.measure_generalization = c.get_bool("experiment.measure_generalization", true);
  e.validate();
  return e;
}

std::vector<Point> make_dataset(const ExperimentConfig& cfg, size_t n, uint64_t seed) {
  std::vector<Point> out;
  out.reserve(n);
  switch (cfg.source) {
    case DataSource::DoublingTrajectory: {
      Trajectory t = generate_doubling_trajectory(seed, n);
      for (const auto& s : t.states) out.push_back(apply_g(cfg.observable, s));
      break;
    }
    case DataSource::CatTrajectory: {
      auto sys = TorusAutomorphism::cat_map();
      Point x0 = random_torus_point(2, child_seed(seed, 0x1d));
      Trajectory t = generate_trajectory(sys, x0, n, seed);
      for (const auto& s : t.states) out.push_back(apply_g(cfg.observable, s));
      break;
    }
    case DataSource::Iid: {
      out.resize(n);
      const int d = cfg.model.d;
      par::for_each(n, [&](size_t i) {
        Rng rng(child_seed(seed, i));
        Point x;
        x.dim = d;
        for (int ax = 0; ax < d; ++ax) x[ax] = rng.next_double();
        out[i] = apply_g(cfg.observable, x);
      });
      break;
    }
  }
  return out;
}

GridDensity target_density(const ExperimentConfig& cfg) {
  // the invariant measure of both data systems is Lebesgue; psi pushes it to
  // the uniform density exactly, so the target is the warp pushforward
  GridDensity f_nu =
      GridDensity::uniform(cfg.model.d, cfg.model.grid_resolution(), Domain::Torus);
  return pushforward_density(cfg.observable, f_nu);
}

double fit_loglog_slope(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 2) throw input_error("fit_loglog_slope: need >= 2 points");
  double sx = 0, sy = 0, sxy = 0, sxx = 0;
  for (const auto& [n, v] : points) {
    if (!(n > 0.0) || !(v > 0.0))
      throw input_error("fit_loglog_slope: nonpositive coordinate");
    double x = std::log(n), y = std::log(v);
    sx += x;
    sy += y;
    sxy += x * y;
    sxx += x * x;
  }
  const double m = static_cast<double>(points.size());
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

double median(std::vector<double> v) {
  if (v.empty()) throw input_error("median: empty input");
  std::sort(v.begin(), v.end());
  size_t m = v.size() / 2;
  return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

RateReport run_rate_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  RateReport rep;
  rep.n_grid = cfg.n_grid;
  GridDensity f_mu = target_density(cfg);

  const size_t cells = cfg.n_grid.size() * cfg.seeds.size();
  std::vector<RateRow> rows(cells);
  par::for_each_task(cells, [&](size_t cell) {
    const size_t ni = cell / cfg.seeds.size();
    const size_t si = cell % cfg.seeds.size();
    RateRow row;
    row.n = cfg.n_grid[ni];
    row.seed = cfg.seeds[si];
    std::vector<Point> y = make_dataset(cfg, row.n, row.seed);
    const uint64_t noise_seed = child_seed(row.seed, 0x707);
    try {
      TrainResult tr = train_gal(y, noise_seed, cfg.model, cfg.train);
      GridDensity f_hat = generator_density(tr.generator, f_mu.resolution());
      row.jsd = jsd(f_mu, f_hat);
      row.converged = tr.converged;
    } catch (const training_error&) {
      row.jsd = std::log(2.0);  // flagged cell: report the divergence ceiling
      row.converged = false;
    }
    if (cfg.measure_generalization) {
      row.eps_gen_mu = generalization_error_mu(y, f_mu, cfg.model, cfg.sup_search).value;
      std::vector<Point> z = draw_noise(row.n, cfg.model.d, noise_seed);
      row.eps_gen_lambda = generalization_error_lambda(z, cfg.model, cfg.sup_search).value;
    }
    rows[cell] = row;
  });
  rep.rows = rows;
  std::sort(rep.rows.begin(), rep.rows.end(), [](const RateRow& a, const RateRow& b) {
    return a.n != b.n ? a.n < b.n : a.seed < b.seed;
  });

  // per-n medians over seeds
  std::vector<std::pair<double, double>> jsd_pts, jsd_pts_conv, mu_pts, lam_pts;
  for (size_t ni = 0; ni < cfg.n_grid.size(); ++ni) {
    std::vector<double> js, js_conv, mus, lams;
    for (const auto& r : rep.rows) {
      if (r.n != cfg.n_grid[ni]) continue;
      js.push_back(r.jsd);
      if (r.converged) js_conv.push_back(r.jsd);
      mus.push_back(r.eps_gen_mu);
      lams.push_back(r.eps_gen_lambda);
    }
    rep.median_jsd.push_back(median(js));
    rep.median_eps_mu.push_back(median(mus));
    rep.median_eps_lambda.push_back(median(lams));
    double nd = static_cast<double>(cfg.n_grid[ni]);
    if (rep.median_jsd.back() > 0.0) jsd_pts.push_back({nd, rep.median_jsd.back()});
    if (!js_conv.empty() && median(js_conv) > 0.0)
      jsd_pts_conv.push_back({nd, median(js_conv)});
    if (rep.median_eps_mu.back() > 0.0) mu_pts.push_back({nd, rep.median_eps_mu.back()});
    if (rep.median_eps_lambda.back() > 0.0)
      lam_pts.push_back({nd, rep.median_eps_lambda.back()});
  }
  rep.fitted_slope = fit_loglog_slope(jsd_pts);
  rep.fitted_slope_converged_only =
      jsd_pts_conv.size() >= 2 ? fit_loglog_slope(jsd_pts_conv) : rep.fitted_slope;
  if (cfg.measure_generalization) {
    rep.slope_eps_mu = fit_loglog_slope(mu_pts);
    rep.slope_eps_lambda = fit_loglog_slope(lam_pts);
  }

  // envelope constant: the rate statement is asymptotic, so the first grid
  // point is excluded
  double tau = 0.0;
  for (size_t ni = 1; ni < cfg.n_grid.size(); ++ni) {
    double n = static_cast<double>(cfg.n_grid[ni]);
    double env = std::sqrt(std::log(n) / n);
    tau = std::max(tau, rep.median_jsd[ni] / env);
  }
  rep.fitted_tau = tau;
  rep.envelope_from_n = cfg.n_grid.size() > 1 ? cfg.n_grid[1] : cfg.n_grid[0];
  rep.envelope_holds = std::isfinite(tau);
  return rep;
}

void emit_reports(const RateReport& report, const std::string& dir) {
  std::filesystem::create_directories(dir);
  CsvWriter rates({"n", "seed", "jsd", "eps_gen_mu", "eps_gen_lambda"});
  for (const auto& r : report.rows)
    rates.add_row({CsvWriter::fmt(r.n), CsvWriter::fmt(static_cast<size_t>(r.seed)),
                   CsvWriter::fmt(r.jsd), CsvWriter::fmt(r.eps_gen_mu),
                   CsvWriter::fmt(r.eps_gen_lambda)});
  rates.save(dir + "/rates.csv");

  CsvWriter summary({"metric", "value"});
  summary.add_row({"fitted_slope", CsvWriter::fmt(report.fitted_slope)});
  summary.add_row(
      {"fitted_slope_converged_only", CsvWriter::fmt(report.fitted_slope_converged_only)});
  summary.add_row({"fitted_tau", CsvWriter::fmt(report.fitted_tau)});
  summary.add_row({"envelope_from_n", CsvWriter::fmt(report.envelope_from_n)});
  summary.add_row({"slope_eps_gen_mu", CsvWriter::fmt(report.slope_eps_mu)});
  summary.add_row({"slope_eps_gen_lambda", CsvWriter::fmt(report.slope_eps_lambda)});
  for (size_t i = 0; i < report.n_grid.size(); ++i) {
    summary.add_row({"median_jsd_n" + std::to_string(report.n_grid[i]),
                     CsvWriter::fmt(report.median_jsd[i])});
  }
  summary.save(dir + "/summary.csv");

  if (report.rows.empty()) return;  // header-only CSVs, no plot
  PlotSeries pts{"jsd (cells)", {}, {}, false, "#1f6fb2"};
  for (const auto& r : report.rows) {
    pts.x.push_back(static_cast<double>(r.n));
    pts.y.push_back(r.jsd);
  }
  PlotSeries med{"median jsd", {}, {}, true, "#d62728"};
  for (size_t i = 0; i < report.n_grid.size(); ++i) {
    med.x.push_back(static_cast<double>(report.n_grid[i]));
    med.y.push_back(report.median_jsd[i]);
  }
  PlotSeries env{"tau sqrt(log n / n)", {}, {}, true, "#2ca02c"};
  for (size_t i = 0; i < report.n_grid.size(); ++i) {
    double n = static_cast<double>(report.n_grid[i]);
    env.x.push_back(n);
    env.y.push_back(report.fitted_tau * std::sqrt(std::log(n) / n));
  }
  write_loglog_svg(dir + "/rates.svg", "Jensen-Shannon divergence vs sample size",
                   {pts, med, env}, "n", "divergence");
}

}  // namespace gal
