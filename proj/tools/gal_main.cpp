// Command-line driver: simulation, tower checks, training, rate experiments,
// concentration and entropy suites. Exit codes: 0 all checks passed, 1 a
// check failed, 2 bad input.

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>

#include "gal/concentration.hpp"
#include "gal/config.hpp"
#include "gal/dynamics.hpp"
#include "gal/entropy.hpp"
#include "gal/experiment.hpp"
#include "gal/hypothesis.hpp"
#include "gal/measures.hpp"
#include "gal/observable.hpp"
#include "gal/parallel.hpp"
#include "gal/report.hpp"
#include "gal/risk.hpp"
#include "gal/rng.hpp"
#include "gal/tower.hpp"

namespace {

struct GlobalOpts {
  std::string config_path;
  uint64_t seed = 1;
  std::string out_dir = "out";
  int threads = 0;
};

gal::Config load_config(const GlobalOpts& g) {
  if (g.config_path.empty()) return gal::Config{};
  return gal::Config::from_file(g.config_path);
}

int run_simulate(const GlobalOpts& g, const std::string& system, size_t n) {
  namespace fs = std::filesystem;
  fs::create_directories(g.out_dir);
  gal::Trajectory traj;
  if (system == "doubling") {
    traj = gal::generate_doubling_trajectory(g.seed, n);
  } else if (system == "cat") {
    auto sys = gal::TorusAutomorphism::cat_map();
    traj = gal::generate_trajectory(sys, gal::random_torus_point(2, g.seed), n, g.seed);
  } else if (system == "torus3d") {
    auto sys = gal::TorusAutomorphism::example_3d();
    traj = gal::generate_trajectory(sys, gal::random_torus_point(3, g.seed), n, g.seed);
  } else {
    throw gal::input_error("simulate: unknown system " + system);
  }
  int dim = traj.states.front().dim;
  std::vector<std::string> header{"i"};
  for (int ax = 0; ax < dim; ++ax) header.push_back("x" + std::to_string(ax));
  gal::CsvWriter csv(header);
  for (size_t i = 0; i < traj.states.size(); ++i) {
    std::vector<std::string> row{std::to_string(i)};
    for (int ax = 0; ax < dim; ++ax) row.push_back(gal::CsvWriter::fmt(traj.states[i][ax]));
    csv.add_row(row);
  }
  std::string path = g.out_dir + "/trajectory.csv";
  csv.save(path);
  std::printf("wrote %zu states to %s\n", traj.states.size(), path.c_str());
  return 0;
}

int run_tower_check(const GlobalOpts& g, const std::string& spec_path, size_t samples) {
  gal::TowerSpec spec = spec_path.empty() ? gal::doubling_tower() : gal::load_tower_spec(spec_path);
  auto rows = gal::tower_check_suite(spec, samples, g.seed);
  std::filesystem::create_directories(g.out_dir);
  gal::save_check_rows(rows, g.out_dir + "/tower_checks.csv");
  bool all = true;
  for (const auto& r : rows) {
    std::printf("%-34s value=%-14.6g threshold=%-10.4g %s\n", r.check.c_str(), r.value,
                r.threshold, r.pass ? "pass" : "FAIL");
    all = all && r.pass;
  }
  return all ? 0 : 1;
}

int run_train(const GlobalOpts& g, const gal::Config& c, size_t n) {
  gal::ExperimentConfig ecfg = gal::ExperimentConfig::from_config(c);
  ecfg.out_dir = g.out_dir;
  std::filesystem::create_directories(g.out_dir);
  auto y = gal::make_dataset(ecfg, n, g.seed);
  gal::TrainConfig tcfg = ecfg.train;
  tcfg.log_every = std::max(1, tcfg.iterations / 200);
  tcfg.log_path = g.out_dir + "/training_log.csv";
  auto res = gal::train_gal(y, gal::child_seed(g.seed, 0x707), ecfg.model, tcfg);
  gal::save_generator(res.generator, g.out_dir + "/generator.params");
  gal::save_discriminator(res.discriminator, g.out_dir + "/discriminator.params");
  gal::GridDensity f_mu = gal::target_density(ecfg);
  gal::GridDensity f_hat = gal::generator_density(res.generator, f_mu.resolution());
  double div = gal::jsd(f_mu, f_hat);
  std::printf("trained on n=%zu: best restart %d, inner value %.6f, jsd to target %.6f\n", n,
              res.best_restart, res.inner_value, div);
  std::printf("parameters in %s/generator.params, log in %s\n", g.out_dir.c_str(),
              tcfg.log_path.c_str());
  return 0;
}

int run_rates(const GlobalOpts& g, const gal::Config& c) {
  gal::ExperimentConfig ecfg = gal::ExperimentConfig::from_config(c);
  if (!g.out_dir.empty()) ecfg.out_dir = g.out_dir;
  auto report = gal::run_rate_experiment(ecfg);
  gal::emit_reports(report, ecfg.out_dir);
  std::printf("cells: %zu\n", report.rows.size());
  std::printf("fitted jsd slope: %.4f (converged-only %.4f)\n", report.fitted_slope,
              report.fitted_slope_converged_only);
  std::printf("generalization slopes: mu %.4f, lambda %.4f\n", report.slope_eps_mu,
              report.slope_eps_lambda);
  std::printf("envelope: jsd < %.4f sqrt(log n / n) for n >= %zu\n", report.fitted_tau,
              report.envelope_from_n);
  bool ok = report.envelope_holds && std::isfinite(report.fitted_slope);
  for (const auto& r : report.rows) ok = ok && r.jsd >= 0.0 && r.jsd <= std::log(2.0) + 1e-12;
  return ok ? 0 : 1;
}

int run_concentration(const GlobalOpts& g, const gal::Config& c) {
  std::filesystem::create_directories(g.out_dir);
  bool all = true;

  // (a) i.i.d. Bernoulli mean vs the McDiarmid/Hoeffding bound
  const size_t n_bern = static_cast<size_t>(c.get_int("concentration.bernoulli_n", 100));
  const size_t replicas = static_cast<size_t>(c.get_int("concentration.replicas", 10000));
  auto obs = gal::birkhoff_mean([](const gal::Point& p) { return p[0] < 0.5 ? 0.0 : 1.0; }, 1.0,
                                n_bern, gal::ObsMetric::EuclideanCube);
  gal::ReplicaSource bern = [n_bern](uint64_t rs) {
    gal::Rng rng(rs);
    std::vector<gal::Point> pts(n_bern);
    for (auto& p : pts) p = gal::Point(rng.next_double());
    return pts;
  };
  std::vector<double> c_bound(n_bern, 1.0 / static_cast<double>(n_bern));
  double proxy = gal::mcdiarmid_bound(c_bound);
  auto est = gal::empirical_tail_check(obs, bern, replicas, gal::default_t_grid(std::sqrt(proxy)),
                                       proxy, g.seed);
  gal::save_tail_rows(est.rows, g.out_dir + "/iid_tails.csv");
  std::printf("iid tails vs Hoeffding bound: %s (%zu replicas)\n",
              est.all_pass ? "pass" : "FAIL", est.replicas);
  all = all && est.all_pass;

  // (b) cat-map Birkhoff variance scaling
  auto sys = gal::TorusAutomorphism::cat_map();
  auto f = [](const gal::Point& p) {
    return std::cos(2.0 * M_PI * p[0]) * std::cos(2.0 * M_PI * p[1]);
  };
  std::vector<size_t> n_grid;
  for (auto v : c.get_u64s("concentration.n_grid",
                           {64, 128, 256, 512, 1024, 2048, 4096, 8192, 16384}))
    n_grid.push_back(static_cast<size_t>(v));
  const size_t var_replicas = static_cast<size_t>(c.get_int("concentration.variance_replicas", 2000));
  auto scaling = gal::birkhoff_variance_scaling_system(sys, f, n_grid, var_replicas,
                                                       gal::child_seed(g.seed, 2));
  bool slope_ok = !scaling.degenerate && scaling.slope > -1.2 && scaling.slope < -0.8;
  std::printf("cat-map Birkhoff variance slope: %.4f %s\n", scaling.slope,
              slope_ok ? "pass" : "FAIL");
  all = all && slope_ok;
  {
    gal::CsvWriter csv({"n", "variance"});
    for (size_t i = 0; i < scaling.n_grid.size(); ++i)
      csv.add_row({std::to_string(scaling.n_grid[i]), gal::CsvWriter::fmt(scaling.variances[i])});
    csv.save(g.out_dir + "/birkhoff_variance.csv");
  }

  // (c) fitted Chazottes-Gouëzel constant stability
  std::vector<size_t> cg_ns;
  for (auto v : c.get_u64s("concentration.cg_n", {256, 1024, 4096}))
    cg_ns.push_back(static_cast<size_t>(v));
  const size_t cg_replicas = static_cast<size_t>(c.get_int("concentration.cg_replicas", 10000));
  std::vector<double> chats;
  gal::CsvWriter cg_csv({"n", "c_hat", "c_hat_normalized"});
  for (size_t n : cg_ns) {
    auto fc = gal::fit_cg_constant(sys, f, 2.0 * M_PI, n, cg_replicas, gal::child_seed(g.seed, 3));
    chats.push_back(fc.c_hat);
    cg_csv.add_row({std::to_string(n), gal::CsvWriter::fmt(fc.c_hat),
                    gal::CsvWriter::fmt(fc.c_hat_normalized)});
    std::printf("CG constant at n=%zu: %.6g (normalized %.6g)\n", n, fc.c_hat,
                fc.c_hat_normalized);
  }
  cg_csv.save(g.out_dir + "/cg_constant.csv");
  double cmean = 0.0;
  for (double v : chats) cmean += v;
  cmean /= static_cast<double>(chats.size());
  bool stable = true;
  for (double v : chats) stable = stable && std::abs(v - cmean) <= 0.2 * cmean;
  std::printf("CG constant stability (+-20%% around mean): %s\n", stable ? "pass" : "FAIL");
  all = all && stable;
  return all ? 0 : 1;
}

int run_entropy(const GlobalOpts& g, const gal::Config& c) {
  std::filesystem::create_directories(g.out_dir);
  bool all = true;
  gal::HolderBall lip{1, 0, 1.0, 1.0};
  auto epsilons = c.get_doubles("entropy.epsilons", {0.5, 0.25, 0.125, 0.0625});
  const size_t probes = static_cast<size_t>(c.get_int("entropy.probes", 1000));
  std::vector<gal::CoveringReport> reports;
  std::vector<std::pair<double, double>> size_pts;
  for (double eps : epsilons) {
    auto rep = gal::verify_sup_net(lip, eps, probes, gal::child_seed(g.seed, 7), 8.0);
    reports.push_back(rep);
    size_pts.push_back({1.0 / eps, rep.log_net_size});
    std::printf("sup net eps=%.4g: log size %.3f, coverage %.4f\n", eps, rep.log_net_size,
                rep.verified_fraction);
    all = all && rep.verified_fraction == 1.0;
  }
  gal::save_covering_reports(reports, g.out_dir + "/entropy_nets.csv");
  double expo = gal::fit_loglog_slope(size_pts);
  bool expo_ok = expo > 0.8 && expo < 1.2;
  std::printf("net growth exponent: %.4f %s\n", expo, expo_ok ? "pass" : "FAIL");
  all = all && expo_ok;

  gal::HolderBall c11{1, 1, 1.0, 1.0};
  auto c1rep = gal::verify_c1_net(c11, 0.25, std::min<size_t>(probes, 500),
                                  gal::child_seed(g.seed, 8), 8.0);
  std::printf("C1 net eps=0.25: coverage %.4f\n", c1rep.verified_fraction);
  all = all && c1rep.verified_fraction == 1.0;

  auto sub = gal::covering_subset_inequality_check(30, 12, {0.1, 0.2, 0.4},
                                                   gal::child_seed(g.seed, 9));
  std::printf("covering subset inequality: %d/%d comparisons pass\n",
              sub.comparisons - sub.violations, sub.comparisons);
  all = all && sub.pass;

  gal::Rng rng(gal::child_seed(g.seed, 10));
  double max_diff = 0.0;
  for (int t = 0; t < 50; ++t) {
    double gamma = 0.1 + 5.0 * rng.next_double();
    double s = 0.2 + 1.6 * rng.next_double();
    double delta = 0.1 + 2.0 * rng.next_double();
    auto dud = gal::dudley_integral(gamma, s, delta);
    max_diff = std::max(max_diff, std::abs(dud.closed_form - dud.quadrature));
  }
  bool dud_ok = max_diff < 1e-8;
  std::printf("dudley closed form vs quadrature: max diff %.3g %s\n", max_diff,
              dud_ok ? "pass" : "FAIL");
  all = all && dud_ok;
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"generative adversarial learning laboratory for chaotic data"};
  app.require_subcommand(1);
  GlobalOpts g;
  app.add_option("--config", g.config_path, "configuration file (key = value with sections)");
  app.add_option("--seed", g.seed, "master seed");
  app.add_option("--out", g.out_dir, "output directory");
  app.add_option("--threads", g.threads, "OpenMP thread count (0 = default)");

  auto* sim = app.add_subcommand("simulate", "generate a trajectory and export it as CSV");
  std::string system = "doubling";
  size_t sim_n = 1000;
  sim->add_option("--system", system, "doubling | cat | torus3d");
  sim->add_option("--n", sim_n, "trajectory length");

  auto* tower = app.add_subcommand("tower-check", "verify a Young-tower spec");
  std::string spec_path;
  size_t tower_samples = 1000000;
  tower->add_option("--spec", spec_path, "tower spec file (default: doubling tower)");
  tower->add_option("--samples", tower_samples, "Monte Carlo samples");

  auto* train = app.add_subcommand("train", "train a generator on one dataset");
  size_t train_n = 16384;
  train->add_option("--n", train_n, "sample count");

  auto* rates = app.add_subcommand("rates", "full rate experiment over the n grid");
  auto* conc = app.add_subcommand("concentration", "concentration inequality suite");
  auto* entr = app.add_subcommand("entropy", "metric entropy suite");

  CLI11_PARSE(app, argc, argv);
  gal::par::set_threads(g.threads);

  try {
    gal::Config cfg = load_config(g);
    if (sim->parsed()) return run_simulate(g, system, sim_n);
    if (tower->parsed()) return run_tower_check(g, spec_path, tower_samples);
    if (train->parsed()) return run_train(g, cfg, train_n);
    if (rates->parsed()) return run_rates(g, cfg);
    if (conc->parsed()) return run_concentration(g, cfg);
    if (entr->parsed()) return run_entropy(g, cfg);
  } catch (const gal::input_error& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const gal::config_error& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
