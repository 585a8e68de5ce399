#ifndef GAL_EXPERIMENT_HPP
#define GAL_EXPERIMENT_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "gal/config.hpp"
#include "gal/measures.hpp"
#include "gal/observable.hpp"
#include "gal/risk.hpp"

namespace gal {

enum class DataSource { DoublingTrajectory, CatTrajectory, Iid };

struct ExperimentConfig {
  DataSource source = DataSource::DoublingTrajectory;
  ObservableConfig observable;
  ModelConfig model;
  TrainConfig train;
  SupSearchConfig sup_search;
  std::vector<size_t> n_grid = {256, 1024, 4096, 16384, 65536};
  std::vector<uint64_t> seeds = {1, 2, 3, 4, 5};
  std::string out_dir = "out";
  uint64_t warp_seed = 2718;
  double warp_strength = 0.9;
  bool measure_generalization = true;

  void validate() const;
  static ExperimentConfig from_config(const Config& c);
};

struct RateRow {
  size_t n = 0;
  uint64_t seed = 0;
  double jsd = 0.0;
  double eps_gen_mu = 0.0;
  double eps_gen_lambda = 0.0;
  bool converged = true;
};

struct RateReport {
  std::vector<RateRow> rows;  // sorted by (n, seed)
  std::vector<size_t> n_grid;
  std::vector<double> median_jsd;
  std::vector<double> median_eps_mu;
  std::vector<double> median_eps_lambda;
  double fitted_slope = 0.0;
  double fitted_slope_converged_only = 0.0;
  double fitted_tau = 0.0;       // envelope constant for tau sqrt(log n / n)
  size_t envelope_from_n = 0;    // smallest grid n where the envelope holds
  double slope_eps_mu = 0.0;
  double slope_eps_lambda = 0.0;
  bool envelope_holds = false;
};

// y_i ~ observable of the chosen source; the analytic target density is the
// warp pushforward (psi flattens Lebesgue exactly)
std::vector<Point> make_dataset(const ExperimentConfig& cfg, size_t n, uint64_t seed);
GridDensity target_density(const ExperimentConfig& cfg);

RateReport run_rate_experiment(const ExperimentConfig& cfg);

double fit_loglog_slope(const std::vector<std::pair<double, double>>& points);
double median(std::vector<double> v);

void emit_reports(const RateReport& report, const std::string& dir);

}  // namespace gal

#endif  // GAL_EXPERIMENT_HPP
