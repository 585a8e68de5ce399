#ifndef GAL_TOWER_HPP
#define GAL_TOWER_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gal/common.hpp"
#include "gal/measures.hpp"
#include "gal/rational.hpp"

namespace gal {

// One cell of a return-time partition: index, return time, base-measure
// weight, and (for concrete 1-d examples) the base interval.
struct TowerCell {
  int index = 0;
  int return_time = 1;
  double weight = 0.0;
  double a = 0.0, b = 0.0;  // base interval [a,b), optional
  bool has_interval = false;
};

struct TowerSpec {
  std::vector<TowerCell> cells;
  double truncation_tail_mass = 0.0;
  // exact dyadic weights 2^{-e} when the spec supports rational mode
  std::vector<Rational> exact_weights;
  Rational exact_truncation{0};
  bool has_exact = false;

  void validate() const;  // weights sum to 1 within 1e-12, R_i >= 1
  const TowerCell* cell_of_point(double x) const;
  const TowerCell& cell_by_index(int idx) const;
};

struct TowerState {
  double base_point = 0.0;  // x in Lambda (interval-based specs)
  int cell = 0;             // containing cell index
  int level = 0;            // 0 <= level < R(cell)
};

using Map1D = std::function<double(double)>;

// induced return map x -> T^{R(x)}(x) for interval-based specs
Map1D make_return_map(const TowerSpec& spec, const Map1D& underlying_map);

// Canonical worked example over the doubling map T(x) = 2x mod 1 with base
// Lambda = (0,1): cells Lambda_i = [2^-i, 2^{1-i}) with R_i = i+1 and
// m_i = 2^-i, i = 1..n_cells, truncated with explicit tail mass 2^-n_cells.
// The level-weighted lift of this spec projects exactly to Lebesgue.
TowerSpec doubling_tower(int n_cells = 62);

TowerState make_state(const TowerSpec& spec, double x, int level);

// hat-T: climb one level, or apply the return map and reset to level 0
TowerState tower_step(const TowerSpec& spec, const TowerState& s, const Map1D& return_map);

// pi(x, l) = T^l(x)
double project(const TowerSpec& spec, const TowerState& s, const Map1D& underlying_map);

struct SemiconjugacyReport {
  double max_discrepancy = 0.0;
  size_t samples = 0;
};

// max over sampled states of |T(pi(s)) - pi(tower_step(s))|
SemiconjugacyReport check_semiconjugacy(const TowerSpec& spec, const Map1D& underlying_map,
                                        const Map1D& return_map, size_t samples, uint64_t seed);

// mu({R > n}) plus the truncation mass (upper bound for truncated specs)
double tail_distribution(const TowerSpec& spec, int n);
// exact dyadic tail for specs carrying rational weights
Rational tail_distribution_exact(const TowerSpec& spec, int n);

struct TailFit {
  double c = 0.0;
  double tau = 0.0;
  bool exponential = false;  // tau < 1
  int fitted_prefix = 0;     // points actually used
};

TailFit fit_tail_rate(const TowerSpec& spec, int n_max);

bool is_aperiodic(const TowerSpec& spec);

struct InvarianceReport {
  double tv_distance = 0.0;
  size_t samples = 0;
  int bins = 0;
};

// Samples tower states with cell probability m_i R_i / (sum m_j R_j) and a
// uniform level, projects to M, and compares the projected histogram before
// and after one application of T. For the doubling tower both histograms
// estimate Lebesgue.
InvarianceReport lift_and_push_measure(const TowerSpec& spec, const Map1D& underlying_map,
                                       size_t samples, uint64_t seed, int bins = 64,
                                       bool weight_by_return_time = true);

// per-level cell counts (levels l with R_i > l), for combinatorial checks
std::vector<int> level_cardinalities(const TowerSpec& spec);

TowerSpec load_tower_spec(const std::string& path);
void save_tower_spec(const TowerSpec& spec, const std::string& path);

struct CheckRow {
  std::string check;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

// the full verdict table for a spec (tail fit, aperiodicity, semi-conjugacy
// and invariance for the doubling example)
std::vector<CheckRow> tower_check_suite(const TowerSpec& spec, size_t samples, uint64_t seed);

void save_check_rows(const std::vector<CheckRow>& rows, const std::string& path);

}  // namespace gal

#endif  // GAL_TOWER_HPP
