#ifndef GAL_ENTROPY_HPP
#define GAL_ENTROPY_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "gal/common.hpp"
#include "gal/hypothesis.hpp"

namespace gal {

struct HolderBall {
  int d = 1;
  int k = 0;          // derivative order of the ball (0: Hölder/Lipschitz)
  double alpha = 1.0;
  double radius = 1.0;
};

// piecewise-linear table on the uniform node mesh over [0,1]
struct FunctionTable {
  std::vector<double> values;
  double at(double x) const;
  double sup_dist(const FunctionTable& o) const;
};

using Fn1D = std::function<double(double)>;

// Constructive sup-norm epsilon-net of a C^{0,alpha} ball (d = 1): quantized
// value chains on a mesh whose pitch matches the Hölder modulus. Cardinality
// is exact (chain-counting DP); members are materialized when few enough.
class SupNet {
 public:
  double epsilon = 0.0;
  double pitch = 0.0;     // mesh h
  double quantum = 0.0;   // value quantization delta
  double radius = 1.0;
  double alpha = 1.0;
  int nodes = 0;          // mesh nodes = 1/h + 1
  int levels = 0;         // value levels per node
  double log_cardinality = 0.0;
  bool materialized = false;
  std::vector<FunctionTable> members;

  // quantization witness: a net member within epsilon of the ball member f
  FunctionTable project(const Fn1D& f) const;
};

SupNet build_sup_net(const HolderBall& ball, double epsilon, size_t materialize_limit = 400000);

// C^1-norm net of a C^{1,alpha} ball (d = 1), assembled from a sup-net of the
// derivative ball and a constant net of pitch epsilon/4 on [-radius, radius]
class C1Net {
 public:
  double epsilon = 0.0;
  SupNet derivative_net;
  std::vector<double> constants;
  double log_cardinality = 0.0;

  struct Member {
    double constant = 0.0;
    FunctionTable derivative;
    double value(double x) const;  // constant + int_0^x derivative
  };
  Member project(const Fn1D& f, const Fn1D& df) const;
};

C1Net build_c1_net(const HolderBall& ball, double epsilon);

// random ball members built to satisfy the constraints exactly
// (slope-capped piecewise-linear for C^{0,alpha}; integrated for C^{1,alpha})
FunctionTable random_holder_member(const HolderBall& ball, int nodes, uint64_t seed);

struct CoveringReport {
  double epsilon = 0.0;
  double log_net_size = 0.0;
  double log_bound = 0.0;  // gamma * epsilon^{-d/(alpha+k)}
  double verified_fraction = 0.0;
  size_t probes = 0;
};

CoveringReport verify_sup_net(const HolderBall& ball, double epsilon, size_t probes,
                              uint64_t seed, double gamma_for_bound);
CoveringReport verify_c1_net(const HolderBall& ball, double epsilon, size_t probes,
                             uint64_t seed, double gamma_for_bound);

// exact covering number of a finite metric space by exhaustive search
struct FiniteMetricSpace {
  std::vector<std::vector<double>> dist;
  size_t size() const { return dist.size(); }
};

FiniteMetricSpace random_finite_space(size_t points, int dim, uint64_t seed);
int exact_covering_number(const FiniteMetricSpace& space, const std::vector<int>& subset,
                          double epsilon);
int greedy_covering_number(const FiniteMetricSpace& space, const std::vector<int>& subset,
                           double epsilon);

struct SubsetInequalityReport {
  int spaces = 0;
  int comparisons = 0;
  int violations = 0;
  bool pass = false;
};

// N(T', rho, eps) <= N(T, rho, eps/2) on exhaustively solved instances
SubsetInequalityReport covering_subset_inequality_check(int spaces, size_t max_points,
                                                        const std::vector<double>& epsilons,
                                                        uint64_t seed);

struct DudleyResult {
  double closed_form = 0.0;
  double quadrature = 0.0;
};

// int_0^delta sqrt(gamma eps^{-s}) deps = sqrt(gamma) delta^{1-s/2} / (1-s/2),
// cross-checked by dyadic Gauss-Legendre quadrature; s >= 2 diverges
DudleyResult dudley_integral(double gamma, double s, double delta);

struct RateConstants {
  double gamma1_hat = 0.0;
  double gamma2_hat = 0.0;
  double gamma3_hat = 0.0;
  double tau_threshold_mu = 0.0;      // 1 / sqrt(gamma3_hat)
  double tau_threshold_lambda = 0.0;  // sqrt(2 (log B)^2)
  double entropy_exponent = 0.0;      // s = d / (alpha + k - 2)
};

// plug-in constants of the rate machinery; gamma_upper is the metric-entropy
// constant gamma(d, 1, alpha+k-2) taken as an input, delta_rho the measured
// diameter of the discriminator family under the rho metric
RateConstants rate_constants(const ModelConfig& cfg, double c_sys, double l_obs,
                             double gamma_upper, double delta_rho);

// diameter of the discriminator family under rho = sqrt(C) L (C1/B^2 +
// sqrt(d)/B) ||.||_{C^1}, estimated over random pairs
double discriminator_rho_diameter(const ModelConfig& cfg, double c_sys, double l_obs,
                                  int pairs, uint64_t seed);

void save_covering_reports(const std::vector<CoveringReport>& reports, const std::string& path);

}  // namespace gal

#endif  // GAL_ENTROPY_HPP
