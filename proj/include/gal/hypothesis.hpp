#ifndef GAL_HYPOTHESIS_HPP
#define GAL_HYPOTHESIS_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "gal/common.hpp"
#include "gal/measures.hpp"

namespace gal {

// Constants of the Hölder model (dimensions, regularity, norm budgets) plus
// the finite-parameter surrogate sizes. The paper-side constants are
// configuration because only their existence is asserted, not their values.
struct ModelConfig {
  int d = 1;
  int k = 2;
  double alpha = 1.0;
  double K = 1e4;      // generator C^{k,alpha} budget
  double K_hat = 1e4;  // inverse-generator budget
  double B = 0.1;      // discriminator clamp, in (0, 1/2)
  double C1 = 8.0;     // discriminator Lipschitz budget
  double C2 = 80.0;    // discriminator C^{k-1,alpha} budget
  double kappa = 1e-3;

  int gen_basis = 8;    // control points per conditional map
  int gen_degree = 3;   // B-spline degree of the derivative field
  int disc_degree = 6;  // polynomial degree (per axis when d = 2)
  int grid_resolution() const { return d == 1 ? 512 : 256; }

  void validate() const;
  bool high_regularity() const { return k > 2.0 - alpha + 0.5 * d; }
};

// Clamped uniform B-spline basis on [0,1].
class BSplineBasis {
 public:
  BSplineBasis() = default;
  BSplineBasis(int n_ctrl, int degree);

  int size() const { return n_; }
  int degree() const { return p_; }

  // nonzero basis values at t: vals[0..p] for indices first..first+p
  void eval(double t, int& first, double* vals) const;
  void eval_with_derivs(double t, int& first, double* vals, double* d1, double* d2) const;

  // value of sum_i c_i B_i(t)
  double value(const std::vector<double>& c, double t) const;
  double derivative(const std::vector<double>& c, double t) const;
  double second_derivative(const std::vector<double>& c, double t) const;

  // antiderivative of the spline: A(y) = int_0^y sum c_i B_i
  double antiderivative(const std::vector<double>& c, double y) const;
  // d A(y) / d c_i for all i (size n); O(p) nonzero suffix structure
  void antiderivative_grad(double y, std::vector<double>& grad) const;

  double knot(int i) const { return knots_[static_cast<size_t>(i)]; }

 private:
  int find_span(double t) const;

  int n_ = 0;
  int p_ = 0;
  std::vector<double> knots_;       // clamped, degree p
  std::vector<double> int_knots_;   // clamped, degree p+1 (for antiderivative)
  std::vector<double> int_weights_; // (t_{i+p+1} - t_i) / (p+1)
};

// Monotone conditional map psi(y) = int_0^y w / int_0^1 w with strictly
// positive derivative field w(t) = sum c_i B_i(t), c_i >= floor. Convex-hull
// property of the B-spline basis makes the floor structural.
struct ConditionalMap {
  const BSplineBasis* basis = nullptr;
  std::vector<double> coef;
  double floor = 1e-6;

  double total() const;                   // int_0^1 w
  double forward(double y) const;         // psi(y)
  double deriv(double y) const;           // psi'(y)
  double second(double y) const;          // psi''(y)
  double third(double y) const;           // psi'''(y)
  double inverse(double z) const;         // psi^{-1}(z), Newton + bisection
  double inverse_from(double z, double guess) const;
};

// Triangular bijection phi: [0,1]^d -> [0,1]^d, d <= 2, stored through its
// inverse psi = phi^{-1} (the conditional-CDF direction, where the
// smoothness of nice targets lives). Pushforward density f_phi = |det Dpsi|.
class GeneratorParams {
 public:
  GeneratorParams() = default;
  GeneratorParams(int dim, int basis, int degree, double floor = 1e-6);

  static GeneratorParams identity(const ModelConfig& cfg);
  static GeneratorParams random(const ModelConfig& cfg, uint64_t seed, double strength = 1.0);

  int dim() const { return dim_; }
  int basis_size() const { return basis_.size(); }
  const BSplineBasis& basis() const { return basis_; }
  double floor_value() const { return floor_; }

  // raw parameters: coef1 (basis), then coef2 (basis*basis) when d = 2
  std::vector<double>& coef1() { return coef1_; }
  const std::vector<double>& coef1() const { return coef1_; }
  std::vector<double>& coef2() { return coef2_; }
  const std::vector<double>& coef2() const { return coef2_; }

  size_t n_params() const { return coef1_.size() + coef2_.size(); }
  void project();  // clamp coefficients into [floor, coef_cap]
  void validate() const;

  Point apply(const Point& z) const;               // phi(z)
  Point apply_inverse(const Point& y) const;       // psi(y)
  double density_at(const Point& y) const;         // f_phi(y) = |det Dpsi(y)|

  // conditional map in y2 for the slice y1 (d = 2)
  ConditionalMap slice_second(double y1) const;
  ConditionalMap first_map() const;

  double coef_cap = 64.0;

 private:
  int dim_ = 1;
  BSplineBasis basis_;
  double floor_ = 1e-6;
  std::vector<double> coef1_;
  std::vector<double> coef2_;
};

GridDensity generator_density(const GeneratorParams& g, int resolution = 0);

struct TransportFit {
  GeneratorParams params;
  double sup_error = 0.0;  // sup |phi_fit - phi_target| over probe grid
};

// Constructive Rosenblatt transport: tabulated conditional inverse-CDFs of f
// fitted by the parametric family (linear least squares on the derivative
// fields). Requires f >= kappa > 0 on the grid and d <= 2.
TransportFit rosenblatt_transport(const GridDensity& f, const ModelConfig& cfg);

// Discriminator xi(y) = B + (1-2B) * logistic(p(y)) with a tensor polynomial
// p. The clamp into [B, 1-B] is structural.
class DiscriminatorParams {
 public:
  DiscriminatorParams() = default;
  DiscriminatorParams(int dim, int degree, double B);

  static DiscriminatorParams constant_half(const ModelConfig& cfg);
  static DiscriminatorParams random(const ModelConfig& cfg, uint64_t seed, double strength = 1.0);

  int dim() const { return dim_; }
  int degree() const { return degree_; }
  double clamp() const { return B_; }
  std::vector<double>& coef() { return coef_; }
  const std::vector<double>& coef() const { return coef_; }
  size_t n_params() const { return coef_.size(); }

  double poly(const Point& y) const;
  void poly_basis(const Point& y, std::vector<double>& basis) const;
  double value(const Point& y) const;                 // xi(y) in [B, 1-B]
  void gradient_y(const Point& y, double* grad) const;  // D xi
  // d xi / d coef into grad (size n_params)
  void gradient_coef(const Point& y, std::vector<double>& grad) const;

  double lipschitz_bound() const;  // certified upper bound for |D xi|_2
  double second_derivative_bound() const;
  // scale coefficients so lipschitz_bound() <= C1 and the certified
  // C^{1,1} norm stays below C2
  void project(const ModelConfig& cfg);

 private:
  int dim_ = 1;
  int degree_ = 6;
  double B_ = 0.1;
  std::vector<double> coef_;
};

// pointwise f_mu / (f_mu + f_phi); result is a grid table, not a density
GridDensity optimal_discriminator(const GridDensity& f_mu, const GridDensity& f_phi);

// Scalar field with analytic derivatives, the carrier for Hölder norms.
struct ScalarField {
  int dim = 1;
  // D_beta f, beta per-axis derivative orders (beta = {0,0} is the value)
  std::function<double(const Point&, const std::array<int, 2>&)> deriv;

  double value(const Point& p) const { return deriv(p, {0, 0}); }
};

struct HolderNormEstimate {
  double lower = 0.0;  // certified lower bound (achieved on probes)
  double upper = 0.0;  // heuristic upper bound
  double ck_part = 0.0;
  double holder_part = 0.0;
};

// ||f||_{C^{k,alpha}} = max_{|beta|<=k} sup |D_beta f|  +  max_{|beta|=k} [D_beta f]_alpha
HolderNormEstimate holder_norm(const ScalarField& f, int k_order, double alpha,
                               int grid_res = 256, int pair_samples = 100000,
                               uint64_t seed = 20240901);

// vector-field norm (Euclidean over components), for the component bounds
HolderNormEstimate holder_norm_vector(const std::vector<ScalarField>& comps, int k_order,
                                      double alpha, int grid_res = 256,
                                      int pair_samples = 100000, uint64_t seed = 20240901);

ScalarField discriminator_field(const DiscriminatorParams& xi);
// conditional-map fields of the generator's inverse (d=1: the full map)
ScalarField generator_inverse_field(const GeneratorParams& g, int coord);

void save_generator(const GeneratorParams& g, const std::string& path);
GeneratorParams load_generator(const std::string& path);
void save_discriminator(const DiscriminatorParams& xi, const std::string& path);
DiscriminatorParams load_discriminator(const std::string& path);

}  // namespace gal

#endif  // GAL_HYPOTHESIS_HPP
