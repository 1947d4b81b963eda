#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace shel {

/// Drift G and diffusion H of the equation
///   dY = (1/2) Y'' dt + G(Y) dt + H(Y) dW.
/// The descriptive fields are metadata consumed by hypothesis checks and
/// run records; they are sampled claims, not proofs.
struct CoefficientPair {
  std::function<double(double)> G;
  std::function<double(double)> H;
  double holder_gamma = 1.0;  // Hoelder exponent claimed for H
  bool lipschitz = false;     // both G and H globally Lipschitz
  bool zero_at_zero = false;  // G(0) = 0 and H(0) = 0
  bool g_is_zero = false;     // G identically zero (lets solvers skip it)
  bool h_is_zero = false;     // H identically zero (noiseless solve)
  std::string name;
  std::string note;
};

/// G(x) = g_scale * x, H(x) = h_scale * x. Lipschitz, vanishing at zero.
CoefficientPair linear_pair(double g_scale, double h_scale);
/// G(x) = g_scale * x * (1 - x), H(x) = h_scale * x. Classic logistic drift.
CoefficientPair logistic_pair(double g_scale, double h_scale);
/// G(x) = g_const (constant drift), H(x) = h_scale * x.
CoefficientPair constant_drift_pair(double g_const, double h_scale);
/// G = 0, H(x) = h_scale * sqrt(max(x, 0)). Hoelder 1/2, not Lipschitz;
/// the canonical square-root diffusion.
CoefficientPair sqrt_plus_pair(double h_scale);
/// G = 0, H(x) = h_scale * |x|^gamma with gamma in (0, 1].
CoefficientPair power_pair(double gamma, double h_scale);
/// G = 0, H = h_const (additive noise).
CoefficientPair additive_pair(double h_const);
/// G(x) = -x log(e + 1/|x|) sign(x), H(x) = h_scale * x. Non-Lipschitz
/// drift with a modulus-of-continuity barely failing Lipschitz; kept as a
/// documented stress example, not covered by the comparison/uniqueness
/// guarantees.
CoefficientPair osgood_example_pair(double h_scale);

/// Named factory used by config files; see the individual factories for
/// the meaning of the two parameters per kind.
CoefficientPair make_coefficients(const std::string& g_kind, double g_param,
                                  const std::string& h_kind, double h_param,
                                  double h_scale);

/// Gaussian mollification at level n:
///   G_n(x) = integral q_{1/n}(x - y) * clip(G(y), [-n, n]) dy,
/// realised as a fixed quadrature over z = sqrt(n) (y - x) in [-8, 8].
/// Every G_n is smooth, bounded and Lipschitz; G_n -> G pointwise wherever
/// G is continuous. The same operator is applied to H.
struct MollifiedPair {
  CoefficientPair base;
  int level = 1;

  double eval_G(double x) const;
  double eval_H(double x) const;

  /// Wraps the mollified maps as a CoefficientPair (lipschitz = true).
  CoefficientPair as_pair() const;

 private:
  friend MollifiedPair mollify(const CoefficientPair&, int, std::size_t);
  std::vector<double> znodes_;
  std::vector<double> zweights_;
};

MollifiedPair mollify(const CoefficientPair& base, int level,
                      std::size_t quad_points = 4001);

/// Max |G_n - G| and |H_n - H| over the sample points, one entry per level.
/// Levels must be increasing; the gaps witness pointwise convergence of the
/// mollification on compacts.
std::vector<double> pointwise_convergence_check(const CoefficientPair& base,
                                                std::span<const int> levels,
                                                std::span<const double> xs);

}  // namespace shel
