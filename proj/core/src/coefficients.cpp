#include "shel/coefficients.hpp"

#include <cmath>
#include <numbers>

#include "shel/errors.hpp"

namespace shel {

CoefficientPair linear_pair(double g_scale, double h_scale) {
  CoefficientPair p;
  p.G = [g_scale](double x) { return g_scale * x; };
  p.H = [h_scale](double x) { return h_scale * x; };
  p.holder_gamma = 1.0;
  p.lipschitz = true;
  p.zero_at_zero = true;
  p.g_is_zero = (g_scale == 0.0);
  p.h_is_zero = (h_scale == 0.0);
  p.name = "linear";
  return p;
}

CoefficientPair logistic_pair(double g_scale, double h_scale) {
  CoefficientPair p;
  p.G = [g_scale](double x) { return g_scale * x * (1.0 - x); };
  p.H = [h_scale](double x) { return h_scale * x; };
  p.holder_gamma = 1.0;
  p.lipschitz = false;  // quadratic drift: only locally Lipschitz
  p.zero_at_zero = true;
  p.g_is_zero = (g_scale == 0.0);
  p.h_is_zero = (h_scale == 0.0);
  p.name = "logistic";
  p.note = "drift is locally Lipschitz only; linear growth fails for |x| >> 1";
  return p;
}

CoefficientPair constant_drift_pair(double g_const, double h_scale) {
  CoefficientPair p;
  p.G = [g_const](double) { return g_const; };
  p.H = [h_scale](double x) { return h_scale * x; };
  p.holder_gamma = 1.0;
  p.lipschitz = true;
  p.zero_at_zero = (g_const == 0.0);
  p.g_is_zero = (g_const == 0.0);
  p.h_is_zero = (h_scale == 0.0);
  p.name = "constant_drift";
  return p;
}

CoefficientPair sqrt_plus_pair(double h_scale) {
  CoefficientPair p;
  p.G = [](double) { return 0.0; };
  p.H = [h_scale](double x) { return h_scale * std::sqrt(std::max(x, 0.0)); };
  p.holder_gamma = 0.5;
  p.lipschitz = false;
  p.zero_at_zero = true;
  p.g_is_zero = true;
  p.h_is_zero = (h_scale == 0.0);
  p.name = "sqrt_plus";
  return p;
}

CoefficientPair power_pair(double gamma, double h_scale) {
  require(gamma > 0.0 && gamma <= 1.0, "power_pair: gamma must be in (0, 1]");
  CoefficientPair p;
  p.G = [](double) { return 0.0; };
  p.H = [gamma, h_scale](double x) {
    return h_scale * std::pow(std::abs(x), gamma);
  };
  p.holder_gamma = gamma;
  p.lipschitz = (gamma == 1.0);
  p.zero_at_zero = true;
  p.g_is_zero = true;
  p.h_is_zero = (h_scale == 0.0);
  p.name = "power";
  return p;
}

CoefficientPair additive_pair(double h_const) {
  CoefficientPair p;
  p.G = [](double) { return 0.0; };
  p.H = [h_const](double) { return h_const; };
  p.holder_gamma = 1.0;
  p.lipschitz = true;
  p.zero_at_zero = (h_const == 0.0);
  p.g_is_zero = true;
  p.h_is_zero = (h_const == 0.0);
  p.name = "additive";
  return p;
}

CoefficientPair osgood_example_pair(double h_scale) {
  CoefficientPair p;
  p.G = [](double x) {
    if (x == 0.0) return 0.0;
    const double s = x > 0.0 ? 1.0 : -1.0;
    return -x * std::log(std::numbers::e + 1.0 / std::abs(x)) * s;
  };
  p.H = [h_scale](double x) { return h_scale * x; };
  p.holder_gamma = 1.0;
  p.lipschitz = false;
  p.zero_at_zero = true;
  p.g_is_zero = false;
  p.h_is_zero = (h_scale == 0.0);
  p.name = "osgood_example";
  p.note =
      "drift modulus x log(e + 1/x) fails Lipschitz at 0; stress example "
      "outside the comparison/uniqueness guarantees";
  return p;
}

CoefficientPair make_coefficients(const std::string& g_kind, double g_param,
                                  const std::string& h_kind, double h_param,
                                  double h_scale) {
  CoefficientPair g_part;
  if (g_kind == "zero") {
    g_part = constant_drift_pair(0.0, 0.0);
  } else if (g_kind == "constant") {
    g_part = constant_drift_pair(g_param, 0.0);
  } else if (g_kind == "linear") {
    g_part = linear_pair(g_param, 0.0);
  } else if (g_kind == "logistic") {
    g_part = logistic_pair(g_param, 0.0);
  } else if (g_kind == "osgood") {
    g_part = osgood_example_pair(0.0);
  } else {
    fail("make_coefficients: unknown drift kind '" + g_kind + "'");
  }

  CoefficientPair h_part;
  if (h_kind == "zero") {
    h_part = additive_pair(0.0);
  } else if (h_kind == "constant") {
    h_part = additive_pair(h_scale);
  } else if (h_kind == "linear") {
    h_part = linear_pair(0.0, h_scale);
  } else if (h_kind == "sqrt_plus") {
    h_part = sqrt_plus_pair(h_scale);
  } else if (h_kind == "power") {
    h_part = power_pair(h_param, h_scale);
  } else {
    fail("make_coefficients: unknown diffusion kind '" + h_kind + "'");
  }

  CoefficientPair p;
  p.G = g_part.G;
  p.H = h_part.H;
  p.holder_gamma = h_part.holder_gamma;
  p.lipschitz = g_part.lipschitz && h_part.lipschitz;
  p.zero_at_zero = g_part.zero_at_zero && h_part.zero_at_zero;
  p.g_is_zero = g_part.g_is_zero || g_kind == "zero";
  p.h_is_zero = h_part.h_is_zero || h_kind == "zero";
  p.name = g_kind + "/" + h_kind;
  if (!g_part.note.empty()) p.note = g_part.note;
  return p;
}

namespace {
double clip(double v, double bound) {
  return std::min(std::max(v, -bound), bound);
}
}  // namespace

MollifiedPair mollify(const CoefficientPair& base, int level,
                      std::size_t quad_points) {
  require(level >= 1, "mollify: level must be >= 1");
  require(quad_points >= 41 && quad_points % 2 == 1,
          "mollify: need an odd number of quadrature points, at least 41");
  MollifiedPair m;
  m.base = base;
  m.level = level;
  m.znodes_.resize(quad_points);
  m.zweights_.resize(quad_points);
  // Standard-normal trapezoid over z in [-8, 8]: the omitted tails carry
  // mass < 1e-15, and G_n(x) = sum_j w_j clip(G(x + z_j / sqrt(n)), n).
  const double lo = -8.0, hi = 8.0;
  const double dz = (hi - lo) / static_cast<double>(quad_points - 1);
  for (std::size_t j = 0; j < quad_points; ++j) {
    const double z = lo + dz * static_cast<double>(j);
    const double w = std::exp(-0.5 * z * z) /
                     std::sqrt(2.0 * std::numbers::pi) * dz;
    m.znodes_[j] = z;
    m.zweights_[j] = (j == 0 || j + 1 == quad_points) ? 0.5 * w : w;
  }
  return m;
}

double MollifiedPair::eval_G(double x) const {
  const double bound = static_cast<double>(level);
  const double inv_root_n = 1.0 / std::sqrt(static_cast<double>(level));
  double acc = 0.0;
  for (std::size_t j = 0; j < znodes_.size(); ++j)
    acc += zweights_[j] * clip(base.G(x + znodes_[j] * inv_root_n), bound);
  return acc;
}

double MollifiedPair::eval_H(double x) const {
  const double bound = static_cast<double>(level);
  const double inv_root_n = 1.0 / std::sqrt(static_cast<double>(level));
  double acc = 0.0;
  for (std::size_t j = 0; j < znodes_.size(); ++j)
    acc += zweights_[j] * clip(base.H(x + znodes_[j] * inv_root_n), bound);
  return acc;
}

CoefficientPair MollifiedPair::as_pair() const {
  CoefficientPair p;
  MollifiedPair self = *this;
  p.G = [self](double x) { return self.eval_G(x); };
  p.H = [self](double x) { return self.eval_H(x); };
  p.holder_gamma = 1.0;
  p.lipschitz = true;
  p.zero_at_zero = false;  // mollification moves values at 0 in general
  p.g_is_zero = base.g_is_zero;
  p.h_is_zero = base.h_is_zero;
  p.name = base.name + "_mollified";
  return p;
}

std::vector<double> pointwise_convergence_check(const CoefficientPair& base,
                                                std::span<const int> levels,
                                                std::span<const double> xs) {
  require(!levels.empty() && !xs.empty(),
          "pointwise_convergence_check: need levels and sample points");
  for (std::size_t i = 1; i < levels.size(); ++i)
    require(levels[i] > levels[i - 1],
            "pointwise_convergence_check: levels must be increasing");
  std::vector<double> gaps;
  gaps.reserve(levels.size());
  for (int level : levels) {
    const MollifiedPair m = mollify(base, level);
    double worst = 0.0;
    for (double x : xs) {
      worst = std::max(worst, std::abs(m.eval_G(x) - base.G(x)));
      worst = std::max(worst, std::abs(m.eval_H(x) - base.H(x)));
    }
    gaps.push_back(worst);
  }
  return gaps;
}

}  // namespace shel
