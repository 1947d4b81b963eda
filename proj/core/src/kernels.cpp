#include "shel/kernels.hpp"

#include <cmath>
#include <numbers>

#include "shel/errors.hpp"

namespace shel {

namespace {

constexpr double kTailTarget = 1e-14;

// Standard normal CDF.
double phi_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

// Reflection lattice of a kind: the kernel is a signed sum of free kernels
// q_t(y - c) over centers c. Periods 2 kinds use centers 2k +/- x; the mixed
// kinds combine a period-4 lattice (weight 2) with a period-2 one
// (weight -1). `fn(center, coefficient)` is invoked once per center.
template <typename Fn>
void for_each_center(BoundaryKind kind, double x, int k2, int k4, Fn&& fn) {
  switch (kind) {
    case BoundaryKind::C1:
      for (int k = -k2; k <= k2; ++k) {
        fn(2.0 * k + x, 1.0);
        fn(2.0 * k - x, -1.0);
      }
      break;
    case BoundaryKind::C2:
      for (int k = -k2; k <= k2; ++k) {
        fn(2.0 * k + x, 1.0);
        fn(2.0 * k - x, 1.0);
      }
      break;
    case BoundaryKind::C3:
      for (int k = -k4; k <= k4; ++k) {
        fn(4.0 * k + x, 2.0);
        fn(4.0 * k - x, -2.0);
      }
      for (int k = -k2; k <= k2; ++k) {
        fn(2.0 * k + x, -1.0);
        fn(2.0 * k - x, 1.0);
      }
      break;
    case BoundaryKind::C4:
      for (int k = -k4; k <= k4; ++k) {
        fn(4.0 * k + x, 2.0);
        fn(4.0 * k - x, 2.0);
      }
      for (int k = -k2; k <= k2; ++k) {
        fn(2.0 * k + x, -1.0);
        fn(2.0 * k - x, -1.0);
      }
      break;
  }
}

double kind_period(BoundaryKind kind) {
  return (kind == BoundaryKind::C1 || kind == BoundaryKind::C2) ? 2.0 : 4.0;
}

struct TruncPair {
  int k2 = 1;
  int k4 = 1;
  ImageTruncation trunc;
};

TruncPair choose_truncation(BoundaryKind kind, double t) {
  TruncPair tp;
  const ImageTruncation t2 = ImageTruncation::choose(t, 2.0);
  tp.k2 = t2.k;
  tp.trunc = t2;
  if (kind == BoundaryKind::C3 || kind == BoundaryKind::C4) {
    const ImageTruncation t4 = ImageTruncation::choose(t, 4.0);
    tp.k4 = t4.k;
    tp.trunc.k = std::max(t2.k, t4.k);
    tp.trunc.tail_bound = t2.tail_bound + t4.tail_bound;
  }
  return tp;
}

// Moments of q_t(y - c) over y in [0, 1]:
//   m0 = int q,  m1 = int y q,  m2 = int y^2 q.
struct CenterMoments {
  double m0, m1, m2;
};

CenterMoments center_moments(double t, double c) {
  const double rt = std::sqrt(t);
  const double q0 = gaussian_q(t, c);        // q_t(0 - c)
  const double q1 = gaussian_q(t, 1.0 - c);  // q_t(1 - c)
  CenterMoments m;
  m.m0 = phi_cdf((1.0 - c) / rt) - phi_cdf(-c / rt);
  m.m1 = c * m.m0 + t * (q0 - q1);
  m.m2 = (t + c * c) * m.m0 + t * (c * q0 - (1.0 + c) * q1);
  return m;
}

double basis_moment(BoundaryKind kind, int which, const CenterMoments& m) {
  switch (kind) {
    case BoundaryKind::C1:  // {1 - y, y}
      return which == 0 ? m.m0 - m.m1 : m.m1;
    case BoundaryKind::C2:  // {y - y^2/2, y^2/2}
      return which == 0 ? m.m1 - 0.5 * m.m2 : 0.5 * m.m2;
    case BoundaryKind::C3:  // {1, y}
      return which == 0 ? m.m0 : m.m1;
    case BoundaryKind::C4:  // {y - 1, 1}
      return which == 0 ? m.m1 - m.m0 : m.m0;
  }
  return 0.0;
}

}  // namespace

bool value_at_left(BoundaryKind kind) {
  return kind == BoundaryKind::C1 || kind == BoundaryKind::C3;
}

bool value_at_right(BoundaryKind kind) {
  return kind == BoundaryKind::C1 || kind == BoundaryKind::C4;
}

const char* to_string(BoundaryKind kind) {
  switch (kind) {
    case BoundaryKind::C1: return "C1";
    case BoundaryKind::C2: return "C2";
    case BoundaryKind::C3: return "C3";
    case BoundaryKind::C4: return "C4";
  }
  return "?";
}

BoundaryKind boundary_kind_from_string(const std::string& name) {
  if (name == "C1" || name == "c1" || name == "1") return BoundaryKind::C1;
  if (name == "C2" || name == "c2" || name == "2") return BoundaryKind::C2;
  if (name == "C3" || name == "c3" || name == "3") return BoundaryKind::C3;
  if (name == "C4" || name == "c4" || name == "4") return BoundaryKind::C4;
  fail("unknown boundary kind '" + name + "' (expected C1, C2, C3 or C4)");
}

double gaussian_q(double t, double x) {
  require(t > 0.0, "gaussian_q: t must be positive");
  return std::exp(-x * x / (2.0 * t)) /
         std::sqrt(2.0 * std::numbers::pi * t);
}

ImageTruncation ImageTruncation::choose(double t, double period) {
  require(t > 0.0, "ImageTruncation: t must be positive");
  require(period == 2.0 || period == 4.0, "ImageTruncation: period must be 2 or 4");
  for (int k = 1; k <= 200000; ++k) {
    // Every omitted center sits at distance >= d1 from the evaluation
    // point; successive shells shrink by at least `ratio`, giving a
    // geometric bound on the whole dropped tail (8 terms per shell is a
    // safe over-count of lattice multiplicity times coefficient size).
    const double d1 = period * (k + 1) - 2.0;
    if (d1 <= 0.0) continue;
    const double first = gaussian_q(t, d1);
    const double ratio =
        std::exp(-(2.0 * period * d1 + period * period) / (2.0 * t));
    const double bound = 8.0 * first / (1.0 - ratio);
    if (bound <= kTailTarget) return {k, bound};
  }
  fail("ImageTruncation: no admissible truncation found (t too large?)");
}

double image_kernel(BoundaryKind kind, double t, double x, double y) {
  require(t > 0.0, "image_kernel: t must be positive");
  const TruncPair tp = choose_truncation(kind, t);
  double acc = 0.0;
  for_each_center(kind, x, tp.k2, tp.k4, [&](double c, double coef) {
    acc += coef * gaussian_q(t, y - c);
  });
  return acc;
}

double image_kernel_dy(BoundaryKind kind, double t, double x, double y) {
  require(t > 0.0, "image_kernel_dy: t must be positive");
  const TruncPair tp = choose_truncation(kind, t);
  double acc = 0.0;
  for_each_center(kind, x, tp.k2, tp.k4, [&](double c, double coef) {
    acc += coef * ((c - y) / t) * gaussian_q(t, y - c);
  });
  return acc;
}

double spectral_kernel(BoundaryKind kind, double t, double x, double y,
                       double term_tol) {
  require(t > 0.0, "spectral_kernel: t must be positive");
  const double pi = std::numbers::pi;
  double acc = 0.0;
  if (kind == BoundaryKind::C2) acc += 1.0;  // constant mode, eigenvalue 0
  for (long m = 0; m < 100000000L; ++m) {
    double omega = 0.0;
    double term = 0.0;
    switch (kind) {
      case BoundaryKind::C1:
        omega = static_cast<double>(m + 1) * pi;
        term = 2.0 * std::sin(omega * x) * std::sin(omega * y);
        break;
      case BoundaryKind::C2:
        omega = static_cast<double>(m + 1) * pi;
        term = 2.0 * std::cos(omega * x) * std::cos(omega * y);
        break;
      case BoundaryKind::C3:
        omega = (static_cast<double>(m) + 0.5) * pi;
        term = 2.0 * std::sin(omega * x) * std::sin(omega * y);
        break;
      case BoundaryKind::C4:
        omega = (static_cast<double>(m) + 0.5) * pi;
        term = 2.0 * std::cos(omega * x) * std::cos(omega * y);
        break;
    }
    const double weight = std::exp(-omega * omega * t / 2.0);
    acc += term * weight;
    if (2.0 * weight < term_tol && m >= 2) break;
  }
  return acc;
}

KernelEndpoints kernel_endpoints(BoundaryKind kind, double t, double x) {
  require(t > 0.0, "kernel_endpoints: t must be positive");
  const TruncPair tp = choose_truncation(kind, t);
  KernelEndpoints e;
  for_each_center(kind, x, tp.k2, tp.k4, [&](double c, double coef) {
    const double q0 = gaussian_q(t, 0.0 - c);
    const double q1 = gaussian_q(t, 1.0 - c);
    e.value0 += coef * q0;
    e.value1 += coef * q1;
    e.deriv0 += coef * (c / t) * q0;
    e.deriv1 += coef * ((c - 1.0) / t) * q1;
  });
  return e;
}

double lift_basis(BoundaryKind kind, int which, double x) {
  require(which == 0 || which == 1, "lift_basis: which must be 0 or 1");
  switch (kind) {
    case BoundaryKind::C1: return which == 0 ? 1.0 - x : x;
    case BoundaryKind::C2: return which == 0 ? x - 0.5 * x * x : 0.5 * x * x;
    case BoundaryKind::C3: return which == 0 ? 1.0 : x;
    case BoundaryKind::C4: return which == 0 ? x - 1.0 : 1.0;
  }
  return 0.0;
}

double lift_action(BoundaryKind kind, int which, double t, double x) {
  require(which == 0 || which == 1, "lift_action: which must be 0 or 1");
  require(t > 0.0, "lift_action: t must be positive");
  const TruncPair tp = choose_truncation(kind, t);
  double acc = 0.0;
  for_each_center(kind, x, tp.k2, tp.k4, [&](double c, double coef) {
    acc += coef * basis_moment(kind, which, center_moments(t, c));
  });
  return acc;
}

KernelTable build_kernel_table(BoundaryKind kind, const Grid& grid, double t) {
  require(t >= 1e-6,
          "build_kernel_table: duration below 1e-6 refused (kernel narrower "
          "than any grid this table serves)");
  KernelTable tab;
  tab.kind = kind;
  tab.t = t;
  tab.grid = grid;
  const std::size_t n = grid.size();
  tab.matrix.assign(n * n, 0.0);
  tab.value0.resize(n);
  tab.value1.resize(n);
  tab.deriv0.resize(n);
  tab.deriv1.resize(n);
  tab.lift0_action.resize(n);
  tab.lift1_action.resize(n);

  const TruncPair tp = choose_truncation(kind, t);
  tab.truncation = tp.trunc;

  // The density is symmetric in (x, y) for every kind (the generator is
  // self-adjoint for each family), so fill the lower triangle and mirror.
  for (std::size_t i = 0; i < n; ++i) {
    const double x = grid.nodes[i];
    for (std::size_t j = 0; j <= i; ++j) {
      double acc = 0.0;
      const double y = grid.nodes[j];
      for_each_center(kind, x, tp.k2, tp.k4, [&](double c, double coef) {
        acc += coef * gaussian_q(t, y - c);
      });
      tab.matrix[i * n + j] = acc;
      tab.matrix[j * n + i] = acc;
    }
    const KernelEndpoints e = kernel_endpoints(kind, t, x);
    tab.value0[i] = e.value0;
    tab.value1[i] = e.value1;
    tab.deriv0[i] = e.deriv0;
    tab.deriv1[i] = e.deriv1;
    tab.lift0_action[i] = lift_action(kind, 0, t, x);
    tab.lift1_action[i] = lift_action(kind, 1, t, x);
  }
  return tab;
}

Field apply_semigroup(const KernelTable& table, const Field& f) {
  const std::size_t n = table.size();
  require(f.size() == n, "apply_semigroup: field size does not match table");
  Field out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    const double* row = table.matrix.data() + i * n;
    for (std::size_t j = 0; j < n; ++j)
      acc += table.grid.weights[j] * row[j] * f[j];
    out[i] = acc;
  }
  return out;
}

double delta_recovery_check(const KernelTable& table, const Field& f) {
  const std::size_t n = table.size();
  require(f.size() == n, "delta_recovery_check: field size does not match table");
  const double margin = 3.0 * std::sqrt(table.t);
  const Field pf = apply_semigroup(table, f);
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = table.grid.nodes[i];
    if (x < margin || x > 1.0 - margin) continue;
    worst = std::max(worst, std::abs(pf[i] - f[i]));
  }
  return worst;
}

}  // namespace shel
