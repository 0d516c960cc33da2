#pragma once

// Compactly supported smooth test functions, represented directly by their
// partial Fourier transform for one polarization: a product of bumps over
// the base coordinates times a product of bumps over the fiber (dual)
// coordinates, with an optional factor vanishing at the fiber origin.
//
// Polarizations and their coordinates:
//   H3  : base G0 (3 coords, in one of three charts), fiber (q,r,s)
//   L4  : base R^2 (a,b),                             fiber (p,q,r,s)
//   LA5 : base R   (b),                               fiber (a,p,q,r,s)
//   LX5 : base R   (y),                               fiber (x,p,q,r,s)

#include <cmath>
#include <complex>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace g6cstar {

enum class Polarization { H3, L4, LA5, LX5 };

/// Chart on the 3-dimensional base group G0 in which H3 base bumps live.
///   E   : (a, b, p)                    with  E(a,b,p)
///   XBP : (x, b, p) = (a, b-a, p)      with  exp(xX) exp(bB) exp(pP), X=A+B
///   XYP : (x, y, p) = ((a+b)/2, (a-b)/2, p)  with  exp(xX) exp(yY) exp(pP)
enum class H3Frame { E, XBP, XYP };

inline int base_dim(Polarization p) {
  switch (p) {
    case Polarization::H3: return 3;
    case Polarization::L4: return 2;
    default: return 1;
  }
}
inline int fiber_dim(Polarization p) {
  switch (p) {
    case Polarization::H3: return 3;
    case Polarization::L4: return 4;
    default: return 5;
  }
}

/// Standard smooth bump: exp(1 - 1/(1-u^2)) for |u| < 1, u = (x-center)/radius,
/// exactly zero outside; maximum 1 at the center.
struct Bump {
  double center = 0;
  double radius = 1;

  double operator()(double x) const {
    const double u = (x - center) / radius;
    const double d = 1.0 - u * u;
    if (d <= 0) return 0.0;
    return std::exp(1.0 - 1.0 / d);
  }
  double lo() const { return center - radius; }
  double hi() const { return center + radius; }
};

struct SupportBox {
  std::vector<std::pair<double, double>> base;   // per base axis
  std::vector<std::pair<double, double>> fiber;  // per fiber axis
};

struct PolarizedTestFn {
  Polarization pol = Polarization::H3;
  H3Frame frame = H3Frame::E;  // meaningful for H3 only
  std::vector<Bump> base;
  std::vector<Bump> fiber;
  std::complex<double> amplitude{1.0, 0.0};
  // Scale h of the factor 1 - exp(-|q|^2 / (2 h^2)) vanishing at the fiber
  // origin; 0 disables it.  With it, |F(s,q)| <= (|q|/h) |amp| B(s).
  double fiber_root_scale = 0;

  bool is_zero() const { return amplitude == std::complex<double>(0.0, 0.0); }

  double base_factor(std::span<const double> x) const {
    double v = 1.0;
    for (std::size_t i = 0; i < base.size(); ++i) {
      v *= base[i](x[i]);
      if (v == 0.0) return 0.0;
    }
    return v;
  }

  double fiber_factor(std::span<const double> q) const {
    double v = 1.0;
    for (std::size_t i = 0; i < fiber.size(); ++i) {
      v *= fiber[i](q[i]);
      if (v == 0.0) return 0.0;
    }
    if (fiber_root_scale > 0) {
      double n2 = 0;
      for (std::size_t i = 0; i < fiber.size(); ++i) n2 += q[i] * q[i];
      v *= 1.0 - std::exp(-n2 / (2.0 * fiber_root_scale * fiber_root_scale));
    }
    return v;
  }

  /// F(base; fiber).  Exactly zero outside the support box.
  std::complex<double> eval(std::span<const double> b, std::span<const double> q) const {
    if (static_cast<int>(b.size()) != base_dim(pol) ||
        static_cast<int>(q.size()) != fiber_dim(pol))
      throw std::invalid_argument("test function: argument dimension mismatch");
    return amplitude * base_factor(b) * fiber_factor(q);
  }

  /// H3 only: evaluate with the base point given in E-coordinates,
  /// converting into this function's chart.
  std::complex<double> eval_h3_at_e(double aE, double bE, double pE,
                                    double q, double r, double s) const {
    if (pol != Polarization::H3)
      throw std::invalid_argument("eval_h3_at_e: not an H3 test function");
    double c[3];
    switch (frame) {
      case H3Frame::E: c[0] = aE; c[1] = bE; c[2] = pE; break;
      case H3Frame::XBP: c[0] = aE; c[1] = bE - aE; c[2] = pE; break;
      case H3Frame::XYP:
        c[0] = 0.5 * (aE + bE);
        c[1] = 0.5 * (aE - bE);
        c[2] = pE;
        break;
    }
    const double qv[3] = {q, r, s};
    return amplitude * base_factor(c) * fiber_factor(qv);
  }

  SupportBox support_box() const {
    SupportBox sb;
    for (const auto& b : base) sb.base.emplace_back(b.lo(), b.hi());
    for (const auto& b : fiber) sb.fiber.emplace_back(b.lo(), b.hi());
    return sb;
  }

  /// Per-axis bound M with |fiber coordinate i| <= M on the support.
  double fiber_abs_bound(int axis) const {
    return std::max(std::abs(fiber[axis].lo()), std::abs(fiber[axis].hi()));
  }
};

namespace detail {

inline double adaptive_simpson(const std::function<double(double)>& f, double a,
                               double b, double fa, double fm, double fb,
                               double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-12) {
  if (!(a < b)) return 0.0;
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 48);
}

}  // namespace detail

/// sup over the fiber of the fiber factor (1 exactly when no vanishing
/// factor is present; otherwise found by lattice search plus coordinate
/// ascent over the fiber support box).
inline double fiber_sup(const PolarizedTestFn& tf) {
  if (tf.fiber_root_scale <= 0) return 1.0;
  const int d = static_cast<int>(tf.fiber.size());
  const int n = 7;
  std::vector<double> best(d, 0.0), pt(d);
  double best_v = -1.0;
  std::vector<int> idx(d, 0);
  for (;;) {
    for (int i = 0; i < d; ++i) {
      const auto& b = tf.fiber[i];
      pt[i] = b.lo() + (b.hi() - b.lo()) * (idx[i] + 0.5) / n;
    }
    const double v = tf.fiber_factor(pt);
    if (v > best_v) {
      best_v = v;
      best = pt;
    }
    int k = 0;
    while (k < d && ++idx[k] == n) idx[k++] = 0;
    if (k == d) break;
  }
  // Coordinate ascent refinement.
  for (int round = 0; round < 60; ++round) {
    for (int i = 0; i < d; ++i) {
      double step = tf.fiber[i].radius / (1 << std::min(round / d + 3, 40));
      for (int dir : {-1, +1}) {
        pt = best;
        pt[i] += dir * step;
        const double v = tf.fiber_factor(pt);
        if (v > best_v) {
          best_v = v;
          best = pt;
        }
      }
    }
  }
  return best_v;
}

/// Young-bound quantity: integral over the base of sup_fiber |F(s,.)|.
/// The base factor is a product of bumps, so this reduces to one adaptive
/// 1D quadrature per base axis.
inline double envelope_l1(const PolarizedTestFn& tf) {
  if (tf.is_zero()) return 0.0;
  double v = std::abs(tf.amplitude) * fiber_sup(tf);
  for (const auto& b : tf.base) {
    v *= detail::integrate([&b](double x) { return b(x); }, b.lo(), b.hi());
    if (v == 0.0) return 0.0;
  }
  return v;
}

// ---------------------------------------------------------------------------
// Reference families
// ---------------------------------------------------------------------------

/// Reference test function for a polarization/chart pair.  `variant` selects
/// among a handful of shipped parameter sets; `strict_envelope` adds the
/// factor vanishing at the fiber origin.
inline PolarizedTestFn reference_testfn(Polarization pol, H3Frame frame = H3Frame::E,
                                        int variant = 0, bool strict_envelope = true) {
  PolarizedTestFn tf;
  tf.pol = pol;
  tf.frame = frame;
  const int bd = base_dim(pol), fd = fiber_dim(pol);
  const double base_radii[3] = {2.0, 2.0, 1.5};
  for (int i = 0; i < bd; ++i) tf.base.push_back({0.0, base_radii[std::min(i, 2)]});
  for (int i = 0; i < fd; ++i) tf.fiber.push_back({0.0, 1.0});
  tf.fiber_root_scale = strict_envelope ? 1.0 : 0.0;
  switch (variant % 5) {
    case 0: break;
    case 1:
      tf.base[0].center = 0.4;
      if (bd > 1) tf.base[1].center = -0.3;
      tf.amplitude = {1.5, 0.0};
      break;
    case 2:
      for (auto& b : tf.base) b.radius *= 0.75;
      tf.amplitude = {0.8, 0.3};
      break;
    case 3:
      for (auto& b : tf.fiber) b.radius = 0.8;
      tf.amplitude = {2.0, 0.0};
      break;
    case 4:
      tf.base[bd - 1].radius *= 1.25;
      tf.amplitude = {0.0, 1.0};
      break;
  }
  return tf;
}

}  // namespace g6cstar
