#pragma once

// The irreducible-representation kernel operators, discretized.
//
// Realizations (one per orbit family):
//   6d        ind_H^G chi_{nu Q* + eps S*}   on L^2(R^3), E-coordinates
//   4d S-type pi_{b*B* + eps S*}             on L^2(R^2), inner b-integral
//   4d R-type pi_{b*B* + eps R*}             on L^2(R^2), inner y-integral
//   4d PQ     pi_{eps P* + nu Q*}            on L^2(R^2)
//   2d Q-type pi_{a*A* + nu Q*}              on L^2(R)
//   2d P-type pi_{x*X* + eps P*}             on L^2(R)
//   ind_H^G chi_l (l in h*) and ind_L^G 1    comparison representations
//   characters                               scalars
//
// Every kernel is band-limited by the compact base support of the test
// function and factors per pair of axes; assembly produces the factored
// tables directly.  A dense mode built from an independently coded
// closed-form entry evaluator exists for oracle testing.

#include <array>
#include <complex>
#include <functional>
#include <memory>
#include <variant>
#include <vector>

#include "grid.hpp"
#include "lie6.hpp"
#include "linmap.hpp"
#include "testfn.hpp"

namespace g6cstar {

// ---------------------------------------------------------------------------
// Representation descriptors
// ---------------------------------------------------------------------------

struct SixDRep { int eps = +1; int nu = +1; };
struct FourDSRep { double b_star = 0; int eps = +1; };
struct FourDRRep { double b_star = 0; int eps = +1; };
struct FourDPQRep { int eps = +1; int nu = +1; };
struct TwoDQRep { double a_star = 0; int nu = +1; };
struct TwoDPRep { double x_star = 0; int eps = +1; };
struct IndHChi { HFunctional l; };       // ind_H^G chi_l, l supported on h*
struct IndLTrivial {};                   // ind_L^G 1 on L^2(R^2)
struct CharacterRep { double a_star = 0; double b_star = 0; };

using RepDescriptor =
    std::variant<SixDRep, FourDSRep, FourDRRep, FourDPQRep, TwoDQRep, TwoDPRep,
                 IndHChi, IndLTrivial, CharacterRep>;

inline const char* rep_name(const RepDescriptor& r) {
  struct V {
    const char* operator()(const SixDRep&) const { return "sixD"; }
    const char* operator()(const FourDSRep&) const { return "fourDS"; }
    const char* operator()(const FourDRRep&) const { return "fourDR"; }
    const char* operator()(const FourDPQRep&) const { return "fourDPQ"; }
    const char* operator()(const TwoDQRep&) const { return "twoDQ"; }
    const char* operator()(const TwoDPRep&) const { return "twoDP"; }
    const char* operator()(const IndHChi&) const { return "indHChi"; }
    const char* operator()(const IndLTrivial&) const { return "indLTrivial"; }
    const char* operator()(const CharacterRep&) const { return "character"; }
  };
  return std::visit(V{}, r);
}

enum class EvalMode { MatrixFree, Dense };

struct AssembleOptions {
  EvalMode mode = EvalMode::MatrixFree;
  int inner_n = 64;            // nodes of the inner 1D integral (4d kernels)
  bool scale_inner_with_freq = true;
  bool check_window = true;
  std::size_t dense_budget = 1u << 26;  // max entries of a dense matrix
};

struct KernelOperator {
  Grid grid;
  RepDescriptor rep;
  std::shared_ptr<const PolarizedTestFn> tf;
  EvalMode mode = EvalMode::MatrixFree;
  std::shared_ptr<const LinearMap> map;

  std::size_t dim() const { return map->dim(); }

  /// (K xi)(x) = sum_y w(y) K(x,y) xi(y).
  std::vector<cd> apply(const std::vector<cd>& xi) const {
    if (xi.size() != dim())
      throw std::invalid_argument("apply: vector length does not match grid");
    std::vector<double> w = grid.weights();
    std::vector<cd> tmp(xi.size()), out(xi.size());
    for (std::size_t i = 0; i < xi.size(); ++i) tmp[i] = w[i] * xi[i];
    map->apply_raw(tmp.data(), out.data());
    return out;
  }
};

inline double op_norm(const KernelOperator& K, double tol = 1e-7,
                      OpNormOptions opt = {}) {
  if (!(tol > 0)) throw std::invalid_argument("op_norm: tol must be positive");
  opt.tol = tol;
  return op_norm(*K.map, K.grid, opt);
}

inline double hs_norm(const KernelOperator& K) { return hs_norm(*K.map, K.grid); }

// ---------------------------------------------------------------------------
// Chart helpers
// ---------------------------------------------------------------------------

namespace charts {

/// Chart coordinates -> E-coordinates of the base group.
inline std::array<double, 3> to_e(H3Frame f, double c1, double c2, double c3) {
  switch (f) {
    case H3Frame::E: return {c1, c2, c3};
    case H3Frame::XBP: return {c1, c1 + c2, c3};
    case H3Frame::XYP: return {c1 + c2, c1 - c2, c3};
  }
  return {c1, c2, c3};
}

/// Quadrature column weight: the Haar density factor of the induced-
/// representation kernel expressed in this chart, split per input axis.
inline double col_weight(H3Frame f, double c2) {
  switch (f) {
    case H3Frame::E: return std::exp(-0.5 * c2);    // with exp(c1/2) in fib
    case H3Frame::XBP: return std::exp(-0.5 * c2);
    case H3Frame::XYP: return std::exp(c2);
  }
  return 1.0;
}
inline double fib_weight(H3Frame f, double c1) {
  return f == H3Frame::E ? std::exp(0.5 * c1) : 1.0;
}

/// Scale of the third coordinate of x * y^{-1} in this chart.
inline double diff3_scale(H3Frame f, double c1, double c2) {
  switch (f) {
    case H3Frame::E: return std::exp(0.5 * (c1 - c2));
    case H3Frame::XBP: return std::exp(-0.5 * c2);
    case H3Frame::XYP: return std::exp(c2);
  }
  return 1.0;
}

/// The h*-fiber of ind_H^G chi_l at the base point with chart coords c.
inline HFunctional fiber_of(H3Frame f, const HFunctional& l, double c1, double c2,
                            double c3) {
  const auto e = to_e(f, c1, c2, c3);
  return coadjoint_h(e[0], e[1], c3, l);
}

}  // namespace charts

// ---------------------------------------------------------------------------
// Factored assembly
// ---------------------------------------------------------------------------

/// Hooks that specialize the generic ind_H^G kernel into a sigma branch:
/// per-point fiber functional, source factor, coupled per-axis factors and
/// per-axis output masks.  All default to the plain kernel.  When `fibval`
/// is set it replaces the fiber/src/amplitude pipeline entirely (the chart
/// density weight is still applied); this is how merged defect kernels with
/// two fiber arguments are built.
struct H3KernelHooks {
  std::function<HFunctional(double, double, double)> fiber;  // chart coords
  std::function<double(double, double, double)> src;
  std::function<cd(double, double, double)> fibval;
  std::function<double(double, double)> t1fac;  // (s, c1-in)
  std::function<double(double, double)> t2fac;  // (t, c2-in)
  std::function<double(double, double, double, double)> t3fac;  // (v,p,c1,c2)
  std::function<double(double)> out1, out2, out3;
};

inline std::shared_ptr<Tensor3Map> make_h3_map(const Grid& g,
                                               const PolarizedTestFn& tf,
                                               const H3KernelHooks& hooks) {
  if (tf.pol != Polarization::H3)
    throw std::invalid_argument("kernel assembly: H3 test function required");
  if (g.dim() != 3) throw std::invalid_argument("kernel assembly: need a 3D grid");
  const Axis &a1 = g.axes[0], &a2 = g.axes[1], &a3 = g.axes[2];
  auto m = std::make_shared<Tensor3Map>();
  m->n1 = a1.n;
  m->n2 = a2.n;
  m->n3 = a3.n;
  m->t1.resize(static_cast<std::size_t>(a1.n) * a1.n);
  m->t2.resize(static_cast<std::size_t>(a2.n) * a2.n);
  m->t3.resize(static_cast<std::size_t>(a1.n) * a2.n * a3.n * a3.n);
  m->fib.resize(static_cast<std::size_t>(a1.n) * a2.n * a3.n);
  for (int is = 0; is < a1.n; ++is)
    for (int ia = 0; ia < a1.n; ++ia) {
      double v = tf.base[0](a1.point(is) - a1.point(ia));
      if (v != 0.0 && hooks.t1fac) v *= hooks.t1fac(a1.point(is), a1.point(ia));
      m->t1[static_cast<std::size_t>(is) * a1.n + ia] = v;
    }
  for (int it = 0; it < a2.n; ++it)
    for (int ib = 0; ib < a2.n; ++ib) {
      double v = tf.base[1](a2.point(it) - a2.point(ib)) *
                 charts::col_weight(tf.frame, a2.point(ib));
      if (v != 0.0 && hooks.t2fac) v *= hooks.t2fac(a2.point(it), a2.point(ib));
      m->t2[static_cast<std::size_t>(it) * a2.n + ib] = v;
    }
  parallel_for(static_cast<std::size_t>(a1.n) * a2.n, [&](std::size_t ab) {
    const int ia = static_cast<int>(ab) / a2.n, ib = static_cast<int>(ab) % a2.n;
    const double c1 = a1.point(ia), c2 = a2.point(ib);
    const double s3 = charts::diff3_scale(tf.frame, c1, c2);
    double* blk = m->t3.data() + ab * a3.n * a3.n;
    for (int iv = 0; iv < a3.n; ++iv)
      for (int ip = 0; ip < a3.n; ++ip) {
        const double v = a3.point(iv), p = a3.point(ip);
        double val = tf.base[2](s3 * (v - p));
        if (val != 0.0 && hooks.t3fac) val *= hooks.t3fac(v, p, c1, c2);
        blk[static_cast<std::size_t>(iv) * a3.n + ip] = val;
      }
    cd* f = m->fib.data() + ab * a3.n;
    for (int ip = 0; ip < a3.n; ++ip) {
      const double p = a3.point(ip);
      if (hooks.fibval) {
        f[ip] = hooks.fibval(c1, c2, p) * charts::fib_weight(tf.frame, c1);
        continue;
      }
      double src = hooks.src ? hooks.src(c1, c2, p) : 1.0;
      if (src == 0.0) {
        f[ip] = cd{0, 0};
        continue;
      }
      const HFunctional fib = hooks.fiber(c1, c2, p);
      const double q[3] = {fib.q, fib.r, fib.s};
      f[ip] = tf.amplitude * tf.fiber_factor(q) * src *
              charts::fib_weight(tf.frame, c1);
    }
  });
  if (hooks.out1) {
    m->o1.resize(a1.n);
    for (int i = 0; i < a1.n; ++i) m->o1[i] = hooks.out1(a1.point(i));
  }
  if (hooks.out2) {
    m->o2.resize(a2.n);
    for (int i = 0; i < a2.n; ++i) m->o2[i] = hooks.out2(a2.point(i));
  }
  if (hooks.out3) {
    m->o3.resize(a3.n);
    for (int i = 0; i < a3.n; ++i) m->o3[i] = hooks.out3(a3.point(i));
  }
  return m;
}

namespace detail {

/// Nodes and trapezoid weights of the inner 1D integral over the support of
/// the second base bump, refined with the oscillation frequency.
inline void inner_nodes(const Bump& b, double freq, const AssembleOptions& opt,
                        std::vector<double>& nodes, std::vector<double>& wts) {
  int n = std::max(opt.inner_n, 8);
  if (opt.scale_inner_with_freq) {
    const double periods = std::abs(freq) * (b.hi() - b.lo()) / (2.0 * 3.141592653589793);
    n = std::max(n, static_cast<int>(16.0 * periods) + 16);
  }
  nodes.resize(n);
  wts.resize(n);
  const double h = (b.hi() - b.lo()) / (n - 1);
  for (int i = 0; i < n; ++i) {
    nodes[i] = b.lo() + i * h;
    wts[i] = h * ((i == 0 || i == n - 1) ? 0.5 : 1.0);
  }
}

}  // namespace detail

/// pi_{b*B* + eps S*} on L^2(R^2) (coords (x,p) against (t,u)); the kernel
/// integrates e^{i b* b} e^{b/4} F(.) over b.  Optional source mask.
inline std::shared_ptr<Tensor2Map> make_fourds_map(
    const Grid& g, const PolarizedTestFn& tf, double b_star, int eps,
    const AssembleOptions& opt,
    std::function<double(double, double)> src = nullptr) {
  if (tf.pol != Polarization::H3 || tf.frame != H3Frame::XBP)
    throw std::invalid_argument("fourDS kernel: H3 test function in the XBP chart required");
  if (g.dim() != 2) throw std::invalid_argument("fourDS kernel: need a 2D grid");
  const Axis &a1 = g.axes[0], &a2 = g.axes[1];
  auto m = std::make_shared<Tensor2Map>();
  m->n1 = a1.n;
  m->n2 = a2.n;
  m->t1.resize(static_cast<std::size_t>(a1.n) * a1.n);
  m->t2c.resize(static_cast<std::size_t>(a2.n) * a2.n);
  m->fib.resize(static_cast<std::size_t>(a1.n) * a2.n);
  for (int it = 0; it < a1.n; ++it)
    for (int ix = 0; ix < a1.n; ++ix)
      m->t1[static_cast<std::size_t>(it) * a1.n + ix] =
          tf.base[0](a1.point(it) - a1.point(ix));
  std::vector<double> bn, bw;
  detail::inner_nodes(tf.base[1], b_star, opt, bn, bw);
  parallel_for(static_cast<std::size_t>(a2.n), [&](std::size_t iu) {
    const double u = a2.point(static_cast<int>(iu));
    for (int ip = 0; ip < a2.n; ++ip) {
      const double p = a2.point(ip);
      cd acc{0, 0};
      for (std::size_t k = 0; k < bn.size(); ++k) {
        const double b = bn[k];
        const double v = tf.base[1](b) * tf.base[2](std::exp(0.5 * b) * u - p);
        if (v == 0.0) continue;
        acc += bw[k] * v * std::exp(0.25 * b) *
               std::polar(1.0, b_star * b);
      }
      m->t2c[iu * a2.n + ip] = acc;
    }
  });
  for (int ix = 0; ix < a1.n; ++ix)
    for (int ip = 0; ip < a2.n; ++ip) {
      const double x = a1.point(ix), p = a2.point(ip);
      const double e = std::exp(-x);
      const double q[3] = {eps * e * 0.5 * p * p, -eps * e * p, eps * e};
      double s = src ? src(x, p) : 1.0;
      m->fib[static_cast<std::size_t>(ix) * a2.n + ip] =
          s == 0.0 ? cd{0, 0} : tf.amplitude * tf.fiber_factor(q) * s;
    }
  return m;
}

/// pi_{b*B* + eps R*} on L^2(R^2); inner integral over y with weight
/// e^{i b* y} e^{-y/2}.
inline std::shared_ptr<Tensor2Map> make_fourdr_map(
    const Grid& g, const PolarizedTestFn& tf, double b_star, int eps,
    const AssembleOptions& opt,
    std::function<double(double, double)> src = nullptr) {
  if (tf.pol != Polarization::H3 || tf.frame != H3Frame::XYP)
    throw std::invalid_argument("fourDR kernel: H3 test function in the XYP chart required");
  if (g.dim() != 2) throw std::invalid_argument("fourDR kernel: need a 2D grid");
  const Axis &a1 = g.axes[0], &a2 = g.axes[1];
  auto m = std::make_shared<Tensor2Map>();
  m->n1 = a1.n;
  m->n2 = a2.n;
  m->t1.resize(static_cast<std::size_t>(a1.n) * a1.n);
  m->t2c.resize(static_cast<std::size_t>(a2.n) * a2.n);
  m->fib.resize(static_cast<std::size_t>(a1.n) * a2.n);
  for (int it = 0; it < a1.n; ++it)
    for (int ix = 0; ix < a1.n; ++ix)
      m->t1[static_cast<std::size_t>(it) * a1.n + ix] =
          tf.base[0](a1.point(it) - a1.point(ix));
  std::vector<double> yn, yw;
  detail::inner_nodes(tf.base[1], b_star, opt, yn, yw);
  parallel_for(static_cast<std::size_t>(a2.n), [&](std::size_t iu) {
    const double u = a2.point(static_cast<int>(iu));
    for (int ip = 0; ip < a2.n; ++ip) {
      const double p = a2.point(ip);
      cd acc{0, 0};
      for (std::size_t k = 0; k < yn.size(); ++k) {
        const double y = yn[k];
        const double v = tf.base[1](y) * tf.base[2](std::exp(-y) * u - p);
        if (v == 0.0) continue;
        acc += yw[k] * v * std::exp(-0.5 * y) * std::polar(1.0, b_star * y);
      }
      m->t2c[iu * a2.n + ip] = acc;
    }
  });
  for (int ix = 0; ix < a1.n; ++ix)
    for (int ip = 0; ip < a2.n; ++ip) {
      const double x = a1.point(ix), p = a2.point(ip);
      const double e = std::exp(-x);
      const double q[3] = {-eps * p * e, eps * e, 0.0};
      double s = src ? src(x, p) : 1.0;
      m->fib[static_cast<std::size_t>(ix) * a2.n + ip] =
          s == 0.0 ? cd{0, 0} : tf.amplitude * tf.fiber_factor(q) * s;
    }
  return m;
}

/// Kernels on L^2(R^2) against an L4 test function:
/// K((t,u),(a,b)) = F^L(t-a, u-b; fiber(a,b)).
inline std::shared_ptr<Tensor2Map> make_l4_map(
    const Grid& g, const PolarizedTestFn& tf,
    const std::function<std::array<double, 4>(double, double)>& fiber,
    std::function<double(double, double)> src = nullptr) {
  if (tf.pol != Polarization::L4)
    throw std::invalid_argument("kernel assembly: L4 test function required");
  if (g.dim() != 2) throw std::invalid_argument("kernel assembly: need a 2D grid");
  const Axis &a1 = g.axes[0], &a2 = g.axes[1];
  auto m = std::make_shared<Tensor2Map>();
  m->n1 = a1.n;
  m->n2 = a2.n;
  m->t1.resize(static_cast<std::size_t>(a1.n) * a1.n);
  m->t2c.resize(static_cast<std::size_t>(a2.n) * a2.n);
  m->fib.resize(static_cast<std::size_t>(a1.n) * a2.n);
  for (int it = 0; it < a1.n; ++it)
    for (int ia = 0; ia < a1.n; ++ia)
      m->t1[static_cast<std::size_t>(it) * a1.n + ia] =
          tf.base[0](a1.point(it) - a1.point(ia));
  for (int iu = 0; iu < a2.n; ++iu)
    for (int ib = 0; ib < a2.n; ++ib)
      m->t2c[static_cast<std::size_t>(iu) * a2.n + ib] =
          tf.base[1](a2.point(iu) - a2.point(ib));
  for (int ia = 0; ia < a1.n; ++ia)
    for (int ib = 0; ib < a2.n; ++ib) {
      const double a = a1.point(ia), b = a2.point(ib);
      double s = src ? src(a, b) : 1.0;
      if (s == 0.0) {
        m->fib[static_cast<std::size_t>(ia) * a2.n + ib] = cd{0, 0};
        continue;
      }
      const auto fb = fiber(a, b);
      m->fib[static_cast<std::size_t>(ia) * a2.n + ib] =
          tf.amplitude * tf.fiber_factor(fb) * s;
    }
  return m;
}

/// 1D kernels K(t,b) = F(t-b; fiber(b)) for the LA5/LX5 polarizations.
inline std::shared_ptr<Tensor1Map> make_line_map(
    const Grid& g, const PolarizedTestFn& tf,
    const std::function<std::array<double, 5>(double)>& fiber,
    std::function<double(double)> src = nullptr) {
  if (tf.pol != Polarization::LA5 && tf.pol != Polarization::LX5)
    throw std::invalid_argument("kernel assembly: LA5/LX5 test function required");
  if (g.dim() != 1) throw std::invalid_argument("kernel assembly: need a 1D grid");
  const Axis& a1 = g.axes[0];
  auto m = std::make_shared<Tensor1Map>();
  m->n = a1.n;
  m->t1c.resize(static_cast<std::size_t>(a1.n) * a1.n);
  m->fib.resize(a1.n);
  for (int it = 0; it < a1.n; ++it)
    for (int ib = 0; ib < a1.n; ++ib)
      m->t1c[static_cast<std::size_t>(it) * a1.n + ib] =
          tf.base[0](a1.point(it) - a1.point(ib));
  for (int ib = 0; ib < a1.n; ++ib) {
    const double b = a1.point(ib);
    double s = src ? src(b) : 1.0;
    if (s == 0.0) {
      m->fib[ib] = cd{0, 0};
      continue;
    }
    const auto fb = fiber(b);
    m->fib[ib] = tf.amplitude * tf.fiber_factor(fb) * s;
  }
  return m;
}

// ---------------------------------------------------------------------------
// Independent closed-form entry evaluation (dense / oracle path)
// ---------------------------------------------------------------------------

namespace kv {

inline GroupElement g0(const std::array<double, 3>& e) {
  return {e[0], e[1], e[2], 0, 0, 0};
}

/// ind_H^G chi_l entry via the group product and restricted coadjoint action.
inline cd ind_h(const HFunctional& l, const PolarizedTestFn& tf,
                const std::array<double, 3>& x, const std::array<double, 3>& y) {
  const auto xe = charts::to_e(tf.frame, x[0], x[1], x[2]);
  const auto ye = charts::to_e(tf.frame, y[0], y[1], y[2]);
  const GroupElement diff = group_mul(g0(xe), inverse(g0(ye)));
  const HFunctional fib = coadjoint_h(ye[0], ye[1], ye[2], l);
  const double w = std::exp(0.5 * (ye[0] - ye[1]));
  return w * tf.eval_h3_at_e(diff.a, diff.b, diff.p, fib.q, fib.r, fib.s);
}

inline cd six_d(const SixDRep& r, const PolarizedTestFn& tf,
                const std::array<double, 3>& x, const std::array<double, 3>& y) {
  return ind_h({static_cast<double>(r.nu), 0.0, static_cast<double>(r.eps)}, tf, x, y);
}

inline cd four_d_s(const FourDSRep& r, const PolarizedTestFn& tf,
                   const std::array<double, 2>& tu, const std::array<double, 2>& xp,
                   const std::vector<double>& bn, const std::vector<double>& bw) {
  const double t = tu[0], u = tu[1], x = xp[0], p = xp[1];
  const double e = std::exp(-x);
  cd acc{0, 0};
  for (std::size_t k = 0; k < bn.size(); ++k) {
    const double b = bn[k];
    // Base point E0(t-x, u - e^{-b/2} p) exp(bB) in E-coordinates.
    const cd v = tf.eval_h3_at_e(t - x, (t - x) + b, std::exp(0.5 * b) * u - p,
                                 r.eps * e * 0.5 * p * p, -r.eps * e * p, r.eps * e);
    acc += bw[k] * std::exp(0.25 * b) * std::polar(1.0, r.b_star * b) * v;
  }
  return acc;
}

inline cd four_d_r(const FourDRRep& r, const PolarizedTestFn& tf,
                   const std::array<double, 2>& tu, const std::array<double, 2>& xp,
                   const std::vector<double>& yn, const std::vector<double>& yw) {
  const double t = tu[0], u = tu[1], x = xp[0], p = xp[1];
  const double e = std::exp(-x);
  cd acc{0, 0};
  for (std::size_t k = 0; k < yn.size(); ++k) {
    const double y = yn[k];
    const cd v = tf.eval_h3_at_e((t - x) + y, (t - x) - y, std::exp(-y) * u - p,
                                 -r.eps * p * e, r.eps * e, 0.0);
    acc += yw[k] * std::exp(-0.5 * y) * std::polar(1.0, r.b_star * y) * v;
  }
  return acc;
}

inline cd four_d_pq(const FourDPQRep& r, const PolarizedTestFn& tf,
                    const std::array<double, 2>& tu, const std::array<double, 2>& ab) {
  const double base[2] = {tu[0] - ab[0], tu[1] - ab[1]};
  const double fib[4] = {r.eps * std::exp(-0.5 * (ab[0] + ab[1])),
                         r.nu * std::exp(-ab[1]), 0.0, 0.0};
  return tf.amplitude * tf.base_factor(base) * tf.fiber_factor(fib);
}

inline cd ind_l_trivial(const PolarizedTestFn& tf, const std::array<double, 2>& tu,
                        const std::array<double, 2>& ab) {
  const double base[2] = {tu[0] - ab[0], tu[1] - ab[1]};
  const double fib[4] = {0, 0, 0, 0};
  return tf.amplitude * tf.base_factor(base) * tf.fiber_factor(fib);
}

inline cd two_d_q(const TwoDQRep& r, const PolarizedTestFn& tf, double t, double b) {
  const double base[1] = {t - b};
  const double fib[5] = {r.a_star, 0.0, r.nu * std::exp(-b), 0.0, 0.0};
  return tf.amplitude * tf.base_factor(base) * tf.fiber_factor(fib);
}

inline cd two_d_p(const TwoDPRep& r, const PolarizedTestFn& tf, double t, double y) {
  const double base[1] = {t - y};
  const double fib[5] = {r.x_star, r.eps * std::exp(-y), 0.0, 0.0, 0.0};
  return tf.amplitude * tf.base_factor(base) * tf.fiber_factor(fib);
}

}  // namespace kv

/// Independently coded closed-form kernel entry: the slow reference path
/// used by dense assembly and the dual-route tests.
inline cd kernel_value(const RepDescriptor& rep, const PolarizedTestFn& tf,
                       const std::vector<double>& x, const std::vector<double>& y,
                       const AssembleOptions& opt = {}) {
  struct V {
    const PolarizedTestFn& tf;
    const std::vector<double>& x;
    const std::vector<double>& y;
    const AssembleOptions& opt;
    cd operator()(const SixDRep& r) const {
      return kv::six_d(r, tf, {x[0], x[1], x[2]}, {y[0], y[1], y[2]});
    }
    cd operator()(const IndHChi& r) const {
      return kv::ind_h(r.l, tf, {x[0], x[1], x[2]}, {y[0], y[1], y[2]});
    }
    cd operator()(const FourDSRep& r) const {
      std::vector<double> bn, bw;
      detail::inner_nodes(tf.base[1], r.b_star, opt, bn, bw);
      return kv::four_d_s(r, tf, {x[0], x[1]}, {y[0], y[1]}, bn, bw);
    }
    cd operator()(const FourDRRep& r) const {
      std::vector<double> yn, yw;
      detail::inner_nodes(tf.base[1], r.b_star, opt, yn, yw);
      return kv::four_d_r(r, tf, {x[0], x[1]}, {y[0], y[1]}, yn, yw);
    }
    cd operator()(const FourDPQRep& r) const {
      return kv::four_d_pq(r, tf, {x[0], x[1]}, {y[0], y[1]});
    }
    cd operator()(const IndLTrivial&) const {
      return kv::ind_l_trivial(tf, {x[0], x[1]}, {y[0], y[1]});
    }
    cd operator()(const TwoDQRep& r) const { return kv::two_d_q(r, tf, x[0], y[0]); }
    cd operator()(const TwoDPRep& r) const { return kv::two_d_p(r, tf, x[0], y[0]); }
    cd operator()(const CharacterRep&) const {
      throw std::invalid_argument("kernel_value: characters are scalars");
    }
  };
  return std::visit(V{tf, x, y, opt}, rep);
}

// ---------------------------------------------------------------------------
// char_value and assembly entry point
// ---------------------------------------------------------------------------

namespace detail {

inline cd bump_fourier(const Bump& b, double freq) {
  // Oscillation-resolving trapezoid over the bump support.
  const double len = b.hi() - b.lo();
  const int n = std::max(512, static_cast<int>(32.0 * std::abs(freq) * len /
                                               (2.0 * 3.141592653589793)) + 64);
  const double h = len / n;
  cd acc{0, 0};
  for (int i = 0; i <= n; ++i) {
    const double xx = b.lo() + i * h;
    const double w = (i == 0 || i == n) ? 0.5 : 1.0;
    acc += w * b(xx) * std::polar(1.0, freq * xx);
  }
  return acc * h;
}

}  // namespace detail

/// Character pairing: integral of F(.;0) against e^{i(a a* + b b*)} over the
/// base, with the phase expressed in this test function's chart.
inline cd char_value(const PolarizedTestFn& tf, double a_star, double b_star) {
  if (tf.pol != Polarization::H3)
    throw std::invalid_argument("char_value: H3 test function required");
  const double zero3[3] = {0, 0, 0};
  const double f0 = tf.fiber_factor(zero3);
  if (f0 == 0.0) return {0, 0};
  double freq1 = 0, freq2 = 0, jac = 1.0;
  switch (tf.frame) {
    case H3Frame::E: freq1 = a_star; freq2 = b_star; break;
    case H3Frame::XBP: freq1 = a_star + b_star; freq2 = b_star; break;
    case H3Frame::XYP:
      freq1 = a_star + b_star;
      freq2 = a_star - b_star;
      jac = 2.0;
      break;
  }
  const cd i1 = detail::bump_fourier(tf.base[0], freq1);
  const cd i2 = detail::bump_fourier(tf.base[1], freq2);
  const cd i3 = detail::bump_fourier(tf.base[2], 0.0);
  return tf.amplitude * f0 * jac * i1 * i2 * i3;
}

namespace detail {

inline void check_window_3d(const Grid& g, const PolarizedTestFn& tf,
                            const Tensor3Map& m) {
  for (int d = 0; d < 2; ++d) {
    const Axis& a = g.axes[d];
    if (a.hi - a.lo < tf.base[d].radius)
      throw WindowError("kernel window narrower than the kernel band");
  }
  for (const cd& v : m.fib)
    if (v != cd{0, 0}) return;
  if (!tf.is_zero())
    throw WindowError("kernel window does not meet the kernel support");
}

template <typename MapT>
inline void check_window_lowd(const Grid& g, const PolarizedTestFn& tf,
                              const MapT& m) {
  const Axis& a = g.axes[0];
  if (a.hi - a.lo < tf.base[0].radius)
    throw WindowError("kernel window narrower than the kernel band");
  for (const cd& v : m.fib)
    if (v != cd{0, 0}) return;
  if (!tf.is_zero())
    throw WindowError("kernel window does not meet the kernel support");
}

}  // namespace detail

/// Assembles the representation kernel for `rep` over `grid`.
inline KernelOperator assemble_kernel(const RepDescriptor& rep,
                                      std::shared_ptr<const PolarizedTestFn> tf,
                                      const Grid& grid,
                                      const AssembleOptions& opt = {}) {
  grid.validate();
  KernelOperator K;
  K.grid = grid;
  K.rep = rep;
  K.tf = tf;
  K.mode = opt.mode;

  if (std::holds_alternative<CharacterRep>(rep)) {
    const auto& c = std::get<CharacterRep>(rep);
    auto dm = std::make_shared<DenseMap>();
    dm->n = 1;
    dm->m = {char_value(*tf, c.a_star, c.b_star)};
    K.grid = Grid{};  // scalar: empty grid, one point of weight 1
    K.map = dm;
    return K;
  }

  std::shared_ptr<const LinearMap> map;
  if (std::holds_alternative<SixDRep>(rep) || std::holds_alternative<IndHChi>(rep)) {
    HFunctional l;
    if (const auto* r = std::get_if<SixDRep>(&rep))
      l = {static_cast<double>(r->nu), 0.0, static_cast<double>(r->eps)};
    else
      l = std::get<IndHChi>(rep).l;
    if (tf->pol != Polarization::H3)
      throw std::invalid_argument("assemble_kernel: rep/polarization mismatch (H3 required)");
    H3KernelHooks hooks;
    const H3Frame frame = tf->frame;
    hooks.fiber = [l, frame](double c1, double c2, double c3) {
      return charts::fiber_of(frame, l, c1, c2, c3);
    };
    auto m = make_h3_map(grid, *tf, hooks);
    if (opt.check_window) detail::check_window_3d(grid, *tf, *m);
    map = m;
  } else if (const auto* r = std::get_if<FourDSRep>(&rep)) {
    auto m = make_fourds_map(grid, *tf, r->b_star, r->eps, opt);
    if (opt.check_window) detail::check_window_lowd(grid, *tf, *m);
    map = m;
  } else if (const auto* r = std::get_if<FourDRRep>(&rep)) {
    auto m = make_fourdr_map(grid, *tf, r->b_star, r->eps, opt);
    if (opt.check_window) detail::check_window_lowd(grid, *tf, *m);
    map = m;
  } else if (const auto* r = std::get_if<FourDPQRep>(&rep)) {
    const int eps = r->eps, nu = r->nu;
    auto m = make_l4_map(grid, *tf, [eps, nu](double a, double b) {
      return std::array<double, 4>{eps * std::exp(-0.5 * (a + b)),
                                   nu * std::exp(-b), 0.0, 0.0};
    });
    if (opt.check_window) detail::check_window_lowd(grid, *tf, *m);
    map = m;
  } else if (std::holds_alternative<IndLTrivial>(rep)) {
    auto m = make_l4_map(grid, *tf, [](double, double) {
      return std::array<double, 4>{0, 0, 0, 0};
    });
    map = m;  // legitimately zero for strict-envelope data: no window check
  } else if (const auto* r = std::get_if<TwoDQRep>(&rep)) {
    if (tf->pol != Polarization::LA5)
      throw std::invalid_argument("assemble_kernel: twoDQ needs an LA5 test function");
    const double as = r->a_star;
    const int nu = r->nu;
    auto m = make_line_map(grid, *tf, [as, nu](double b) {
      return std::array<double, 5>{as, 0.0, nu * std::exp(-b), 0.0, 0.0};
    });
    if (opt.check_window) detail::check_window_lowd(grid, *tf, *m);
    map = m;
  } else if (const auto* r = std::get_if<TwoDPRep>(&rep)) {
    if (tf->pol != Polarization::LX5)
      throw std::invalid_argument("assemble_kernel: twoDP needs an LX5 test function");
    const double xs = r->x_star;
    const int eps = r->eps;
    auto m = make_line_map(grid, *tf, [xs, eps](double y) {
      return std::array<double, 5>{xs, eps * std::exp(-y), 0.0, 0.0, 0.0};
    });
    if (opt.check_window) detail::check_window_lowd(grid, *tf, *m);
    map = m;
  } else {
    throw std::invalid_argument("assemble_kernel: unhandled representation");
  }

  if (opt.mode == EvalMode::Dense) {
    const std::size_t n = grid.size();
    if (n * n > opt.dense_budget)
      throw ConfigError("assemble_kernel: dense matrix exceeds the memory budget");
    auto dm = std::make_shared<DenseMap>();
    dm->n = n;
    dm->m.resize(n * n);
    const int d = grid.dim();
    std::vector<int> ij(d);
    std::vector<std::vector<double>> pts(n, std::vector<double>(d));
    for (std::size_t i = 0; i < n; ++i) {
      grid.unflatten(i, ij.data());
      for (int k = 0; k < d; ++k) pts[i][k] = grid.axes[k].point(ij[k]);
    }
    parallel_for(n, [&](std::size_t i) {
      for (std::size_t j = 0; j < n; ++j)
        dm->m[i * n + j] = kernel_value(rep, *tf, pts[i], pts[j], opt);
    });
    K.map = dm;
  } else {
    K.map = map;
  }
  return K;
}

}  // namespace g6cstar
