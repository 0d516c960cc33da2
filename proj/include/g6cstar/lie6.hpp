#pragma once

// Exact arithmetic for the 6-dimensional solvable Lie algebra spanned by
// {A,B,P,Q,R,S}, its simply connected group in E-coordinates
//   E(a,b,p,q,r,s) = exp(aA) exp(bB) exp(pP) exp(qQ) exp(rR) exp(sS),
// and the coadjoint action on the dual space.
//
// Nonzero brackets:
//   [P,Q]=R   [P,R]=S   [A,P]=P/2   [B,P]=-P/2   [B,Q]=Q
//   [A,R]=R/2 [B,R]=R/2 [A,S]=S     ([A,Q]=0, [B,S]=0)
//
// The subalgebra g0 = span{A,B,P} integrates to the subgroup G0, the abelian
// ideal h = span{Q,R,S} to the normal subgroup H, and G = G0 * H.
//
// The six-coordinate product law follows from that decomposition: writing
// g_i = k_i h_i with k_i in G0 and h_i in H,
//   g_1 g_2 = (k_1 k_2) (k_2^{-1} h_1 k_2) h_2,
// where the G0 part obeys E(s,t,v) E(a,b,p) = E(s+a, t+b, e^{(-a+b)/2}v + p)
// (from Ad(exp aA)P = e^{a/2}P, Ad(exp bB)P = e^{-b/2}P) and conjugation
// moves the H part by Ad(k_2^{-1}), assembled from
//   Ad(exp tP): (q,r,s) -> (q, r + tq, s + tr + t^2 q/2)      (nilpotent)
//   Ad(exp tB): (q,r,s) -> (e^t q, e^{t/2} r, s)
//   Ad(exp tA): (q,r,s) -> (q, e^{t/2} r, e^t s).
// Its correctness is gated by the associativity and Ad*-action-law property
// tests rather than by a closed-form reference.

#include <array>
#include <cmath>
#include <stdexcept>

namespace g6cstar {

struct AlgebraVector {
  double a = 0, b = 0, p = 0, q = 0, r = 0, s = 0;

  AlgebraVector operator+(const AlgebraVector& o) const {
    return {a + o.a, b + o.b, p + o.p, q + o.q, r + o.r, s + o.s};
  }
  AlgebraVector operator-(const AlgebraVector& o) const {
    return {a - o.a, b - o.b, p - o.p, q - o.q, r - o.r, s - o.s};
  }
  AlgebraVector operator*(double c) const {
    return {c * a, c * b, c * p, c * q, c * r, c * s};
  }
  std::array<double, 6> coords() const { return {a, b, p, q, r, s}; }
};

/// An element of the dual space in the dual basis {A*,B*,P*,Q*,R*,S*}.
struct Functional {
  double a = 0, b = 0, p = 0, q = 0, r = 0, s = 0;

  Functional operator+(const Functional& o) const {
    return {a + o.a, b + o.b, p + o.p, q + o.q, r + o.r, s + o.s};
  }
  Functional operator-(const Functional& o) const {
    return {a - o.a, b - o.b, p - o.p, q - o.q, r - o.r, s - o.s};
  }
  Functional operator*(double c) const {
    return {c * a, c * b, c * p, c * q, c * r, c * s};
  }
  std::array<double, 6> coords() const { return {a, b, p, q, r, s}; }

  double norm_inf() const {
    double m = 0;
    for (double c : coords()) m = std::max(m, std::abs(c));
    return m;
  }
};

/// Group element in E-coordinates.
struct GroupElement {
  double a = 0, b = 0, p = 0, q = 0, r = 0, s = 0;

  static GroupElement identity() { return {}; }
};

/// Dual pairing <f, X>.
inline double pair(const Functional& f, const AlgebraVector& x) {
  return f.a * x.a + f.b * x.b + f.p * x.p + f.q * x.q + f.r * x.r + f.s * x.s;
}

/// Lie bracket, bilinear extension of the structure-constant table.
inline AlgebraVector bracket(const AlgebraVector& x, const AlgebraVector& y) {
  AlgebraVector z;
  // [A,P], [B,P] -> P
  z.p = 0.5 * (x.a * y.p - x.p * y.a) - 0.5 * (x.b * y.p - x.p * y.b);
  // [B,Q] -> Q
  z.q = x.b * y.q - x.q * y.b;
  // [A,R], [B,R], [P,Q] -> R
  z.r = 0.5 * (x.a * y.r - x.r * y.a) + 0.5 * (x.b * y.r - x.r * y.b) +
        (x.p * y.q - x.q * y.p);
  // [A,S], [P,R] -> S
  z.s = (x.a * y.s - x.s * y.a) + (x.p * y.r - x.r * y.p);
  return z;
}

namespace detail {

// Ad(exp(tP)), Ad(exp(tB)), Ad(exp(tA)) restricted to h = span{Q,R,S},
// acting on coordinates (q,r,s).  ad_P is nilpotent, ad_A and ad_B diagonal.
struct HVec {
  double q = 0, r = 0, s = 0;
};

inline HVec ad_exp_p(double t, const HVec& v) {
  return {v.q, v.r + t * v.q, v.s + t * v.r + 0.5 * t * t * v.q};
}
inline HVec ad_exp_b(double t, const HVec& v) {
  return {std::exp(t) * v.q, std::exp(0.5 * t) * v.r, v.s};
}
inline HVec ad_exp_a(double t, const HVec& v) {
  return {v.q, std::exp(0.5 * t) * v.r, std::exp(t) * v.s};
}

// Ad(g0) on h for g0 = E(a,b,p) in G0.
inline HVec ad_g0(double a, double b, double p, const HVec& v) {
  return ad_exp_a(a, ad_exp_b(b, ad_exp_p(p, v)));
}

// Ad(g0^{-1}) on h.
inline HVec ad_g0_inv(double a, double b, double p, const HVec& v) {
  return ad_exp_p(-p, ad_exp_b(-b, ad_exp_a(-a, v)));
}

}  // namespace detail

/// Group law in E-coordinates.  On the G0 part this is
/// E(s,t,v)*E(a,b,p) = E(s+a, t+b, e^{(-a+b)/2} v + p); the H part moves by
/// Ad of the inverted second G0 factor, H being abelian and normal.
inline GroupElement group_mul(const GroupElement& g1, const GroupElement& g2) {
  GroupElement g;
  g.a = g1.a + g2.a;
  g.b = g1.b + g2.b;
  g.p = std::exp(0.5 * (-g2.a + g2.b)) * g1.p + g2.p;
  detail::HVec h1{g1.q, g1.r, g1.s};
  detail::HVec moved = detail::ad_g0_inv(g2.a, g2.b, g2.p, h1);
  g.q = moved.q + g2.q;
  g.r = moved.r + g2.r;
  g.s = moved.s + g2.s;
  return g;
}

/// Closed-form inverse, g * inverse(g) = identity.
inline GroupElement inverse(const GroupElement& g) {
  GroupElement inv;
  inv.a = -g.a;
  inv.b = -g.b;
  inv.p = -std::exp(0.5 * (g.a - g.b)) * g.p;
  detail::HVec moved = detail::ad_g0(g.a, g.b, g.p, {g.q, g.r, g.s});
  inv.q = -moved.q;
  inv.r = -moved.r;
  inv.s = -moved.s;
  return inv;
}

/// Coadjoint action Ad*(g) f in the dual basis.
inline Functional coadjoint(const GroupElement& g, const Functional& f) {
  const double a = g.a, b = g.b, p = g.p, q = g.q, r = g.r, s = g.s;
  Functional out;
  out.a = f.a + 0.5 * p * f.p + 0.5 * (p * q + r) * f.r + (s + 0.5 * p * r) * f.s;
  out.b = f.b - 0.5 * p * f.p + q * f.q + 0.5 * (r - p * q) * f.r -
          0.5 * p * r * f.s;
  out.p = std::exp(0.5 * (-a + b)) * (f.p + q * f.r + r * f.s);
  out.q = std::exp(-b) * (f.q - p * f.r + 0.5 * p * p * f.s);
  out.r = std::exp(0.5 * (-a - b)) * (f.r - p * f.s);
  out.s = std::exp(-a) * f.s;
  return out;
}

/// Functional supported on h* = span{Q*,R*,S*}.
struct HFunctional {
  double q = 0, r = 0, s = 0;
};

/// Restricted coadjoint action of g0 = E(a,b,p) in G0 on h*:
///   Q*-coeff e^{-b}(q - p r + p^2/2 s),
///   R*-coeff e^{-(a+b)/2}(r - p s),
///   S*-coeff e^{-a} s.
inline HFunctional coadjoint_h(double a, double b, double p, const HFunctional& l) {
  HFunctional out;
  out.q = std::exp(-b) * (l.q - p * l.r + 0.5 * p * p * l.s);
  out.r = std::exp(0.5 * (-a - b)) * (l.r - p * l.s);
  out.s = std::exp(-a) * l.s;
  return out;
}

/// Checked variant on full types: g must lie in G0, l must vanish on A,B,P.
inline Functional coadjoint_h(const GroupElement& g, const Functional& l) {
  if (g.q != 0 || g.r != 0 || g.s != 0)
    throw std::invalid_argument("coadjoint_h: group element not in G0");
  if (l.a != 0 || l.b != 0 || l.p != 0)
    throw std::invalid_argument("coadjoint_h: functional not supported on h*");
  HFunctional out = coadjoint_h(g.a, g.b, g.p, {l.q, l.r, l.s});
  Functional res;
  res.q = out.q;
  res.r = out.r;
  res.s = out.s;
  return res;
}

}  // namespace g6cstar
