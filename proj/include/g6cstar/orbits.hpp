#pragma once

// Coadjoint-orbit classification for the 6-dimensional group: canonical
// representatives, orbit invariants, the stratification Gamma_0..Gamma_6,
// closures/boundaries and limit sets of orbit sequences.
//
// Orbit atlas (representative -> class):
//   a*A* + b*B*                 characters          (stratum 0)
//   x*(A*+B*)/2 + eps P*        2d, P-type          (stratum 1)
//   a*A* + nu Q*                2d, Q-type          (stratum 2)
//   eps P* + nu Q*              4d, PQ-type         (stratum 3)
//   b*B* + eps R*               4d, R-type          (stratum 4)
//   b*B* + eps S*               4d, S-type          (stratum 5)
//   nu Q* + eps S*              6d, open            (stratum 6)

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <variant>
#include <vector>

#include "lie6.hpp"

namespace g6cstar {

enum class OrbitKind : std::uint8_t {
  Character,
  TwoDP,
  TwoDQ,
  FourDPQ,
  FourDR,
  FourDS,
  SixD,
};

struct OrbitClass {
  OrbitKind kind = OrbitKind::Character;
  int eps = +1;        // sign parameter where the class carries one
  int nu = +1;         // second sign parameter (PQ- and 6d-type)
  double param = 0;    // real parameter (a*, b* or x*); for characters a*
  double param2 = 0;   // characters only: b*

  static OrbitClass character(double a_star, double b_star) {
    return {OrbitKind::Character, +1, +1, a_star, b_star};
  }
  static OrbitClass two_d_p(double x_star, int eps) {
    return {OrbitKind::TwoDP, eps, +1, x_star, 0};
  }
  static OrbitClass two_d_q(double a_star, int nu) {
    return {OrbitKind::TwoDQ, +1, nu, a_star, 0};
  }
  static OrbitClass four_d_pq(int eps, int nu) {
    return {OrbitKind::FourDPQ, eps, nu, 0, 0};
  }
  static OrbitClass four_d_r(double b_star, int eps) {
    return {OrbitKind::FourDR, eps, +1, b_star, 0};
  }
  static OrbitClass four_d_s(double b_star, int eps) {
    return {OrbitKind::FourDS, eps, +1, b_star, 0};
  }
  static OrbitClass six_d(int nu, int eps) {
    return {OrbitKind::SixD, eps, nu, 0, 0};
  }
};

struct StratumId {
  int index = 0;  // 0..6
};

struct OrbitInvariants {
  double phi = 0;    // 2 f(Q) f(S) - f(R)^2
  double phi2 = 0;   // f(R) f(P) - 2 (f(B) - b*) f(S)
  double psi = 0;    // f(R) (f(Y) + b*) + f(P) f(Q),  f(Y) = f(A) - f(B)
  int sgn_s = 0;     // sign of f(S)
};

inline int sgn(double x) { return x > 0 ? +1 : (x < 0 ? -1 : 0); }

/// The three scalar orbit invariants at f; phi2 and psi use the supplied
/// reference b*.
inline OrbitInvariants orbit_invariants(const Functional& f, double b_star_ref) {
  OrbitInvariants inv;
  inv.phi = 2.0 * f.q * f.s - f.r * f.r;
  inv.phi2 = f.r * f.p - 2.0 * (f.b - b_star_ref) * f.s;
  inv.psi = f.r * ((f.a - f.b) + b_star_ref) + f.p * f.q;
  inv.sgn_s = sgn(f.s);
  return inv;
}

/// Full orbit decision tree.  Zero tests are exact comparisons on the input
/// coefficients and derived invariants; no tolerance is applied.
inline OrbitClass classify(const Functional& f) {
  if (f.s != 0) {
    const int eps = sgn(f.s);
    const double phi = 2.0 * f.q * f.s - f.r * f.r;
    if (phi != 0) return OrbitClass::six_d(sgn(phi) * eps, eps);
    const double b_star = f.b - f.r * f.p / (2.0 * f.s);
    return OrbitClass::four_d_s(b_star, eps);
  }
  if (f.r != 0) {
    const int eps = sgn(f.r);
    const double b_star = -(f.a - f.b) - f.p * f.q / f.r;
    return OrbitClass::four_d_r(b_star, eps);
  }
  if (f.q != 0 && f.p != 0) return OrbitClass::four_d_pq(sgn(f.p), sgn(f.q));
  if (f.q != 0) return OrbitClass::two_d_q(f.a, sgn(f.q));
  if (f.p != 0) return OrbitClass::two_d_p(f.a + f.b, sgn(f.p));
  return OrbitClass::character(f.a, f.b);
}

/// Canonical representative functional of a class.
inline Functional representative(const OrbitClass& c) {
  Functional f;
  switch (c.kind) {
    case OrbitKind::Character:
      f.a = c.param;
      f.b = c.param2;
      break;
    case OrbitKind::TwoDP:
      f.a = 0.5 * c.param;
      f.b = 0.5 * c.param;
      f.p = c.eps;
      break;
    case OrbitKind::TwoDQ:
      f.a = c.param;
      f.q = c.nu;
      break;
    case OrbitKind::FourDPQ:
      f.p = c.eps;
      f.q = c.nu;
      break;
    case OrbitKind::FourDR:
      f.b = c.param;
      f.r = c.eps;
      break;
    case OrbitKind::FourDS:
      f.b = c.param;
      f.s = c.eps;
      break;
    case OrbitKind::SixD:
      f.q = c.nu;
      f.s = c.eps;
      break;
  }
  return f;
}

struct CanonicalRep {
  OrbitClass cls;
  GroupElement g;  // coadjoint(g, f) equals representative(cls)
};

/// Reduces f to its canonical representative: returns the class together
/// with a group element realizing the reduction.
inline CanonicalRep canonical_rep(const Functional& f) {
  const OrbitClass cls = classify(f);
  GroupElement g;
  switch (cls.kind) {
    case OrbitKind::Character:
      break;
    case OrbitKind::SixD:
    case OrbitKind::FourDS: {
      // Step 1: E(a,0,p,0,r,s) kills the A*,P*,R* components and scales
      // the S*-coefficient to eps.
      GroupElement g1;
      g1.a = std::log(std::abs(f.s));
      g1.p = f.r / f.s;
      g1.r = -f.p / f.s;
      g1.s = -(f.a + 0.5 * g1.p * f.p + 0.5 * g1.r * f.r) / f.s - 0.5 * g1.p * g1.r;
      Functional f1 = coadjoint(g1, f);
      if (cls.kind == OrbitKind::FourDS) {
        g = g1;
        break;
      }
      // Step 2: E(0,b,0,q,0,0) kills B* and scales Q* to nu.
      GroupElement g2;
      g2.q = -f1.b / f1.q;
      g2.b = std::log(std::abs(f1.q));
      g = group_mul(g2, g1);
      break;
    }
    case OrbitKind::FourDR: {
      // E(alpha,alpha,p,q,r,0) with alpha = log|f(R)|.
      GroupElement g1;
      g1.a = g1.b = std::log(std::abs(f.r));
      g1.q = -f.p / f.r;
      g1.p = f.q / f.r;
      g1.r = -(2.0 * f.a + g1.p * f.p) / f.r - g1.p * g1.q;
      g = g1;
      break;
    }
    case OrbitKind::FourDPQ: {
      GroupElement g1;
      g1.p = -2.0 * f.a / f.p;
      g1.q = -(f.b + f.a) / f.q;
      g1.b = std::log(std::abs(f.q));
      g1.a = g1.b + 2.0 * std::log(std::abs(f.p));
      g = g1;
      break;
    }
    case OrbitKind::TwoDQ: {
      GroupElement g1;
      g1.q = -f.b / f.q;
      g1.b = std::log(std::abs(f.q));
      g = g1;
      break;
    }
    case OrbitKind::TwoDP: {
      const double alpha = std::log(std::abs(f.p));
      GroupElement g1;
      g1.a = alpha;
      g1.b = -alpha;
      g1.p = (f.b - f.a) / f.p;
      g = g1;
      break;
    }
  }
  return {cls, g};
}

inline StratumId stratum(const OrbitClass& c) {
  switch (c.kind) {
    case OrbitKind::Character: return {0};
    case OrbitKind::TwoDP: return {1};
    case OrbitKind::TwoDQ: return {2};
    case OrbitKind::FourDPQ: return {3};
    case OrbitKind::FourDR: return {4};
    case OrbitKind::FourDS: return {5};
    case OrbitKind::SixD: return {6};
  }
  return {0};
}

// ---------------------------------------------------------------------------
// Closures and boundaries
// ---------------------------------------------------------------------------

/// How the character-plane part of a boundary is constrained.
enum class CharConstraint {
  All,       // every a*A* + b*B*
  FixedA,    // a* = value, b* free
  FixedSum,  // a* + b* = value (X*-coefficient pinned)
};

/// A symbolic family of boundary orbits: one class kind with its real
/// parameter either pinned or free, and sign parameters either pinned or
/// ranging over both values.
struct OrbitFamily {
  OrbitKind kind;
  std::optional<double> param;   // nullopt = parameter ranges over R
  std::optional<int> eps;        // nullopt = both signs
  std::optional<int> nu;         // nullopt = both signs
  CharConstraint char_constraint = CharConstraint::All;  // characters only
  double char_value = 0;                                 // for FixedA/FixedSum
};

/// The boundary (closure minus orbit) of a class, as the exact list of
/// orbit families.  Characters are closed points with empty boundary.
inline std::vector<OrbitFamily> closure_boundary(const OrbitClass& c) {
  using K = OrbitKind;
  std::vector<OrbitFamily> out;
  auto chars_all = [] {
    OrbitFamily f{K::Character, std::nullopt, std::nullopt, std::nullopt};
    return f;
  };
  switch (c.kind) {
    case K::Character:
      break;
    case K::TwoDP: {
      OrbitFamily f{K::Character, std::nullopt, std::nullopt, std::nullopt,
                    CharConstraint::FixedSum, c.param};
      out.push_back(f);
      break;
    }
    case K::TwoDQ: {
      OrbitFamily f{K::Character, std::nullopt, std::nullopt, std::nullopt,
                    CharConstraint::FixedA, c.param};
      out.push_back(f);
      break;
    }
    case K::FourDPQ:
      out.push_back({K::TwoDP, std::nullopt, c.eps, std::nullopt});
      out.push_back({K::TwoDQ, std::nullopt, std::nullopt, c.nu});
      out.push_back(chars_all());
      break;
    case K::FourDR:
      out.push_back({K::TwoDP, std::nullopt, std::nullopt, std::nullopt});
      out.push_back({K::TwoDQ, std::nullopt, std::nullopt, std::nullopt});
      out.push_back(chars_all());
      break;
    case K::FourDS:
      out.push_back({K::TwoDQ, std::nullopt, std::nullopt, c.eps});
      out.push_back({K::TwoDP, std::nullopt, std::nullopt, std::nullopt});
      out.push_back(chars_all());
      break;
    case K::SixD:
      out.push_back({K::FourDS, std::nullopt, c.eps, std::nullopt});
      if (c.nu == c.eps) {
        // Restricted-to-h boundary list keeps only the eps-signed Q-ray.
        out.push_back({K::FourDPQ, std::nullopt, std::nullopt, c.nu});
        out.push_back({K::TwoDQ, std::nullopt, std::nullopt, c.nu});
        out.push_back({K::TwoDP, std::nullopt, std::nullopt, std::nullopt});
      } else {
        // Everything in the hyperplane f(S) = 0 bounds the orbit.
        out.push_back({K::FourDR, std::nullopt, std::nullopt, std::nullopt});
        out.push_back({K::FourDPQ, std::nullopt, std::nullopt, std::nullopt});
        out.push_back({K::TwoDQ, std::nullopt, std::nullopt, std::nullopt});
        out.push_back({K::TwoDP, std::nullopt, std::nullopt, std::nullopt});
      }
      out.push_back(chars_all());
      break;
  }
  return out;
}

/// Membership of f in the closure of the orbit of `c`, via the per-case
/// algebraic characterizations.  Equalities are tested to `tol` relative to
/// the coefficient scale (orbit samples carry rounding noise).
inline bool in_closure(const Functional& f, const OrbitClass& c, double tol = 1e-9) {
  const double scale = std::max(1.0, f.norm_inf());
  const double t1 = tol * scale;          // linear expressions
  const double t2 = tol * scale * scale;  // quadratic invariants
  auto zero1 = [&](double x) { return std::abs(x) <= t1; };
  auto zero2 = [&](double x) { return std::abs(x) <= t2; };

  const double fy = f.a - f.b;
  switch (c.kind) {
    case OrbitKind::Character:
      return zero1(f.p) && zero1(f.q) && zero1(f.r) && zero1(f.s) &&
             zero1(f.a - c.param) && zero1(f.b - c.param2);
    case OrbitKind::TwoDP:
      return zero1(f.q) && zero1(f.r) && zero1(f.s) &&
             zero1(f.a + f.b - c.param) && c.eps * f.p >= -t1;
    case OrbitKind::TwoDQ:
      return zero1(f.p) && zero1(f.r) && zero1(f.s) && zero1(f.a - c.param) &&
             c.nu * f.q >= -t1;
    case OrbitKind::FourDPQ:
      return zero1(f.r) && zero1(f.s) && c.eps * f.p >= -t1 && c.nu * f.q >= -t1;
    case OrbitKind::FourDR: {
      if (!zero1(f.s)) return false;
      const double psi = f.r * (fy + c.param) + f.p * f.q;
      const bool in_orbit = c.eps * f.r > t1 && zero2(psi);
      const bool in_bdry = zero1(f.r) && (zero1(f.p) || zero1(f.q));
      return in_orbit || in_bdry;
    }
    case OrbitKind::FourDS: {
      const double phi = 2.0 * f.q * f.s - f.r * f.r;
      const double phi2 = f.r * f.p - 2.0 * (f.b - c.param) * f.s;
      const bool in_orbit = c.eps * f.s > t1 && zero2(phi) && zero2(phi2) &&
                            c.eps * f.q >= -t1;
      const bool in_bdry = zero1(f.s) && zero1(f.r) &&
                           (zero1(f.q) || (zero1(f.p) && c.eps * f.q >= -t1));
      return in_orbit || in_bdry;
    }
    case OrbitKind::SixD: {
      const double phi = 2.0 * f.q * f.s - f.r * f.r;
      const bool in_orbit = c.eps * f.s > t1 && c.nu * c.eps * phi > t2;
      if (in_orbit) return true;
      if (c.nu == c.eps) {
        // {phi = 0, eps f(S) >= 0} intersected with the h-restricted
        // boundary list (excludes the -eps Q-ray when f(S) = f(R) = 0).
        if (!zero2(phi) || c.eps * f.s < -t1) return false;
        if (c.eps * f.s > t1) return true;
        return c.eps * f.q >= -t1;
      }
      // nu = -eps: all of {f(S) = 0} plus the eps-signed S-cone.
      return zero1(f.s) || (zero2(phi) && c.eps * f.s > t1);
    }
  }
  return false;
}

// ---------------------------------------------------------------------------
// Limit sets of orbit sequences
// ---------------------------------------------------------------------------

enum class SeqFamily {
  Constant,   // constant sequence of one class
  Characters, // characters along a line base + lambda * dir
  EpsP,       // x*X* + eps P*, parameter x*
  NuQ,        // a*A* + nu Q*, parameter a*
  EpsR,       // b*B* + eps R*, parameter b*
  EpsS,       // b*B* + eps S*, parameter b*
};

struct OrbitSequence {
  SeqFamily family = SeqFamily::Constant;
  int sign = +1;                 // eps or nu for the four line families
  std::vector<double> params;    // lambda_k (ignored for Constant)
  OrbitClass constant_class;     // Constant only
  double char_base_a = 0, char_base_b = 0;  // Characters only
  double char_dir_a = 1, char_dir_b = 0;

  static OrbitSequence constant(const OrbitClass& c, std::size_t n = 1) {
    OrbitSequence s;
    s.family = SeqFamily::Constant;
    s.constant_class = c;
    s.params.assign(n, 0.0);
    return s;
  }

  /// Builds a sequence from explicit classes; rejects mixed families.
  static OrbitSequence from_classes(const std::vector<OrbitClass>& classes) {
    if (classes.empty())
      throw std::invalid_argument("orbit sequence: empty class list");
    OrbitSequence s;
    const OrbitClass& c0 = classes.front();
    bool all_same = true;
    for (const auto& c : classes) {
      if (c.kind != c0.kind || c.eps != c0.eps || c.nu != c0.nu ||
          (c.kind == OrbitKind::Character &&
           (c.param != c0.param || c.param2 != c0.param2)) ||
          (c.kind != OrbitKind::Character && c.param != c0.param))
        all_same = false;
      if (c.kind != c0.kind)
        throw std::invalid_argument("orbit sequence: mixed orbit families");
      if (c.kind != OrbitKind::Character && (c.eps != c0.eps || c.nu != c0.nu))
        throw std::invalid_argument("orbit sequence: mixed sign parameters");
    }
    if (all_same) return constant(c0, classes.size());
    switch (c0.kind) {
      case OrbitKind::TwoDP: s.family = SeqFamily::EpsP; s.sign = c0.eps; break;
      case OrbitKind::TwoDQ: s.family = SeqFamily::NuQ; s.sign = c0.nu; break;
      case OrbitKind::FourDR: s.family = SeqFamily::EpsR; s.sign = c0.eps; break;
      case OrbitKind::FourDS: s.family = SeqFamily::EpsS; s.sign = c0.eps; break;
      case OrbitKind::Character: {
        s.family = SeqFamily::Characters;
        // Fit the character line through the first two distinct points.
        s.char_base_a = c0.param;
        s.char_base_b = c0.param2;
        for (const auto& c : classes) {
          const double da = c.param - c0.param, db = c.param2 - c0.param2;
          if (da != 0 || db != 0) {
            const double n = std::hypot(da, db);
            s.char_dir_a = da / n;
            s.char_dir_b = db / n;
            break;
          }
        }
        for (const auto& c : classes) {
          s.params.push_back((c.param - c0.param) * s.char_dir_a +
                             (c.param2 - c0.param2) * s.char_dir_b);
          // Reject points off the line.
          const double off = (c.param - c0.param) * s.char_dir_b -
                             (c.param2 - c0.param2) * s.char_dir_a;
          if (std::abs(off) > 1e-12)
            throw std::invalid_argument("orbit sequence: characters not on a line");
        }
        return s;
      }
      default:
        throw std::invalid_argument(
            "orbit sequence: non-constant sequences exist only in the four "
            "line families and the characters");
    }
    for (const auto& c : classes) s.params.push_back(c.param);
    return s;
  }
};

struct LimitSet {
  bool empty = true;                     // sequence escapes to infinity
  std::optional<OrbitClass> principal;   // the limiting class, when any
  std::vector<OrbitFamily> families;     // its boundary families
};

namespace detail {

// Decides the limit of a finite parameter sequence.  Sequences are expected
// to be constant, asymptotically L + O(1/k), or divergent; anything that the
// tail fit cannot certify is treated as escaping to infinity.
inline std::optional<double> sequence_limit(const std::vector<double>& v) {
  if (v.empty()) return std::nullopt;
  bool constant = true;
  for (double x : v)
    if (x != v.front()) constant = false;
  if (constant) return v.front();

  const std::size_t n = v.size();
  const std::size_t tail = std::max<std::size_t>(4, n / 2);
  const std::size_t start = n > tail ? n - tail : 0;
  if (n - start < 3) return std::nullopt;
  // Least squares for v_k = L + c/k over the tail (k is 1-based).
  double s11 = 0, s1x = 0, sxx = 0, s1y = 0, sxy = 0;
  for (std::size_t i = start; i < n; ++i) {
    const double x = 1.0 / static_cast<double>(i + 1);
    const double y = v[i];
    s11 += 1; s1x += x; sxx += x * x; s1y += y; sxy += x * y;
  }
  const double det = s11 * sxx - s1x * s1x;
  if (std::abs(det) < 1e-30) return std::nullopt;
  const double L = (sxx * s1y - s1x * sxy) / det;
  const double c = (s11 * sxy - s1x * s1y) / det;
  double rss = 0;
  for (std::size_t i = start; i < n; ++i) {
    const double x = 1.0 / static_cast<double>(i + 1);
    const double r = v[i] - (L + c * x);
    rss += r * r;
  }
  const double rms = std::sqrt(rss / static_cast<double>(n - start));
  if (rms <= 1e-8 * (1.0 + std::abs(L))) return L;
  return std::nullopt;
}

}  // namespace detail

/// Limit set of a properly converging orbit sequence: the closure of the
/// limiting orbit, or empty when the sequence goes to infinity.
inline LimitSet limit_set(const OrbitSequence& seq) {
  if (seq.params.empty())
    throw std::invalid_argument("limit_set: empty sequence");
  LimitSet out;
  auto fill = [&out](const OrbitClass& c) {
    out.empty = false;
    out.principal = c;
    out.families = closure_boundary(c);
  };
  if (seq.family == SeqFamily::Constant) {
    fill(seq.constant_class);
    return out;
  }
  const std::optional<double> lim = detail::sequence_limit(seq.params);
  if (!lim) return out;  // goes to infinity
  switch (seq.family) {
    case SeqFamily::EpsP: fill(OrbitClass::two_d_p(*lim, seq.sign)); break;
    case SeqFamily::NuQ: fill(OrbitClass::two_d_q(*lim, seq.sign)); break;
    case SeqFamily::EpsR: fill(OrbitClass::four_d_r(*lim, seq.sign)); break;
    case SeqFamily::EpsS: fill(OrbitClass::four_d_s(*lim, seq.sign)); break;
    case SeqFamily::Characters:
      fill(OrbitClass::character(seq.char_base_a + *lim * seq.char_dir_a,
                                 seq.char_base_b + *lim * seq.char_dir_b));
      break;
    default: break;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Explicit boundary-approach curves
// ---------------------------------------------------------------------------

/// The explicit curves g(a) with coadjoint(g(a), f) converging to a boundary
/// point of the orbit of f as a -> infinity.  Each returns the group element
/// at parameter a; `start` is the orbit's representative, `target` the
/// claimed boundary point.
struct BoundaryCurve {
  Functional start;
  Functional target;
  GroupElement (*element)(double a, const Functional& start, const Functional& target);
  const char* name;
};

namespace curves {

// Orbit of b*B* + eps S*, target a~A* + b~B* + q~Q* with eps*q~ > 0
// (constant slots; the approach is driven by a alone).
inline GroupElement s_orbit_to_q_ray(double a, const Functional& f0, const Functional& tgt) {
  const double eps = f0.s, b_star = f0.b;
  const double p = std::sqrt(2.0 * tgt.q * eps);
  const double r = 2.0 * eps * (b_star - tgt.b) / p;
  const double s = eps * (tgt.a + tgt.b - b_star);
  return {a, 0, p, 0, r, s};
}

// Orbit of b*B* + eps S*, target a~A* + b~B* + p~P* with p~ != 0.
inline GroupElement s_orbit_to_p_plane(double a, const Functional& f0, const Functional& tgt) {
  const double eps = f0.s, b_star = f0.b;
  const double p = 2.0 * (b_star - tgt.b) / tgt.p * std::exp(-0.5 * a);
  const double r = eps * tgt.p * std::exp(0.5 * a);
  const double s = eps * tgt.a - 0.5 * p * r;
  return {a, 0, p, 0, r, s};
}

// Orbit of b*B* + eps S*, target a~A* + b~B*.
inline GroupElement s_orbit_to_character(double a, const Functional& f0, const Functional& tgt) {
  const double eps = f0.s, b_star = f0.b;
  const double p = 2.0 * (b_star - tgt.b) * eps * std::exp(-0.25 * a);
  const double r = std::exp(0.25 * a);
  const double s = eps * tgt.a - 0.5 * p * r;
  return {a, 0, p, 0, r, s};
}

// Orbit of b*B* + eps R*, target x~X* + y~Y* + p~P* with p~ != 0
// (alpha-parametrized, E(alpha,alpha,...)).
inline GroupElement r_orbit_to_p_plane(double alpha, const Functional& f0, const Functional& tgt) {
  const double eps = f0.r, b_star = f0.b;
  const double x_t = tgt.a + tgt.b, y_t = tgt.a - tgt.b;
  const double q = tgt.p * eps;           // q-slot carries q*eps, q -> p~
  const double p = (y_t + b_star) / tgt.p;
  const double r = (x_t - b_star) * eps;  // r-slot carries r*eps, r -> x~ - b*
  return {alpha, alpha, p, q, r, 0};
}

// Orbit of b*B* + eps R*, target x~X* + y~Y* (p~ = 0 case).
inline GroupElement r_orbit_to_y_plane(double alpha, const Functional& f0, const Functional& tgt) {
  const double eps = f0.r, b_star = f0.b;
  const double x_t = tgt.a + tgt.b, y_t = tgt.a - tgt.b;
  const double p = eps * (y_t + b_star) * std::exp(0.5 * alpha);
  const double q = std::exp(-0.5 * alpha);
  const double r = (x_t - b_star) * eps;
  return {alpha, alpha, p, q, r, 0};
}

}  // namespace curves

}  // namespace g6cstar
