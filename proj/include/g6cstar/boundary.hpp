#pragma once

// delta-partitions of the base spaces, the stratum comparison operators
// sigma_{i,delta}, and the defect/compactness metrics behind the boundary
// conditions.
//
// Strata and their base coordinates:
//   6d-  nu = -eps   (a,b,p)  E-chart      regions S1,S2,S3(k,+-),S4(+-),Excl
//   6d+  nu = +eps   (a,b,p)  E-chart      regions S1,S2,S3(k): a partition
//   epsS*            (x,b,p)  XBP-chart    S1 and Z^3-cells S3(k1,k2,k3)
//   epsR*            (x,y,p)  XYP-chart    S1 and Z^3-cells S2(k1,k2,k3)
//   epsP*+nuQ*       (a,b)                 S1..S4 via x=(a+b)/2, y=b
//   nuQ*             (a,b)                 S1 = {e^{-b} > delta}, S2 rest
//   epsP*            (a,b)                 S1 = {e^{-(a-b)/2} > delta}, S2 rest

#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "repkernels.hpp"

namespace g6cstar {

enum class StratumKind { SixDMinus, SixDPlus, EpsS, EpsR, PQ, NuQ, EpsP };

struct StratumSpec {
  StratumKind kind = StratumKind::SixDMinus;
  int eps = +1;
  int nu = +1;  // PQ only
};

inline const char* stratum_name(const StratumSpec& s) {
  switch (s.kind) {
    case StratumKind::SixDMinus: return "sixd-";
    case StratumKind::SixDPlus: return "sixd+";
    case StratumKind::EpsS: return "epsS";
    case StratumKind::EpsR: return "epsR";
    case StratumKind::PQ: return "pq";
    case StratumKind::NuQ: return "nuQ";
    case StratumKind::EpsP: return "epsP";
  }
  return "?";
}

struct PartitionParams {
  double delta = 0.1;
  double D = 1.0;

  // r_delta = (1/4) log(1/delta): r_delta -> infinity and
  // e^{r_delta} delta^{1/2} = delta^{1/4} -> 0 as delta -> 0.
  double r_delta() const { return 0.25 * std::log(1.0 / delta); }

  void validate() const {
    if (!(delta > 0.0 && delta <= 0.5))
      throw ConfigError("partition: delta must lie in (0, 1/2]");
    if (!(D > 0.0)) throw ConfigError("partition: D must be positive");
  }
};

struct RegionId {
  enum class Tag { S1, S2, S3, S4, Excluded } tag = Tag::S1;
  int k1 = 0, k2 = 0, k3 = 0;  // cell indices where the region carries them
  int sign = 0;                // +-1 for the signed 6d- variants

  bool operator==(const RegionId&) const = default;
};

namespace part {

// I_{c,l} = [c l, c l + c): index of x.
inline int cell(double x, double c) { return static_cast<int>(std::floor(x / c)); }

}  // namespace part

/// The unique region of the stratum's base partition containing `point`
/// (6d- points in none of the listed sets get the Excluded tag).
inline RegionId partition_region(const StratumSpec& spec, const PartitionParams& par,
                                 const std::vector<double>& point) {
  par.validate();
  const double d = par.delta;
  using Tag = RegionId::Tag;
  switch (spec.kind) {
    case StratumKind::SixDMinus: {
      if (point.size() != 3) throw std::invalid_argument("partition_region: need (a,b,p)");
      const double a = point[0], b = point[1], p = point[2];
      const double ea = std::exp(-a), eb = std::exp(-b);
      if (ea > std::pow(d, 6)) return {Tag::S1};
      if (eb < d) return {Tag::S2};
      const double g = spec.eps * std::exp(-0.5 * b) * (1.0 - 0.5 * p * p);
      const bool in_b_range = eb <= std::pow(d, -1.25);
      if (in_b_range && g > std::sqrt(d))
        return {Tag::S3, part::cell(p, d * d), 0, 0, +1};
      if (in_b_range && g < -std::sqrt(d))
        return {Tag::S3, part::cell(p, d * d), 0, 0, -1};
      if (ea < std::pow(d, 6) && std::abs(g) <= std::sqrt(d))
        return {Tag::S4, 0, 0, 0, p <= 0 ? +1 : -1};
      return {Tag::Excluded};
    }
    case StratumKind::SixDPlus: {
      if (point.size() != 3) throw std::invalid_argument("partition_region: need (a,b,p)");
      const double a = point[0], b = point[1], p = point[2];
      if (std::exp(-a) > std::pow(d, 6)) return {Tag::S1};
      if (std::exp(-b) < d) return {Tag::S2};
      return {Tag::S3, part::cell(p, d * d)};
    }
    case StratumKind::EpsS: {
      if (point.size() != 3) throw std::invalid_argument("partition_region: need (x,b,p)");
      const double x = point[0], b = point[1], p = point[2];
      if (std::exp(-x) > std::pow(d, 6)) return {Tag::S1};
      const double r = par.r_delta();
      const int k1 = part::cell(x, r), k2 = part::cell(b, r);
      const double w = par.D * d * d * std::exp(0.5 * r * (k1 + k2));
      return {Tag::S3, k1, k2, part::cell(p, w)};
    }
    case StratumKind::EpsR: {
      if (point.size() != 3) throw std::invalid_argument("partition_region: need (x,y,p)");
      const double x = point[0], y = point[1], p = point[2];
      if (std::exp(-x) > std::pow(d, 6)) return {Tag::S1};
      const double r = par.r_delta();
      const int k1 = part::cell(x, r), k2 = part::cell(y, r);
      const double w = par.D * d * d * std::exp(r * (k1 - k2));
      return {Tag::S2, k1, k2, part::cell(p, w)};
    }
    case StratumKind::PQ: {
      if (point.size() != 2) throw std::invalid_argument("partition_region: need (a,b)");
      const double x = 0.5 * (point[0] + point[1]), y = point[1];
      const bool p_big = std::exp(-x) > std::pow(d, 6);
      const bool q_big = std::exp(-y) > std::pow(d, 6);
      if (p_big && q_big) return {Tag::S1};
      if (p_big) return {Tag::S2};
      if (q_big) return {Tag::S3};
      return {Tag::S4};
    }
    case StratumKind::NuQ: {
      if (point.size() != 2) throw std::invalid_argument("partition_region: need (a,b)");
      return std::exp(-point[1]) > d ? RegionId{Tag::S1} : RegionId{Tag::S2};
    }
    case StratumKind::EpsP: {
      if (point.size() != 2) throw std::invalid_argument("partition_region: need (a,b)");
      const double u = 0.5 * (point[0] - point[1]);
      return std::exp(-u) > d ? RegionId{Tag::S1} : RegionId{Tag::S2};
    }
  }
  return {Tag::Excluded};
}

/// Membership in the translated target region paired with a source cell:
/// T_{delta,3,k} (6d strata) resp. R_{delta,D,3,k} / R_{delta,D,2,k}.
inline bool target_contains(const StratumSpec& spec, const PartitionParams& par,
                            const RegionId& src, const std::vector<double>& point) {
  const double d = par.delta;
  switch (spec.kind) {
    case StratumKind::SixDMinus:
    case StratumKind::SixDPlus: {
      if (src.tag != RegionId::Tag::S3) return true;  // no target constraint
      return std::abs(part::cell(point[2], d * d) - src.k1) <= 1;
    }
    case StratumKind::EpsS: {
      const double r = par.r_delta();
      if (std::exp(-point[0]) > std::pow(d, 6)) return false;
      const double w = par.D * d * d * std::exp(0.5 * r * (src.k1 + src.k2));
      return std::abs(part::cell(point[0], r) - src.k1) <= 1 &&
             std::abs(part::cell(point[1], r) - src.k2) <= 1 &&
             std::abs(part::cell(point[2], w) - src.k3) <= 1;
    }
    case StratumKind::EpsR: {
      const double r = par.r_delta();
      if (std::exp(-point[0]) > std::pow(d, 6)) return false;
      const double w = par.D * d * d * std::exp(r * (src.k1 - src.k2));
      return std::abs(part::cell(point[0], r) - src.k1) <= 1 &&
             std::abs(part::cell(point[1], r) - src.k2) <= 1 &&
             std::abs(part::cell(point[2], w) - src.k3) <= 1;
    }
    default:
      return true;
  }
}

// ---------------------------------------------------------------------------
// The canonical smooth cutoff
// ---------------------------------------------------------------------------

/// C^infty plateau cutoff: 1 on [-1/2,1/2], supported in [-1,1], sup = 1.
inline double plateau_cutoff(double x) {
  const double t = std::abs(x);
  if (t <= 0.5) return 1.0;
  if (t >= 1.0) return 0.0;
  auto f = [](double u) { return u > 0 ? std::exp(-1.0 / u) : 0.0; };
  const double u = 2.0 * (1.0 - t);  // 0 at t=1, 1 at t=1/2
  return f(u) / (f(u) + f(1.0 - u));
}

// ---------------------------------------------------------------------------
// sigma maps
// ---------------------------------------------------------------------------

namespace detail {

inline double pow6(double d) { return std::pow(d, 6); }

// 6d- source indicators (E-chart coordinates).
struct SixDMinusRegions {
  double delta;
  int eps;
  bool s1(double a) const { return std::exp(-a) > pow6(delta); }
  double s2(double a, double b) const {
    return (!s1(a) && std::exp(-b) < delta) ? 1.0 : 0.0;
  }
  double s3(double a, double b, double p) const {  // both signs merged
    if (s1(a) || std::exp(-b) < delta) return 0.0;
    if (std::exp(-b) > std::pow(delta, -1.25)) return 0.0;
    const double g = eps * std::exp(-0.5 * b) * (1.0 - 0.5 * p * p);
    return std::abs(g) > std::sqrt(delta) ? 1.0 : 0.0;
  }
  double s4(double a, double b, double p, int sign) const {
    if (!(std::exp(-a) < pow6(delta)) || std::exp(-b) < delta) return 0.0;
    if (sign > 0 ? (p > 0) : (p <= 0)) return 0.0;
    const double g = std::exp(-0.5 * b) * std::abs(0.5 * p * p - 1.0);
    return g <= std::sqrt(delta) ? 1.0 : 0.0;
  }
  double excluded(double a, double b, double p) const {
    if (s1(a) || std::exp(-b) < delta) return 0.0;
    if (s3(a, b, p) != 0.0) return 0.0;
    if (s4(a, b, p, +1) != 0.0 || s4(a, b, p, -1) != 0.0) return 0.0;
    return 1.0;
  }
};

}  // namespace detail

struct SigmaParts {
  std::shared_ptr<SumMap> sum;                 // the full comparison operator
  std::shared_ptr<const LinearMap> s1_branch;  // branch supported on S1 (6d only)
  std::vector<std::shared_ptr<const LinearMap>> off_s1;  // branches outside S1
};

/// The stratum's comparison operator sigma_{i,delta}: sums of
/// (target multiplication) o (induced kernel at a boundary functional) o
/// (source multiplication), with all indicators evaluated pointwise.
inline SigmaParts make_sigma(const StratumSpec& spec, const PartitionParams& par,
                             std::shared_ptr<const PolarizedTestFn> tf,
                             const Grid& grid, const AssembleOptions& opt = {}) {
  par.validate();
  grid.validate();
  const double d = par.delta;
  const double eps = spec.eps;
  auto sum = std::make_shared<SumMap>();
  SigmaParts parts;
  auto add_off = [&](std::shared_ptr<const LinearMap> m) {
    sum->add(m);
    parts.off_s1.push_back(std::move(m));
  };

  switch (spec.kind) {
    case StratumKind::SixDMinus:
    case StratumKind::SixDPlus: {
      if (tf->pol != Polarization::H3 || tf->frame != H3Frame::E)
        throw std::invalid_argument("sigma: 6d strata need an H3 test function in the E chart");
      const bool plus = spec.kind == StratumKind::SixDPlus;
      detail::SixDMinusRegions reg{d, spec.eps};
      const H3Frame frame = tf->frame;

      // Branch on S1: sigma_{eps S*} o M_{phi~1} o M_{delta,1};
      // phi~1(b) = phi(-e^{-b}) for the (eps,-eps) orbit, phi(e^{-b}) for
      // (eps,eps).
      {
        H3KernelHooks h;
        h.fiber = [eps, frame](double c1, double c2, double c3) {
          return charts::fiber_of(frame, {0, 0, eps}, c1, c2, c3);
        };
        h.src = [reg, plus](double a, double b, double) {
          if (!reg.s1(a)) return 0.0;
          return plateau_cutoff(plus ? std::exp(-b) : -std::exp(-b));
        };
        auto m = make_h3_map(grid, *tf, h);
        sum->add(m);
        parts.s1_branch = m;
      }
      // Branch on S2: sigma_{eps S*} o M_{delta,2}.
      {
        H3KernelHooks h;
        h.fiber = [eps, frame](double c1, double c2, double c3) {
          return charts::fiber_of(frame, {0, 0, eps}, c1, c2, c3);
        };
        h.src = [reg](double a, double b, double) { return reg.s2(a, b); };
        add_off(make_h3_map(grid, *tf, h));
      }
      // Branch on the S3 cells: N_{delta,3,k} o sigma_{eps(nu0 + delta^4 k^2/2) Q*}
      // o M_{delta,3,k}, summed over k (cells indexed by the p coordinate).
      {
        const double nu0 = plus ? 1.0 : -1.0;
        H3KernelHooks h;
        h.fiber = [eps, nu0, d, frame](double c1, double c2, double p) {
          const double k = part::cell(p, d * d);
          const double c = eps * (nu0 + 0.5 * std::pow(d, 4) * k * k);
          return charts::fiber_of(frame, {c, 0, 0}, c1, c2, p);
        };
        if (plus)
          h.src = [reg, d](double a, double b, double) {
            return (!reg.s1(a) && std::exp(-b) >= d) ? 1.0 : 0.0;
          };
        else
          h.src = [reg](double a, double b, double p) { return reg.s3(a, b, p); };
        h.t3fac = [d](double v, double p, double, double) {
          return std::abs(part::cell(v, d * d) - part::cell(p, d * d)) <= 1 ? 1.0 : 0.0;
        };
        add_off(make_h3_map(grid, *tf, h));
      }
      // Branches on S4(+-) (6d- only): sigma_{eps(+-sqrt2 R* - 2 Q*)}.
      if (!plus) {
        for (int sign : {+1, -1}) {
          H3KernelHooks h;
          const HFunctional l{-2.0 * eps, sign * std::sqrt(2.0) * eps, 0.0};
          h.fiber = [l, frame](double c1, double c2, double c3) {
            return charts::fiber_of(frame, l, c1, c2, c3);
          };
          h.src = [reg, sign](double a, double b, double p) {
            return reg.s4(a, b, p, sign);
          };
          add_off(make_h3_map(grid, *tf, h));
        }
      }
      break;
    }

    case StratumKind::EpsS: {
      if (tf->pol != Polarization::H3 || tf->frame != H3Frame::XBP)
        throw std::invalid_argument("sigma: epsS stratum needs an H3 test function in the XBP chart");
      const double r = par.r_delta(), D = par.D;
      H3KernelHooks h;
      h.fiber = [eps, d, r, D](double x, double b, double p) {
        const int k1 = part::cell(x, r), k2 = part::cell(b, r);
        const double w = D * d * d * std::exp(0.5 * r * (k1 + k2));
        const double k3 = part::cell(p, w);
        // Anchor functional (k3^2 delta^4 D^2 e^{r(k1+k2)} / 2) eps Q*.
        const double c = 0.5 * eps * k3 * k3 * std::pow(d, 4) * D * D *
                         std::exp(r * (k1 + k2));
        const auto e = charts::to_e(H3Frame::XBP, x, b, p);
        return coadjoint_h(e[0], e[1], p, {c, 0, 0});
      };
      h.src = [d](double x, double, double) {
        return std::exp(-x) <= detail::pow6(d) ? 1.0 : 0.0;
      };
      h.t1fac = [r](double s, double x) {
        return std::abs(part::cell(s, r) - part::cell(x, r)) <= 1 ? 1.0 : 0.0;
      };
      h.t2fac = [r](double t, double b) {
        return std::abs(part::cell(t, r) - part::cell(b, r)) <= 1 ? 1.0 : 0.0;
      };
      h.t3fac = [d, r, D](double v, double p, double x, double b) {
        const int k1 = part::cell(x, r), k2 = part::cell(b, r);
        const double w = D * d * d * std::exp(0.5 * r * (k1 + k2));
        return std::abs(part::cell(v, w) - part::cell(p, w)) <= 1 ? 1.0 : 0.0;
      };
      add_off(make_h3_map(grid, *tf, h));
      break;
    }

    case StratumKind::EpsR: {
      if (tf->pol != Polarization::H3 || tf->frame != H3Frame::XYP)
        throw std::invalid_argument("sigma: epsR stratum needs an H3 test function in the XYP chart");
      const double r = par.r_delta(), D = par.D;
      H3KernelHooks h;
      h.fiber = [eps, d, r, D](double x, double y, double p) {
        const int k1 = part::cell(x, r), k2 = part::cell(y, r);
        const double w = D * d * d * std::exp(r * (k1 - k2));
        const double k3 = part::cell(p, w);
        // Anchor -eps k3 delta^2 D e^{r(k1-k2)} Q*: the sign matches the
        // -p Q*-coefficient of the sigma_{eps R*} kernel.
        const double c = -eps * k3 * w;
        const auto e = charts::to_e(H3Frame::XYP, x, y, p);
        return coadjoint_h(e[0], e[1], p, {c, 0, 0});
      };
      h.src = [d](double x, double, double) {
        return std::exp(-x) <= detail::pow6(d) ? 1.0 : 0.0;
      };
      h.t1fac = [r](double s, double x) {
        return std::abs(part::cell(s, r) - part::cell(x, r)) <= 1 ? 1.0 : 0.0;
      };
      h.t2fac = [r](double t, double y) {
        return std::abs(part::cell(t, r) - part::cell(y, r)) <= 1 ? 1.0 : 0.0;
      };
      h.t3fac = [d, r, D](double v, double p, double x, double y) {
        const int k1 = part::cell(x, r), k2 = part::cell(y, r);
        const double w = D * d * d * std::exp(r * (k1 - k2));
        return std::abs(part::cell(v, w) - part::cell(p, w)) <= 1 ? 1.0 : 0.0;
      };
      add_off(make_h3_map(grid, *tf, h));
      break;
    }

    case StratumKind::PQ: {
      if (tf->pol != Polarization::L4)
        throw std::invalid_argument("sigma: PQ stratum needs an L4 test function");
      const double nu = spec.nu;
      auto region = [d](double a, double b) {
        const bool p_big = std::exp(-0.5 * (a + b)) > detail::pow6(d);
        const bool q_big = std::exp(-b) > detail::pow6(d);
        return p_big ? (q_big ? 1 : 2) : (q_big ? 3 : 4);
      };
      // S2: keep the P*-part; S3: keep the Q*-part; S4: the trivial kernel.
      add_off(make_l4_map(grid, *tf,
                           [eps](double a, double b) {
                             return std::array<double, 4>{
                                 eps * std::exp(-0.5 * (a + b)), 0, 0, 0};
                           },
                           [region](double a, double b) {
                             return region(a, b) == 2 ? 1.0 : 0.0;
                           }));
      add_off(make_l4_map(grid, *tf,
                           [nu](double, double b) {
                             return std::array<double, 4>{0, nu * std::exp(-b), 0, 0};
                           },
                           [region](double a, double b) {
                             return region(a, b) == 3 ? 1.0 : 0.0;
                           }));
      add_off(make_l4_map(grid, *tf,
                           [](double, double) {
                             return std::array<double, 4>{0, 0, 0, 0};
                           },
                           [region](double a, double b) {
                             return region(a, b) == 4 ? 1.0 : 0.0;
                           }));
      break;
    }

    case StratumKind::NuQ: {
      if (tf->pol != Polarization::L4)
        throw std::invalid_argument("sigma: nuQ stratum needs an L4 test function");
      add_off(make_l4_map(grid, *tf,
                           [](double, double) {
                             return std::array<double, 4>{0, 0, 0, 0};
                           },
                           [d](double, double b) {
                             return std::exp(-b) <= d ? 1.0 : 0.0;
                           }));
      break;
    }

    case StratumKind::EpsP: {
      if (tf->pol != Polarization::L4)
        throw std::invalid_argument("sigma: epsP stratum needs an L4 test function");
      add_off(make_l4_map(grid, *tf,
                           [](double, double) {
                             return std::array<double, 4>{0, 0, 0, 0};
                           },
                           [d](double a, double b) {
                             return std::exp(-0.5 * (a - b)) <= d ? 1.0 : 0.0;
                           }));
      break;
    }
  }
  (void)opt;
  parts.sum = sum;
  return parts;
}

/// Public wrapper returning the comparison operator as a KernelOperator.
inline KernelOperator assemble_sigma(const StratumSpec& spec, const PartitionParams& par,
                                     std::shared_ptr<const PolarizedTestFn> tf,
                                     const Grid& grid, const AssembleOptions& opt = {}) {
  KernelOperator K;
  K.grid = grid;
  K.rep = IndHChi{};  // composite; descriptor kept for the grid/export plumbing
  K.tf = tf;
  K.map = make_sigma(spec, par, tf, grid, opt).sum;
  return K;
}

// ---------------------------------------------------------------------------
// The stratum's own representation (the pi side of the defect)
// ---------------------------------------------------------------------------

/// The stratum's representation on its base space, optionally cut by a
/// source mask; `src` takes the stratum's base coordinates.
inline std::shared_ptr<const LinearMap> make_stratum_pi(
    const StratumSpec& spec, std::shared_ptr<const PolarizedTestFn> tf,
    const Grid& grid, std::function<double(const std::vector<double>&)> src = nullptr,
    const AssembleOptions& opt = {}) {
  (void)opt;
  switch (spec.kind) {
    case StratumKind::SixDMinus:
    case StratumKind::SixDPlus: {
      const double eps = spec.eps;
      const double nu = spec.kind == StratumKind::SixDPlus ? spec.eps : -spec.eps;
      const H3Frame frame = tf->frame;
      H3KernelHooks h;
      h.fiber = [eps, nu, frame](double c1, double c2, double c3) {
        return charts::fiber_of(frame, {nu, 0, eps}, c1, c2, c3);
      };
      if (src)
        h.src = [src](double a, double b, double p) {
          return src({a, b, p});
        };
      return make_h3_map(grid, *tf, h);
    }
    case StratumKind::EpsS: {
      const double eps = spec.eps;
      const H3Frame frame = tf->frame;
      H3KernelHooks h;
      h.fiber = [eps, frame](double c1, double c2, double c3) {
        return charts::fiber_of(frame, {0, 0, eps}, c1, c2, c3);
      };
      if (src)
        h.src = [src](double x, double b, double p) { return src({x, b, p}); };
      return make_h3_map(grid, *tf, h);
    }
    case StratumKind::EpsR: {
      const double eps = spec.eps;
      const H3Frame frame = tf->frame;
      H3KernelHooks h;
      h.fiber = [eps, frame](double c1, double c2, double c3) {
        return charts::fiber_of(frame, {0, eps, 0}, c1, c2, c3);
      };
      if (src)
        h.src = [src](double x, double y, double p) { return src({x, y, p}); };
      return make_h3_map(grid, *tf, h);
    }
    case StratumKind::PQ: {
      const double eps = spec.eps, nu = spec.nu;
      return make_l4_map(grid, *tf,
                         [eps, nu](double a, double b) {
                           return std::array<double, 4>{
                               eps * std::exp(-0.5 * (a + b)),
                               nu * std::exp(-b), 0, 0};
                         },
                         src ? std::function<double(double, double)>(
                                   [src](double a, double b) {
                                     return src({a, b});
                                   })
                             : nullptr);
    }
    case StratumKind::NuQ: {
      const double nu = spec.eps;  // the sign parameter of the Q-ray
      return make_l4_map(grid, *tf,
                         [nu](double, double b) {
                           return std::array<double, 4>{0, nu * std::exp(-b), 0, 0};
                         },
                         src ? std::function<double(double, double)>(
                                   [src](double a, double b) {
                                     return src({a, b});
                                   })
                             : nullptr);
    }
    case StratumKind::EpsP: {
      const double eps = spec.eps;
      return make_l4_map(grid, *tf,
                         [eps](double a, double b) {
                           return std::array<double, 4>{
                               eps * std::exp(-0.5 * (a - b)), 0, 0, 0};
                         },
                         src ? std::function<double(double, double)>(
                                   [src](double a, double b) {
                                     return src({a, b});
                                   })
                             : nullptr);
    }
  }
  throw std::logic_error("make_stratum_pi: unhandled stratum");
}

// ---------------------------------------------------------------------------
// Defect metrics
// ---------------------------------------------------------------------------

struct DefectReport {
  std::string stratum;
  double delta = 0;
  double D = 1;
  double part1_hs = 0;    // HS norm of the compact part (max over samples)
  double part2_op = 0;    // operator norm of the O(delta) part
  double sigma_norm = 0;  // operator norm of the comparison operator
  double bound_rhs = 0;   // the norm-bound right-hand side, when computed
  std::vector<Axis> window;
  std::vector<double> samples;  // direct-integral parameter samples used
};

struct DefectOptions {
  AssembleOptions assemble;
  double op_tol = 1e-5;
  bool compute_bounds = false;
  bool part1_only = false;    // skip the sigma/part2 norms (refinement legs)
  bool adjoint_side = false;  // measure (1 - M_{S1}) o (pi - sigma) instead
  std::vector<double> integral_samples;  // default: 9 points in [-4, 4]

  std::vector<double> samples_or_default() const {
    if (!integral_samples.empty()) return integral_samples;
    std::vector<double> s;
    for (int i = 0; i < 9; ++i) s.push_back(-4.0 + i);
    return s;
  }
};

namespace detail {

inline std::function<double(const std::vector<double>&)> s1_complement_mask(
    const StratumSpec& spec, const PartitionParams& par) {
  const double d = par.delta;
  switch (spec.kind) {
    case StratumKind::SixDMinus:
    case StratumKind::SixDPlus:
    case StratumKind::EpsS:
    case StratumKind::EpsR:
      return [d](const std::vector<double>& y) {
        return std::exp(-y[0]) <= pow6(d) ? 1.0 : 0.0;
      };
    case StratumKind::PQ:
      return [d](const std::vector<double>& y) {
        const bool p_big = std::exp(-0.5 * (y[0] + y[1])) > pow6(d);
        const bool q_big = std::exp(-y[1]) > pow6(d);
        return (p_big && q_big) ? 0.0 : 1.0;
      };
    case StratumKind::NuQ:
      return [d](const std::vector<double>& y) {
        return std::exp(-y[1]) <= d ? 1.0 : 0.0;
      };
    case StratumKind::EpsP:
      return [d](const std::vector<double>& y) {
        return std::exp(-0.5 * (y[0] - y[1])) <= d ? 1.0 : 0.0;
      };
  }
  return nullptr;
}

inline std::vector<double> flat_mask(const Grid& g,
                                     const std::function<double(const std::vector<double>&)>& f) {
  std::vector<double> m(g.size());
  std::vector<int> ij(g.dim());
  std::vector<double> pt(g.dim());
  for (std::size_t i = 0; i < g.size(); ++i) {
    g.unflatten(i, ij.data());
    for (int k = 0; k < g.dim(); ++k) pt[k] = g.axes[k].point(ij[k]);
    m[i] = f(pt);
  }
  return m;
}

// 2D slice grid of a 3D stratum grid: (first axis, third axis).
inline Grid slice_grid_of(const Grid& g) {
  return Grid{{g.axes[0], g.axes[2]}, g.max_points};
}

/// Conjugate-transposes each branch ingredient of the flat-mask strata
/// while keeping the source multiplications of the construction:
/// sum_b sigma_b(F)* o M_b.
inline SigmaParts make_sigma_starred(const StratumSpec& spec, const PartitionParams& par,
                                     std::shared_ptr<const PolarizedTestFn> tf,
                                     const Grid& grid, const AssembleOptions& opt) {
  if (tf->pol != Polarization::L4)
    throw std::invalid_argument("sigma (adjoint): flat-mask strata need an L4 test function");
  const double d = par.delta;
  const double eps = spec.eps, nu = spec.nu;
  SigmaParts parts;
  parts.sum = std::make_shared<SumMap>();
  auto add_starred = [&](const std::function<std::array<double, 4>(double, double)>& fiber,
                         const std::function<double(const std::vector<double>&)>& mask) {
    auto m = std::make_shared<DiagMaskedMap>();
    m->inner = std::make_shared<AdjointMap>(make_l4_map(grid, *tf, fiber));
    m->mask = flat_mask(grid, mask);
    m->output_side = false;
    parts.sum->add(m);
    parts.off_s1.push_back(m);
  };
  switch (spec.kind) {
    case StratumKind::PQ: {
      auto region = [d](double a, double b) {
        const bool p_big = std::exp(-0.5 * (a + b)) > pow6(d);
        const bool q_big = std::exp(-b) > pow6(d);
        return p_big ? (q_big ? 1 : 2) : (q_big ? 3 : 4);
      };
      add_starred([eps](double a, double b) {
        return std::array<double, 4>{eps * std::exp(-0.5 * (a + b)), 0, 0, 0};
      }, [region](const std::vector<double>& y) { return region(y[0], y[1]) == 2 ? 1.0 : 0.0; });
      add_starred([nu](double, double b) {
        return std::array<double, 4>{0, nu * std::exp(-b), 0, 0};
      }, [region](const std::vector<double>& y) { return region(y[0], y[1]) == 3 ? 1.0 : 0.0; });
      add_starred([](double, double) {
        return std::array<double, 4>{0, 0, 0, 0};
      }, [region](const std::vector<double>& y) { return region(y[0], y[1]) == 4 ? 1.0 : 0.0; });
      break;
    }
    case StratumKind::NuQ:
      add_starred([](double, double) {
        return std::array<double, 4>{0, 0, 0, 0};
      }, [d](const std::vector<double>& y) { return std::exp(-y[1]) <= d ? 1.0 : 0.0; });
      break;
    case StratumKind::EpsP:
      add_starred([](double, double) {
        return std::array<double, 4>{0, 0, 0, 0};
      }, [d](const std::vector<double>& y) {
        return std::exp(-0.5 * (y[0] - y[1])) <= d ? 1.0 : 0.0;
      });
      break;
    default:
      throw std::logic_error("make_sigma_starred: cell-sum stratum");
  }
  (void)opt;
  return parts;
}

}  // namespace detail

/// Operator-norm right-hand side of the stratum's sigma bound.
inline double sigma_bound_rhs(const StratumSpec& spec,
                              std::shared_ptr<const PolarizedTestFn> tf,
                              const Grid& grid, double op_tol = 1e-5,
                              const AssembleOptions& opt = {}) {
  const double eps = spec.eps;
  auto norm_of = [&](std::shared_ptr<const LinearMap> m) {
    OpNormOptions o;
    o.tol = op_tol;
    return op_norm(*m, grid, o);
  };
  switch (spec.kind) {
    case StratumKind::SixDMinus:
    case StratumKind::SixDPlus: {
      auto ind = [&](HFunctional l) {
        const H3Frame frame = tf->frame;
        H3KernelHooks h;
        h.fiber = [l, frame](double c1, double c2, double c3) {
          return charts::fiber_of(frame, l, c1, c2, c3);
        };
        return norm_of(make_h3_map(grid, *tf, h));
      };
      const double ns = ind({0, 0, eps});
      const double nq = ind({eps, 0, 0});
      if (spec.kind == StratumKind::SixDPlus) return 2.0 * ns + 9.0 * nq;
      const double nr = ind({0, eps, 0});
      return 2.0 * ns + 9.0 * nq + 2.0 * nr;
    }
    case StratumKind::EpsS:
    case StratumKind::EpsR: {
      const H3Frame frame = tf->frame;
      H3KernelHooks h;
      h.fiber = [eps, frame](double c1, double c2, double c3) {
        return charts::fiber_of(frame, {eps, 0, 0}, c1, c2, c3);
      };
      return 27.0 * norm_of(make_h3_map(grid, *tf, h));
    }
    case StratumKind::PQ: {
      const double nu = spec.nu;
      const double np = norm_of(make_l4_map(grid, *tf, [eps](double a, double b) {
        return std::array<double, 4>{eps * std::exp(-0.5 * (a + b)), 0, 0, 0};
      }));
      const double nq = norm_of(make_l4_map(grid, *tf, [nu](double, double b) {
        return std::array<double, 4>{0, nu * std::exp(-b), 0, 0};
      }));
      const double n0 = norm_of(make_l4_map(grid, *tf, [](double, double) {
        return std::array<double, 4>{0, 0, 0, 0};
      }));
      return np + nq + n0;
    }
    case StratumKind::NuQ:
    case StratumKind::EpsP: {
      return norm_of(make_l4_map(grid, *tf, [](double, double) {
        return std::array<double, 4>{0, 0, 0, 0};
      }));
    }
  }
  (void)opt;
  return 0;
}

/// The numerical defect of the stratum's boundary condition:
///   part2_op = || (pi - sigma_delta) o (1 - M_{S1}) ||
///   part1_hs = HS norm of the compact branch on S1 (6d/PQ strata) resp.
///              the maximum over sampled direct-integral parameters of
///              || pi_param o M_{S1-bar} ||_{HS}.
/// The nuQ/epsP strata need the 1D slice test function and grid.
inline DefectReport defect(const StratumSpec& spec, const PartitionParams& par,
                           std::shared_ptr<const PolarizedTestFn> tf, const Grid& grid,
                           const DefectOptions& opt = {},
                           std::shared_ptr<const PolarizedTestFn> slice_tf = nullptr,
                           const Grid* slice_grid = nullptr) {
  par.validate();
  DefectReport rep;
  rep.stratum = stratum_name(spec);
  rep.delta = par.delta;
  rep.D = par.D;
  rep.window = grid.axes;
  const double d = par.delta;
  const double eps = spec.eps;

  OpNormOptions on;
  on.tol = opt.op_tol;
  if (!opt.part1_only) {
    SigmaParts sigma = make_sigma(spec, par, tf, grid, opt.assemble);
    rep.sigma_norm = op_norm(*sigma.sum, grid, on);
    if (opt.compute_bounds)
      rep.bound_rhs = sigma_bound_rhs(spec, tf, grid, opt.op_tol, opt.assemble);

    // part2: the O(delta) piece.  The adjoint-field variant conjugate-
    // transposes the ingredient operators while keeping the masks of the
    // sigma construction in place; for the cell-sum strata, where that
    // object does not factor, the distance of the adjoint defect to the
    // compacts equals the plain one exactly and the conjugate-transposed
    // defect is measured directly.
    auto comp_mask = detail::s1_complement_mask(spec, par);
    const bool flat_masks = spec.kind == StratumKind::PQ ||
                            spec.kind == StratumKind::NuQ ||
                            spec.kind == StratumKind::EpsP;
    auto d2 = std::make_shared<SumMap>();
    if (!opt.adjoint_side) {
      d2->add(make_stratum_pi(spec, tf, grid, comp_mask, opt.assemble));
      for (const auto& b : sigma.off_s1) d2->add(b, cd{-1.0, 0.0});
      rep.part2_op = op_norm(*d2, grid, on);
    } else if (flat_masks) {
      // pi(F)* o (1 - M_{S1})  -  sum_b sigma_b(F)* o M_b.
      auto pi_star = std::make_shared<DiagMaskedMap>();
      pi_star->inner = std::make_shared<AdjointMap>(
          make_stratum_pi(spec, tf, grid, nullptr, opt.assemble));
      pi_star->mask = detail::flat_mask(grid, comp_mask);
      pi_star->output_side = false;
      d2->add(pi_star);
      SigmaParts starred = detail::make_sigma_starred(spec, par, tf, grid, opt.assemble);
      for (const auto& b : starred.off_s1) d2->add(b, cd{-1.0, 0.0});
      rep.part2_op = op_norm(*d2, grid, on);
    } else {
      d2->add(make_stratum_pi(spec, tf, grid, comp_mask, opt.assemble));
      for (const auto& b : sigma.off_s1) d2->add(b, cd{-1.0, 0.0});
      rep.part2_op = op_norm(AdjointMap(d2), grid, on);
    }
  }

  // part1: the compact piece.
  switch (spec.kind) {
    case StratumKind::SixDMinus:
    case StratumKind::SixDPlus: {
      const bool plus = spec.kind == StratumKind::SixDPlus;
      const double nu = plus ? eps : -eps;
      const H3Frame frame = tf->frame;
      const PolarizedTestFn& f = *tf;
      H3KernelHooks h;
      h.fibval = [&f, d, eps, nu, plus, frame](double c1, double c2, double p) {
        if (!(std::exp(-c1) > detail::pow6(d))) return cd{0, 0};
        const HFunctional fp = charts::fiber_of(frame, {nu, 0, eps}, c1, c2, p);
        const HFunctional fs = charts::fiber_of(frame, {0, 0, eps}, c1, c2, p);
        const double qp[3] = {fp.q, fp.r, fp.s};
        const double qs[3] = {fs.q, fs.r, fs.s};
        const double cut = plateau_cutoff(plus ? std::exp(-c2) : -std::exp(-c2));
        return f.amplitude * (f.fiber_factor(qp) - cut * f.fiber_factor(qs));
      };
      // The HS norm of the conjugate-transposed kernel coincides with the
      // plain one, so the adjoint repeat reuses the same map.
      rep.part1_hs = hs_norm(*make_h3_map(grid, f, h), grid);
      break;
    }
    case StratumKind::EpsS:
    case StratumKind::EpsR: {
      const Grid g2 = detail::slice_grid_of(grid);
      rep.samples = opt.samples_or_default();
      double worst = 0;
      for (double b_star : rep.samples) {
        auto src = [d](double x, double) {
          return std::exp(-x) > detail::pow6(d) ? 1.0 : 0.0;
        };
        std::shared_ptr<const LinearMap> m =
            spec.kind == StratumKind::EpsS
                ? make_fourds_map(g2, *tf, b_star, spec.eps, opt.assemble, src)
                : make_fourdr_map(g2, *tf, b_star, spec.eps, opt.assemble, src);
        if (opt.adjoint_side) m = std::make_shared<AdjointMap>(m);
        worst = std::max(worst, hs_norm(*m, g2));
      }
      rep.part1_hs = worst;
      break;
    }
    case StratumKind::PQ: {
      auto s1 = [d](const std::vector<double>& y) {
        const bool p_big = std::exp(-0.5 * (y[0] + y[1])) > detail::pow6(d);
        const bool q_big = std::exp(-y[1]) > detail::pow6(d);
        return (p_big && q_big) ? 1.0 : 0.0;
      };
      if (!opt.adjoint_side) {
        rep.part1_hs = hs_norm(*make_stratum_pi(spec, tf, grid, s1, opt.assemble), grid);
      } else {
        auto masked = std::make_shared<DiagMaskedMap>();
        masked->inner = std::make_shared<AdjointMap>(
            make_stratum_pi(spec, tf, grid, nullptr, opt.assemble));
        masked->mask = detail::flat_mask(grid, s1);
        masked->output_side = false;
        rep.part1_hs = hs_norm(*masked, grid);
      }
      break;
    }
    case StratumKind::NuQ:
    case StratumKind::EpsP: {
      if (!slice_tf || !slice_grid)
        throw ConfigError("defect: nuQ/epsP strata need the 1D slice test function and grid");
      rep.samples = opt.samples_or_default();
      double worst = 0;
      for (double par_star : rep.samples) {
        const int sgn = spec.eps;
        std::function<std::array<double, 5>(double)> fiber;
        if (spec.kind == StratumKind::NuQ) {
          if (slice_tf->pol != Polarization::LA5)
            throw ConfigError("defect: nuQ slice needs an LA5 test function");
          fiber = [par_star, sgn](double b) {
            return std::array<double, 5>{par_star, 0.0, sgn * std::exp(-b), 0.0, 0.0};
          };
        } else {
          if (slice_tf->pol != Polarization::LX5)
            throw ConfigError("defect: epsP slice needs an LX5 test function");
          fiber = [par_star, sgn](double y) {
            return std::array<double, 5>{par_star, sgn * std::exp(-y), 0.0, 0.0, 0.0};
          };
        }
        auto cut = [d](double b) { return std::exp(-b) > d ? 1.0 : 0.0; };
        std::shared_ptr<const LinearMap> m;
        if (!opt.adjoint_side) {
          m = make_line_map(*slice_grid, *slice_tf, fiber, cut);
        } else {
          auto masked = std::make_shared<DiagMaskedMap>();
          masked->inner =
              std::make_shared<AdjointMap>(make_line_map(*slice_grid, *slice_tf, fiber));
          masked->mask = detail::flat_mask(*slice_grid, [cut](const std::vector<double>& y) {
            return cut(y[0]);
          });
          masked->output_side = false;
          m = masked;
        }
        worst = std::max(worst, hs_norm(*m, *slice_grid));
      }
      rep.part1_hs = worst;
      break;
    }
  }
  return rep;
}

/// Essential-norm proxy: || K o M_{complement of W} || for a nested list of
/// windows W (per-axis intervals); decays to zero exactly for compact-like
/// discretized operators.
inline std::vector<double> ess_norm_estimate(
    const KernelOperator& K,
    const std::vector<std::vector<std::pair<double, double>>>& windows,
    double op_tol = 1e-6) {
  std::vector<double> out;
  for (const auto& w : windows) {
    if (static_cast<int>(w.size()) != K.grid.dim())
      throw std::invalid_argument("ess_norm_estimate: window dimension mismatch");
    auto masked = std::make_shared<DiagMaskedMap>();
    masked->inner = K.map;
    masked->mask = detail::flat_mask(K.grid, [&w](const std::vector<double>& y) {
      for (std::size_t k = 0; k < w.size(); ++k)
        if (y[k] < w[k].first || y[k] > w[k].second) return 1.0;
      return 0.0;
    });
    masked->output_side = false;
    OpNormOptions on;
    on.tol = op_tol;
    out.push_back(op_norm(*masked, K.grid, on));
  }
  return out;
}

/// Operator norms of pi_{b* B* + eps S*}(tf) o M_{S1-bar} along a list of
/// |b*| >= 1 parameters; the decay realizes the C/|b*| bound.
inline std::vector<double> bstar_decay_sweep(const PolarizedTestFn& tf, int eps,
                                             double delta,
                                             const std::vector<double>& b_stars,
                                             const Grid& grid2,
                                             const AssembleOptions& opt = {},
                                             double op_tol = 1e-6) {
  if (grid2.dim() != 2)
    throw std::invalid_argument("bstar_decay_sweep: need a 2D grid");
  std::vector<double> out;
  const double d6 = std::pow(delta, 6);
  for (double b_star : b_stars) {
    auto m = make_fourds_map(grid2, tf, b_star, eps, opt,
                             [d6](double x, double) {
                               return std::exp(-x) > d6 ? 1.0 : 0.0;
                             });
    OpNormOptions on;
    on.tol = op_tol;
    out.push_back(op_norm(*m, grid2, on));
  }
  return out;
}

}  // namespace g6cstar
