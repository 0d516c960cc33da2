#pragma once

// Numerical verifier for the operator-field membership conditions:
// norm continuity and vanishing at infinity on the strata, and the
// per-stratum boundary conditions, aggregated into one report.

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "boundary.hpp"
#include "orbits.hpp"

namespace g6cstar {

struct FieldPoint {
  OrbitClass gamma;      // spectrum point
  double param = 0;      // the varying parameter along the sample line
  KernelOperator op;
};

struct FieldSample {
  std::vector<FieldPoint> points;
  double tol = 1e-6;  // power-iteration tolerance profile
};

struct ConditionResult {
  std::string condition;
  std::string stratum;
  double delta = std::nan("");
  double measured = 0;
  double threshold = 0;
  std::string verdict;  // "pass" | "fail" | "indeterminate"

  bool passed() const { return verdict == "pass"; }
};

struct CheckReport {
  std::vector<ConditionResult> entries;
  std::string overall = "pass";  // pass | fail | indeterminate

  void add(ConditionResult r) {
    if (r.verdict == "fail" && overall != "indeterminate") overall = "fail";
    if (r.verdict == "indeterminate") overall = "indeterminate";
    entries.push_back(std::move(r));
  }
};

// ---------------------------------------------------------------------------
// Continuity and infinity
// ---------------------------------------------------------------------------

/// Finite-difference norm continuity along a parameter line sampled with
/// halving spacing: the consecutive differences must keep decreasing; pass
/// iff the last ratio is <= tol (0.8 by default in the acceptance configs).
inline ConditionResult check_continuity(const FieldSample& field, StratumId stratum,
                                        double ratio_max) {
  ConditionResult r;
  r.condition = "continuity";
  r.stratum = "Gamma" + std::to_string(stratum.index);
  r.threshold = ratio_max;
  if (field.points.size() < 3)
    throw std::invalid_argument("check_continuity: need at least 3 samples");
  std::vector<double> diffs;
  for (std::size_t i = 0; i + 1 < field.points.size(); ++i) {
    auto d = std::make_shared<SumMap>();
    d->add(field.points[i + 1].op.map);
    d->add(field.points[i].op.map, cd{-1.0, 0.0});
    OpNormOptions on;
    on.tol = field.tol;
    diffs.push_back(op_norm(*d, field.points[i].op.grid, on));
  }
  const double last = diffs.back();
  const double prev = diffs[diffs.size() - 2];
  if (prev == 0.0 && last == 0.0) {
    r.measured = 0.0;
    r.verdict = "pass";
    return r;
  }
  if (prev == 0.0) {
    r.measured = std::numeric_limits<double>::infinity();
    r.verdict = "fail";
    return r;
  }
  r.measured = last / prev;
  r.verdict = r.measured <= ratio_max ? "pass" : "fail";
  return r;
}

/// Riemann-Lebesgue style vanishing along a sequence leaving every compact
/// set: pass iff the final norm drops below tol times the initial norm.
inline ConditionResult check_infinity(const FieldSample& field, double tol) {
  ConditionResult r;
  r.condition = "infinity";
  r.stratum = field.points.empty()
                  ? "?"
                  : "Gamma" + std::to_string(stratum(field.points.front().gamma).index);
  r.threshold = tol;
  if (field.points.empty())
    throw std::invalid_argument("check_infinity: empty field");
  std::vector<double> norms;
  for (const auto& p : field.points) {
    OpNormOptions on;
    on.tol = field.tol;
    norms.push_back(op_norm(*p.op.map, p.op.grid, on));
  }
  const double first = norms.front(), lastv = norms.back();
  if (first == 0.0) {
    r.measured = 0.0;
    r.verdict = "pass";
    return r;
  }
  r.measured = lastv / first;
  r.verdict = r.measured <= tol ? "pass" : "fail";
  return r;
}

// ---------------------------------------------------------------------------
// Boundary conditions
// ---------------------------------------------------------------------------

struct BoundaryCheckConfig {
  std::vector<double> deltas = {0.4, 0.2, 0.1};
  double D = 1.0;
  double ratio_max = 0.7;       // per-halving decay of part2_op
  double hs_refine_max = 0.05;  // relative change of part1_hs under n -> 2n
  double hs_delta = 0.4;        // the delta at which the refinement runs
  double op_tol = 1e-5;
  std::vector<double> integral_samples;  // direct-integral parameters
  bool adjoint_side = false;
  bool sigma_ablation = false;  // replace sigma by zero (diagnostic)
  bool with_refinement = true;
  AssembleOptions assemble;
};

struct BoundaryCheckResult {
  std::vector<DefectReport> sweep;
  std::vector<ConditionResult> entries;
};

/// Runs the delta-sweep of boundary defects for one stratum: part2_op must
/// decay (ratio test per halving), part1_hs must be stable under grid
/// refinement.  `hs_grid`, when given, is the resolution-matched window used
/// for the refinement leg (its top must align with the S1 cut of hs_delta).
inline BoundaryCheckResult check_boundary(const StratumSpec& spec,
                                          std::shared_ptr<const PolarizedTestFn> tf,
                                          const Grid& grid,
                                          const BoundaryCheckConfig& cfg,
                                          const Grid* hs_grid = nullptr,
                                          std::shared_ptr<const PolarizedTestFn> slice_tf = nullptr,
                                          const Grid* slice_grid = nullptr) {
  if (cfg.deltas.size() < 2)
    throw ConfigError("check_boundary: need a decreasing delta list (>= 2 values)");
  for (std::size_t i = 0; i + 1 < cfg.deltas.size(); ++i)
    if (!(cfg.deltas[i + 1] < cfg.deltas[i]))
      throw ConfigError("check_boundary: delta list must decrease");

  BoundaryCheckResult out;
  DefectOptions dopt;
  dopt.assemble = cfg.assemble;
  dopt.op_tol = cfg.op_tol;
  dopt.integral_samples = cfg.integral_samples;
  dopt.adjoint_side = cfg.adjoint_side;

  auto run_defect = [&](const PartitionParams& pp, const Grid& g) {
    if (!cfg.sigma_ablation) return defect(spec, pp, tf, g, dopt, slice_tf, slice_grid);
    // Ablation: the comparison operator is zeroed; the defect reduces to
    // || pi o (1 - M_{S1}) || which no longer decays in delta.
    DefectReport rep;
    rep.stratum = stratum_name(spec);
    rep.delta = pp.delta;
    rep.D = pp.D;
    rep.window = g.axes;
    auto mask = detail::s1_complement_mask(spec, pp);
    OpNormOptions on;
    on.tol = cfg.op_tol;
    rep.part2_op = op_norm(*make_stratum_pi(spec, tf, g, mask, cfg.assemble), g, on);
    rep.part1_hs = 0;
    return rep;
  };

  for (double d : cfg.deltas) {
    PartitionParams pp;
    pp.delta = d;
    pp.D = cfg.D;
    out.sweep.push_back(run_defect(pp, grid));
  }

  const std::string name = stratum_name(spec);
  for (std::size_t i = 0; i + 1 < out.sweep.size(); ++i) {
    ConditionResult r;
    r.condition = "boundary-part2-decay";
    r.stratum = name;
    r.delta = out.sweep[i + 1].delta;
    r.threshold = cfg.ratio_max;
    const double hi = out.sweep[i].part2_op, lo = out.sweep[i + 1].part2_op;
    if (hi == 0.0 && lo == 0.0) {
      r.measured = 0.0;
      r.verdict = "pass";
    } else if (hi == 0.0) {
      r.measured = std::numeric_limits<double>::infinity();
      r.verdict = "fail";
    } else {
      // Normalize to one halving of delta.
      const double steps = std::log2(out.sweep[i].delta / out.sweep[i + 1].delta);
      r.measured = std::pow(lo / hi, 1.0 / steps);
      r.verdict = r.measured <= cfg.ratio_max ? "pass" : "fail";
    }
    out.entries.push_back(r);
  }

  if (cfg.with_refinement && !cfg.sigma_ablation) {
    PartitionParams pp;
    pp.delta = cfg.hs_delta;
    pp.D = cfg.D;
    const Grid& hg = hs_grid ? *hs_grid : grid;
    DefectOptions p1 = dopt;
    p1.part1_only = true;
    const DefectReport a = defect(spec, pp, tf, hg, p1, slice_tf, slice_grid);
    Grid slice_refined;
    const Grid* slice2 = nullptr;
    if (slice_grid) {
      slice_refined = slice_grid->refined();
      slice2 = &slice_refined;
    }
    const DefectReport b = defect(spec, pp, tf, hg.refined(), p1, slice_tf, slice2);
    ConditionResult r;
    r.condition = "boundary-part1-refinement";
    r.stratum = name;
    r.delta = cfg.hs_delta;
    r.threshold = cfg.hs_refine_max;
    if (a.part1_hs == 0.0 && b.part1_hs == 0.0) {
      r.measured = 0.0;
      r.verdict = "pass";
    } else if (a.part1_hs == 0.0) {
      r.measured = std::numeric_limits<double>::infinity();
      r.verdict = "fail";
    } else {
      r.measured = std::abs(b.part1_hs - a.part1_hs) / a.part1_hs;
      r.verdict = r.measured <= cfg.hs_refine_max ? "pass" : "fail";
    }
    out.entries.push_back(r);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Full report
// ---------------------------------------------------------------------------

struct StratumSetup {
  StratumSpec spec;
  std::shared_ptr<const PolarizedTestFn> tf;
  Grid sweep_grid;
  std::optional<Grid> hs_grid;                     // resolution-matched window
  std::shared_ptr<const PolarizedTestFn> slice_tf; // nuQ/epsP only
  std::optional<Grid> slice_grid;
};

struct FullReportSetup {
  std::vector<StratumSetup> strata;
  BoundaryCheckConfig boundary;

  // Norm continuity along Gamma_5 at b* = cont_b0 + 2^{-m}.
  std::shared_ptr<const PolarizedTestFn> cont_tf;
  Grid cont_grid;
  double cont_b0 = 1.0;
  int cont_levels = 5;
  double cont_ratio_max = 0.8;

  // Vanishing at infinity along the characters.
  std::shared_ptr<const PolarizedTestFn> char_tf;
  std::vector<double> char_astars;  // in units of 1/base-radius
  double infinity_tol = 1e-3;

  // b*-decay of the Gamma_5 compact part.
  std::shared_ptr<const PolarizedTestFn> bstar_tf;
  Grid bstar_grid;
  std::vector<double> bstar_list = {4, 8, 16};
  double bstar_ratio_max = 0.6;
  double bstar_delta = 0.1;

  bool adjoint_repeat = true;
  std::uint64_t seed = 1;
};

/// Continuity along the Gamma_5 parameter line via repkernels.
inline ConditionResult gamma5_continuity(const FullReportSetup& s) {
  FieldSample field;
  field.tol = s.boundary.op_tol;
  for (int m = 0; m <= s.cont_levels; ++m) {
    FieldPoint p;
    const double b_star = s.cont_b0 + std::pow(2.0, -m);
    p.gamma = OrbitClass::four_d_s(b_star, +1);
    p.param = b_star;
    p.op = assemble_kernel(FourDSRep{b_star, +1}, s.cont_tf, s.cont_grid,
                           s.boundary.assemble);
    field.points.push_back(std::move(p));
  }
  return check_continuity(field, StratumId{5}, s.cont_ratio_max);
}

/// Vanishing at infinity along a character sequence a*_k -> infinity.
inline ConditionResult character_infinity(const FullReportSetup& s) {
  FieldSample field;
  field.tol = s.boundary.op_tol;
  const double radius = s.char_tf->base[0].radius;
  for (double a : s.char_astars) {
    FieldPoint p;
    const double a_star = a / radius;
    p.gamma = OrbitClass::character(a_star, 0.0);
    p.param = a_star;
    p.op = assemble_kernel(CharacterRep{a_star, 0.0}, s.char_tf, Grid{},
                           s.boundary.assemble);
    field.points.push_back(std::move(p));
  }
  return check_infinity(field, s.infinity_tol);
}

inline std::vector<ConditionResult> bstar_decay_check(const FullReportSetup& s) {
  std::vector<ConditionResult> out;
  const auto norms = bstar_decay_sweep(*s.bstar_tf, +1, s.bstar_delta, s.bstar_list,
                                       s.bstar_grid, s.boundary.assemble,
                                       s.boundary.op_tol);
  for (std::size_t i = 0; i + 1 < norms.size(); ++i) {
    ConditionResult r;
    r.condition = "bstar-decay";
    r.stratum = "epsS";
    r.delta = s.bstar_list[i + 1];
    r.threshold = s.bstar_ratio_max;
    if (norms[i] == 0.0) {
      r.measured = norms[i + 1] == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    } else {
      const double doublings = std::log2(s.bstar_list[i + 1] / s.bstar_list[i]);
      r.measured = std::pow(norms[i + 1] / norms[i], 1.0 / doublings);
    }
    r.verdict = (r.measured < 1.0 && r.measured <= s.bstar_ratio_max) ? "pass" : "fail";
    out.push_back(r);
  }
  return out;
}

/// Aggregates the per-stratum boundary conditions, the continuity/infinity
/// spot checks, and the adjoint-field repeat into one report.
inline CheckReport full_report(const FullReportSetup& s) {
  CheckReport rep;
  auto run_strata = [&](bool adjoint) {
    for (const auto& st : s.strata) {
      BoundaryCheckConfig cfg = s.boundary;
      cfg.adjoint_side = adjoint;
      const Grid* hsg = st.hs_grid ? &*st.hs_grid : nullptr;
      const Grid* slg = st.slice_grid ? &*st.slice_grid : nullptr;
      auto res = check_boundary(st.spec, st.tf, st.sweep_grid, cfg, hsg,
                                st.slice_tf, slg);
      for (auto e : res.entries) {
        if (adjoint) e.condition += "-adjoint";
        rep.add(std::move(e));
      }
    }
  };
  run_strata(false);
  if (s.cont_tf) rep.add(gamma5_continuity(s));
  if (s.char_tf) rep.add(character_infinity(s));
  if (s.bstar_tf)
    for (auto& e : bstar_decay_check(s)) rep.add(std::move(e));
  if (s.adjoint_repeat) run_strata(true);
  return rep;
}

}  // namespace g6cstar
