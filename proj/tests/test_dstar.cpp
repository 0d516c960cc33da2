#include <catch2/catch_amalgamated.hpp>

#include "g6cstar/dstar.hpp"
#include "g6cstar/serialization.hpp"

using namespace g6cstar;

namespace {

std::shared_ptr<const PolarizedTestFn> ref_tf(Polarization p, H3Frame f,
                                              bool strict = true) {
  return std::make_shared<PolarizedTestFn>(reference_testfn(p, f, 0, strict));
}

FieldSample fourds_line(double b0, int levels, const Grid& g2,
                        std::shared_ptr<const PolarizedTestFn> tf) {
  FieldSample field;
  field.tol = 1e-6;
  for (int m = 0; m <= levels; ++m) {
    FieldPoint p;
    const double b_star = b0 + std::pow(2.0, -m);
    p.gamma = OrbitClass::four_d_s(b_star, +1);
    p.param = b_star;
    p.op = assemble_kernel(FourDSRep{b_star, +1}, tf, g2);
    field.points.push_back(std::move(p));
  }
  return field;
}

}  // namespace

TEST_CASE("continuity checks") {
  auto tf = ref_tf(Polarization::H3, H3Frame::XBP);
  Grid g2({{-0.6, 5.5, 14}, {-3.0, 3.0, 14}});
  SECTION("constant fields pass") {
    FieldSample field;
    field.tol = 1e-7;
    for (int m = 0; m < 4; ++m) {
      FieldPoint p;
      p.gamma = OrbitClass::four_d_s(1.0, +1);
      p.param = 1.0;
      p.op = assemble_kernel(FourDSRep{1.0, +1}, tf, g2);
      field.points.push_back(std::move(p));
    }
    const ConditionResult r = check_continuity(field, StratumId{5}, 0.8);
    CHECK(r.verdict == "pass");
    CHECK(r.measured == 0.0);
  }
  SECTION("sampled Gamma_5 line passes") {
    const ConditionResult r =
        check_continuity(fourds_line(1.0, 4, g2, tf), StratumId{5}, 0.8);
    CHECK(r.verdict == "pass");
    CHECK(r.measured <= 0.8);
  }
  SECTION("an injected jump fails") {
    FieldSample field = fourds_line(1.0, 4, g2, tf);
    // Double the last operator: the final difference no longer shrinks.
    auto doubled = std::make_shared<SumMap>();
    doubled->add(field.points.back().op.map, cd{2.0, 0.0});
    field.points.back().op.map = doubled;
    const ConditionResult r = check_continuity(field, StratumId{5}, 0.8);
    CHECK(r.verdict == "fail");
  }
  SECTION("needs at least three samples") {
    FieldSample field = fourds_line(1.0, 4, g2, tf);
    field.points.resize(2);
    CHECK_THROWS_AS(check_continuity(field, StratumId{5}, 0.8), std::invalid_argument);
  }
}

TEST_CASE("infinity checks") {
  auto plain = ref_tf(Polarization::H3, H3Frame::E, false);
  SECTION("character sweep decays") {
    FieldSample field;
    field.tol = 1e-7;
    const double r = plain->base[0].radius;
    for (double a : {2.0, 8.0, 32.0, 128.0}) {
      FieldPoint p;
      p.gamma = OrbitClass::character(a / r, 0);
      p.param = a / r;
      p.op = assemble_kernel(CharacterRep{a / r, 0.0}, plain, Grid{});
      field.points.push_back(std::move(p));
    }
    const ConditionResult res = check_infinity(field, 1e-3);
    CHECK(res.verdict == "pass");
  }
  SECTION("constant nonzero scalar fields fail") {
    FieldSample field;
    field.tol = 1e-7;
    for (int i = 0; i < 4; ++i) {
      FieldPoint p;
      p.gamma = OrbitClass::character(static_cast<double>(i), 0);
      auto dm = std::make_shared<DenseMap>();
      dm->n = 1;
      dm->m = {cd{1.0, 0.0}};
      p.op.grid = Grid{};
      p.op.map = dm;
      field.points.push_back(std::move(p));
    }
    CHECK(check_infinity(field, 1e-3).verdict == "fail");
  }
  SECTION("zero fields pass") {
    FieldSample field;
    FieldPoint p;
    p.op.grid = Grid{};
    auto dm = std::make_shared<DenseMap>();
    dm->n = 1;
    dm->m = {cd{0.0, 0.0}};
    p.op.map = dm;
    field.points.push_back(p);
    field.points.push_back(p);
    CHECK(check_infinity(field, 1e-3).verdict == "pass");
  }
}

TEST_CASE("boundary check verdicts") {
  auto tf = ref_tf(Polarization::H3, H3Frame::E);
  Grid g({{-0.6, 16.0, 24}, {0.5, 3.4, 10}, {-3.6, 3.6, 16}});
  Grid hs({{-0.6, 5.4977, 10}, {-1.3, 2.7, 8}, {-2.6, 2.6, 32}});
  BoundaryCheckConfig cfg;
  cfg.deltas = {0.4, 0.2};
  cfg.op_tol = 1e-4;
  SECTION("reference data passes") {
    const auto res =
        check_boundary({StratumKind::SixDMinus, +1}, tf, g, cfg, &hs);
    for (const auto& e : res.entries) CHECK(e.verdict == "pass");
  }
  SECTION("zeroed comparison operator fails the decay test") {
    BoundaryCheckConfig abl = cfg;
    abl.sigma_ablation = true;
    const auto res = check_boundary({StratumKind::SixDMinus, +1}, tf, g, abl, &hs);
    bool any_fail = false;
    for (const auto& e : res.entries) any_fail |= e.verdict == "fail";
    CHECK(any_fail);
  }
  SECTION("delta lists must decrease and have two entries") {
    BoundaryCheckConfig bad = cfg;
    bad.deltas = {0.4};
    CHECK_THROWS_AS(check_boundary({StratumKind::SixDMinus, +1}, tf, g, bad), ConfigError);
    bad.deltas = {0.2, 0.4};
    CHECK_THROWS_AS(check_boundary({StratumKind::SixDMinus, +1}, tf, g, bad), ConfigError);
  }
  SECTION("loosening the thresholds never flips pass into fail") {
    const auto tight = check_boundary({StratumKind::SixDMinus, +1}, tf, g, cfg, &hs);
    BoundaryCheckConfig loose = cfg;
    loose.ratio_max *= 2.0;
    loose.hs_refine_max *= 2.0;
    const auto res = check_boundary({StratumKind::SixDMinus, +1}, tf, g, loose, &hs);
    for (std::size_t i = 0; i < res.entries.size(); ++i)
      if (tight.entries[i].verdict == "pass") CHECK(res.entries[i].verdict == "pass");
  }
}

TEST_CASE("adjoint-side defects are finite and comparable") {
  auto tf = ref_tf(Polarization::H3, H3Frame::E);
  Grid g({{-0.6, 10.0, 12}, {0.5, 3.4, 8}, {-3.0, 3.0, 10}});
  PartitionParams par;
  par.delta = 0.4;
  DefectOptions opt;
  opt.op_tol = 1e-4;
  const DefectReport plain = defect({StratumKind::SixDPlus, +1}, par, tf, g, opt);
  opt.adjoint_side = true;
  const DefectReport adj = defect({StratumKind::SixDPlus, +1}, par, tf, g, opt);
  CHECK(std::isfinite(adj.part2_op));
  CHECK(std::isfinite(adj.part1_hs));
  CHECK(adj.part2_op > 0);
  CHECK(adj.part1_hs > 0);
  // Same kernel data measured two ways: the magnitudes stay in the same decade.
  CHECK(adj.part2_op < 100 * plain.part2_op + 1);
}

TEST_CASE("small full report is deterministic") {
  FullReportSetup s;
  s.boundary.deltas = {0.4, 0.2};
  s.boundary.op_tol = 1e-4;
  s.boundary.with_refinement = false;
  s.adjoint_repeat = false;
  StratumSetup st;
  st.spec = {StratumKind::NuQ, +1};
  st.tf = ref_tf(Polarization::L4, H3Frame::E);
  st.sweep_grid = Grid({{-3.0, 3.0, 8}, {-1.0, 6.0, 12}});
  PolarizedTestFn slice = reference_testfn(Polarization::LA5, H3Frame::E, 0, true);
  slice.fiber[0].radius = 5.0;  // the sampled a* values must stay in support
  st.slice_tf = std::make_shared<PolarizedTestFn>(std::move(slice));
  st.slice_grid = Grid({{-1.0, 0.91629, 8}});
  s.strata.push_back(st);

  const CheckReport r1 = full_report(s);
  const CheckReport r2 = full_report(s);
  CHECK(to_json(r1, 7).dump() == to_json(r2, 7).dump());
  CHECK(r1.overall == "pass");
}
