// Acceptance suite: runs every acceptance criterion at its stated tolerance
// and prints one pass/fail line per criterion.  Exits with the number of
// failed criteria.

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "g6cstar/config.hpp"
#include "g6cstar/serialization.hpp"

using namespace g6cstar;
namespace fs = std::filesystem;

namespace {

struct Criterion {
  int id;
  std::string title;
  bool pass = true;
  std::vector<std::string> details;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    details.push_back(std::string(ok ? "    ok   " : "    FAIL ") + what);
  }
};

std::vector<Criterion> g_results;

template <typename Fn>
void run_criterion(int id, const std::string& title, Fn&& fn) {
  Criterion c{id, title};
  const auto t0 = std::chrono::steady_clock::now();
  try {
    fn(c);
  } catch (const std::exception& e) {
    c.pass = false;
    c.details.push_back(std::string("    FAIL exception: ") + e.what());
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("[%s] criterion %d: %s (%.1f s)\n", c.pass ? "PASS" : "FAIL", id,
              title.c_str(), secs);
  for (const auto& d : c.details) std::printf("%s\n", d.c_str());
  std::fflush(stdout);
  g_results.push_back(std::move(c));
}

GroupElement random_element(Rng& rng, double lo = -2, double hi = 2) {
  return {rng.uniform(lo, hi), rng.uniform(lo, hi), rng.uniform(lo, hi),
          rng.uniform(lo, hi), rng.uniform(lo, hi), rng.uniform(lo, hi)};
}

Functional random_functional(Rng& rng) {
  return {rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2),
          rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)};
}

double dyadic(Rng& rng, bool nonzero = false) {
  for (;;) {
    const long m = static_cast<long>(rng.next() % 129) - 64;
    if (nonzero && m == 0) continue;
    return static_cast<double>(m) / 32.0;
  }
}

Functional random_in_class(OrbitKind kind, Rng& rng) {
  Functional f;
  switch (kind) {
    case OrbitKind::SixD:
      for (;;) {
        f = {dyadic(rng), dyadic(rng), dyadic(rng), dyadic(rng, true),
             dyadic(rng, true), dyadic(rng, true)};
        if (std::abs(2 * f.q * f.s - f.r * f.r) > 1e-3) return f;
      }
    case OrbitKind::FourDS: {
      const int e = static_cast<int>(rng.next() % 5) - 2;
      f.s = ((rng.next() & 1) ? 1.0 : -1.0) * std::ldexp(1.0, e);
      f.r = dyadic(rng);
      f.q = f.r * f.r / (2.0 * f.s);
      f.p = dyadic(rng);
      f.a = dyadic(rng);
      f.b = dyadic(rng);
      return f;
    }
    case OrbitKind::FourDR:
      return {dyadic(rng), dyadic(rng), dyadic(rng), dyadic(rng), dyadic(rng, true), 0};
    case OrbitKind::FourDPQ:
      return {dyadic(rng), dyadic(rng), dyadic(rng, true), dyadic(rng, true), 0, 0};
    case OrbitKind::TwoDQ:
      return {dyadic(rng), dyadic(rng), 0, dyadic(rng, true), 0, 0};
    case OrbitKind::TwoDP:
      return {dyadic(rng), dyadic(rng), dyadic(rng, true), 0, 0, 0};
    case OrbitKind::Character:
      return {dyadic(rng), dyadic(rng), 0, 0, 0, 0};
  }
  return f;
}

std::shared_ptr<const PolarizedTestFn> ref_tf(Polarization p, H3Frame f,
                                              int variant = 0, bool strict = true) {
  return std::make_shared<PolarizedTestFn>(reference_testfn(p, f, variant, strict));
}

std::shared_ptr<const PolarizedTestFn> narrowband(H3Frame f) {
  PolarizedTestFn tf;
  tf.pol = Polarization::H3;
  tf.frame = f;
  tf.base = {{0, 0.2}, {0, 0.2}, {0, 1.0}};
  tf.fiber = {{0, 1}, {0, 1}, {0, 1}};
  tf.fiber_root_scale = 1.0;
  return std::make_shared<PolarizedTestFn>(std::move(tf));
}

// --------------------------------------------------------------------------

void criterion_algebra(Criterion& c) {
  auto basis = [](int i) {
    AlgebraVector v;
    switch (i) {
      case 0: v.a = 1; break;
      case 1: v.b = 1; break;
      case 2: v.p = 1; break;
      case 3: v.q = 1; break;
      case 4: v.r = 1; break;
      case 5: v.s = 1; break;
    }
    return v;
  };
  bool jacobi = true;
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j)
      for (int k = 0; k < 6; ++k) {
        const AlgebraVector x = basis(i), y = basis(j), z = basis(k);
        const AlgebraVector res = bracket(x, bracket(y, z)) +
                                  bracket(y, bracket(z, x)) +
                                  bracket(z, bracket(x, y));
        for (double v : res.coords()) jacobi &= v == 0.0;
      }
  c.require(jacobi, "Jacobi identity exact on all basis triples");

  Rng rng(101);
  double worst_action = 0, worst_assoc = 0;
  for (int i = 0; i < 1000; ++i) {
    const GroupElement g = random_element(rng), h = random_element(rng);
    const Functional f = random_functional(rng);
    const Functional lhs = coadjoint(group_mul(g, h), f);
    const Functional rhs = coadjoint(g, coadjoint(h, f));
    const double scale = std::max(1.0, rhs.norm_inf());
    worst_action = std::max(worst_action, (lhs - rhs).norm_inf() / scale);
    const GroupElement k = random_element(rng);
    const GroupElement l = group_mul(group_mul(g, h), k);
    const GroupElement r = group_mul(g, group_mul(h, k));
    worst_assoc = std::max(
        worst_assoc, std::max({std::abs(l.a - r.a), std::abs(l.b - r.b),
                               std::abs(l.p - r.p), std::abs(l.q - r.q),
                               std::abs(l.r - r.r), std::abs(l.s - r.s)}));
  }
  c.require(worst_action <= 1e-9,
            "Ad* action law, 1000 samples, worst rel err " + std::to_string(worst_action));
  c.require(worst_assoc <= 1e-12,
            "associativity, 1000 samples, worst err " + std::to_string(worst_assoc));
}

void criterion_classification(Criterion& c) {
  Rng rng(202);
  int agree = 0;
  for (int i = 0; i < 1000; ++i) {
    const Functional f = random_functional(rng);
    const OrbitClass c1 = classify(f);
    const OrbitClass c2 = classify(coadjoint(random_element(rng), f));
    if (c1.kind == c2.kind && c1.eps == c2.eps && c1.nu == c2.nu) ++agree;
  }
  c.require(agree == 1000, "Ad*-invariance of classify on 1000 random pairs: " +
                               std::to_string(agree) + "/1000");

  double worst = 0;
  for (OrbitKind k : {OrbitKind::SixD, OrbitKind::FourDS, OrbitKind::FourDR,
                      OrbitKind::FourDPQ, OrbitKind::TwoDQ, OrbitKind::TwoDP,
                      OrbitKind::Character}) {
    for (int i = 0; i < 200; ++i) {
      const Functional f = random_in_class(k, rng);
      const CanonicalRep cr = canonical_rep(f);
      worst = std::max(worst,
                       (coadjoint(cr.g, f) - representative(cr.cls)).norm_inf());
    }
  }
  c.require(worst <= 1e-8,
            "canonical_rep verifies to 1e-8 on 200 functionals per class, worst " +
                std::to_string(worst));
}

void criterion_closure(Criterion& c) {
  // The four explicit boundary-approach curves, evaluated literally at
  // a = 10 and a = 20 against the thresholds 1e-3 and 1e-6.
  Functional s_orbit;
  s_orbit.b = 1;
  s_orbit.s = 1;
  Functional r_orbit;
  r_orbit.b = 1;
  r_orbit.r = 1;

  struct CurveCase {
    const char* name;
    Functional start;
    Functional target;
    GroupElement (*curve)(double, const Functional&, const Functional&);
  };
  Functional tgt_q;
  tgt_q.a = 0.3;
  tgt_q.b = 0.7;
  tgt_q.q = 0.8;
  Functional tgt_p;
  tgt_p.a = -0.4;
  tgt_p.b = 0.2;
  tgt_p.p = 1.0;
  Functional tgt_ch;
  tgt_ch.a = 0.5;
  tgt_ch.b = -0.3;
  Functional tgt_rp;
  tgt_rp.a = 0.8;
  tgt_rp.b = 0.2;
  tgt_rp.p = 2.0;
  const CurveCase cases[] = {
      {"S-orbit -> Q-ray", s_orbit, tgt_q, curves::s_orbit_to_q_ray},
      {"S-orbit -> P-plane", s_orbit, tgt_p, curves::s_orbit_to_p_plane},
      {"S-orbit -> character", s_orbit, tgt_ch, curves::s_orbit_to_character},
      {"R-orbit -> P-plane", r_orbit, tgt_rp, curves::r_orbit_to_p_plane},
  };
  for (const auto& cc : cases) {
    const double e10 =
        (coadjoint(cc.curve(10, cc.start, cc.target), cc.start) - cc.target).norm_inf();
    const double e20 =
        (coadjoint(cc.curve(20, cc.start, cc.target), cc.start) - cc.target).norm_inf();
    std::ostringstream os;
    os << cc.name << ": err(a=10) = " << e10 << " (<= 1e-3), err(a=20) = " << e20
       << " (<= 1e-6)";
    c.require(e10 <= 1e-3 && e20 <= 1e-6, os.str());
  }

  Rng rng(303);
  bool members = true;
  for (OrbitKind k : {OrbitKind::SixD, OrbitKind::FourDS, OrbitKind::FourDR,
                      OrbitKind::FourDPQ, OrbitKind::TwoDQ, OrbitKind::TwoDP,
                      OrbitKind::Character}) {
    const OrbitClass cls = classify(random_in_class(k, rng));
    const Functional rep = representative(cls);
    for (int i = 0; i < 200; ++i)
      members &= in_closure(coadjoint(random_element(rng), rep), cls);
  }
  c.require(members, "in_closure accepts 200 orbit samples per class");
  Functional qm;
  qm.q = -1;
  c.require(!in_closure(qm, OrbitClass::six_d(+1, +1)),
            "in_closure rejects -Q* for the (+1,+1) open orbit");
}

void criterion_kernel_oracle(Criterion& c) {
  Grid g({{-0.5, 5.0, 6}, {-2.0, 3.0, 6}, {-2.5, 2.5, 6}});
  auto tf = ref_tf(Polarization::H3, H3Frame::E);
  const RepDescriptor rep = SixDRep{+1, -1};
  const KernelOperator Kmf = assemble_kernel(rep, tf, g);
  AssembleOptions dopt;
  dopt.mode = EvalMode::Dense;
  const KernelOperator Kd = assemble_kernel(rep, tf, g, dopt);
  Rng rng(404);
  std::vector<cd> xi(g.size());
  for (auto& v : xi) v = cd{rng.uniform(-1, 1), rng.uniform(-1, 1)};
  const auto y1 = Kmf.apply(xi), y2 = Kd.apply(xi);
  double diff = 0, scale = 0;
  for (std::size_t i = 0; i < y1.size(); ++i) {
    diff = std::max(diff, std::abs(y1[i] - y2[i]));
    scale = std::max(scale, std::abs(y1[i]));
  }
  c.require(diff <= 1e-12 * std::max(1.0, scale),
            "dense vs matrix-free apply on a 6^3 grid, max diff " + std::to_string(diff));

  double worst = 0;
  for (int n : {8, 16, 32, 64}) {
    Grid g1({{0.0, static_cast<double>(n - 1), n}});
    auto dm = std::make_shared<DenseMap>();
    dm->n = n;
    dm->m.resize(static_cast<std::size_t>(n) * n);
    Eigen::MatrixXcd A(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const cd v{rng.uniform(-1, 1), rng.uniform(-1, 1)};
        dm->m[static_cast<std::size_t>(i) * n + j] = v;
        A(i, j) = v;
      }
    const std::vector<double> w = g1.weights();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) A(i, j) *= std::sqrt(w[i] * w[j]);
    const double svd = A.jacobiSvd().singularValues()(0);
    OpNormOptions opt;
    opt.tol = 1e-11;
    opt.max_iter = 500000;
    opt.restarts = 3;
    worst = std::max(worst, std::abs(op_norm(*dm, g1, opt) - svd) / svd);
  }
  c.require(worst <= 1e-8,
            "power iteration vs SVD on dense 8..64, worst rel err " + std::to_string(worst));
}

void criterion_young(Criterion& c) {
  Grid g({{-0.6, 3.5, 16}, {-1.5, 3.5, 16}, {-3.0, 3.0, 16}});
  for (int variant = 0; variant < 5; ++variant) {
    auto tf = ref_tf(Polarization::H3, H3Frame::E, variant, true);
    const KernelOperator K = assemble_kernel(SixDRep{+1, -1}, tf, g);
    const double lhs = op_norm(K, 1e-6);
    const double rhs = envelope_l1(*tf);
    std::ostringstream os;
    os << "variant " << variant << ": op_norm " << lhs << " <= envelope_l1 " << rhs;
    c.require(lhs <= rhs, os.str());
  }
}

void criterion_sigma_bounds(Criterion& c) {
  {
    auto tf = ref_tf(Polarization::H3, H3Frame::E);
    Grid g({{-0.6, 16.0, 24}, {0.5, 3.4, 10}, {-3.6, 3.6, 16}});
    const StratumSpec sm{StratumKind::SixDMinus, +1};
    const double rhs = sigma_bound_rhs(sm, tf, g, 1e-5);
    for (double d : {0.4, 0.2, 0.1}) {
      PartitionParams pp;
      pp.delta = d;
      OpNormOptions on;
      on.tol = 1e-5;
      const double lhs = op_norm(*make_sigma(sm, pp, tf, g).sum, g, on);
      std::ostringstream os;
      os << "open orbit, delta " << d << ": |sigma| " << lhs
         << " <= 2|sS| + 9|sQ| + 2|sR| = " << rhs;
      c.require(lhs <= rhs, os.str());
    }
  }
  {
    auto tf = narrowband(H3Frame::XBP);
    Grid g({{5.2, 16.3, 75}, {-17.2, -3.7, 90}, {-2.2, 2.2, 10}});
    const StratumSpec ss{StratumKind::EpsS, +1};
    const double rhs = sigma_bound_rhs(ss, tf, g, 1e-5);
    for (double d : {0.4, 0.2, 0.1}) {
      PartitionParams pp;
      pp.delta = d;
      OpNormOptions on;
      on.tol = 1e-5;
      const double lhs = op_norm(*make_sigma(ss, pp, tf, g).sum, g, on);
      std::ostringstream os;
      os << "S-ray stratum, delta " << d << ": |sigma| " << lhs << " <= 27 |sQ| = " << rhs;
      c.require(lhs <= rhs, os.str());
    }
  }
}

void criterion_boundary_decay(Criterion& c) {
  BoundaryCheckConfig cfg;
  cfg.deltas = {0.4, 0.2, 0.1};
  cfg.ratio_max = 0.7;
  cfg.hs_refine_max = 0.05;
  cfg.hs_delta = 0.4;
  cfg.op_tol = 1e-4;

  auto run = [&](const char* name, const StratumSpec& spec,
                 std::shared_ptr<const PolarizedTestFn> tf, const Grid& sweep,
                 const Grid* hs, std::shared_ptr<const PolarizedTestFn> stf = nullptr,
                 const Grid* sg = nullptr) {
    const auto res = check_boundary(spec, tf, sweep, cfg, hs, stf, sg);
    for (const auto& e : res.entries) {
      std::ostringstream os;
      os << name << " " << e.condition << " (delta " << e.delta << "): measured "
         << e.measured << " vs " << e.threshold;
      c.require(e.passed(), os.str());
    }
  };

  auto tfE = ref_tf(Polarization::H3, H3Frame::E);
  Grid sixd_sweep({{-0.6, 16.0, 24}, {0.5, 3.4, 10}, {-3.6, 3.6, 16}});
  Grid sixd_hs({{-0.6, 5.4977, 14}, {-1.3, 2.7, 12}, {-2.6, 2.6, 56}});
  run("6d-", {StratumKind::SixDMinus, +1}, tfE, sixd_sweep, &sixd_hs);
  run("6d+", {StratumKind::SixDPlus, +1}, tfE, sixd_sweep, &sixd_hs);

  auto tnb = narrowband(H3Frame::XBP);
  Grid epsS_sweep({{5.2, 16.3, 75}, {-17.2, -3.7, 90}, {-2.2, 2.2, 10}});
  Grid epsS_hs({{-0.6, 5.4977, 88}, {-2.0, 2.0, 4}, {-2.2, 2.2, 12}});
  run("epsS", {StratumKind::EpsS, +1}, tnb, epsS_sweep, &epsS_hs);

  auto tnr = narrowband(H3Frame::XYP);
  Grid epsR_sweep({{5.2, 16.3, 75}, {2.7, 17.1, 96}, {-2.2, 2.2, 10}});
  run("epsR", {StratumKind::EpsR, +1}, tnr, epsR_sweep, &epsS_hs);

  auto tfL4 = ref_tf(Polarization::L4, H3Frame::E);
  Grid pq_sweep({{-1.0, 20.0, 24}, {-1.0, 16.0, 20}});
  Grid pq_hs({{-1.0, 5.49, 20}, {-1.0, 5.49, 20}});
  run("pq", {StratumKind::PQ, +1, +1}, tfL4, pq_sweep, &pq_hs);

  auto la5 = std::make_shared<PolarizedTestFn>(
      reference_testfn(Polarization::LA5, H3Frame::E, 0, true));
  const_cast<PolarizedTestFn&>(*la5).fiber[0].radius = 5.0;
  Grid nuq_sweep({{-3.0, 3.0, 12}, {-1.0, 6.0, 16}});
  Grid nuq_slice({{-1.0, 0.91629, 12}});
  run("nuQ", {StratumKind::NuQ, +1}, tfL4, nuq_sweep, nullptr, la5, &nuq_slice);
}

void criterion_bstar_decay(Criterion& c) {
  auto tf = ref_tf(Polarization::H3, H3Frame::XBP);
  Grid g2({{-0.6, 5.5, 24}, {-3.0, 3.0, 24}});
  const auto norms = bstar_decay_sweep(*tf, +1, 0.1, {4, 8, 16}, g2, {}, 1e-6);
  std::ostringstream os;
  os << "norms at b* in {4,8,16}: " << norms[0] << ", " << norms[1] << ", " << norms[2];
  c.require(norms[0] > norms[1] && norms[1] > norms[2], "strictly decreasing: " + os.str());
  c.require(norms[1] / norms[0] <= 0.6 && norms[2] / norms[1] <= 0.6,
            "per-doubling ratios <= 0.6: " + std::to_string(norms[1] / norms[0]) + ", " +
                std::to_string(norms[2] / norms[1]));
}

void criterion_continuity_infinity(Criterion& c) {
  FullReportSetup s;
  s.boundary.op_tol = 1e-5;
  s.cont_tf = ref_tf(Polarization::H3, H3Frame::XBP);
  s.cont_grid = Grid({{-0.6, 5.5, 20}, {-3.0, 3.0, 20}});
  s.cont_b0 = 1.0;
  s.cont_levels = 5;
  s.cont_ratio_max = 0.8;
  const ConditionResult cont = gamma5_continuity(s);
  c.require(cont.passed(), "in-stratum differences halve: last ratio " +
                               std::to_string(cont.measured) + " <= 0.8");

  s.char_tf = ref_tf(Polarization::H3, H3Frame::E, 0, false);
  s.char_astars = {2, 8, 32, 128};
  s.infinity_tol = 1e-3;
  const ConditionResult inf = character_infinity(s);
  c.require(inf.passed(), "character norms decay below 1e-3 of the initial value: " +
                              std::to_string(inf.measured));
}

void criterion_end_to_end(Criterion& c) {
  const fs::path tmp = fs::temp_directory_path() / "g6cstar_acceptance";
  fs::create_directories(tmp);
  const std::string cli = G6_CLI_PATH;
  const std::string cfgdir = G6_CONFIG_DIR;

  auto run = [&](const std::string& config, const std::string& outdir) {
    const std::string cmd = cli + " dstar --config " + cfgdir + "/" + config +
                            " --out " + (tmp / outdir).string() + " > " +
                            (tmp / (outdir + ".log")).string() + " 2>&1";
    const int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
  };
  const int rc1 = run("reference.cfg", "run1");
  c.require(rc1 == 0, "reference config exits 0 (got " + std::to_string(rc1) + ")");
  const int rc2 = run("reference.cfg", "run2");
  c.require(rc2 == 0, "second run exits 0");

  auto slurp = [](const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  const std::string j1 = slurp(tmp / "run1" / "dstar_report.json");
  const std::string j2 = slurp(tmp / "run2" / "dstar_report.json");
  c.require(!j1.empty() && j1 == j2, "reports byte-identical across runs with one seed");

  const int rc3 = run("ablation.cfg", "run3");
  c.require(rc3 == 1, "ablated-sigma config exits 1 (got " + std::to_string(rc3) + ")");
}

}  // namespace

int main() {
  const unsigned hw = std::thread::hardware_concurrency();
  runtime_threads() = static_cast<int>(hw ? std::min(hw, 8u) : 4u);
  runtime_seed() = 0x51a3f2c9d4e8b671ull;

  std::printf("acceptance suite (threads: %d)\n", runtime_threads().load());
  run_criterion(1, "Lie algebra and group core", criterion_algebra);
  run_criterion(2, "orbit classification and canonical representatives",
                criterion_classification);
  run_criterion(3, "closure geometry: approach curves and membership",
                criterion_closure);
  run_criterion(4, "kernel oracle: dual evaluation paths and spectral norms",
                criterion_kernel_oracle);
  run_criterion(5, "Young bound for the open-orbit kernels", criterion_young);
  run_criterion(6, "comparison-operator norm bounds", criterion_sigma_bounds);
  run_criterion(7, "boundary defect decay and compact-part stability",
                criterion_boundary_decay);
  run_criterion(8, "b*-decay of the S-ray compact part", criterion_bstar_decay);
  run_criterion(9, "norm continuity and vanishing at infinity",
                criterion_continuity_infinity);
  run_criterion(10, "end-to-end CLI determinism and ablation", criterion_end_to_end);

  int failed = 0;
  for (const auto& r : g_results)
    if (!r.pass) ++failed;
  std::printf("%d/%zu criteria passed\n", static_cast<int>(g_results.size()) - failed,
              g_results.size());
  return failed;
}
