// Command-line front end: classify functionals, emit the orbit atlas,
// assemble and export kernels, run boundary and operator-field checks.
//
// Exit codes: 0 pass, 1 check failure, 2 configuration error, 3 numeric
// failure.

#include <CLI11.hpp>

#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "g6cstar/config.hpp"
#include "g6cstar/serialization.hpp"

namespace fs = std::filesystem;
using namespace g6cstar;

namespace {

struct CommonOpts {
  std::string config_path;
  std::string out_dir;
  std::string format = "csv";
  long seed = -1;
  int threads = 0;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool need_config) {
  auto* c = cmd->add_option("--config", o.config_path, "run configuration file");
  if (need_config) c->required();
  cmd->add_option("--out", o.out_dir, "output directory");
  cmd->add_option("--seed", o.seed, "override the RNG seed");
  cmd->add_option("--threads", o.threads, "worker threads");
  cmd->add_option("--format", o.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
}

RunConfig load_run(const CommonOpts& o) {
  RunConfig rc = build_run_config(ConfigFile::load(o.config_path));
  if (o.seed >= 0) rc.seed = static_cast<std::uint64_t>(o.seed);
  if (o.threads > 0) rc.threads = o.threads;
  if (!o.out_dir.empty()) rc.out_dir = o.out_dir;
  rc.setup.seed = rc.seed;
  runtime_seed() = rc.seed == 0 ? 1 : rc.seed;
  runtime_threads() = std::max(1, rc.threads);
  fs::create_directories(rc.out_dir);
  return rc;
}

int cmd_classify(const std::vector<double>& c) {
  Functional f{c[0], c[1], c[2], c[3], c[4], c[5]};
  for (double v : c)
    if (!std::isfinite(v)) throw ConfigError("classify: coefficients must be finite");
  const OrbitClass cls = classify(f);
  const double bref =
      (cls.kind == OrbitKind::FourDS || cls.kind == OrbitKind::FourDR) ? cls.param : 0.0;
  const OrbitInvariants inv = orbit_invariants(f, bref);
  ojson j;
  j["functional"] = {f.a, f.b, f.p, f.q, f.r, f.s};
  j["class"] = to_json(cls);
  j["stratum"] = stratum(cls).index;
  j["invariants"] = {{"phi", inv.phi},
                     {"phi2", inv.phi2},
                     {"psi", inv.psi},
                     {"sgnS", inv.sgn_s}};
  std::cout << j.dump() << '\n';
  return 0;
}

int cmd_atlas() {
  ojson j = ojson::array();
  const std::vector<OrbitClass> atlas = {
      OrbitClass::character(0, 0),    OrbitClass::two_d_p(0, +1),
      OrbitClass::two_d_q(0, +1),     OrbitClass::four_d_pq(+1, +1),
      OrbitClass::four_d_r(0, +1),    OrbitClass::four_d_s(0, +1),
      OrbitClass::six_d(+1, +1),      OrbitClass::six_d(-1, +1),
  };
  for (const auto& c : atlas) {
    ojson e;
    e["class"] = to_json(c);
    e["stratum"] = stratum(c).index;
    const Functional r = representative(c);
    e["representative"] = {r.a, r.b, r.p, r.q, r.r, r.s};
    e["boundary"] = ojson::array();
    for (const auto& fam : closure_boundary(c)) e["boundary"].push_back(to_json(fam));
    j.push_back(e);
  }
  std::cout << j.dump(2) << '\n';
  return 0;
}

int cmd_boundary_check(const CommonOpts& o) {
  RunConfig rc = load_run(o);
  if (rc.setup.boundary.deltas.size() < 2)
    throw ConfigError("boundary-check: need at least two deltas");
  bool all_pass = true;
  std::ofstream csv(fs::path(rc.out_dir) / "boundary.csv");
  csv << defect_csv_header() << '\n';
  ojson jall = ojson::array();
  for (const auto& st : rc.setup.strata) {
    BoundaryCheckConfig cfg = rc.setup.boundary;
    const Grid* hsg = st.hs_grid ? &*st.hs_grid : nullptr;
    const Grid* slg = st.slice_grid ? &*st.slice_grid : nullptr;
    auto res = check_boundary(st.spec, st.tf, st.sweep_grid, cfg, hsg, st.slice_tf, slg);
    for (const auto& row : res.sweep) csv << to_csv_row(row) << '\n';
    for (const auto& e : res.entries) {
      if (!e.passed()) all_pass = false;
      jall.push_back(to_json(e));
      std::cout << (e.passed() ? "[pass] " : "[FAIL] ") << e.stratum << ' '
                << e.condition << " measured=" << e.measured
                << " threshold=" << e.threshold << '\n';
    }
  }
  if (o.format == "json") {
    std::ofstream js(fs::path(rc.out_dir) / "boundary.json");
    js << jall.dump(2) << '\n';
  }
  return all_pass ? 0 : 1;
}

int cmd_dstar(const CommonOpts& o) {
  RunConfig rc = load_run(o);
  const CheckReport rep = full_report(rc.setup);
  const ojson j = to_json(rep, rc.seed);
  std::ofstream js(fs::path(rc.out_dir) / "dstar_report.json");
  js << j.dump(2) << '\n';
  if (rc.setup.bstar_tf) {
    const auto vals = bstar_decay_sweep(*rc.setup.bstar_tf, +1, rc.setup.bstar_delta,
                                        rc.setup.bstar_list, rc.setup.bstar_grid,
                                        rc.setup.boundary.assemble,
                                        rc.setup.boundary.op_tol);
    std::ofstream csv(fs::path(rc.out_dir) / "bstar_sweep.csv");
    csv << sweep_csv("b_star", rc.setup.bstar_list, vals);
  }
  std::cout << j.dump(2) << '\n';
  return rep.overall == "pass" ? 0 : 1;
}

int cmd_kernel_export(const CommonOpts& o) {
  ConfigFile cf = ConfigFile::load(o.config_path);
  RunConfig rc;
  rc.seed = static_cast<std::uint64_t>(cf.get_int_or("run", "seed", 1));
  rc.threads = static_cast<int>(cf.get_int_or("run", "threads", 1));
  rc.out_dir = cf.get_or("run", "out", ".");
  if (o.seed >= 0) rc.seed = static_cast<std::uint64_t>(o.seed);
  if (o.threads > 0) rc.threads = o.threads;
  if (!o.out_dir.empty()) rc.out_dir = o.out_dir;
  runtime_seed() = rc.seed == 0 ? 1 : rc.seed;
  runtime_threads() = std::max(1, rc.threads);
  fs::create_directories(rc.out_dir);
  if (!cf.has("export")) throw ConfigError("kernel-export: missing [export] section");
  auto tf = build_testfn(cf, cf.get("export", "tf"));
  const Grid grid = build_grid(cf, cf.get("export", "grid"));
  const std::string repname = cf.get("export", "rep");
  const int eps = static_cast<int>(cf.get_int_or("export", "eps", 1));
  const int nu = static_cast<int>(cf.get_int_or("export", "nu", 1));
  const double param = cf.get_double_or("export", "param", 0.0);
  RepDescriptor rep;
  if (repname == "sixD") rep = SixDRep{eps, nu};
  else if (repname == "fourDS") rep = FourDSRep{param, eps};
  else if (repname == "fourDR") rep = FourDRRep{param, eps};
  else if (repname == "fourDPQ") rep = FourDPQRep{eps, nu};
  else if (repname == "twoDQ") rep = TwoDQRep{param, nu};
  else if (repname == "twoDP") rep = TwoDPRep{param, eps};
  else if (repname == "indLTrivial") rep = IndLTrivial{};
  else throw ConfigError("kernel-export: unknown rep " + repname);
  AssembleOptions opt;
  opt.inner_n = static_cast<int>(cf.get_int_or("export", "inner_n", 64));
  const KernelOperator K = assemble_kernel(rep, tf, grid, opt);
  const std::string stem = (fs::path(rc.out_dir) / ("kernel_" + repname)).string();
  export_operator(K, stem);
  std::cout << "wrote " << stem << ".c64 (+ sidecar, norms)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coadjoint-orbit classification and operator-field checks for "
               "the 6-dimensional Iwasawa AN group of Sp(2,R)"};
  app.require_subcommand(1);

  auto* c_classify = app.add_subcommand(
      "classify", "classify a functional given by six coefficients");
  std::vector<double> coeffs;
  c_classify->add_option("coeffs", coeffs, "a* b* p* q* r* s*")->expected(6);

  auto* c_boundary = app.add_subcommand("boundary-check",
                                        "run the delta-sweep boundary defects");
  CommonOpts ob;
  add_common(c_boundary, ob, true);
  auto* c_dstar = app.add_subcommand("dstar", "run the full operator-field report");
  CommonOpts od;
  add_common(c_dstar, od, true);
  auto* c_export = app.add_subcommand("kernel-export",
                                      "assemble one kernel and dump it");
  CommonOpts oe;
  add_common(c_export, oe, true);
  auto* c_atlas = app.add_subcommand("atlas", "print the orbit atlas");

  try {
    app.parse(argc, argv);
    if (c_classify->parsed()) return cmd_classify(coeffs);
    if (c_boundary->parsed()) return cmd_boundary_check(ob);
    if (c_dstar->parsed()) return cmd_dstar(od);
    if (c_export->parsed()) return cmd_kernel_export(oe);
    if (c_atlas->parsed()) return cmd_atlas();
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const WindowError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
