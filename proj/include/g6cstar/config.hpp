#pragma once

// Flat key-value run configuration with [section] headers, and the builders
// turning a parsed file into the materialized check setups.

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "dstar.hpp"

namespace g6cstar {

struct ConfigFile {
  std::map<std::string, std::map<std::string, std::string>> sections;

  bool has(const std::string& sec) const { return sections.count(sec) > 0; }
  bool has(const std::string& sec, const std::string& key) const {
    auto it = sections.find(sec);
    return it != sections.end() && it->second.count(key) > 0;
  }
  std::string get(const std::string& sec, const std::string& key) const {
    auto it = sections.find(sec);
    if (it == sections.end() || !it->second.count(key))
      throw ConfigError("config: missing key [" + sec + "] " + key);
    return it->second.at(key);
  }
  std::string get_or(const std::string& sec, const std::string& key,
                     const std::string& dflt) const {
    return has(sec, key) ? get(sec, key) : dflt;
  }
  double get_double(const std::string& sec, const std::string& key) const {
    return parse_double(get(sec, key), sec, key);
  }
  double get_double_or(const std::string& sec, const std::string& key, double d) const {
    return has(sec, key) ? get_double(sec, key) : d;
  }
  long get_int_or(const std::string& sec, const std::string& key, long d) const {
    return has(sec, key) ? std::stol(get(sec, key)) : d;
  }
  bool get_bool_or(const std::string& sec, const std::string& key, bool d) const {
    if (!has(sec, key)) return d;
    const std::string v = get(sec, key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("config: bad boolean [" + sec + "] " + key + " = " + v);
  }
  std::vector<double> get_list_or(const std::string& sec, const std::string& key,
                                  std::vector<double> d) const {
    if (!has(sec, key)) return d;
    std::vector<double> out;
    std::istringstream in(get(sec, key));
    double v;
    while (in >> v) out.push_back(v);
    return out;
  }
  std::vector<std::string> get_words_or(const std::string& sec, const std::string& key,
                                        std::vector<std::string> d) const {
    if (!has(sec, key)) return d;
    std::vector<std::string> out;
    std::istringstream in(get(sec, key));
    std::string w;
    while (in >> w) out.push_back(w);
    return out;
  }

  static double parse_double(const std::string& v, const std::string& sec,
                             const std::string& key) {
    try {
      std::size_t used = 0;
      const double x = std::stod(v, &used);
      return x;
    } catch (...) {
      throw ConfigError("config: bad number [" + sec + "] " + key + " = " + v);
    }
  }

  static ConfigFile parse(std::istream& in) {
    ConfigFile cf;
    std::string line, section;
    while (std::getline(in, line)) {
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
      };
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[' && line.back() == ']') {
        section = trim(line.substr(1, line.size() - 2));
        cf.sections[section];
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError("config: expected key = value, got: " + line);
      cf.sections[section][trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return cf;
  }

  static ConfigFile load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    return parse(in);
  }
};

// ---------------------------------------------------------------------------
// Builders
// ---------------------------------------------------------------------------

inline Polarization parse_polarization(const std::string& s) {
  if (s == "h3") return Polarization::H3;
  if (s == "l4") return Polarization::L4;
  if (s == "la5") return Polarization::LA5;
  if (s == "lx5") return Polarization::LX5;
  throw ConfigError("config: unknown polarization " + s);
}

inline H3Frame parse_frame(const std::string& s) {
  if (s == "e") return H3Frame::E;
  if (s == "xbp") return H3Frame::XBP;
  if (s == "xyp") return H3Frame::XYP;
  throw ConfigError("config: unknown frame " + s);
}

inline StratumSpec parse_stratum(const std::string& s, int eps, int nu) {
  StratumSpec out;
  out.eps = eps;
  out.nu = nu;
  if (s == "sixd-") out.kind = StratumKind::SixDMinus;
  else if (s == "sixd+") out.kind = StratumKind::SixDPlus;
  else if (s == "epsS") out.kind = StratumKind::EpsS;
  else if (s == "epsR") out.kind = StratumKind::EpsR;
  else if (s == "pq") out.kind = StratumKind::PQ;
  else if (s == "nuQ") out.kind = StratumKind::NuQ;
  else if (s == "epsP") out.kind = StratumKind::EpsP;
  else throw ConfigError("config: unknown stratum " + s);
  return out;
}

inline std::shared_ptr<const PolarizedTestFn> build_testfn(const ConfigFile& cf,
                                                           const std::string& name) {
  const std::string sec = "testfn." + name;
  if (!cf.has(sec)) throw ConfigError("config: missing section [" + sec + "]");
  PolarizedTestFn tf;
  tf.pol = parse_polarization(cf.get_or(sec, "polarization", "h3"));
  tf.frame = parse_frame(cf.get_or(sec, "frame", "e"));
  const int bd = base_dim(tf.pol), fd = fiber_dim(tf.pol);
  auto centers_b = cf.get_list_or(sec, "base_centers", std::vector<double>(bd, 0.0));
  auto radii_b = cf.get_list_or(sec, "base_radii", std::vector<double>(bd, 2.0));
  auto centers_f = cf.get_list_or(sec, "fiber_centers", std::vector<double>(fd, 0.0));
  auto radii_f = cf.get_list_or(sec, "fiber_radii", std::vector<double>(fd, 1.0));
  if (static_cast<int>(centers_b.size()) != bd || static_cast<int>(radii_b.size()) != bd ||
      static_cast<int>(centers_f.size()) != fd || static_cast<int>(radii_f.size()) != fd)
    throw ConfigError("config: testfn " + name + ": wrong number of centers/radii");
  for (int i = 0; i < bd; ++i) {
    if (!(radii_b[i] > 0)) throw ConfigError("config: testfn radii must be positive");
    tf.base.push_back({centers_b[i], radii_b[i]});
  }
  for (int i = 0; i < fd; ++i) {
    if (!(radii_f[i] > 0)) throw ConfigError("config: testfn radii must be positive");
    tf.fiber.push_back({centers_f[i], radii_f[i]});
  }
  tf.amplitude = {cf.get_double_or(sec, "amplitude_re", 1.0),
                  cf.get_double_or(sec, "amplitude_im", 0.0)};
  tf.fiber_root_scale = cf.get_double_or(sec, "fiber_root_scale", 1.0);
  return std::make_shared<PolarizedTestFn>(std::move(tf));
}

inline Grid build_grid(const ConfigFile& cf, const std::string& name) {
  const std::string sec = "grid." + name;
  if (!cf.has(sec)) throw ConfigError("config: missing section [" + sec + "]");
  const std::string axes_str = cf.get(sec, "axes");
  std::vector<Axis> axes;
  std::istringstream in(axes_str);
  std::string part;
  while (std::getline(in, part, ';')) {
    std::istringstream p(part);
    Axis a;
    if (!(p >> a.lo >> a.hi >> a.n))
      throw ConfigError("config: grid " + name + ": axes entries are 'lo hi n'");
    axes.push_back(a);
  }
  Grid g;
  g.axes = std::move(axes);
  g.max_points = static_cast<std::size_t>(cf.get_int_or(sec, "max_points", 2l << 20));
  g.validate();
  return g;
}

struct RunConfig {
  std::uint64_t seed = 1;
  int threads = 1;
  std::string out_dir = ".";
  FullReportSetup setup;
  std::vector<std::string> stratum_names;  // report order
};

inline RunConfig build_run_config(const ConfigFile& cf) {
  RunConfig rc;
  rc.seed = static_cast<std::uint64_t>(cf.get_int_or("run", "seed", 1));
  rc.threads = static_cast<int>(cf.get_int_or("run", "threads", 1));
  rc.out_dir = cf.get_or("run", "out", ".");

  FullReportSetup& s = rc.setup;
  s.seed = rc.seed;
  s.boundary.deltas = cf.get_list_or("boundary", "deltas", {0.4, 0.2, 0.1});
  s.boundary.D = cf.get_double_or("boundary", "D", 1.0);
  s.boundary.ratio_max = cf.get_double_or("boundary", "ratio_max", 0.7);
  s.boundary.hs_refine_max = cf.get_double_or("boundary", "hs_refine_max", 0.05);
  s.boundary.hs_delta = cf.get_double_or("boundary", "hs_delta", 0.4);
  s.boundary.op_tol = cf.get_double_or("boundary", "op_tol", 1e-5);
  s.boundary.integral_samples = cf.get_list_or("boundary", "integral_samples", {});
  s.boundary.sigma_ablation = cf.get_bool_or("boundary", "sigma_ablation", false);
  s.boundary.with_refinement = cf.get_bool_or("boundary", "with_refinement", true);
  s.boundary.assemble.inner_n =
      static_cast<int>(cf.get_int_or("boundary", "inner_n", 64));
  s.adjoint_repeat = cf.get_bool_or("boundary", "adjoint_repeat", true);

  rc.stratum_names = cf.get_words_or(
      "boundary", "strata", {"sixd-", "sixd+", "epsS", "epsR", "pq", "nuQ"});
  for (const auto& name : rc.stratum_names) {
    const std::string sec = "stratum." + name;
    if (!cf.has(sec)) throw ConfigError("config: missing section [" + sec + "]");
    StratumSetup st;
    st.spec = parse_stratum(name, static_cast<int>(cf.get_int_or(sec, "eps", 1)),
                            static_cast<int>(cf.get_int_or(sec, "nu", 1)));
    st.tf = build_testfn(cf, cf.get(sec, "tf"));
    st.sweep_grid = build_grid(cf, cf.get(sec, "grid"));
    if (cf.has(sec, "hs_grid")) st.hs_grid = build_grid(cf, cf.get(sec, "hs_grid"));
    if (cf.has(sec, "slice_tf")) st.slice_tf = build_testfn(cf, cf.get(sec, "slice_tf"));
    if (cf.has(sec, "slice_grid"))
      st.slice_grid = build_grid(cf, cf.get(sec, "slice_grid"));
    s.strata.push_back(std::move(st));
  }

  if (cf.has("continuity")) {
    s.cont_tf = build_testfn(cf, cf.get("continuity", "tf"));
    s.cont_grid = build_grid(cf, cf.get("continuity", "grid"));
    s.cont_b0 = cf.get_double_or("continuity", "b0", 1.0);
    s.cont_levels = static_cast<int>(cf.get_int_or("continuity", "levels", 5));
    s.cont_ratio_max = cf.get_double_or("continuity", "ratio_max", 0.8);
  }
  if (cf.has("infinity")) {
    s.char_tf = build_testfn(cf, cf.get("infinity", "tf"));
    s.char_astars = cf.get_list_or("infinity", "astars", {2, 8, 32, 128});
    s.infinity_tol = cf.get_double_or("infinity", "tol", 1e-3);
  }
  if (cf.has("bstar")) {
    s.bstar_tf = build_testfn(cf, cf.get("bstar", "tf"));
    s.bstar_grid = build_grid(cf, cf.get("bstar", "grid"));
    s.bstar_list = cf.get_list_or("bstar", "list", {4, 8, 16});
    s.bstar_ratio_max = cf.get_double_or("bstar", "ratio_max", 0.6);
    s.bstar_delta = cf.get_double_or("bstar", "delta", 0.1);
  }
  return rc;
}

}  // namespace g6cstar
