#pragma once

// Stable external formats: orbit-class JSON, check-report JSON, defect CSV,
// and the binary operator dump (little-endian complex64, row-major, with a
// JSON sidecar describing grid and representation).

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include <json.hpp>

#include "dstar.hpp"

namespace g6cstar {

using ojson = nlohmann::ordered_json;

inline const char* orbit_kind_name(OrbitKind k) {
  switch (k) {
    case OrbitKind::Character: return "character";
    case OrbitKind::TwoDP: return "twoDP";
    case OrbitKind::TwoDQ: return "twoDQ";
    case OrbitKind::FourDPQ: return "fourDPQ";
    case OrbitKind::FourDR: return "fourDR";
    case OrbitKind::FourDS: return "fourDS";
    case OrbitKind::SixD: return "sixD";
  }
  return "?";
}

/// Schema: {"kind": ..., "eps": +-1, "nu": +-1, "param": x} with fields
/// present only where the class carries them; characters carry "param"
/// (a*) and "param2" (b*).
inline ojson to_json(const OrbitClass& c) {
  ojson j;
  j["kind"] = orbit_kind_name(c.kind);
  switch (c.kind) {
    case OrbitKind::Character:
      j["param"] = c.param;
      j["param2"] = c.param2;
      break;
    case OrbitKind::TwoDP:
      j["eps"] = c.eps;
      j["param"] = c.param;
      break;
    case OrbitKind::TwoDQ:
      j["nu"] = c.nu;
      j["param"] = c.param;
      break;
    case OrbitKind::FourDPQ:
      j["eps"] = c.eps;
      j["nu"] = c.nu;
      break;
    case OrbitKind::FourDR:
    case OrbitKind::FourDS:
      j["eps"] = c.eps;
      j["param"] = c.param;
      break;
    case OrbitKind::SixD:
      j["eps"] = c.eps;
      j["nu"] = c.nu;
      break;
  }
  return j;
}

inline OrbitClass orbit_from_json(const ojson& j) {
  const std::string kind = j.at("kind").get<std::string>();
  auto eps = [&] { return j.value("eps", 1); };
  auto nu = [&] { return j.value("nu", 1); };
  auto param = [&] { return j.value("param", 0.0); };
  if (kind == "character") return OrbitClass::character(param(), j.value("param2", 0.0));
  if (kind == "twoDP") return OrbitClass::two_d_p(param(), eps());
  if (kind == "twoDQ") return OrbitClass::two_d_q(param(), nu());
  if (kind == "fourDPQ") return OrbitClass::four_d_pq(eps(), nu());
  if (kind == "fourDR") return OrbitClass::four_d_r(param(), eps());
  if (kind == "fourDS") return OrbitClass::four_d_s(param(), eps());
  if (kind == "sixD") return OrbitClass::six_d(nu(), eps());
  throw std::invalid_argument("orbit_from_json: unknown kind " + kind);
}

inline ojson to_json(const OrbitFamily& f) {
  ojson j;
  j["kind"] = orbit_kind_name(f.kind);
  if (f.param) j["param"] = *f.param;
  if (f.eps) j["eps"] = *f.eps;
  if (f.nu) j["nu"] = *f.nu;
  if (f.kind == OrbitKind::Character) {
    switch (f.char_constraint) {
      case CharConstraint::All: j["constraint"] = "all"; break;
      case CharConstraint::FixedA:
        j["constraint"] = "aStar";
        j["value"] = f.char_value;
        break;
      case CharConstraint::FixedSum:
        j["constraint"] = "aStar+bStar";
        j["value"] = f.char_value;
        break;
    }
  }
  return j;
}

inline ojson to_json(const ConditionResult& r) {
  ojson j;
  j["condition"] = r.condition;
  j["stratum"] = r.stratum;
  if (!std::isnan(r.delta)) j["delta"] = r.delta;
  j["measured"] = r.measured;
  j["threshold"] = r.threshold;
  j["verdict"] = r.verdict;
  return j;
}

inline ojson to_json(const CheckReport& rep, std::uint64_t seed) {
  ojson j;
  j["seed"] = seed;
  j["overall"] = rep.overall;
  j["conditions"] = ojson::array();
  for (const auto& e : rep.entries) j["conditions"].push_back(to_json(e));
  return j;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

inline std::string defect_csv_header() {
  return "stratum,delta,D,part1_hs,part2_op,sigma_norm,bound_rhs";
}

inline std::string to_csv_row(const DefectReport& r) {
  std::ostringstream os;
  os << r.stratum << ',' << std::setprecision(12) << r.delta << ',' << r.D << ','
     << r.part1_hs << ',' << r.part2_op << ',' << r.sigma_norm << ',' << r.bound_rhs;
  return os.str();
}

inline std::string sweep_csv(const std::string& name, const std::vector<double>& xs,
                             const std::vector<double>& ys) {
  std::ostringstream os;
  os << name << ",value\n" << std::setprecision(12);
  for (std::size_t i = 0; i < xs.size(); ++i) os << xs[i] << ',' << ys[i] << '\n';
  return os.str();
}

// ---------------------------------------------------------------------------
// Operator export
// ---------------------------------------------------------------------------

/// Writes the dense entries of the operator, row-major, as little-endian
/// complex64 (float32 re, float32 im), plus a JSON sidecar and a one-line
/// norms CSV.
inline void export_operator(const KernelOperator& K, const std::string& stem,
                            std::size_t dense_budget = 1u << 26) {
  const std::size_t n = K.dim();
  if (n * n > dense_budget)
    throw ConfigError("export_operator: matrix exceeds the export budget");
  std::ofstream bin(stem + ".c64", std::ios::binary);
  if (!bin) throw ConfigError("export_operator: cannot write " + stem + ".c64");
  std::vector<float> row(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const cd v = K.map->entry(i, j);
      row[2 * j] = static_cast<float>(v.real());
      row[2 * j + 1] = static_cast<float>(v.imag());
    }
    bin.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size() * sizeof(float)));
  }
  bin.close();

  ojson side;
  side["dtype"] = "complex64";
  side["order"] = "row-major";
  side["shape"] = {n, n};
  side["rep"] = rep_name(K.rep);
  side["quadrature"] = "uniform-trapezoid";
  side["axes"] = ojson::array();
  for (const auto& a : K.grid.axes)
    side["axes"].push_back({{"lo", a.lo}, {"hi", a.hi}, {"n", a.n}});
  std::ofstream sj(stem + ".json");
  sj << side.dump(2) << '\n';

  std::ofstream csv(stem + "_norms.csv");
  csv << "rep,op_norm,hs_norm\n"
      << rep_name(K.rep) << ',' << std::setprecision(12) << op_norm(K, 1e-6) << ','
      << hs_norm(K) << '\n';
}

}  // namespace g6cstar
