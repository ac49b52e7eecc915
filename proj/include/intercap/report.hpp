#pragma once

// Plot-ready serialization of curves, bundles and risks. All numbers are
// rounded to 1e-3 and printed in shortest round-trip form so that reruns are
// byte-identical.

#include <array>
#include <charconv>
#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "intercap/allocation.hpp"
#include "intercap/risk_engine.hpp"

namespace intercap {

inline constexpr const char* kToolVersion = "0.1.0";

/// Value rounded to three decimals, with -0 folded to 0.
inline double round3(double x) {
  const double r = std::round(x * 1000.0) / 1000.0;
  return r == 0.0 ? 0.0 : r;
}

inline std::string format_number(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), round3(x));
  return std::string(buf.data(), res.ptr);
}

struct Provenance {
  std::string scenario_sha256;
  std::string tool_version = kToolVersion;
};

namespace report {

using Json = nlohmann::ordered_json;

inline Json number(double x) { return Json(round3(x)); }

inline Json to_json(const InterconnectionSpec& ic) {
  Json levels = Json::array();
  for (const auto& l : ic.levels) {
    levels.push_back({{"capacity_mw", number(l.capacity)}, {"probability", l.probability}});
  }
  return levels;
}

inline Json to_json(const RiskResult& r) { return {{"a", number(r.r_a)}, {"b", number(r.r_b)}}; }

inline Json to_json(const CurvePoint& p) {
  return {{"l_a_mw", number(p.l_a)}, {"l_b_mw", number(p.l_b)}, {"binding", to_string(p.binding)}};
}

inline Json to_json(const Provenance& p) {
  return {{"scenario_sha256", p.scenario_sha256}, {"tool_version", p.tool_version}};
}

inline Json to_json(const CurveResult& c) {
  Json pts = Json::array();
  for (const auto& p : c.curve.points) pts.push_back(to_json(p));
  return {{"policy", to_string(c.curve.policy)},
          {"capacity_mw", number(c.curve.interconnection.max_capacity())},
          {"levels", to_json(c.curve.interconnection)},
          {"optimum", to_json(c.optimum)},
          {"points", std::move(pts)}};
}

/// Sidecar for a single curve file.
inline Json curve_sidecar(const CurveResult& c, const RiskResult& baseline, const Provenance& prov) {
  return {{"policy", to_string(c.curve.policy)},
          {"baseline_lole_h_per_year", to_json(baseline)},
          {"levels", to_json(c.curve.interconnection)},
          {"optimum", to_json(c.optimum)},
          {"n_points", c.curve.points.size()},
          {"provenance", to_json(prov)}};
}

/// Multi-curve bundle (policies comparison or capacity sweep).
inline Json bundle(const std::string& kind, const std::vector<CurveResult>& curves, const RiskResult& baseline,
                   const Provenance& prov) {
  Json cs = Json::array();
  for (const auto& c : curves) cs.push_back(to_json(c));
  return {{"kind", kind},
          {"baseline_lole_h_per_year", to_json(baseline)},
          {"curves", std::move(cs)},
          {"provenance", to_json(prov)}};
}

inline void write_curve_csv(std::ostream& out, const AllocationCurve& curve, const Provenance& prov) {
  out << "# scenario_sha256: " << prov.scenario_sha256 << "\n";
  out << "l_a_mw,l_b_mw,binding\n";
  for (const auto& p : curve.points) {
    out << format_number(p.l_a) << ',' << format_number(p.l_b) << ',' << to_string(p.binding) << '\n';
  }
}

/// Long-form table: one row per curve point, tagged with policy and capacity.
inline void write_bundle_csv(std::ostream& out, const std::vector<CurveResult>& curves, const Provenance& prov) {
  out << "# scenario_sha256: " << prov.scenario_sha256 << "\n";
  out << "policy,capacity_mw,l_a_mw,l_b_mw,binding,optimum\n";
  for (const auto& c : curves) {
    const std::string pol = to_string(c.curve.policy);
    const std::string cap = format_number(c.curve.interconnection.max_capacity());
    for (const auto& p : c.curve.points) {
      const bool opt = p.l_a == c.optimum.l_a && p.l_b == c.optimum.l_b;
      out << pol << ',' << cap << ',' << format_number(p.l_a) << ',' << format_number(p.l_b) << ','
          << to_string(p.binding) << ',' << (opt ? 1 : 0) << '\n';
    }
  }
}

}  // namespace report
}  // namespace intercap
