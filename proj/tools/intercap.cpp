// Command-line front end: synthetic data, calibration and curve studies.

#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include "CLI11.hpp"
#include "intercap/intercap.hpp"

namespace fs = std::filesystem;
using namespace intercap;

namespace {

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string sha256_hex(const std::string& bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 failed");
  }
  std::string hex;
  char buf[3];
  for (unsigned int k = 0; k < len; ++k) {
    std::snprintf(buf, sizeof buf, "%02x", md[k]);
    hex += buf;
  }
  return hex;
}

void write_text(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out || !(out << text)) throw std::runtime_error("cannot write " + p.string());
}

fs::path sidecar_path(const fs::path& csv) {
  fs::path j = csv;
  return j.replace_extension(".json");
}

// A loaded, calibrated scenario ready for curve tracing.
struct Loaded {
  ScenarioSpec spec;
  Provenance prov;
  Study study;
};

Loaded load_calibrated(const fs::path& file) {
  ScenarioSpec spec = load_scenario(file);
  if (!spec.calibrated()) {
    throw ScenarioError("scenario " + file.string() +
                        " is not calibrated (n_sets or load_offset_mw is \"auto\"); run `intercap calibrate " +
                        file.string() + "` first");
  }
  const StudyInputs in = build_inputs(spec);
  Study st = build_study(spec, in);
  return {std::move(spec), Provenance{sha256_hex(read_bytes(file))}, std::move(st)};
}

InterconnectionSpec interconnection_for(const ScenarioSpec& spec, double capacity_override) {
  return capacity_override >= 0.0 ? spec.interconnection.with_total_capacity(capacity_override)
                                  : spec.interconnection.spec();
}

struct TraceFlags {
  int points = -1;
  double tol_mw = -1.0;

  TraceOptions apply(TraceOptions opt) const {
    if (points >= 0) opt.n_points = points;
    if (tol_mw > 0.0) opt.tol_mw = tol_mw;
    return opt;
  }
};

int cmd_synth(std::uint64_t seed, const fs::path& out_dir, std::size_t hours) {
  const SyntheticData d = synth_series(seed, hours);
  fs::create_directories(out_dir);
  write_demand_csv((out_dir / "demand.csv").string(), d);
  write_wind_csv((out_dir / "wind.csv").string(), d);
  std::cout << "wrote " << hours << " hourly rows to " << (out_dir / "demand.csv").string() << " and "
            << (out_dir / "wind.csv").string() << "\n";
  return 0;
}

int cmd_calibrate(const fs::path& file, int max_sets) {
  Json doc = read_json_file(file);
  const ScenarioSpec spec = parse_scenario(doc, file.parent_path());
  const StudyInputs in = build_inputs(spec);
  const auto calibrate_one = [&](const SystemConfig& sys, const IsolatedSystem& iso, const char* key) {
    const CalibrationOutcome c = calibrate_system(sys, iso, spec.risk_standard, max_sets);
    Json& node = doc["systems"][key];
    node["n_sets"] = c.n_sets;
    node["load_offset_mw"] = c.load_offset;
    std::cout << "system " << key << " (" << sys.name << "): n_sets=" << c.n_sets
              << " load_offset_mw=" << format_number(c.load_offset) << " lole_h_per_year=" << format_number(c.lole)
              << "\n";
  };
  calibrate_one(spec.a, in.iso_a, "a");
  calibrate_one(spec.b, in.iso_b, "b");
  write_text(file, doc.dump(2) + "\n");
  return 0;
}

int cmd_baseline(const fs::path& file) {
  const Loaded l = load_calibrated(file);
  const RiskResult& r = l.study.baseline();
  std::cout << "lole_a_h_per_year=" << format_number(r.r_a) << " lole_b_h_per_year=" << format_number(r.r_b) << "\n";
  return 0;
}

int cmd_curve(const fs::path& file, const std::string& policy, double capacity, const TraceFlags& tf,
              const fs::path& out) {
  const Loaded l = load_calibrated(file);
  const InterconnectionSpec ic = interconnection_for(l.spec, capacity);
  auto curve = trace_curve(l.study, ic, parse_policy(policy), tf.apply(l.spec.trace));
  const CurvePoint best = select_optimum(curve);
  const CurveResult res{std::move(curve), best};
  std::ostringstream csv;
  report::write_curve_csv(csv, res.curve, l.prov);
  write_text(out, csv.str());
  write_text(sidecar_path(out), report::curve_sidecar(res, l.study.baseline(), l.prov).dump(2) + "\n");
  std::cout << policy << ": " << res.curve.points.size() << " points, optimum (" << format_number(best.l_a) << ", "
            << format_number(best.l_b) << ") MW -> " << out.string() << "\n";
  return 0;
}

int write_bundle(const Loaded& l, const std::string& kind, const std::vector<CurveResult>& curves,
                 const fs::path& out) {
  std::ostringstream csv;
  report::write_bundle_csv(csv, curves, l.prov);
  write_text(out, csv.str());
  write_text(sidecar_path(out), report::bundle(kind, curves, l.study.baseline(), l.prov).dump(2) + "\n");
  for (const auto& c : curves) {
    std::cout << to_string(c.curve.policy) << " @ " << format_number(c.curve.interconnection.max_capacity())
              << " MW: optimum (" << format_number(c.optimum.l_a) << ", " << format_number(c.optimum.l_b) << ")\n";
  }
  return 0;
}

int cmd_policies(const fs::path& file, double capacity, const TraceFlags& tf, const fs::path& out) {
  const Loaded l = load_calibrated(file);
  const std::vector<Policy> pols(kAllPolicies.begin(), kAllPolicies.end());
  const auto curves = sweep(l.study, pols, {interconnection_for(l.spec, capacity)}, tf.apply(l.spec.trace));
  return write_bundle(l, "policies", curves, out);
}

int cmd_sweep(const fs::path& file, const std::vector<int>& capacities, const std::string& policy,
              const TraceFlags& tf, const fs::path& out) {
  const Loaded l = load_calibrated(file);
  std::vector<InterconnectionSpec> ics;
  for (int c : capacities) ics.push_back(l.spec.interconnection.with_total_capacity(c));
  const auto curves = sweep(l.study, {parse_policy(policy)}, ics, tf.apply(l.spec.trace));
  return write_bundle(l, "sweep", curves, out);
}

// Compares the engine with the brute-force flow simulation on random cases.
int cmd_oracle_check(std::uint64_t seed, int cases) {
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (int k = 0; k < cases; ++k) {
    const auto kind = static_cast<oracle::CapacityKind>(k % 3);
    const oracle::SafeCase sc = oracle::random_safe_case(rng, kind);
    const MarginDist md(sc.pmf);
    for (System sys : {System::A, System::B}) {
      const auto d = shortfall_decomposition(md, sc.load, sc.capacity, sys);
      for (Policy p : kAllPolicies) {
        const double diff =
            std::abs(policy_lolp(d, p, sys) - oracle::policy_lolp(sc.margin, sc.load, sc.capacity, p, sys));
        worst = std::max(worst, diff);
      }
    }
  }
  std::cout << cases << " cases, max |engine - oracle| = " << worst << "\n";
  return worst <= 1e-12 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Capacity value of interconnection between two power systems"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  std::uint64_t seed = 1;
  fs::path out;
  fs::path scenario;
  std::string policy = "share";
  double capacity = -1.0;
  TraceFlags tf;
  std::size_t hours = 5 * 8760;
  int max_sets = 500;
  std::vector<int> capacities{3000, 5000, 10000};
  int cases = 300;

  auto* synth = app.add_subcommand("synth", "Write deterministic synthetic demand.csv and wind.csv");
  synth->add_option("--seed", seed, "Random seed")->capture_default_str();
  synth->add_option("--out", out, "Output directory")->required();
  synth->add_option("--hours", hours, "Number of hourly rows")->capture_default_str()->check(CLI::PositiveNumber);

  auto* calibrate = app.add_subcommand("calibrate", "Resolve \"auto\" fleet fields and write them back");
  calibrate->add_option("scenario", scenario, "Scenario JSON file")->required()->check(CLI::ExistingFile);
  calibrate->add_option("--max-sets", max_sets, "Cap on generator sets per system")->capture_default_str();

  auto* baseline = app.add_subcommand("baseline", "Print the isolated LOLE of both systems");
  baseline->add_option("scenario", scenario, "Scenario JSON file")->required()->check(CLI::ExistingFile);

  const auto add_trace_flags = [&](CLI::App* c) {
    c->add_option("--points", tf.points, "Trace points along l_A")->check(CLI::Range(2, 100000));
    c->add_option("--tol-mw", tf.tol_mw, "Bisection tolerance in MW")->check(CLI::PositiveNumber);
    c->add_option("--out", out, "Output CSV path (a .json sidecar is written next to it)")->required();
  };
  const auto add_policy_flag = [&](CLI::App* c) {
    c->add_option("--policy", policy, "Power flow policy")
        ->capture_default_str()
        ->check(CLI::IsMember({"veto", "share", "assist-a", "assist-b"}));
  };

  auto* curve = app.add_subcommand("curve", "Trace one capacity allocation curve");
  curve->add_option("scenario", scenario, "Scenario JSON file")->required()->check(CLI::ExistingFile);
  add_policy_flag(curve);
  curve->add_option("--capacity-mw", capacity, "Override the total interconnection capacity")
      ->check(CLI::NonNegativeNumber);
  add_trace_flags(curve);

  auto* policies = app.add_subcommand("policies", "Trace all four policies");
  policies->add_option("scenario", scenario, "Scenario JSON file")->required()->check(CLI::ExistingFile);
  policies->add_option("--capacity-mw", capacity, "Override the total interconnection capacity")
      ->check(CLI::NonNegativeNumber);
  add_trace_flags(policies);

  auto* sweep_cmd = app.add_subcommand("sweep", "Trace one policy across interconnection capacities");
  sweep_cmd->add_option("scenario", scenario, "Scenario JSON file")->required()->check(CLI::ExistingFile);
  add_policy_flag(sweep_cmd);
  sweep_cmd->add_option("--capacity-mw", capacities, "Total capacities in MW")
      ->delimiter(',')
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  add_trace_flags(sweep_cmd);

  auto* check = app.add_subcommand("oracle-check", "Compare engine and brute-force risks on random margins");
  check->group("");
  check->add_option("--seed", seed, "Random seed")->capture_default_str();
  check->add_option("--cases", cases, "Number of random margins")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth) return cmd_synth(seed, out, hours);
    if (*calibrate) return cmd_calibrate(scenario, max_sets);
    if (*baseline) return cmd_baseline(scenario);
    if (*curve) return cmd_curve(scenario, policy, capacity, tf, out);
    if (*policies) return cmd_policies(scenario, capacity, tf, out);
    if (*sweep_cmd) return cmd_sweep(scenario, capacities, policy, tf, out);
    if (*check) return cmd_oracle_check(seed, cases);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
