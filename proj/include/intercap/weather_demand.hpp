#pragma once

// Joint demand and wind distributions for the two systems.
//
// Demand is taken empirically from aligned hourly series. Wind in system B is
// either ingested directly or derived from system A's marginal through a
// Gaussian copula with correlation rho.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "intercap/gridpmf.hpp"
#include "intercap/normal.hpp"

namespace intercap {

/// Hourly values keyed by UTC seconds since the epoch.
struct HourlySeries {
  std::vector<std::int64_t> timestamps;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }

  void validate() const {
    if (timestamps.size() != values.size()) {
      throw std::invalid_argument("HourlySeries: timestamp and value counts differ");
    }
  }
};

struct CopulaSpec {
  double rho = 0.0;

  void validate() const {
    if (!(rho >= 0.0 && rho <= 1.0)) throw std::invalid_argument("CopulaSpec: rho must lie in [0, 1]");
  }
};

// ---------------------------------------------------------------------------
// Timestamps

namespace timeutil {

using namespace std::chrono;

inline constexpr std::int64_t kHour = 3600;

inline std::int64_t to_epoch(int y, unsigned m, unsigned d, int hh = 0, int mm = 0, int ss = 0) {
  const year_month_day ymd{year{y}, month{m}, day{d}};
  if (!ymd.ok()) throw std::invalid_argument("invalid calendar date");
  return sys_days{ymd}.time_since_epoch().count() * 86400LL + hh * 3600LL + mm * 60LL + ss;
}

inline year_month_day date_of(std::int64_t t) {
  return year_month_day{sys_days{days{static_cast<long>(std::floor(static_cast<double>(t) / 86400.0))}}};
}

inline bool is_leap_day(std::int64_t t) {
  const auto ymd = date_of(t);
  return ymd.month() == February && ymd.day() == day{29};
}

/// Next hourly timestamp, skipping 29 February.
inline std::int64_t next_hour(std::int64_t t) {
  std::int64_t n = t + kHour;
  while (is_leap_day(n)) n += 24 * kHour;
  return n;
}

/// Parses "YYYY-MM-DDTHH:MM:SS" with an optional trailing "Z".
inline std::int64_t parse_iso(const std::string& s) {
  int y = 0, hh = 0, mi = 0, ss = 0;
  unsigned mo = 0, d = 0;
  char tail = '\0';
  const int n = std::sscanf(s.c_str(), "%d-%u-%uT%d:%d:%d%c", &y, &mo, &d, &hh, &mi, &ss, &tail);
  if (n < 6 || (n == 7 && tail != 'Z') || hh > 23 || mi > 59 || ss > 59 || hh < 0 || mi < 0 || ss < 0) {
    throw std::invalid_argument("malformed ISO-8601 timestamp '" + s + "'");
  }
  return to_epoch(y, mo, d, hh, mi, ss);
}

inline std::string format_iso(std::int64_t t) {
  const auto ymd = date_of(t);
  const std::int64_t sod = t - sys_days{ymd}.time_since_epoch().count() * 86400LL;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(sod / 3600), static_cast<int>(sod / 60 % 60), static_cast<int>(sod % 60));
  return buf;
}

}  // namespace timeutil

// ---------------------------------------------------------------------------
// CSV ingestion

struct DemandSeries {
  HourlySeries a;
  HourlySeries b;
};

struct WindSeries {
  HourlySeries cf_a;
  std::optional<HourlySeries> cf_b;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) {
    while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) field.pop_back();
    while (!field.empty() && field.front() == ' ') field.erase(field.begin());
    out.push_back(field);
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline double parse_number(const std::string& s, const std::string& where) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size() || !std::isfinite(v)) {
    throw std::invalid_argument(where + ": not a number: '" + s + "'");
  }
  return v;
}

// Reads an hourly CSV with the given header. Leap-day hours are dropped; any
// other gap, duplicate or reordering is rejected.
inline std::vector<std::vector<double>> read_hourly_csv(const std::string& path,
                                                        const std::vector<std::string>& header,
                                                        std::vector<std::int64_t>& stamps) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || split_csv_line(line) != header) {
    std::string want;
    for (const auto& h : header) want += (want.empty() ? "" : ",") + h;
    throw std::invalid_argument(path + ": expected header '" + want + "'");
  }
  std::vector<std::vector<double>> cols(header.size() - 1);
  stamps.clear();
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    const std::string where = path + ":" + std::to_string(lineno);
    if (fields.size() != header.size()) throw std::invalid_argument(where + ": wrong column count");
    const std::int64_t t = timeutil::parse_iso(fields[0]);
    if (timeutil::is_leap_day(t)) continue;
    if (!stamps.empty() && t != timeutil::next_hour(stamps.back())) {
      throw std::invalid_argument(where + ": gap or misordering at " + fields[0] +
                                  " (expected " + timeutil::format_iso(timeutil::next_hour(stamps.back())) + ")");
    }
    stamps.push_back(t);
    for (std::size_t c = 1; c < fields.size(); ++c) cols[c - 1].push_back(parse_number(fields[c], where));
  }
  if (stamps.empty()) throw std::invalid_argument(path + ": no data rows");
  return cols;
}

}  // namespace detail

inline DemandSeries read_demand_csv(const std::string& path) {
  std::vector<std::int64_t> t;
  auto cols = detail::read_hourly_csv(path, {"timestamp", "demand_a_mw", "demand_b_mw"}, t);
  return {{t, std::move(cols[0])}, {t, std::move(cols[1])}};
}

inline WindSeries read_wind_csv(const std::string& path) {
  std::string first;
  {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::getline(in, first);
  }
  std::vector<std::int64_t> t;
  if (detail::split_csv_line(first).size() == 3) {
    auto cols = detail::read_hourly_csv(path, {"timestamp", "cf_a", "cf_b"}, t);
    return {{t, std::move(cols[0])}, HourlySeries{t, std::move(cols[1])}};
  }
  auto cols = detail::read_hourly_csv(path, {"timestamp", "cf_a"}, t);
  return {{t, std::move(cols[0])}, std::nullopt};
}

// ---------------------------------------------------------------------------
// Distributions

/// Empirical joint demand: each hour deposits 1/N at (d_A, scale_b * d_B).
inline Pmf2 joint_demand_pmf(const HourlySeries& a, const HourlySeries& b, double scale_b, MW grid_step) {
  a.validate();
  b.validate();
  if (a.size() == 0) throw std::invalid_argument("joint_demand_pmf: empty series");
  if (a.timestamps != b.timestamps) throw std::invalid_argument("joint_demand_pmf: series are not aligned");
  if (!(scale_b > 0.0)) throw std::invalid_argument("joint_demand_pmf: scale must be positive");
  const auto [amin, amax] = std::minmax_element(a.values.begin(), a.values.end());
  const auto [bmin, bmax] = std::minmax_element(b.values.begin(), b.values.end());
  Pmf2 d = make_grid(*amin, *amax, scale_b * *bmin, scale_b * *bmax, grid_step);
  const double w = 1.0 / static_cast<double>(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) add_point_mass(d, a.values[k], scale_b * b.values[k], w);
  normalize_checked(d);
  return d;
}

inline void check_capacity_factors(const HourlySeries& cf) {
  for (double v : cf.values) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw std::invalid_argument("capacity factor " + std::to_string(v) + " outside [0, 1]");
    }
  }
}

/// Marginal wind power pmf for `installed` MW of capacity.
inline Pmf1 wind_power_pmf(const HourlySeries& cf, MW installed, MW grid_step) {
  cf.validate();
  if (!(installed > 0.0)) throw std::invalid_argument("wind_power_pmf: installed capacity must be positive");
  if (cf.size() == 0) throw std::invalid_argument("wind_power_pmf: empty series");
  check_capacity_factors(cf);
  Pmf1 p = make_grid(0.0, installed, grid_step);
  const double w = 1.0 / static_cast<double>(cf.size());
  for (double v : cf.values) add_point_mass(p, installed * v, w);
  normalize_checked(p);
  return p;
}

/// Conditional CDF of the Gaussian copula, P(U <= x | V = v).
inline double gaussian_copula_h(double x, double v, double rho) {
  if (rho >= 1.0) return x >= v ? 1.0 : 0.0;
  if (rho <= -1.0) return x >= 1.0 - v ? 1.0 : 0.0;
  if (rho == 0.0) return x;
  return normal::cdf((normal::quantile(x) - rho * normal::quantile(v)) / std::sqrt(1.0 - rho * rho));
}

namespace detail {

// Rescales rows and columns alternately until both marginals match `target`.
inline void fit_marginals(std::vector<double>& p, const std::vector<double>& target) {
  const std::size_t n = target.size();
  for (int iter = 0; iter < 500; ++iter) {
    double worst = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += p[i * n + j];
      worst = std::max(worst, std::abs(s - target[j]));
      if (s > 0.0) {
        for (std::size_t i = 0; i < n; ++i) p[i * n + j] *= target[j] / s;
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += p[i * n + j];
      worst = std::max(worst, std::abs(s - target[i]));
      if (s > 0.0) {
        for (std::size_t j = 0; j < n; ++j) p[i * n + j] *= target[i] / s;
      }
    }
    if (worst < 1e-15) break;
  }
}

}  // namespace detail

/// Bin-pair probabilities of a Gaussian copula for one discrete marginal used
/// on both axes. Entry (i, j) integrates h(v_j, u) - h(v_{j-1}, u) over the
/// i-th bin of u with the midpoint rule, `subdivisions` points per bin. Fewer
/// than about 32 points leave errors above 1e-4 in tail bins, where the
/// integrand has unbounded slope.
inline std::vector<double> copula_bin_pairs(const std::vector<double>& mass, double rho, int subdivisions = 64) {
  const std::size_t n = mass.size();
  std::vector<double> p(n * n, 0.0);
  if (rho == 0.0) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) p[i * n + j] = mass[i] * mass[j];
    return p;
  }
  if (rho >= 1.0) {
    for (std::size_t i = 0; i < n; ++i) p[i * n + i] = mass[i];
    return p;
  }
  std::vector<double> upper(n);  // cumulative boundary above each bin
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) upper[i] = (acc += mass[i]);
  std::vector<double> z_bound(n);
  for (std::size_t j = 0; j + 1 < n; ++j) z_bound[j] = normal::quantile(std::min(upper[j], 1.0));
  const double sd = std::sqrt(1.0 - rho * rho);
  for (std::size_t i = 0; i < n; ++i) {
    if (mass[i] == 0.0) continue;
    const double lo = upper[i] - mass[i];
    const double w = mass[i] / subdivisions;
    std::vector<double> z_mid(static_cast<std::size_t>(subdivisions));
    for (int s = 0; s < subdivisions; ++s) {
      z_mid[static_cast<std::size_t>(s)] = normal::quantile(std::clamp(lo + (s + 0.5) * w, 0.0, 1.0));
    }
    double prev = 0.0;  // integral of h(v_{j-1}, u) over the bin
    for (std::size_t j = 0; j < n; ++j) {
      double cur = mass[i];
      if (j + 1 < n) {
        cur = 0.0;
        for (double zm : z_mid) cur += normal::cdf((z_bound[j] - rho * zm) / sd);
        cur *= w;
      }
      p[i * n + j] = std::max(0.0, cur - prev);
      prev = cur;
    }
  }
  detail::fit_marginals(p, mass);
  return p;
}

/// Joint wind pmf: system A uses `marginal` (wind power for `installed_a`),
/// system B the same distribution rescaled to `installed_b`, coupled by a
/// Gaussian copula.
inline Pmf2 joint_wind_pmf(const Pmf1& marginal, const CopulaSpec& copula, MW installed_a, MW installed_b) {
  copula.validate();
  validate(marginal, 1e-9);
  if (!(installed_a > 0.0 && installed_b > 0.0)) {
    throw std::invalid_argument("joint_wind_pmf: installed capacities must be positive");
  }
  std::vector<std::size_t> idx;
  std::vector<double> mass;
  for (std::size_t k = 0; k < marginal.size(); ++k) {
    if (marginal.masses[k] > 0.0) {
      idx.push_back(k);
      mass.push_back(marginal.masses[k]);
    }
  }
  const auto pairs = copula_bin_pairs(mass, copula.rho);
  const double scale = installed_b / installed_a;
  const std::size_t n = mass.size();
  Pmf2 w = make_grid(marginal.value(idx.front()), marginal.value(idx.back()),
                     scale * marginal.value(idx.front()), scale * marginal.value(idx.back()), marginal.step);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double m = pairs[i * n + j];
      if (m > 0.0) add_point_mass(w, marginal.value(idx[i]), scale * marginal.value(idx[j]), m);
    }
  }
  normalize_checked(w);
  return w;
}

/// Joint wind pmf from directly observed capacity-factor pairs.
inline Pmf2 joint_wind_pmf_direct(const HourlySeries& cf_a, const HourlySeries& cf_b, MW installed_a,
                                  MW installed_b, MW grid_step) {
  check_capacity_factors(cf_a);
  check_capacity_factors(cf_b);
  if (!(installed_a > 0.0 && installed_b > 0.0)) {
    throw std::invalid_argument("joint_wind_pmf_direct: installed capacities must be positive");
  }
  HourlySeries a{cf_a.timestamps, {}}, b{cf_b.timestamps, {}};
  for (double v : cf_a.values) a.values.push_back(v * installed_a);
  for (double v : cf_b.values) b.values.push_back(v * installed_b);
  return joint_demand_pmf(a, b, 1.0, grid_step);
}

// ---------------------------------------------------------------------------
// Synthetic series

/// Shape parameters for the synthetic two-system data set (MW unless noted).
struct SynthProfile {
  std::int64_t start = timeutil::to_epoch(2010, 1, 1);
  MW demand_a_base = 26000, demand_a_seasonal = 6500, demand_a_diurnal = 12000;
  MW demand_a_weekend = 2500, demand_a_weather = 2500, demand_a_noise = 700;
  MW demand_b_base = 42000, demand_b_seasonal = 14000, demand_b_diurnal = 14000;
  MW demand_b_weekend = 4000, demand_b_weather = 5000, demand_b_noise = 1200;
  double wind_persistence = 0.985;  // hourly AR(1) coefficient of the latent wind state
  double wind_latent_corr = 0.55;   // latent correlation between the two wind series
};

struct SyntheticData {
  std::vector<std::int64_t> timestamps;
  HourlySeries demand_a, demand_b, cf_a, cf_b;
};

/// Deterministic hourly demand and capacity-factor series with seasonal,
/// weekly and diurnal structure plus autocorrelated noise.
inline SyntheticData synth_series(std::uint64_t seed, std::size_t length, const SynthProfile& prof = {}) {
  if (length == 0) throw std::invalid_argument("synth_series: length must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const auto ar = [&](double& state, double phi) {
    state = phi * state + std::sqrt(1.0 - phi * phi) * gauss(rng);
    return state;
  };
  double cold = 0.0, noise_a = 0.0, noise_b = 0.0, wind_a = 0.0, wind_b = 0.0;

  SyntheticData out;
  std::int64_t t = prof.start;
  if (timeutil::is_leap_day(t)) t = timeutil::next_hour(t - timeutil::kHour);
  for (std::size_t k = 0; k < length; ++k, t = timeutil::next_hour(t)) {
    using namespace std::chrono;
    const sys_days day_start{days{t / 86400}};
    const auto ymd = year_month_day{day_start};
    const double doy = static_cast<double>((day_start - sys_days{ymd.year() / January / 1}).count());
    const double hour = static_cast<double>(t % 86400) / 3600.0;
    const bool weekend = weekday{day_start}.c_encoding() % 6 == 0;

    const double season = std::cos(2.0 * M_PI * (doy - 15.0) / 365.25);
    const double diurnal = 0.5 * (1.0 - std::cos(2.0 * M_PI * (hour - 4.0) / 24.0)) +
                           0.35 * std::exp(-(hour - 18.0) * (hour - 18.0) / 6.0);
    ar(cold, 0.998);
    ar(noise_a, 0.9);
    ar(noise_b, 0.9);
    const double za = ar(wind_a, prof.wind_persistence);
    const double own_b = ar(wind_b, prof.wind_persistence);
    const double zb = prof.wind_latent_corr * za + std::sqrt(1.0 - prof.wind_latent_corr * prof.wind_latent_corr) * own_b;

    const double da = prof.demand_a_base + prof.demand_a_seasonal * season +
                      prof.demand_a_diurnal * diurnal * (0.85 + 0.15 * season) -
                      (weekend ? prof.demand_a_weekend : 0.0) + prof.demand_a_weather * cold +
                      prof.demand_a_noise * noise_a;
    const double db = prof.demand_b_base + prof.demand_b_seasonal * season + prof.demand_b_diurnal * diurnal -
                      (weekend ? prof.demand_b_weekend : 0.0) + prof.demand_b_weather * cold +
                      prof.demand_b_noise * noise_b;
    const auto cf = [&](double z) {
      return std::clamp(0.92 * std::pow(normal::cdf(1.1 * z + 0.35 * season - 0.45), 1.4), 0.0, 1.0);
    };

    out.timestamps.push_back(t);
    out.demand_a.values.push_back(std::round(da));
    out.demand_b.values.push_back(std::round(db));
    out.cf_a.values.push_back(std::round(cf(za) * 1e6) / 1e6);
    out.cf_b.values.push_back(std::round(cf(zb) * 1e6) / 1e6);
  }
  for (HourlySeries* s : {&out.demand_a, &out.demand_b, &out.cf_a, &out.cf_b}) s->timestamps = out.timestamps;
  return out;
}

inline void write_demand_csv(const std::string& path, const SyntheticData& d) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "timestamp,demand_a_mw,demand_b_mw\n";
  char buf[96];
  for (std::size_t k = 0; k < d.timestamps.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%s,%.0f,%.0f\n", timeutil::format_iso(d.timestamps[k]).c_str(),
                  d.demand_a.values[k], d.demand_b.values[k]);
    out << buf;
  }
  if (!out) throw std::runtime_error("failed writing " + path);
}

inline void write_wind_csv(const std::string& path, const SyntheticData& d) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "timestamp,cf_a,cf_b\n";
  char buf[96];
  for (std::size_t k = 0; k < d.timestamps.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%s,%.6f,%.6f\n", timeutil::format_iso(d.timestamps[k]).c_str(),
                  d.cf_a.values[k], d.cf_b.values[k]);
    out << buf;
  }
  if (!out) throw std::runtime_error("failed writing " + path);
}

}  // namespace intercap
