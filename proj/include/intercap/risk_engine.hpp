#pragma once

// Joint margin assembly and interconnection-adjusted loss-of-load risk.
//
// The margin M = G + W - D is held as a 2D pmf whose masses are treated as
// uniform densities over step x step cells. All shortfall probabilities are
// integrals of that density over regions
//
//   R(a, b) = { m_own <= a } n { m_own + m_other <= a + b },
//
// evaluated exactly by clipping cells against the two half-planes.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "intercap/gridpmf.hpp"

namespace intercap {

inline constexpr double kHoursPerYear = 8760.0;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class System { A, B };

inline System other(System s) { return s == System::A ? System::B : System::A; }

enum class Policy { Veto, Share, AssistA, AssistB };

inline constexpr std::array<Policy, 4> kAllPolicies{Policy::Veto, Policy::Share, Policy::AssistA,
                                                    Policy::AssistB};

inline std::string to_string(Policy p) {
  switch (p) {
    case Policy::Veto: return "veto";
    case Policy::Share: return "share";
    case Policy::AssistA: return "assist-a";
    case Policy::AssistB: return "assist-b";
  }
  return "?";
}

inline Policy parse_policy(const std::string& s) {
  for (Policy p : kAllPolicies) {
    if (to_string(p) == s) return p;
  }
  throw std::invalid_argument("unknown policy '" + s + "' (expected veto, share, assist-a or assist-b)");
}

/// The same policy with system labels exchanged.
inline Policy mirrored(Policy p) {
  if (p == Policy::AssistA) return Policy::AssistB;
  if (p == Policy::AssistB) return Policy::AssistA;
  return p;
}

/// Load additions (l_A, l_B) in MW.
struct LoadPair {
  MW a = 0.0;
  MW b = 0.0;
};

/// Available interconnection capacity levels with their probabilities.
struct InterconnectionSpec {
  struct Level {
    MW capacity = 0.0;
    double probability = 1.0;
  };
  std::vector<Level> levels{{0.0, 1.0}};

  MW max_capacity() const { return levels.empty() ? 0.0 : levels.back().capacity; }

  MW mean_capacity() const {
    MW m = 0.0;
    for (const auto& l : levels) m += l.capacity * l.probability;
    return m;
  }

  void validate() const {
    if (levels.empty()) throw std::invalid_argument("InterconnectionSpec: no levels");
    double total = 0.0;
    for (std::size_t k = 0; k < levels.size(); ++k) {
      if (!(levels[k].capacity >= 0.0)) throw std::invalid_argument("InterconnectionSpec: negative capacity");
      if (!(levels[k].probability >= 0.0)) throw std::invalid_argument("InterconnectionSpec: negative probability");
      if (k > 0 && !(levels[k].capacity > levels[k - 1].capacity)) {
        throw std::invalid_argument("InterconnectionSpec: capacities must be distinct and ascending");
      }
      total += levels[k].probability;
    }
    if (std::abs(total - 1.0) > 1e-12) {
      throw std::invalid_argument("InterconnectionSpec: probabilities sum to " + std::to_string(total));
    }
  }
};

/// `n_lines` independent lines of `per_line` MW, each available with probability `availability`.
inline InterconnectionSpec binomial_lines(int n_lines, MW per_line, double availability) {
  if (n_lines < 0) throw std::invalid_argument("binomial_lines: negative line count");
  if (!(availability >= 0.0 && availability <= 1.0)) {
    throw std::invalid_argument("binomial_lines: availability must lie in [0, 1]");
  }
  if (n_lines > 0 && !(per_line > 0.0)) throw std::invalid_argument("binomial_lines: per-line capacity must be positive");
  InterconnectionSpec ic;
  ic.levels.clear();
  double binom = 1.0;  // C(n, k)
  for (int k = 0; k <= n_lines; ++k) {
    if (k > 0) binom = binom * (n_lines - k + 1) / k;
    const double q = binom * std::pow(availability, k) * std::pow(1.0 - availability, n_lines - k);
    if (q > 0.0 || n_lines == 0) ic.levels.push_back({k * per_line, q});
  }
  return ic;
}

struct ShortfallDecomposition {
  double base = 0.0;  // shortfall even with the full interconnector importing
  double imp = 0.0;   // shortfall because imports are not available
  double exp = 0.0;   // shortfall caused by forced exports
};

/// Loss of load expectation per system, hours per year.
struct RiskResult {
  double r_a = 0.0;
  double r_b = 0.0;

  double operator[](System s) const { return s == System::A ? r_a : r_b; }
};

namespace detail {

// Area of [x0,x1] x [y0,y1] intersected with {u <= a} and {u + t <= s}.
inline double clipped_area(double x0, double x1, double y0, double y1, double a, double s) {
  const double xr = std::min(x1, a);
  if (!(xr > x0)) return 0.0;
  const double h = y1 - y0;
  if (s == kInf) return (xr - x0) * h;
  // Integral over u of clamp(s - y0 - u, 0, h); G is its antiderivative in z = s - y0 - u.
  const auto g = [h](double z) {
    if (z <= 0.0) return 0.0;
    if (z <= h) return 0.5 * z * z;
    return 0.5 * h * h + h * (z - h);
  };
  const double c = s - y0;
  return g(c - x0) - g(c - xr);
}

}  // namespace detail

/// Joint margin distribution with precomputed column sums for fast region
/// integrals. Immutable after construction.
class MarginDist {
 public:
  explicit MarginDist(Pmf2 f_m) {
    validate(f_m, 1e-9);
    Pmf2 t = transpose(f_m);
    a_ = Oriented(std::move(f_m));
    b_ = Oriented(std::move(t));
  }

  const Pmf2& pmf() const { return a_.pmf; }
  MW step() const { return a_.pmf.step; }

  /// Margin with the A and B labels exchanged.
  MarginDist mirrored() const { return MarginDist(b_.pmf); }

  /// Probability of { m_own <= a, m_own + m_other <= a + b } for `own`;
  /// b = +inf drops the second constraint.
  double phi(double a, double b, System own = System::A) const {
    return oriented(own).phi(a, b == kInf ? kInf : a + b);
  }

  /// Reference path: clips every cell individually.
  double phi_direct(double a, double b, System own = System::A) const {
    return oriented(own).phi_direct(a, b == kInf ? kInf : a + b);
  }

  MW min_value(System s) const { return oriented(s).pmf.origin_a; }
  MW max_value(System s) const { return oriented(s).pmf.value_a(oriented(s).pmf.n_a - 1); }

 private:
  // Axis 0 is the system of interest ("own"), axis 1 the other system.
  struct Oriented {
    Pmf2 pmf;
    std::vector<double> cum;         // inclusive cumulative sums along axis 1
    std::vector<double> col_prefix;  // prefix sums of column totals, size n_a + 1

    Oriented() = default;
    explicit Oriented(Pmf2 p) : pmf(std::move(p)), cum(pmf.masses.size()), col_prefix(pmf.n_a + 1, 0.0) {
      for (std::size_t i = 0; i < pmf.n_a; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < pmf.n_b; ++j) cum[i * pmf.n_b + j] = (acc += pmf.at(i, j));
        col_prefix[i + 1] = col_prefix[i] + acc;
      }
    }

    double phi(double a, double s) const {
      const double d = pmf.step, h = 0.5 * d;
      const std::size_t na = pmf.n_a, nb = pmf.n_b;
      double sum = 0.0;
      if (s == kInf) {
        const double whole = std::floor((a - h - pmf.origin_a) / d) - 1.0;
        std::size_t i = 0;
        if (whole >= 0.0) {
          i = whole >= static_cast<double>(na) ? na : static_cast<std::size_t>(whole) + 1;
          sum = col_prefix[i];
        }
        for (; i < na; ++i) {
          const double x0 = pmf.value_a(i) - h, x1 = pmf.value_a(i) + h;
          if (!(x0 < a)) break;
          const double fx = x1 <= a ? 1.0 : (a - x0) / d;
          sum += fx * (col_prefix[i + 1] - col_prefix[i]);
        }
        return sum;
      }
      for (std::size_t i = 0; i < na; ++i) {
        const double x0 = pmf.value_a(i) - h, x1 = pmf.value_a(i) + h;
        if (!(x0 < a)) break;
        const double xr = std::min(x1, a);
        const double fx = x1 <= a ? 1.0 : (xr - x0) / d;
        // Cells j <= full lie entirely below the diagonal; cells j >= none entirely above.
        const double full = std::floor((s - xr - h - pmf.origin_b) / d) - 1.0;
        const double none = std::ceil((s - x0 + h - pmf.origin_b) / d) + 1.0;
        long long jf = full < -1.0 ? -1 : static_cast<long long>(std::min(full, static_cast<double>(nb - 1)));
        long long jn = none < 0.0 ? 0 : static_cast<long long>(std::min(none, static_cast<double>(nb)));
        const double* row = &cum[i * nb];
        if (jf >= 0) sum += fx * row[jf];
        for (long long j = jf + 1; j < jn; ++j) {
          const double m = pmf.at(i, static_cast<std::size_t>(j));
          if (m == 0.0) continue;
          const double y = pmf.value_b(static_cast<std::size_t>(j));
          sum += m * detail::clipped_area(x0, x1, y - h, y + h, a, s) / (d * d);
        }
      }
      return sum;
    }

    double phi_direct(double a, double s) const {
      const double d = pmf.step, h = 0.5 * d;
      double sum = 0.0;
      for (std::size_t i = 0; i < pmf.n_a; ++i) {
        const double x = pmf.value_a(i);
        for (std::size_t j = 0; j < pmf.n_b; ++j) {
          const double m = pmf.at(i, j);
          if (m == 0.0) continue;
          const double y = pmf.value_b(j);
          sum += m * detail::clipped_area(x - h, x + h, y - h, y + h, a, s) / (d * d);
        }
      }
      return sum;
    }
  };

  const Oriented& oriented(System s) const { return s == System::A ? a_ : b_; }

  Oriented a_;
  Oriented b_;
};

/// f_M = f_GA * f_GB * f_W * f_-D, with the constant load offsets added to
/// demand. A positive `trim_eps` drops outer rows and columns holding at most
/// that much mass in total.
inline MarginDist build_margin(const Pmf1& gen_a, const Pmf1& gen_b, const Pmf2& wind, const Pmf2& demand,
                               LoadPair load_offsets = {}, double trim_eps = 0.0) {
  detail::require_same_step(gen_a.step, wind.step, "build_margin");
  detail::require_same_step(gen_b.step, wind.step, "build_margin");
  detail::require_same_step(demand.step, wind.step, "build_margin");
  const Pmf2 neg_demand = reflect2(shift(demand, load_offsets.a, load_offsets.b));
  Pmf2 m = convolve2(convolve2(outer(gen_a, gen_b), wind), neg_demand);
  if (trim_eps > 0.0) m = trim_tails(m, trim_eps);
  normalize_checked(m);
  return MarginDist(std::move(m));
}

namespace detail {

inline double clamp_tiny(double x) {
  if (x < -1e-12) throw std::logic_error("shortfall decomposition term is negative: " + std::to_string(x));
  return std::max(0.0, x);
}

// phi_ll = phi(l_own, l_other) may be passed in when already known.
inline ShortfallDecomposition decompose(const MarginDist& m, System own, MW l_own, MW l_other, MW c,
                                        double phi_ll) {
  ShortfallDecomposition d;
  d.base = m.phi(l_own - c, kInf, own);
  if (c == 0.0) return d;
  d.imp = clamp_tiny(phi_ll - m.phi(l_own - c, l_other + c, own));
  d.exp = clamp_tiny(m.phi(l_own + c, l_other - c, own) - phi_ll);
  return d;
}

}  // namespace detail

/// Base, import and export shortfall contributions for one system at a fixed
/// interconnector capacity `c`.
inline ShortfallDecomposition shortfall_decomposition(const MarginDist& m, LoadPair l, MW c, System sys) {
  if (!(c >= 0.0)) throw std::invalid_argument("shortfall_decomposition: capacity must be non-negative");
  const MW own = sys == System::A ? l.a : l.b;
  const MW oth = sys == System::A ? l.b : l.a;
  return detail::decompose(m, sys, own, oth, c, c == 0.0 ? 0.0 : m.phi(own, oth, sys));
}

/// Shortfall probability of `sys` under `policy`.
inline double policy_lolp(const ShortfallDecomposition& d, Policy policy, System sys) {
  const bool assists_own = (policy == Policy::AssistA && sys == System::A) ||
                           (policy == Policy::AssistB && sys == System::B);
  if (assists_own) return d.base;
  if (policy == Policy::Veto) return d.base + d.imp;
  return d.base + d.imp + d.exp;
}

/// Interconnection-adjusted LOLE for load additions `l`.
inline RiskResult adjusted_risk(const MarginDist& m, LoadPair l, const InterconnectionSpec& ic, Policy policy) {
  RiskResult r;
  for (System sys : {System::A, System::B}) {
    const MW own = sys == System::A ? l.a : l.b;
    const MW oth = sys == System::A ? l.b : l.a;
    double phi_ll = -1.0;
    double lolp = 0.0;
    for (const auto& level : ic.levels) {
      if (level.probability == 0.0) continue;
      if (level.capacity > 0.0 && phi_ll < 0.0) phi_ll = m.phi(own, oth, sys);
      const auto d = detail::decompose(m, sys, own, oth, level.capacity, phi_ll);
      lolp += level.probability * policy_lolp(d, policy, sys);
    }
    (sys == System::A ? r.r_a : r.r_b) = kHoursPerYear * lolp;
  }
  return r;
}

/// LOLE of each system without interconnection.
inline RiskResult baseline_risk(const MarginDist& m) {
  return {kHoursPerYear * m.phi(0.0, kInf, System::A), kHoursPerYear * m.phi(0.0, kInf, System::B)};
}

}  // namespace intercap
