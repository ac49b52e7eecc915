#pragma once

// Per-system calibration to a LOLE standard without interconnection: add
// generator sets until the standard is met, then raise a constant load offset
// until the LOLE equals the standard.

#include <cmath>
#include <stdexcept>
#include <string>

#include "intercap/fleet.hpp"
#include "intercap/gridpmf.hpp"
#include "intercap/risk_engine.hpp"

namespace intercap {

class CalibrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Everything needed to evaluate one system's isolated LOLE. `wind` and
/// `demand` are the system's marginals on the joint-grid step.
struct IsolatedSystem {
  GeneratorSet generator_set;
  Pmf1 wind;
  Pmf1 demand;
  MW step_1d = 10.0;
  MW step_2d = 50.0;
  double trim_eps = 1e-14;
};

/// Fleet capacity pmf moved from the generation grid onto the joint grid,
/// with negligible tails removed.
inline Pmf1 to_joint_grid(const Pmf1& gen_fine, MW step_2d, double trim_eps) {
  Pmf1 g = regrid(gen_fine, step_2d);
  return trim_eps > 0.0 ? trim_tails(g, trim_eps) : g;
}

inline Pmf1 generation_pmf(const GeneratorSet& set, int n_sets, MW step_1d, MW step_2d, double trim_eps) {
  return to_joint_grid(fleet_pmf({set, n_sets, 0.0}, step_1d), step_2d, trim_eps);
}

/// Probability that the piecewise-constant density of `p` lies below `x`.
inline double cell_cdf(const Pmf1& p, MW x) {
  const double h = 0.5 * p.step;
  double sum = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double lo = p.value(k) - h;
    if (!(lo < x)) break;
    const double f = p.value(k) + h <= x ? 1.0 : (x - lo) / p.step;
    sum += p.masses[k] * f;
  }
  return sum;
}

/// LOLE of a system with generation already combined with wind (`gen_wind`).
inline double isolated_lole_from(const Pmf1& gen_wind, const Pmf1& demand, MW load_offset) {
  const Pmf1 margin = convolve1(gen_wind, reflect1(shift(demand, load_offset)));
  return kHoursPerYear * cell_cdf(margin, 0.0);
}

inline double isolated_lole(const IsolatedSystem& sys, int n_sets, MW load_offset) {
  const Pmf1 g = generation_pmf(sys.generator_set, n_sets, sys.step_1d, sys.step_2d, sys.trim_eps);
  return isolated_lole_from(convolve1(g, sys.wind), sys.demand, load_offset);
}

namespace detail {

inline bool meets(double lole, double target) { return lole < target * (1.0 - 1e-9); }

}  // namespace detail

/// Smallest number of generator sets whose isolated LOLE is below `target`.
inline int build_portfolio(const IsolatedSystem& sys, double target, int max_sets = 500) {
  if (!(target > 0.0)) throw std::invalid_argument("build_portfolio: target must be positive");
  Pmf1 fine = Pmf1::delta(0.0, sys.step_1d);
  double prev = kInf;
  for (int n = 1; n <= max_sets; ++n) {
    fine = add_sets(std::move(fine), sys.generator_set, 1);
    const Pmf1 g = to_joint_grid(fine, sys.step_2d, sys.trim_eps);
    const double lole = isolated_lole_from(convolve1(g, sys.wind), sys.demand, 0.0);
    if (lole > prev + 1e-9) {
      throw CalibrationError("LOLE increased from " + std::to_string(prev) + " to " + std::to_string(lole) +
                             " h/yr when adding set " + std::to_string(n));
    }
    if (detail::meets(lole, target)) return n;
    prev = lole;
  }
  throw CalibrationError("LOLE target " + std::to_string(target) + " h/yr not met with " +
                         std::to_string(max_sets) + " generator sets");
}

/// Constant load offset in [0, one set capacity] bringing the isolated LOLE to `target` within `tol`.
inline MW solve_load_offset(const IsolatedSystem& sys, int n_sets, double target, double tol = 1e-3) {
  const Pmf1 g = generation_pmf(sys.generator_set, n_sets, sys.step_1d, sys.step_2d, sys.trim_eps);
  const Pmf1 gw = convolve1(g, sys.wind);
  const auto lole = [&](MW off) { return isolated_lole_from(gw, sys.demand, off); };
  MW lo = 0.0, hi = sys.generator_set.set_capacity();
  double r_lo = lole(lo), r_hi = lole(hi);
  if (std::abs(r_lo - target) <= tol) return 0.0;
  if (!(r_lo < target) || !(r_hi > target)) {
    throw CalibrationError("load offset bracket [0, " + std::to_string(hi) + "] MW gives LOLE [" +
                           std::to_string(r_lo) + ", " + std::to_string(r_hi) + "] h/yr, which does not contain " +
                           std::to_string(target));
  }
  for (int iter = 0; iter < 60; ++iter) {
    const MW mid = 0.5 * (lo + hi);
    const double r = lole(mid);
    if (r < r_lo - 1e-12 || r > r_hi + 1e-12) {
      throw CalibrationError("LOLE is not monotone in the load offset near " + std::to_string(mid) + " MW");
    }
    if (std::abs(r - target) <= tol) return mid;
    if (r < target) {
      lo = mid;
      r_lo = r;
    } else {
      hi = mid;
      r_hi = r;
    }
  }
  throw CalibrationError("load offset bisection did not converge");
}

}  // namespace intercap
