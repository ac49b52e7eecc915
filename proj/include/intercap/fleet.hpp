#pragma once

// Two-state dispatchable generation and per-system available-capacity pmfs.

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "intercap/gridpmf.hpp"

namespace intercap {

struct UnitClass {
  MW capacity = 0.0;
  double availability = 1.0;
  int count = 1;
};

/// One characteristic set of units; whole sets are added to a system.
struct GeneratorSet {
  std::vector<UnitClass> units;

  MW set_capacity() const {
    MW c = 0.0;
    for (const auto& u : units) c += u.capacity * u.count;
    return c;
  }

  MW mean_available() const {
    MW c = 0.0;
    for (const auto& u : units) c += u.capacity * u.availability * u.count;
    return c;
  }

  void validate() const {
    if (units.empty()) throw std::invalid_argument("GeneratorSet: no unit classes");
    for (const auto& u : units) {
      if (!(u.capacity > 0.0)) throw std::invalid_argument("UnitClass: capacity must be positive");
      if (!(u.availability >= 0.0 && u.availability <= 1.0)) {
        throw std::invalid_argument("UnitClass: availability must lie in [0, 1]");
      }
      if (u.count < 0) throw std::invalid_argument("UnitClass: count must be non-negative");
    }
  }
};

struct FleetSpec {
  GeneratorSet generator_set;
  int n_sets = 1;
  MW load_offset = 0.0;  // constant demand addition, applied by the risk engine
};

namespace detail {

// In-place convolution with the two-point pmf {0: 1-a, shift*step: a}.
inline void add_two_state_unit(std::vector<double>& m, std::size_t shift, double a) {
  const std::size_t n = m.size();
  m.resize(n + shift, 0.0);
  for (std::size_t k = n + shift; k-- > 0;) {
    const double stay = k < n ? m[k] * (1.0 - a) : 0.0;
    const double moved = k >= shift ? m[k - shift] * a : 0.0;
    m[k] = stay + moved;
  }
}

inline std::size_t grid_cells(MW capacity, MW step) {
  const double r = capacity / step;
  const double k = std::round(r);
  if (std::abs(r - k) > 1e-9) {
    throw std::invalid_argument("unit capacity " + std::to_string(capacity) +
                                " MW is not a multiple of the " + std::to_string(step) +
                                " MW grid step; choose a grid step that divides every unit size");
  }
  return static_cast<std::size_t>(k);
}

}  // namespace detail

/// Available capacity of `n_sets` copies of `set` with independent two-state
/// units, built by convolving unit pmfs one at a time onto `base`.
inline Pmf1 add_sets(Pmf1 base, const GeneratorSet& set, int n_sets) {
  set.validate();
  if (n_sets < 0) throw std::invalid_argument("add_sets: negative set count");
  for (const auto& u : set.units) detail::grid_cells(u.capacity, base.step);
  for (int s = 0; s < n_sets; ++s) {
    for (const auto& u : set.units) {
      const std::size_t cells = detail::grid_cells(u.capacity, base.step);
      for (int c = 0; c < u.count; ++c) detail::add_two_state_unit(base.masses, cells, u.availability);
    }
  }
  return base;
}

inline Pmf1 fleet_pmf(const FleetSpec& fleet, MW grid_step) {
  if (fleet.n_sets < 1) throw std::invalid_argument("fleet_pmf: n_sets must be at least 1");
  return add_sets(Pmf1::delta(0.0, grid_step), fleet.generator_set, fleet.n_sets);
}

}  // namespace intercap
