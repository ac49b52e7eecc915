#pragma once

// Brute-force verifiers. Nothing here calls the region integrals or the
// convolution code of the engine: policies are evaluated by simulating the
// interconnector flow outcome by outcome, region integrals by subcell sampling
// and margins by enumerating the product measure.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "intercap/gridpmf.hpp"
#include "intercap/risk_engine.hpp"

namespace intercap::oracle {

struct Outcome {
  MW m_a = 0.0;
  MW m_b = 0.0;
  double prob = 0.0;
};

/// Margin outcomes, each standing for a uniform square cell of `cell_width`.
struct DiscreteMargin {
  std::vector<Outcome> outcomes;
  MW cell_width = 0.0;
};

class BoundaryStraddle : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {

// Post-flow margins (own, other) after the interconnector of capacity c has
// been operated under `policy`. Positive flow goes from `own` to `other`.
struct Flows {
  double own;
  double other;
};

inline double clamp_flow(double f, double c) { return f < -c ? -c : (f > c ? c : f); }

inline Flows operate(double own, double oth, double c, Policy policy, System sys) {
  double f = 0.0;  // export from own
  const bool prioritize_own = (policy == Policy::AssistA && sys == System::A) ||
                              (policy == Policy::AssistB && sys == System::B);
  const bool prioritize_other = (policy == Policy::AssistA && sys == System::B) ||
                                (policy == Policy::AssistB && sys == System::A);
  if (prioritize_own) {
    if (own < 0.0) f = own;  // import the whole deficit, whatever it does to the other side
    else if (oth < 0.0) f = std::min(own, -oth);
  } else if (prioritize_other) {
    if (oth < 0.0) f = -oth;
    else if (own < 0.0) f = -std::min(oth, -own);
  } else if (policy == Policy::Veto) {
    // Only a system in surplus exports, and never beyond its surplus.
    if (own < 0.0 && oth > 0.0) f = -std::min(oth, -own);
    else if (oth < 0.0 && own > 0.0) f = std::min(own, -oth);
  } else {
    // Share: if the total is adequate, cover every deficit; otherwise split
    // the total deficit equally (any fixed positive weights give the same
    // shortfall events).
    const double total = own + oth;
    if (total >= 0.0) {
      if (own < 0.0) f = own;
      else if (oth < 0.0) f = -oth;
    } else {
      f = own - 0.5 * total;
    }
  }
  f = clamp_flow(f, c);
  return {own - f, oth + f};
}

}  // namespace detail

/// Shortfall probability of `sys` under `policy` by per-outcome flow
/// simulation. Refuses margins whose cells straddle a boundary that would
/// matter for (l, c).
inline double policy_lolp(const DiscreteMargin& dm, LoadPair l, MW c, Policy policy, System sys) {
  const double w = 0.5 * dm.cell_width;
  const double own_l = sys == System::A ? l.a : l.b;
  const double oth_l = sys == System::A ? l.b : l.a;
  double p = 0.0;
  for (const auto& o : dm.outcomes) {
    const double own = (sys == System::A ? o.m_a : o.m_b) - own_l;
    const double oth = (sys == System::A ? o.m_b : o.m_a) - oth_l;
    for (double line : {own + c, own, own - c}) {
      if (std::abs(line) < w) throw BoundaryStraddle("outcome cell straddles an own-margin boundary");
    }
    if (std::abs(own + oth) < 2.0 * w) throw BoundaryStraddle("outcome cell straddles the total-margin boundary");
    const auto after = detail::operate(own, oth, c, policy, sys);
    if (after.own < 0.0) p += o.prob;
  }
  return p;
}

/// Integral of the cell density over { m_own <= a, m_own + m_other <= a + b }
/// by splitting every cell into refinement^2 subcells tested at their centers.
inline double phi(const Pmf2& m, double a, double b, int refinement, System own = System::A) {
  if (refinement < 2) throw std::invalid_argument("oracle::phi: refinement must be at least 2");
  const double d = m.step, sub = d / refinement;
  const double s = a + b;
  const double w = 1.0 / (static_cast<double>(refinement) * refinement);
  double total = 0.0;
  for (std::size_t i = 0; i < m.n_a; ++i) {
    for (std::size_t j = 0; j < m.n_b; ++j) {
      const double mass = m.at(i, j);
      if (mass == 0.0) continue;
      int inside = 0;
      for (int p = 0; p < refinement; ++p) {
        const double u = m.value_a(i) - 0.5 * d + (p + 0.5) * sub;
        for (int q = 0; q < refinement; ++q) {
          const double t = m.value_b(j) - 0.5 * d + (q + 0.5) * sub;
          const double mo = own == System::A ? u : t;
          if (mo <= a && (b == kInf || u + t <= s)) ++inside;
        }
      }
      total += mass * inside * w;
    }
  }
  return total;
}

/// Exact margin G_A x G_B + W - D - offsets, listed outcome by outcome.
inline DiscreteMargin margin(const Pmf1& gen_a, const Pmf1& gen_b, const Pmf2& wind, const Pmf2& demand,
                             LoadPair offsets = {}, std::size_t max_outcomes = 1000000) {
  const auto support1 = [](const Pmf1& p) {
    std::vector<Outcome> s;
    for (std::size_t k = 0; k < p.size(); ++k)
      if (p.masses[k] != 0.0) s.push_back({p.origin + k * p.step, 0.0, p.masses[k]});
    return s;
  };
  const auto support2 = [](const Pmf2& p) {
    std::vector<Outcome> s;
    for (std::size_t i = 0; i < p.n_a; ++i)
      for (std::size_t j = 0; j < p.n_b; ++j)
        if (p.at(i, j) != 0.0) s.push_back({p.origin_a + i * p.step, p.origin_b + j * p.step, p.at(i, j)});
    return s;
  };
  const auto ga = support1(gen_a), gb = support1(gen_b), ws = support2(wind), ds = support2(demand);
  const double count = static_cast<double>(ga.size()) * gb.size() * ws.size() * ds.size();
  if (count > static_cast<double>(max_outcomes)) {
    throw std::invalid_argument("oracle::margin: " + std::to_string(count) + " outcomes exceeds the limit");
  }
  DiscreteMargin dm;
  dm.cell_width = wind.step;
  for (const auto& x : ga)
    for (const auto& y : gb)
      for (const auto& w : ws)
        for (const auto& dd : ds)
          dm.outcomes.push_back({x.m_a + w.m_a - dd.m_a - offsets.a, y.m_a + w.m_b - dd.m_b - offsets.b,
                                 x.prob * y.prob * w.prob * dd.prob});
  return dm;
}

/// Accumulates on-grid outcomes into a pmf of the given step; an outcome off
/// the grid is refused rather than interpolated.
inline Pmf2 to_pmf(const DiscreteMargin& dm, MW step) {
  if (dm.outcomes.empty()) throw std::invalid_argument("oracle::to_pmf: no outcomes");
  const auto index = [step](double v) {
    const double k = std::round(v / step);
    if (std::abs(v - k * step) > 1e-9 * step) throw std::invalid_argument("oracle::to_pmf: outcome off the grid");
    return static_cast<long long>(k);
  };
  long long ia0 = index(dm.outcomes.front().m_a), ia1 = ia0;
  long long ib0 = index(dm.outcomes.front().m_b), ib1 = ib0;
  for (const auto& o : dm.outcomes) {
    ia0 = std::min(ia0, index(o.m_a));
    ia1 = std::max(ia1, index(o.m_a));
    ib0 = std::min(ib0, index(o.m_b));
    ib1 = std::max(ib1, index(o.m_b));
  }
  Pmf2 p(ia0 * step, ib0 * step, step, static_cast<std::size_t>(ia1 - ia0 + 1),
         static_cast<std::size_t>(ib1 - ib0 + 1));
  for (const auto& o : dm.outcomes) {
    p.masses[static_cast<std::size_t>(index(o.m_a) - ia0) * p.n_b + static_cast<std::size_t>(index(o.m_b) - ib0)] +=
        o.prob;
  }
  return p;
}

/// A random margin whose cells never straddle a boundary relevant to (l, c).
///
/// Outcomes sit on multiples of 4 MW with unit cells; l_A and l_B are both
/// 1 or both 3 (mod 4) and c is even, so own-margin boundaries stay an odd
/// distance and the total-margin boundary two units from every outcome.
struct SafeCase {
  DiscreteMargin margin;
  Pmf2 pmf;
  LoadPair load;
  MW capacity = 0.0;
};

enum class CapacityKind { Zero, Small, Large };

inline SafeCase random_safe_case(std::mt19937_64& rng, CapacityKind kind, int max_outcomes = 10) {
  std::uniform_int_distribution<int> count(1, max_outcomes), coord(-6, 6), lattice(-5, 5);
  std::uniform_real_distribution<double> weight(0.05, 1.0);
  SafeCase sc;
  sc.margin.cell_width = 1.0;
  const int n = count(rng);
  double total = 0.0;
  for (int k = 0; k < n; ++k) {
    const double w = weight(rng);
    sc.margin.outcomes.push_back({4.0 * coord(rng), 4.0 * coord(rng), w});
    total += w;
  }
  for (auto& o : sc.margin.outcomes) o.prob /= total;
  sc.pmf = Pmf2(-24.0, -24.0, 1.0, 49, 49);
  for (const auto& o : sc.margin.outcomes) add_point_mass(sc.pmf, o.m_a, o.m_b, o.prob);
  const double residue = rng() % 2 ? 1.0 : 3.0;
  sc.load = {4.0 * lattice(rng) + residue, 4.0 * lattice(rng) + residue};
  switch (kind) {
    case CapacityKind::Zero: sc.capacity = 0.0; break;
    case CapacityKind::Small: sc.capacity = 2.0 * std::uniform_int_distribution<int>(1, 3)(rng); break;
    case CapacityKind::Large: sc.capacity = 2.0 * std::uniform_int_distribution<int>(12, 30)(rng); break;
  }
  return sc;
}

}  // namespace intercap::oracle
