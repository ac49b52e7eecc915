#pragma once

// Independent reference computations and random-input helpers for tests.

#include <algorithm>
#include <cmath>
#include <random>
#include <utility>
#include <vector>

#include "intercap/gridpmf.hpp"

namespace testsupport {

using intercap::MW;
using intercap::Pmf1;
using intercap::Pmf2;

inline std::vector<double> random_masses(std::mt19937_64& rng, std::size_t n, double zero_prob = 0.0) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> m(n);
  double total = 0.0;
  for (auto& x : m) {
    x = u(rng) < zero_prob ? 0.0 : u(rng);
    total += x;
  }
  if (total == 0.0) {
    m[0] = 1.0;
    total = 1.0;
  }
  for (auto& x : m) x /= total;
  return m;
}

inline Pmf1 random_pmf1(std::mt19937_64& rng, std::size_t n, MW step, long long origin_cells = 0) {
  return Pmf1(static_cast<double>(origin_cells) * step, step, random_masses(rng, n));
}

inline Pmf2 random_pmf2(std::mt19937_64& rng, std::size_t na, std::size_t nb, MW step, long long oa = 0,
                        long long ob = 0) {
  Pmf2 p(static_cast<double>(oa) * step, static_cast<double>(ob) * step, step, na, nb);
  p.masses = random_masses(rng, na * nb, 0.2);
  return p;
}

/// Direct quadruple-loop 2D convolution, returned as (origin_a, origin_b, n_a, n_b, masses).
inline Pmf2 direct_convolve2(const Pmf2& p, const Pmf2& q) {
  Pmf2 r(p.origin_a + q.origin_a, p.origin_b + q.origin_b, p.step, p.n_a + q.n_a - 1, p.n_b + q.n_b - 1);
  for (std::size_t i = 0; i < p.n_a; ++i)
    for (std::size_t j = 0; j < p.n_b; ++j)
      for (std::size_t k = 0; k < q.n_a; ++k)
        for (std::size_t l = 0; l < q.n_b; ++l) r.masses[(i + k) * r.n_b + (j + l)] += p.at(i, j) * q.at(k, l);
  return r;
}

using Point = std::pair<double, double>;

// Sutherland-Hodgman clip of a convex polygon against n.x <= c.
inline std::vector<Point> clip(const std::vector<Point>& poly, double nx, double ny, double c) {
  std::vector<Point> out;
  const auto inside = [&](const Point& p) { return nx * p.first + ny * p.second <= c; };
  for (std::size_t k = 0; k < poly.size(); ++k) {
    const Point& s = poly[k];
    const Point& e = poly[(k + 1) % poly.size()];
    const bool si = inside(s), ei = inside(e);
    if (si) out.push_back(s);
    if (si != ei) {
      const double ds = nx * s.first + ny * s.second - c;
      const double de = nx * e.first + ny * e.second - c;
      const double t = ds / (ds - de);
      out.push_back({s.first + t * (e.first - s.first), s.second + t * (e.second - s.second)});
    }
  }
  return out;
}

inline double polygon_area(const std::vector<Point>& poly) {
  double a = 0.0;
  for (std::size_t k = 0; k < poly.size(); ++k) {
    const Point& p = poly[k];
    const Point& q = poly[(k + 1) % poly.size()];
    a += p.first * q.second - q.first * p.second;
  }
  return 0.5 * std::abs(a);
}

/// Region integral over {m_A <= a, m_A + m_B <= a + b} by clipping each cell polygon.
inline double polygon_phi(const Pmf2& m, double a, double b) {
  const double h = 0.5 * m.step, area = m.step * m.step;
  double total = 0.0;
  for (std::size_t i = 0; i < m.n_a; ++i) {
    for (std::size_t j = 0; j < m.n_b; ++j) {
      if (m.at(i, j) == 0.0) continue;
      const double x = m.value_a(i), y = m.value_b(j);
      std::vector<Point> sq{{x - h, y - h}, {x + h, y - h}, {x + h, y + h}, {x - h, y + h}};
      sq = clip(sq, 1.0, 0.0, a);
      if (!std::isinf(b) && !sq.empty()) sq = clip(sq, 1.0, 1.0, a + b);
      if (sq.size() >= 3) total += m.at(i, j) * polygon_area(sq) / area;
    }
  }
  return total;
}

/// Binomial pmf by enumerating all 2^k on/off states.
inline std::vector<double> enumerate_identical_units(int k, double availability) {
  std::vector<double> pmf(static_cast<std::size_t>(k) + 1, 0.0);
  for (unsigned s = 0; s < (1u << k); ++s) {
    int on = 0;
    double p = 1.0;
    for (int u = 0; u < k; ++u) {
      const bool up = (s >> u) & 1u;
      on += up;
      p *= up ? availability : 1.0 - availability;
    }
    pmf[static_cast<std::size_t>(on)] += p;
  }
  return pmf;
}

}  // namespace testsupport
