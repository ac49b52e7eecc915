#pragma once

// Probability mass functions on regular MW grids.
//
// A Pmf1 stores masses at origin + k*step. A Pmf2 stores masses at
// (origin_a + i*step, origin_b + j*step), row-major with the A axis outermost.
// Off-grid values are deposited by linear (bilinear) interpolation, which
// preserves the first moment of every deposited point.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <fftw3.h>

namespace intercap {

using MW = double;

namespace detail {

// Deposition fractions closer than this to a grid point snap onto it.
inline constexpr double kSnap = 1e-12;

inline bool same_step(double s1, double s2) {
  return std::abs(s1 - s2) <= 1e-12 * std::max(std::abs(s1), std::abs(s2));
}

inline void require_same_step(double s1, double s2, const char* what) {
  if (!same_step(s1, s2)) {
    throw std::invalid_argument(std::string(what) + ": grid steps differ (" + std::to_string(s1) +
                                " vs " + std::to_string(s2) + "); regrid first");
  }
}

// Splits a coordinate into a lower grid index and the fraction toward the next one.
inline std::pair<long long, double> locate(double x, double origin, double step) {
  const double pos = (x - origin) / step;
  double k = std::floor(pos);
  double f = pos - k;
  if (f < kSnap) {
    f = 0.0;
  } else if (f > 1.0 - kSnap) {
    k += 1.0;
    f = 0.0;
  }
  return {static_cast<long long>(k), f};
}

// Grid anchored at multiples of step, covering [lo, hi].
inline std::pair<double, std::size_t> anchored_cover(double lo, double hi, double step) {
  const double first = std::floor(lo / step);
  const double last = std::ceil(hi / step);
  return {first * step, static_cast<std::size_t>(last - first) + 1};
}

}  // namespace detail

struct Pmf1 {
  MW origin = 0.0;
  MW step = 1.0;
  std::vector<double> masses;

  Pmf1() = default;
  Pmf1(MW origin_, MW step_, std::vector<double> masses_)
      : origin(origin_), step(step_), masses(std::move(masses_)) {
    if (!(step > 0.0)) throw std::invalid_argument("Pmf1: step must be positive");
  }

  static Pmf1 delta(MW value, MW step) { return Pmf1(value, step, {1.0}); }

  std::size_t size() const { return masses.size(); }
  bool empty() const { return masses.empty(); }
  MW value(std::size_t k) const { return origin + static_cast<double>(k) * step; }
  MW back_value() const { return value(masses.size() - 1); }

  double total() const { return std::accumulate(masses.begin(), masses.end(), 0.0); }

  double mean() const {
    double m = 0.0;
    for (std::size_t k = 0; k < masses.size(); ++k) m += masses[k] * value(k);
    return m / total();
  }

  // Mass at an exact grid value, zero when off the grid.
  double mass_at(MW x) const {
    const auto [k, f] = detail::locate(x, origin, step);
    if (f != 0.0 || k < 0 || k >= static_cast<long long>(masses.size())) return 0.0;
    return masses[static_cast<std::size_t>(k)];
  }
};

struct Pmf2 {
  MW origin_a = 0.0;
  MW origin_b = 0.0;
  MW step = 1.0;
  std::size_t n_a = 0;
  std::size_t n_b = 0;
  std::vector<double> masses;  // masses[i * n_b + j]

  Pmf2() = default;
  Pmf2(MW oa, MW ob, MW step_, std::size_t na, std::size_t nb)
      : origin_a(oa), origin_b(ob), step(step_), n_a(na), n_b(nb), masses(na * nb, 0.0) {
    if (!(step > 0.0)) throw std::invalid_argument("Pmf2: step must be positive");
  }

  static Pmf2 delta(MW a, MW b, MW step) {
    Pmf2 p(a, b, step, 1, 1);
    p.masses[0] = 1.0;
    return p;
  }

  bool empty() const { return masses.empty(); }
  MW value_a(std::size_t i) const { return origin_a + static_cast<double>(i) * step; }
  MW value_b(std::size_t j) const { return origin_b + static_cast<double>(j) * step; }
  double& at(std::size_t i, std::size_t j) { return masses[i * n_b + j]; }
  double at(std::size_t i, std::size_t j) const { return masses[i * n_b + j]; }

  double total() const { return std::accumulate(masses.begin(), masses.end(), 0.0); }

  std::pair<MW, MW> mean() const {
    double ma = 0.0, mb = 0.0, t = 0.0;
    for (std::size_t i = 0; i < n_a; ++i) {
      for (std::size_t j = 0; j < n_b; ++j) {
        const double m = at(i, j);
        ma += m * value_a(i);
        mb += m * value_b(j);
        t += m;
      }
    }
    return {ma / t, mb / t};
  }

  double mass_at(MW a, MW b) const {
    const auto [i, fi] = detail::locate(a, origin_a, step);
    const auto [j, fj] = detail::locate(b, origin_b, step);
    if (fi != 0.0 || fj != 0.0) return 0.0;
    if (i < 0 || j < 0 || i >= static_cast<long long>(n_a) || j >= static_cast<long long>(n_b)) {
      return 0.0;
    }
    return at(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  }
};

/// Empty grids anchored at integer multiples of `step`, sized to cover the given range.
inline Pmf1 make_grid(MW lo, MW hi, MW step) {
  if (!(step > 0.0)) throw std::invalid_argument("make_grid: step must be positive");
  const auto [origin, n] = detail::anchored_cover(lo, hi, step);
  return Pmf1(origin, step, std::vector<double>(n, 0.0));
}

inline Pmf2 make_grid(MW lo_a, MW hi_a, MW lo_b, MW hi_b, MW step) {
  if (!(step > 0.0)) throw std::invalid_argument("make_grid: step must be positive");
  const auto [oa, na] = detail::anchored_cover(lo_a, hi_a, step);
  const auto [ob, nb] = detail::anchored_cover(lo_b, hi_b, step);
  return Pmf2(oa, ob, step, na, nb);
}

namespace detail {

// Grows a 1D grid (keeping its alignment) so that indices [lo, hi] exist.
inline void extend(Pmf1& p, long long lo, long long hi) {
  const long long n = static_cast<long long>(p.masses.size());
  const long long pre = std::max(0LL, -lo);
  const long long post = std::max(0LL, hi - (n - 1));
  if (pre == 0 && post == 0) return;
  std::vector<double> grown(static_cast<std::size_t>(n + pre + post), 0.0);
  std::copy(p.masses.begin(), p.masses.end(), grown.begin() + pre);
  p.masses = std::move(grown);
  p.origin -= static_cast<double>(pre) * p.step;
}

inline void extend(Pmf2& p, long long lo_a, long long hi_a, long long lo_b, long long hi_b) {
  const long long na = static_cast<long long>(p.n_a), nb = static_cast<long long>(p.n_b);
  const long long pre_a = std::max(0LL, -lo_a), post_a = std::max(0LL, hi_a - (na - 1));
  const long long pre_b = std::max(0LL, -lo_b), post_b = std::max(0LL, hi_b - (nb - 1));
  if (pre_a == 0 && post_a == 0 && pre_b == 0 && post_b == 0) return;
  const std::size_t new_na = static_cast<std::size_t>(na + pre_a + post_a);
  const std::size_t new_nb = static_cast<std::size_t>(nb + pre_b + post_b);
  std::vector<double> grown(new_na * new_nb, 0.0);
  for (long long i = 0; i < na; ++i) {
    std::copy_n(p.masses.begin() + i * nb, nb,
                grown.begin() + static_cast<long long>((i + pre_a) * new_nb) + pre_b);
  }
  p.masses = std::move(grown);
  p.n_a = new_na;
  p.n_b = new_nb;
  p.origin_a -= static_cast<double>(pre_a) * p.step;
  p.origin_b -= static_cast<double>(pre_b) * p.step;
}

}  // namespace detail

/// Deposits `prob` at `value`, split linearly between the two neighbouring grid
/// points. The grid grows if `value` lies outside it; an empty pmf is anchored
/// at multiples of its step.
inline void add_point_mass(Pmf1& p, MW value, double prob) {
  if (!(prob >= 0.0)) throw std::invalid_argument("add_point_mass: probability must be non-negative");
  if (!std::isfinite(value)) throw std::invalid_argument("add_point_mass: value must be finite");
  if (p.masses.empty()) p.origin = std::floor(value / p.step) * p.step;
  const auto [k, f] = detail::locate(value, p.origin, p.step);
  detail::extend(p, k, f == 0.0 ? k : k + 1);
  const auto [k2, f2] = detail::locate(value, p.origin, p.step);
  const auto idx = static_cast<std::size_t>(k2);
  p.masses[idx] += prob * (1.0 - f2);
  if (f2 != 0.0) p.masses[idx + 1] += prob * f2;
}

inline void add_point_mass(Pmf2& p, MW a, MW b, double prob) {
  if (!(prob >= 0.0)) throw std::invalid_argument("add_point_mass: probability must be non-negative");
  if (!std::isfinite(a) || !std::isfinite(b)) {
    throw std::invalid_argument("add_point_mass: value must be finite");
  }
  if (p.masses.empty()) {
    p.origin_a = std::floor(a / p.step) * p.step;
    p.origin_b = std::floor(b / p.step) * p.step;
    p.n_a = p.n_b = 1;
    p.masses.assign(1, 0.0);
  }
  {
    const auto [i, fi] = detail::locate(a, p.origin_a, p.step);
    const auto [j, fj] = detail::locate(b, p.origin_b, p.step);
    detail::extend(p, i, fi == 0.0 ? i : i + 1, j, fj == 0.0 ? j : j + 1);
  }
  const auto [i, fi] = detail::locate(a, p.origin_a, p.step);
  const auto [j, fj] = detail::locate(b, p.origin_b, p.step);
  const auto ui = static_cast<std::size_t>(i), uj = static_cast<std::size_t>(j);
  p.at(ui, uj) += prob * (1.0 - fi) * (1.0 - fj);
  if (fi != 0.0) p.at(ui + 1, uj) += prob * fi * (1.0 - fj);
  if (fj != 0.0) p.at(ui, uj + 1) += prob * (1.0 - fi) * fj;
  if (fi != 0.0 && fj != 0.0) p.at(ui + 1, uj + 1) += prob * fi * fj;
}

/// Result of a normalization check: the mass found and whether it was rescaled.
struct NormalizationReport {
  double total = 1.0;
  bool renormalized = false;
};

/// Rescales to unit mass only if the total is off by more than `tol`.
template <typename Pmf>
NormalizationReport normalize_checked(Pmf& p, double tol = 1e-9) {
  NormalizationReport rep;
  rep.total = p.total();
  if (!(rep.total > 0.0)) throw std::invalid_argument("normalize_checked: pmf has no mass");
  if (std::abs(rep.total - 1.0) > tol) {
    for (double& m : p.masses) m /= rep.total;
    rep.renormalized = true;
  }
  return rep;
}

/// Throws unless every mass is non-negative and the total is one within `tol`.
template <typename Pmf>
void validate(const Pmf& p, double tol = 1e-9) {
  for (double m : p.masses) {
    if (!(m >= 0.0)) throw std::invalid_argument("pmf has a negative or NaN mass");
  }
  const double t = p.total();
  if (std::abs(t - 1.0) > tol) {
    throw std::invalid_argument("pmf total mass " + std::to_string(t) + " is not 1");
  }
}

/// Distribution of the sum of two independent variables (direct summation).
inline Pmf1 convolve1(const Pmf1& p, const Pmf1& q) {
  detail::require_same_step(p.step, q.step, "convolve1");
  if (p.empty() || q.empty()) throw std::invalid_argument("convolve1: empty pmf");
  std::vector<double> out(p.size() + q.size() - 1, 0.0);
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double pi = p.masses[i];
    if (pi == 0.0) continue;
    for (std::size_t j = 0; j < q.size(); ++j) out[i + j] += pi * q.masses[j];
  }
  return Pmf1(p.origin + q.origin, p.step, std::move(out));
}

namespace detail {

inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

// Smallest n' >= n whose prime factors are all in {2, 3, 5, 7}.
inline std::size_t fft_size(std::size_t n) {
  for (std::size_t m = std::max<std::size_t>(n, 1);; ++m) {
    std::size_t r = m;
    for (std::size_t f : {2, 3, 5, 7}) {
      while (r % f == 0) r /= f;
    }
    if (r == 1) return m;
  }
}

struct FftwBuffer {
  explicit FftwBuffer(std::size_t bytes) : ptr(fftw_malloc(bytes)) {
    if (ptr == nullptr) throw std::bad_alloc();
  }
  ~FftwBuffer() { fftw_free(ptr); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  void* ptr;
};

// Forward r2c transform of `src` (na x nb) zero-padded into an (fa x fb) real buffer.
inline void forward_padded(const Pmf2& src, std::size_t fa, std::size_t fb, double* real,
                           fftw_complex* spec) {
  std::fill_n(real, fa * fb, 0.0);
  for (std::size_t i = 0; i < src.n_a; ++i) {
    std::copy_n(src.masses.begin() + static_cast<long>(i * src.n_b), src.n_b, real + i * fb);
  }
  fftw_plan plan;
  {
    std::lock_guard lock(fftw_planner_mutex());
    plan = fftw_plan_dft_r2c_2d(static_cast<int>(fa), static_cast<int>(fb), real, spec,
                                FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  std::lock_guard lock(fftw_planner_mutex());
  fftw_destroy_plan(plan);
}

}  // namespace detail

/// 2D distribution of component-wise sums of independent variables, computed
/// in the frequency domain. Both inputs are zero-padded to at least the full
/// linear-convolution extent, so no circular wrap-around occurs.
inline Pmf2 convolve2(const Pmf2& p, const Pmf2& q) {
  detail::require_same_step(p.step, q.step, "convolve2");
  if (p.empty() || q.empty()) throw std::invalid_argument("convolve2: empty pmf");
  const std::size_t na = p.n_a + q.n_a - 1;
  const std::size_t nb = p.n_b + q.n_b - 1;
  const std::size_t fa = detail::fft_size(na);
  const std::size_t fb = detail::fft_size(nb);
  const std::size_t nc = fb / 2 + 1;

  detail::FftwBuffer real(sizeof(double) * fa * fb);
  detail::FftwBuffer spec_p(sizeof(fftw_complex) * fa * nc);
  detail::FftwBuffer spec_q(sizeof(fftw_complex) * fa * nc);
  auto* rbuf = static_cast<double*>(real.ptr);
  auto* sp = static_cast<fftw_complex*>(spec_p.ptr);
  auto* sq = static_cast<fftw_complex*>(spec_q.ptr);

  detail::forward_padded(p, fa, fb, rbuf, sp);
  detail::forward_padded(q, fa, fb, rbuf, sq);
  for (std::size_t k = 0; k < fa * nc; ++k) {
    const double re = sp[k][0] * sq[k][0] - sp[k][1] * sq[k][1];
    const double im = sp[k][0] * sq[k][1] + sp[k][1] * sq[k][0];
    sp[k][0] = re;
    sp[k][1] = im;
  }
  fftw_plan inverse;
  {
    std::lock_guard lock(detail::fftw_planner_mutex());
    inverse = fftw_plan_dft_c2r_2d(static_cast<int>(fa), static_cast<int>(fb), sp, rbuf,
                                   FFTW_ESTIMATE);
  }
  fftw_execute(inverse);
  {
    std::lock_guard lock(detail::fftw_planner_mutex());
    fftw_destroy_plan(inverse);
  }

  Pmf2 out(p.origin_a + q.origin_a, p.origin_b + q.origin_b, p.step, na, nb);
  const double scale = 1.0 / static_cast<double>(fa * fb);
  for (std::size_t i = 0; i < na; ++i) {
    for (std::size_t j = 0; j < nb; ++j) {
      // Round-off leaves ~1e-17 noise in empty cells, some of it negative.
      out.at(i, j) = std::max(0.0, rbuf[i * fb + j] * scale);
    }
  }
  return out;
}

/// Product measure of two independent marginals.
inline Pmf2 outer(const Pmf1& pa, const Pmf1& pb) {
  detail::require_same_step(pa.step, pb.step, "outer");
  Pmf2 out(pa.origin, pb.origin, pa.step, pa.size(), pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i) {
    for (std::size_t j = 0; j < pb.size(); ++j) out.at(i, j) = pa.masses[i] * pb.masses[j];
  }
  return out;
}

/// Re-deposits every mass onto a grid with `new_step`, anchored at multiples of it.
inline Pmf1 regrid(const Pmf1& p, MW new_step) {
  if (!(new_step > 0.0)) throw std::invalid_argument("regrid: step must be positive");
  if (p.empty()) return Pmf1(0.0, new_step, {});
  Pmf1 out = make_grid(p.origin, p.back_value(), new_step);
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (p.masses[k] != 0.0) add_point_mass(out, p.value(k), p.masses[k]);
  }
  return out;
}

/// Distribution of (-X, -Y).
inline Pmf2 reflect2(const Pmf2& p) {
  Pmf2 out(-(p.origin_a + static_cast<double>(p.n_a - 1) * p.step),
           -(p.origin_b + static_cast<double>(p.n_b - 1) * p.step), p.step, p.n_a, p.n_b);
  for (std::size_t i = 0; i < p.n_a; ++i) {
    for (std::size_t j = 0; j < p.n_b; ++j) out.at(p.n_a - 1 - i, p.n_b - 1 - j) = p.at(i, j);
  }
  return out;
}

inline Pmf1 reflect1(const Pmf1& p) {
  std::vector<double> m(p.masses.rbegin(), p.masses.rend());
  return Pmf1(-p.back_value(), p.step, std::move(m));
}

/// Swaps the A and B axes.
inline Pmf2 transpose(const Pmf2& p) {
  Pmf2 out(p.origin_b, p.origin_a, p.step, p.n_b, p.n_a);
  for (std::size_t i = 0; i < p.n_a; ++i) {
    for (std::size_t j = 0; j < p.n_b; ++j) out.at(j, i) = p.at(i, j);
  }
  return out;
}

inline Pmf1 marginal_a(const Pmf2& p) {
  std::vector<double> m(p.n_a, 0.0);
  for (std::size_t i = 0; i < p.n_a; ++i) {
    for (std::size_t j = 0; j < p.n_b; ++j) m[i] += p.at(i, j);
  }
  return Pmf1(p.origin_a, p.step, std::move(m));
}

inline Pmf1 marginal_b(const Pmf2& p) {
  std::vector<double> m(p.n_b, 0.0);
  for (std::size_t i = 0; i < p.n_a; ++i) {
    for (std::size_t j = 0; j < p.n_b; ++j) m[j] += p.at(i, j);
  }
  return Pmf1(p.origin_b, p.step, std::move(m));
}

/// Deterministic shift by `delta`; off-grid shifts split each mass linearly
/// between neighbouring cells (same rule as add_point_mass).
inline Pmf1 shift(const Pmf1& p, MW delta) {
  const auto [k, f] = detail::locate(delta, 0.0, p.step);
  const double base = p.origin + static_cast<double>(k) * p.step;
  if (f == 0.0) return Pmf1(base, p.step, p.masses);
  std::vector<double> m(p.size() + 1, 0.0);
  for (std::size_t i = 0; i < p.size(); ++i) {
    m[i] += p.masses[i] * (1.0 - f);
    m[i + 1] += p.masses[i] * f;
  }
  return Pmf1(base, p.step, std::move(m));
}

inline Pmf2 shift(const Pmf2& p, MW delta_a, MW delta_b) {
  const auto [ka, fa] = detail::locate(delta_a, 0.0, p.step);
  const auto [kb, fb] = detail::locate(delta_b, 0.0, p.step);
  const std::size_t ea = fa == 0.0 ? 0 : 1, eb = fb == 0.0 ? 0 : 1;
  Pmf2 out(p.origin_a + static_cast<double>(ka) * p.step,
           p.origin_b + static_cast<double>(kb) * p.step, p.step, p.n_a + ea, p.n_b + eb);
  for (std::size_t i = 0; i < p.n_a; ++i) {
    for (std::size_t j = 0; j < p.n_b; ++j) {
      const double m = p.at(i, j);
      if (m == 0.0) continue;
      out.at(i, j) += m * (1.0 - fa) * (1.0 - fb);
      if (ea) out.at(i + 1, j) += m * fa * (1.0 - fb);
      if (eb) out.at(i, j + 1) += m * (1.0 - fa) * fb;
      if (ea && eb) out.at(i + 1, j + 1) += m * fa * fb;
    }
  }
  return out;
}

/// Drops leading and trailing cells whose cumulative mass is at most eps/2 on
/// each side. Mass is not renormalized.
inline Pmf1 trim_tails(const Pmf1& p, double eps) {
  std::size_t lo = 0, hi = p.size();
  double acc = 0.0;
  while (lo < hi && acc + p.masses[lo] <= eps / 2) acc += p.masses[lo++];
  acc = 0.0;
  while (hi > lo && acc + p.masses[hi - 1] <= eps / 2) acc += p.masses[--hi];
  std::vector<double> m(p.masses.begin() + static_cast<long>(lo),
                        p.masses.begin() + static_cast<long>(hi));
  return Pmf1(p.value(lo), p.step, std::move(m));
}

/// Same for a 2D pmf, trimming whole rows and columns (eps/4 per side).
inline Pmf2 trim_tails(const Pmf2& p, double eps) {
  const auto span = [&](const Pmf1& marg) {
    std::size_t lo = 0, hi = marg.size();
    double acc = 0.0;
    while (lo < hi && acc + marg.masses[lo] <= eps / 4) acc += marg.masses[lo++];
    acc = 0.0;
    while (hi > lo && acc + marg.masses[hi - 1] <= eps / 4) acc += marg.masses[--hi];
    return std::pair{lo, hi};
  };
  const auto [la, ha] = span(marginal_a(p));
  const auto [lb, hb] = span(marginal_b(p));
  Pmf2 out(p.value_a(la), p.value_b(lb), p.step, ha - la, hb - lb);
  for (std::size_t i = la; i < ha; ++i) {
    for (std::size_t j = lb; j < hb; ++j) out.at(i - la, j - lb) = p.at(i, j);
  }
  return out;
}

}  // namespace intercap
