#pragma once

// Acceptable load additions and the capacity allocation curve.
//
// A load addition l is acceptable when neither system's interconnection-
// adjusted LOLE exceeds its baseline. Risks are assumed nondecreasing in each
// component of l, so the acceptable set's upper boundary is found by
// bisection along l_B for a grid of l_A values.

#include <algorithm>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "intercap/risk_engine.hpp"

namespace intercap {

struct TraceOptions {
  int n_points = 61;
  MW tol_mw = 1.0;      // bisection resolution
  double tol_r = 1e-6;  // slack on risk comparisons, h/yr
};

enum class Binding { None, A, B, Both };

inline std::string to_string(Binding b) {
  switch (b) {
    case Binding::None: return "none";
    case Binding::A: return "a";
    case Binding::B: return "b";
    case Binding::Both: return "both";
  }
  return "?";
}

struct CurvePoint {
  MW l_a = 0.0;
  MW l_b = 0.0;
  Binding binding = Binding::None;
};

struct AllocationCurve {
  Policy policy = Policy::Veto;
  InterconnectionSpec interconnection;
  std::vector<CurvePoint> points;  // strictly increasing l_a, nonincreasing l_b
};

/// A margin together with its baseline risks.
class Study {
 public:
  explicit Study(MarginDist margin)
      : margin_(std::make_shared<const MarginDist>(std::move(margin))), baseline_(baseline_risk(*margin_)) {
    const MW d = margin_->step();
    upper_bracket_ = std::max({margin_->max_value(System::A), margin_->max_value(System::B), 0.0}) + 2.0 * d;
  }

  const MarginDist& margin() const { return *margin_; }
  const RiskResult& baseline() const { return baseline_; }

  /// A load beyond which every state of either system is short, before adding
  /// interconnection capacity.
  MW upper_bracket() const { return upper_bracket_; }

  Study mirrored() const { return Study(margin_->mirrored()); }

 private:
  std::shared_ptr<const MarginDist> margin_;
  RiskResult baseline_;
  MW upper_bracket_ = 0.0;
};

inline bool acceptable(const Study& st, LoadPair l, const InterconnectionSpec& ic, Policy policy,
                       double tol_r = 1e-6) {
  const RiskResult r = adjusted_risk(st.margin(), l, ic, policy);
  return r.r_a <= st.baseline().r_a + tol_r && r.r_b <= st.baseline().r_b + tol_r;
}

namespace detail {

// Largest x in [lo, hi) with pred(x) true, to within tol; pred(lo) must hold.
// hi is doubled until pred(hi) fails.
template <typename Pred>
MW bisect_last_true(Pred pred, MW lo, MW hi, MW tol) {
  int widen = 0;
  while (pred(hi)) {
    if (++widen > 20) throw std::runtime_error("bisection: could not bracket the acceptable boundary");
    hi = lo + 2.0 * (hi - lo);
  }
  while (hi - lo > tol) {
    const MW mid = 0.5 * (lo + hi);
    (pred(mid) ? lo : hi) = mid;
  }
  return lo;
}

inline Binding binding_at(const Study& st, LoadPair l, const InterconnectionSpec& ic, Policy policy,
                          const TraceOptions& opt) {
  const RiskResult ra = adjusted_risk(st.margin(), {l.a + opt.tol_mw, l.b}, ic, policy);
  const RiskResult rb = adjusted_risk(st.margin(), {l.a, l.b + opt.tol_mw}, ic, policy);
  const RiskResult& r0 = st.baseline();
  const bool bind_a = std::max(ra.r_a, rb.r_a) > r0.r_a + opt.tol_r;
  const bool bind_b = std::max(ra.r_b, rb.r_b) > r0.r_b + opt.tol_r;
  if (bind_a && bind_b) return Binding::Both;
  if (bind_a) return Binding::A;
  if (bind_b) return Binding::B;
  return Binding::None;
}

}  // namespace detail

/// Largest l_b >= 0 with (l_a, l_b) acceptable; nullopt if (l_a, 0) is not.
inline std::optional<MW> max_lb(const Study& st, MW l_a, const InterconnectionSpec& ic, Policy policy,
                                const TraceOptions& opt = {}) {
  const auto pred = [&](MW lb) { return acceptable(st, {l_a, lb}, ic, policy, opt.tol_r); };
  if (!pred(0.0)) return std::nullopt;
  return detail::bisect_last_true(pred, 0.0, st.upper_bracket() + ic.max_capacity(), opt.tol_mw);
}

/// Largest l_a >= 0 with (l_a, 0) acceptable.
inline MW max_la(const Study& st, const InterconnectionSpec& ic, Policy policy, const TraceOptions& opt = {}) {
  const auto pred = [&](MW la) { return acceptable(st, {la, 0.0}, ic, policy, opt.tol_r); };
  if (!pred(0.0)) throw std::runtime_error("scenario is infeasible: baseline risk is violated at zero load addition");
  return detail::bisect_last_true(pred, 0.0, st.upper_bracket() + ic.max_capacity(), opt.tol_mw);
}

/// Traces the capacity allocation curve on a uniform l_a grid over [0, max_la].
inline AllocationCurve trace_curve(const Study& st, const InterconnectionSpec& ic, Policy policy,
                                   const TraceOptions& opt = {}) {
  ic.validate();
  if (opt.n_points < 2) throw std::invalid_argument("trace_curve: need at least 2 points");
  AllocationCurve curve{policy, ic, {}};
  const MW la_max = max_la(st, ic, policy, opt);
  const int n = la_max > 0.0 ? opt.n_points : 1;
  MW prev_lb = kInf;
  for (int k = 0; k < n; ++k) {
    const MW la = n == 1 ? 0.0 : la_max * k / (n - 1);
    const auto lb = max_lb(st, la, ic, policy, opt);
    if (!lb) throw std::logic_error("trace_curve: grid point beyond the acceptable range");
    // Bisection noise can raise l_b by < tol_mw; lower l_b stays acceptable.
    prev_lb = std::min(prev_lb, *lb);
    curve.points.push_back({la, prev_lb, detail::binding_at(st, {la, prev_lb}, ic, policy, opt)});
  }
  return curve;
}

/// Points not dominated (l' >= l componentwise, l' != l), with tolerance tol_mw.
inline std::vector<CurvePoint> pareto_set(const AllocationCurve& curve, MW tol_mw = 1.0) {
  std::vector<CurvePoint> kept;
  const auto& pts = curve.points;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < pts.size() && !dominated; ++j) {
      if (j == i) continue;
      const bool weakly = pts[j].l_a >= pts[i].l_a - tol_mw && pts[j].l_b >= pts[i].l_b - tol_mw;
      const bool better = pts[j].l_a > pts[i].l_a + tol_mw || pts[j].l_b > pts[i].l_b + tol_mw;
      dominated = weakly && better;
    }
    if (!dominated) kept.push_back(pts[i]);
  }
  return kept;
}

using ValueFn = std::function<double(const CurvePoint&)>;

inline double max_sum(const CurvePoint& p) { return p.l_a + p.l_b; }

/// Point maximizing `value`; ties go to the larger l_a.
inline CurvePoint select_optimum(const AllocationCurve& curve, const ValueFn& value = max_sum) {
  if (curve.points.empty()) throw std::invalid_argument("select_optimum: empty curve");
  const CurvePoint* best = &curve.points.front();
  double best_v = value(*best);
  for (const auto& p : curve.points) {
    const double v = value(p);
    if (v > best_v || (v == best_v && p.l_a > best->l_a)) {
      best = &p;
      best_v = v;
    }
  }
  return *best;
}

struct CurveResult {
  AllocationCurve curve;
  CurvePoint optimum;
};

/// One curve and its max-sum optimum per (policy, interconnection) pair.
inline std::vector<CurveResult> sweep(const Study& st, const std::vector<Policy>& policies,
                                      const std::vector<InterconnectionSpec>& interconnections,
                                      const TraceOptions& opt = {}) {
  std::vector<CurveResult> out;
  for (const auto& ic : interconnections) {
    for (Policy p : policies) {
      auto curve = trace_curve(st, ic, p, opt);
      const CurvePoint best = select_optimum(curve);
      out.push_back({std::move(curve), best});
    }
  }
  return out;
}

}  // namespace intercap
