#pragma once

// Spherically symmetric CPMC profiles r = f(t):
//   [1-(f')^2] d + f f'' = c [1-(f')^2]^{3/2} f,      |f'| < 1, f > 0.
// Integration, full classification (collapse / cylinder / expansion),
// separatrix slopes lambda_+/-, light-cone asymptote tau_0, and the
// collapse-rate profile. Internally everything is rescaled to the normal
// form c = d+1; the cylinder sits at f = d/(d+1) and the de Sitter profile
// is f = <t>.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "cmcflow/jb.hpp"
#include "cmcflow/ode.hpp"

namespace cmcflow {
namespace rotsym {

struct SphSymState {
  double f = 1.0;
  double df = 0.0;
  double t = 0.0;
  int d = 1;
  double c = 0.0;  // 0 means d+1

  double curvature() const { return c > 0.0 ? c : double(d + 1); }
  void validate() const {
    require(d >= 1, "SphSymState: d >= 1");
    require(f > 0.0, "SphSymState: f > 0 required");
    require(std::abs(df) < 1.0, "SphSymState: |f'| < 1 required");
    require(curvature() > 0.0, "SphSymState: mean curvature must be positive");
  }
};

// f'' from the profile equation (general c).
inline double rhs(const SphSymState& s) {
  s.validate();
  const double u = one_minus_sq(s.df);
  return (s.curvature() * std::pow(u, 1.5) * s.f - double(s.d) * u) / s.f;
}

struct Invariants {
  double gamma;
  double eta;
};

// gamma = f'/sqrt(1-f'^2), eta = f sqrt(1-f'^2)
inline Invariants invariants(double f, double df) {
  require(std::abs(df) < 1.0, "invariants: |f'| < 1 required");
  const double root = std::sqrt(one_minus_sq(df));
  return {df / root, f * root};
}

enum class Termination { ReachedHorizonTime, CollapseDetected, TimelikeDegenerate, StepFailure };

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::ReachedHorizonTime: return "reached_horizon_time";
    case Termination::CollapseDetected: return "collapse_detected";
    case Termination::TimelikeDegenerate: return "timelike_degenerate";
    default: return "step_failure";
  }
}

struct Sample {
  double t, f, df, gamma, eta;
};

struct IntegrateOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  double collapse_threshold = 1e-8;
  double degenerate_threshold = 1e-12;  // on 1 - f'^2
};

// Trajectory record. Dense steps are kept (in internal rescaled time) so
// later analysis can resample the solution and its derivatives.
class RunRecord {
 public:
  std::vector<Sample> samples;  // ascending in t
  Termination termination = Termination::ReachedHorizonTime;
  double event_time = 0.0;  // collapse/degeneracy time when detected
  int d = 1;
  double c = 2.0;
  std::size_t n_accepted = 0, n_rejected = 0;
  double rtol = 0.0, atol = 0.0;

  // internal-time dense data (t_hat = lambda * t, f_hat = lambda * f)
  double scale = 1.0;  // lambda = c/(d+1); 1 in normal form
  std::vector<DenseStep> dense;

  double t_begin() const { return samples.front().t; }
  double t_end() const { return samples.back().t; }

  bool covers(double t) const {
    if (dense.empty()) return false;
    double th = scale * t;
    double lo = dense.front().t0, hi = dense.back().t1();
    if (lo > hi) std::swap(lo, hi);
    return th >= lo - 1e-12 && th <= hi + 1e-12;
  }

  // f, f', f'' at arbitrary covered t (f'' from the interpolant derivative).
  void eval(double t, double* f, double* df, double* d2f = nullptr) const {
    require(covers(t), "RunRecord::eval: t outside the computed range");
    const double th = scale * t;
    const DenseStep& ds = locate(th);
    StateVec y, dy;
    ds.eval(th, y);
    if (f) *f = y[0] / scale;
    if (df) *df = y[1];
    if (d2f) {
      ds.eval_derivative(th, dy);
      *d2f = dy[1] * scale;  // d/dt = lambda * d/dt_hat
    }
  }

 private:
  const DenseStep& locate(double th) const {
    const bool fwd = dense.back().t1() >= dense.front().t0;
    std::size_t lo = 0, hi = dense.size();
    while (hi - lo > 1) {
      std::size_t mid = (lo + hi) / 2;
      const bool before = fwd ? th < dense[mid].t0 : th > dense[mid].t0;
      if (before)
        hi = mid;
      else
        lo = mid;
    }
    return dense[lo];
  }
};

namespace detail {

inline void profile_rhs_normal(int d, double t, const StateVec& y, StateVec& dy) {
  (void)t;
  const double f = y[0], df = y[1];
  const double u = one_minus_sq(df);
  dy.resize(2);
  dy[0] = df;
  dy[1] = (double(d + 1) * std::pow(std::max(u, 0.0), 1.5) * f - double(d) * std::max(u, 0.0)) / f;
}

}  // namespace detail

// Integrate to t_end (either direction). Events: collapse f -> 0 and
// timelike degeneracy 1-f'^2 -> 0, both located by bisection on the dense
// output.
inline RunRecord integrate(const SphSymState& s0, double t_end, IntegrateOptions opts = {}) {
  s0.validate();
  const int d = s0.d;
  const double lambda = s0.curvature() / double(d + 1);

  RunRecord rec;
  rec.d = d;
  rec.c = s0.curvature();
  rec.scale = lambda;
  rec.rtol = opts.rtol;
  rec.atol = opts.atol;

  const double th0 = lambda * s0.t, th_end = lambda * t_end;
  StateVec y0 = {lambda * s0.f, s0.df};

  Dopri5 solver([d](double t, const StateVec& y, StateVec& dy) { detail::profile_rhs_normal(d, t, y, dy); },
                OdeOptions{opts.rtol, opts.atol, 0.0, 0.0, 50'000'000});

  std::vector<EventSpec> events;
  const double fmin = lambda * opts.collapse_threshold;
  events.push_back({[fmin](double, const StateVec& y) { return y[0] - fmin; }, -1, true, "collapse"});
  events.push_back({[opts](double, const StateVec& y) { return one_minus_sq(y[1]) - opts.degenerate_threshold; },
                    -1, true, "degenerate"});

  auto push_sample = [&](double th, const StateVec& y) {
    double t = th / lambda, f = y[0] / lambda, df = y[1];
    if (std::abs(df) >= 1.0) df = std::copysign(1.0 - 1e-16, df);
    auto inv = invariants(f, df);
    rec.samples.push_back({t, f, df, inv.gamma, inv.eta});
  };

  StateVec ytmp;
  push_sample(th0, y0);
  auto res = solver.integrate(th0, y0, th_end, events, [&](const DenseStep& ds) {
    rec.dense.push_back(ds);
  });
  rec.n_accepted = res.n_accepted;
  rec.n_rejected = res.n_rejected;

  // samples at accepted step ends, clipped to the event time
  for (const auto& ds : rec.dense) {
    double th1 = ds.t1();
    if (res.status == OdeStatus::EventStop) {
      const bool fwd = th_end >= th0;
      if ((fwd && th1 > res.t) || (!fwd && th1 < res.t)) break;
    }
    ds.eval(th1, ytmp);
    push_sample(th1, ytmp);
  }

  switch (res.status) {
    case OdeStatus::ReachedEnd:
      rec.termination = Termination::ReachedHorizonTime;
      break;
    case OdeStatus::EventStop: {
      // Degeneracy 1-f'^2 -> 0 at small f is the collapse itself (|f'| -> 1
      // exactly at extinction and 1-f'^2 leaves double range before f does);
      // report it as collapse with the extinction time extrapolated linearly,
      // which is O(f^2) accurate by the collapse-rate estimate.
      push_sample(res.t, res.y);
      const double f_hat = res.y[0], df_ev = res.y[1];
      if (res.event.index == 0) {
        rec.termination = Termination::CollapseDetected;
        rec.event_time = res.t / lambda;
      } else if (f_hat <= 0.05 && std::abs(df_ev) > 0.9) {
        rec.termination = Termination::CollapseDetected;
        rec.event_time = (res.t + (df_ev < 0 ? 1.0 : -1.0) * f_hat / std::abs(df_ev)) / lambda;
      } else {
        rec.termination = Termination::TimelikeDegenerate;
        rec.event_time = res.t / lambda;
      }
      break;
    }
    default:
      rec.termination = Termination::StepFailure;
      break;
  }
  if (rec.samples.size() > 1 && rec.samples.front().t > rec.samples.back().t)
    std::reverse(rec.samples.begin(), rec.samples.end());
  return rec;
}

// ---------------------------------------------------------------------------
// classification

enum class RayOutcome { Expands, Collapses, CylinderBand, Undecided };

inline const char* to_string(RayOutcome o) {
  switch (o) {
    case RayOutcome::Expands: return "expands";
    case RayOutcome::Collapses: return "collapses";
    case RayOutcome::CylinderBand: return "cylinder_band";
    default: return "undecided";
  }
}

struct Classification {
  enum class Kind {
    Expanding,
    StaticCylinder,
    BigBangBigCrunch,
    CollapsePastExpandFuture,
    ExpandPastCollapseFuture,
    CollapsePastToCylinder,
    ToCylinderPastCollapseFuture,
    FromCylinderExpandFuture,
    ExpandPastToCylinder,
    Undecided
  };
  Kind kind = Kind::Undecided;
  RayOutcome future = RayOutcome::Undecided;
  RayOutcome past = RayOutcome::Undecided;
  std::string evidence;
};

inline const char* to_string(Classification::Kind k) {
  using K = Classification::Kind;
  switch (k) {
    case K::Expanding: return "expanding";
    case K::StaticCylinder: return "static_cylinder";
    case K::BigBangBigCrunch: return "big_bang_big_crunch";
    case K::CollapsePastExpandFuture: return "collapse_past_expand_future";
    case K::ExpandPastCollapseFuture: return "expand_past_collapse_future";
    case K::CollapsePastToCylinder: return "collapse_past_to_cylinder";
    case K::ToCylinderPastCollapseFuture: return "to_cylinder_past_collapse_future";
    case K::FromCylinderExpandFuture: return "from_cylinder_expand_future";
    case K::ExpandPastToCylinder: return "expand_past_to_cylinder";
    default: return "undecided";
  }
}

// Decide one time direction using the barrier tests; the integration stops as
// soon as a sufficient condition fires:
//   eta > d/(d+1) and f' > 0  => expansion for all future time,
//   eta < d/(d+1) and f' < 0  => finite-time collapse in the future,
// or the collapse/degeneracy event itself fires. "future" here is internal
// normal-form time; callers pass reversed = true for the past ray.
inline RayOutcome classify_ray(const SphSymState& s0, double horizon, bool toward_past,
                               double hug_band = 1e-6) {
  s0.validate();
  const int d = s0.d;
  const double lambda = s0.curvature() / double(d + 1);
  const double barrier = double(d) / double(d + 1);

  StateVec y0 = {lambda * s0.f, toward_past ? -s0.df : s0.df};
  // past ray: integrate the time-reversed profile g(s) = f(2 t0 - t)
  {
    auto inv0 = invariants(y0[0], y0[1]);
    if (inv0.eta > barrier && y0[1] > 0.0) return RayOutcome::Expands;
    if (inv0.eta < barrier && y0[1] < 0.0) return RayOutcome::Collapses;
    if (y0[0] <= 1e-8) return RayOutcome::Collapses;
  }
  Dopri5 solver([d](double t, const StateVec& y, StateVec& dy) { detail::profile_rhs_normal(d, t, y, dy); },
                OdeOptions{1e-10, 1e-12});

  std::vector<EventSpec> events;
  events.push_back({[](double, const StateVec& y) { return y[0] - 1e-8; }, -1, true, "collapse"});
  events.push_back({[](double, const StateVec& y) { return one_minus_sq(y[1]) - 1e-12; }, -1, true, "degenerate"});
  events.push_back({[barrier](double, const StateVec& y) {
                      auto inv = invariants(y[0], y[1]);
                      return std::min(inv.eta - barrier * (1.0 + 1e-12), y[1] - 1e-14);
                    },
                    +1, true, "expansion_certificate"});
  events.push_back({[barrier](double, const StateVec& y) {
                      auto inv = invariants(y[0], y[1]);
                      return std::min(barrier * (1.0 - 1e-12) - inv.eta, -y[1] - 1e-14);
                    },
                    +1, true, "collapse_certificate"});

  const double th0 = lambda * s0.t;
  auto res = solver.integrate(th0, y0, th0 + lambda * horizon, events);
  if (res.status == OdeStatus::EventStop) {
    if (res.event.index == 0 || res.event.index == 1 || res.event.index == 3)
      return RayOutcome::Collapses;
    return RayOutcome::Expands;
  }
  if (res.status == OdeStatus::StepFailure) return RayOutcome::Undecided;
  // horizon reached without certificate: hugging the cylinder? (normal-form units)
  if (std::abs(res.y[0] - barrier) < hug_band) return RayOutcome::CylinderBand;
  return RayOutcome::Undecided;
}

inline Classification classify(const SphSymState& s0, double horizon = 50.0) {
  s0.validate();
  Classification out;
  const double barrier = double(s0.d) / s0.curvature();
  if (std::abs(s0.f - barrier) < 1e-12 && std::abs(s0.df) < 1e-12) {
    out.kind = Classification::Kind::StaticCylinder;
    out.future = out.past = RayOutcome::CylinderBand;
    out.evidence = "exact static data f = d/c, f' = 0";
    return out;
  }
  out.future = classify_ray(s0, horizon, false);
  out.past = classify_ray(s0, horizon, true);
  using K = Classification::Kind;
  using R = RayOutcome;
  if (out.future == R::Expands && out.past == R::Expands) out.kind = K::Expanding;
  else if (out.future == R::Collapses && out.past == R::Collapses) out.kind = K::BigBangBigCrunch;
  else if (out.future == R::Expands && out.past == R::Collapses) out.kind = K::CollapsePastExpandFuture;
  else if (out.future == R::Collapses && out.past == R::Expands) out.kind = K::ExpandPastCollapseFuture;
  else if (out.future == R::CylinderBand && out.past == R::Collapses) out.kind = K::CollapsePastToCylinder;
  else if (out.future == R::Collapses && out.past == R::CylinderBand) out.kind = K::ToCylinderPastCollapseFuture;
  else if (out.future == R::Expands && out.past == R::CylinderBand) out.kind = K::FromCylinderExpandFuture;
  else if (out.future == R::CylinderBand && out.past == R::Expands) out.kind = K::ExpandPastToCylinder;
  else out.kind = K::Undecided;
  out.evidence = std::string("future=") + to_string(out.future) + " past=" + to_string(out.past);
  // near-separatrix bands are reported as Undecided (they cannot be decided
  // in finite time); the composite kind is kept in evidence.
  if (out.future == R::CylinderBand || out.past == R::CylinderBand) {
    out.evidence += std::string(" band_guess=") + to_string(out.kind);
    out.kind = K::Undecided;
  }
  return out;
}

// ---------------------------------------------------------------------------
// separatrix slopes

enum class Direction { Future, Past };

// lambda_+(r0) (Direction::Future) or lambda_-(r0): the unique initial slope
// at radius r0 whose ray converges to the cylinder, found by bisecting
// between the open collapse and expansion sets.
inline double separatrix_lambda(double r0, int d, Direction dir, double horizon = 50.0,
                                double tol = 1e-10) {
  require(r0 > 0.0, "separatrix_lambda: r0 > 0");
  const bool past = (dir == Direction::Past);
  auto outcome = [&](double lam) {
    SphSymState s{r0, lam, 0.0, d, double(d + 1)};
    return classify_ray(s, horizon, past);
  };
  // In the bisection direction, expansion sits at larger slope for the future
  // ray and at smaller slope for the past ray.
  auto is_high = [&](RayOutcome o) {
    if (o == RayOutcome::Expands) return !past;
    if (o == RayOutcome::Collapses) return past;
    // hugging band: measure-zero sliver around the separatrix; assign to the
    // collapse side of the bracket
    return past;
  };
  double lo = -1.0 + 1e-9, hi = 1.0 - 1e-9;
  RayOutcome olo = outcome(lo), ohi = outcome(hi);
  if (is_high(olo) == is_high(ohi))
    throw domain_error("separatrix_lambda: horizon too small to bracket the separatrix");
  if (is_high(olo)) std::swap(lo, hi);
  // invariant: lo on the low side, hi on the high side
  while (std::abs(hi - lo) > tol) {
    double mid = 0.5 * (lo + hi);
    if (is_high(outcome(mid)))
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// asymptotics

struct Tau0Estimate {
  double tau0;
  double error_bound;
};

// tau_0 = lim (t - f(t)) for a future-expanding run. Every expanding profile
// has eta -> 1, i.e. f(t) ~ <t - tau0>, so t - f + 1/(2f) converges at
// O(1/t^3) instead of the O(1/t) of the raw difference.
inline Tau0Estimate extract_tau0(const RunRecord& run) {
  require(run.termination == Termination::ReachedHorizonTime, "extract_tau0: run must reach its horizon");
  const Sample& last = run.samples.back();
  require(last.df > 0.5 && last.f > 2.0, "extract_tau0: run is not in the expanding regime");
  const double tau0 = last.t - last.f + 0.5 / last.f;
  const double bound = (std::abs(last.eta - 1.0) + 1.0 / sqr(last.f)) / last.f;
  return {tau0, bound};
}

struct CollapseProfile {
  double T;                  // extinction time
  double rate_constant;      // sup sqrt(1-f'^2)/(T-t) over the window
  double abs_rate_constant;  // sup (1-|f'|)/(T-t)
  double eta_constant;       // sup eta/(T-t)^2
};

// Rate constants over the last resolved decade before the collapse time,
// evaluated on the dense output at log-spaced offsets. The window runs from
// 1e-1 down to the resolution limit (the integration stops where 1-f'^2
// leaves double range, so offsets below T - t_last are not available).
inline CollapseProfile collapse_profile(const RunRecord& run) {
  require(run.termination == Termination::CollapseDetected, "collapse_profile: no collapse detected");
  const double T = run.event_time;
  const bool future_collapse = T >= run.samples.front().t + 1e-15 &&
                               std::abs(T - run.samples.back().t) < std::abs(T - run.samples.front().t);
  const double t_edge = future_collapse ? run.samples.back().t : run.samples.front().t;
  const double off_min = std::max(1.02 * std::abs(T - t_edge), 1e-5);
  const double off_max = 1e-1;
  require(off_min < off_max, "collapse_profile: insufficient samples near T");
  CollapseProfile out{T, 0.0, 0.0, 0.0};
  int n_used = 0;
  for (int i = 0; i < 200; ++i) {
    double off = off_min * std::pow(off_max / off_min, double(i) / 199.0);
    double t = future_collapse ? T - off : T + off;
    if (!run.covers(t)) continue;
    double f, df;
    run.eval(t, &f, &df);
    if (std::abs(df) >= 1.0) continue;
    double root = std::sqrt(one_minus_sq(df));
    out.rate_constant = std::max(out.rate_constant, root / off);
    out.abs_rate_constant = std::max(out.abs_rate_constant, (1.0 - std::abs(df)) / off);
    out.eta_constant = std::max(out.eta_constant, f * root / sqr(off));
    ++n_used;
  }
  require(n_used >= 20, "collapse_profile: not enough resolved samples near T");
  return out;
}

struct MaxPrincipleReport {
  bool degenerate = false;  // identical solutions
  int n_maxima = 0;
  int n_minima = 0;
  bool pass = false;
};

// Counts strict interior extrema of (f2-f1)^2 on the common time interval.
// The maximum principle allows at most one critical point, a minimum.
inline MaxPrincipleReport max_principle_check(const RunRecord& a, const RunRecord& b,
                                              int n_grid = 2001) {
  double lo = std::max(a.samples.front().t, b.samples.front().t);
  double hi = std::min(a.samples.back().t, b.samples.back().t);
  require(hi > lo, "max_principle_check: runs share no time interval");
  std::vector<double> dsq(static_cast<std::size_t>(n_grid), 0.0);
  double scale = 0.0;
  for (int i = 0; i < n_grid; ++i) {
    double t = lo + (hi - lo) * double(i) / double(n_grid - 1);
    double fa, fb;
    a.eval(t, &fa, nullptr);
    b.eval(t, &fb, nullptr);
    dsq[std::size_t(i)] = sqr(fb - fa);
    scale = std::max(scale, dsq[std::size_t(i)]);
  }
  MaxPrincipleReport rep;
  if (scale < 1e-26) {
    rep.degenerate = true;  // lemma requires distinct solutions
    return rep;
  }
  const double tol = 1e-12 * scale;
  for (int i = 1; i + 1 < n_grid; ++i) {
    double l = dsq[std::size_t(i - 1)], m = dsq[std::size_t(i)], r = dsq[std::size_t(i + 1)];
    if (m > l + tol && m > r + tol) ++rep.n_maxima;
    if (m < l - tol && m < r - tol) ++rep.n_minima;
  }
  rep.pass = rep.n_maxima == 0 && rep.n_minima <= 1;
  return rep;
}

}  // namespace rotsym
}  // namespace cmcflow
