#pragma once

// Adaptive embedded Runge-Kutta 5(4) (Dormand-Prince) with FSAL, a PI step
// controller, fourth-order dense output, and event location by bisection on
// the dense interpolant. Shared by the radial ODE, the zeta flow, the mode
// ODEs and the 1+1 method-of-lines solvers.

#include <array>
#include <functional>
#include <vector>

#include "cmcflow/jb.hpp"

namespace cmcflow {

using StateVec = std::vector<double>;
using OdeRhs = std::function<void(double t, const StateVec& y, StateVec& dydt)>;

// Dense-output record of one accepted step: y(t0 + theta*h) for theta in [0,1].
struct DenseStep {
  double t0 = 0.0, h = 0.0;
  std::vector<std::array<double, 5>> rcont;  // per component

  double t1() const { return t0 + h; }

  void eval(double t, StateVec& y) const {
    const double th = (t - t0) / h, th1 = 1.0 - th;
    y.resize(rcont.size());
    for (std::size_t i = 0; i < rcont.size(); ++i) {
      const auto& r = rcont[i];
      y[i] = r[0] + th * (r[1] + th1 * (r[2] + th * (r[3] + th1 * r[4])));
    }
  }

  // d/dt of the interpolant; used for residual re-substitution checks.
  // p(th) = r0 + r1 th + r2 th(1-th) + r3 th^2(1-th) + r4 th^2(1-th)^2
  void eval_derivative(double t, StateVec& dy) const {
    const double th = (t - t0) / h;
    dy.resize(rcont.size());
    for (std::size_t i = 0; i < rcont.size(); ++i) {
      const auto& r = rcont[i];
      double dp = r[1] + r[2] * (1.0 - 2.0 * th) + r[3] * (2.0 * th - 3.0 * th * th) +
                  r[4] * (2.0 * th - 6.0 * th * th + 4.0 * th * th * th);
      dy[i] = dp / h;
    }
  }
};

struct EventSpec {
  std::function<double(double t, const StateVec& y)> fn;
  int direction = 0;   // -1: down-crossing, +1: up, 0: any
  bool terminal = true;
  const char* name = "event";
};

struct EventHit {
  int index = -1;
  double t = 0.0;
  StateVec y;
};

enum class OdeStatus { ReachedEnd, EventStop, StepFailure };

struct OdeOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  double h_init = 0.0;  // 0: automatic
  double h_max = 0.0;   // 0: |t_end - t0|
  std::size_t max_steps = 20'000'000;
};

struct OdeResult {
  OdeStatus status = OdeStatus::ReachedEnd;
  EventHit event;
  double t = 0.0;
  StateVec y;
  std::size_t n_accepted = 0, n_rejected = 0;
};

class Dopri5 {
 public:
  Dopri5(OdeRhs rhs, OdeOptions opts = {}) : f_(std::move(rhs)), o_(opts) {}

  // Integrate from (t0,y0) to t_end (either direction). The observer is
  // called with each accepted DenseStep; events are located by bisection and
  // stop the run when terminal.
  OdeResult integrate(double t0, StateVec y0, double t_end,
                      const std::vector<EventSpec>& events = {},
                      const std::function<void(const DenseStep&)>& observer = {}) {
    const std::size_t n = y0.size();
    OdeResult res;
    const double dir = (t_end >= t0) ? 1.0 : -1.0;
    double h_max = o_.h_max > 0 ? o_.h_max : std::abs(t_end - t0);
    StateVec y = std::move(y0);
    std::array<StateVec, 7> k;
    for (auto& ki : k) ki.assign(n, 0.0);
    StateVec ytmp(n), yerr(n), ynew(n);
    f_(t0, y, k[0]);

    double h = o_.h_init > 0 ? o_.h_init : initial_step(t0, y, k[0], dir);
    h = std::min(h, h_max) * dir;
    double t = t0;
    double err_old = 1e-4;
    std::vector<double> ev_prev(events.size());
    for (std::size_t e = 0; e < events.size(); ++e) ev_prev[e] = events[e].fn(t, y);

    while (dir * (t_end - t) > 0) {
      if (res.n_accepted + res.n_rejected > o_.max_steps) {
        res.status = OdeStatus::StepFailure;
        break;
      }
      if (std::abs(h) < 1e-14 * std::max(1.0, std::abs(t))) {
        res.status = OdeStatus::StepFailure;
        break;
      }
      if (dir * (t + h - t_end) > 0) h = t_end - t;

      // stages
      for (int s = 1; s < 7; ++s) {
        for (std::size_t i = 0; i < n; ++i) {
          double acc = 0.0;
          for (int j = 0; j < s; ++j) acc += A[s][j] * k[j][i];
          ytmp[i] = y[i] + h * acc;
        }
        f_(t + C[s] * h, ytmp, k[s]);
      }
      // k[6] is f at the new point (FSAL); ynew is stage-7 input ytmp.
      ynew = ytmp;
      double err = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        double e = 0.0;
        for (int j = 0; j < 7; ++j) e += E[j] * k[j][i];
        e *= h;
        double sc = o_.atol + o_.rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
        err += sqr(e / sc);
      }
      err = std::sqrt(err / double(n));

      if (err <= 1.0) {
        DenseStep ds = make_dense(t, h, y, ynew, k);
        double t_new = t + h;
        // event check on the accepted step
        int hit_idx = -1;
        double hit_t = 0.0;
        for (std::size_t e = 0; e < events.size(); ++e) {
          double g1 = events[e].fn(t_new, ynew);
          bool crossed = detect_crossing(events[e], ds, ev_prev[e], g1, t, t_new, hit_t);
          if (crossed && (hit_idx < 0 || dir * hit_t < dir * res.event.t)) {
            hit_idx = int(e);
            res.event.index = int(e);
            res.event.t = hit_t;
          }
          ev_prev[e] = g1;
        }
        if (hit_idx >= 0 && events[std::size_t(hit_idx)].terminal) {
          ds.eval(res.event.t, res.event.y);
          // observers get the full last step; samples past event.t are theirs to drop
          if (observer) observer(ds);
          res.status = OdeStatus::EventStop;
          res.t = res.event.t;
          res.y = res.event.y;
          ++res.n_accepted;
          return res;
        }
        if (observer) observer(ds);
        ++res.n_accepted;
        t = t_new;
        y = ynew;
        k[0] = k[6];  // FSAL
        // PI controller
        double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.7 / 5.0) *
                     std::pow(err_old, 0.4 / 5.0);
        fac = std::min(5.0, std::max(0.2, fac));
        err_old = std::max(err, 1e-10);
        h *= fac;
        if (std::abs(h) > h_max) h = dir * h_max;
      } else {
        ++res.n_rejected;
        double fac = std::max(0.2, 0.9 * std::pow(err, -0.2));
        h *= fac;
      }
    }
    if (res.status == OdeStatus::ReachedEnd) {
      res.t = t;
      res.y = y;
    } else {
      res.t = t;
      res.y = y;
    }
    return res;
  }

 private:
  static bool detect_crossing(const EventSpec& ev, const DenseStep& ds, double g0, double g1,
                              double t0, double t1, double& t_hit) {
    auto ok_dir = [&](double a, double b) {
      if (ev.direction > 0) return a < 0 && b >= 0;
      if (ev.direction < 0) return a > 0 && b <= 0;
      return (a <= 0) != (b <= 0);
    };
    // sample a few interior points so short-lived crossings are not missed
    const int m = 8;
    StateVec ytmp;
    double ta = t0, ga = g0;
    for (int s = 1; s <= m; ++s) {
      double tb = t0 + (t1 - t0) * double(s) / double(m);
      double gb;
      if (s == m) {
        gb = g1;
      } else {
        ds.eval(tb, ytmp);
        gb = ev.fn(tb, ytmp);
      }
      if (ok_dir(ga, gb)) {
        // bisection to |dt| <= event_tol
        double lo = ta, hi = tb, glo = ga;
        while (std::abs(hi - lo) > 1e-12) {
          double mid = 0.5 * (lo + hi);
          ds.eval(mid, ytmp);
          double gm = ev.fn(mid, ytmp);
          if (ok_dir(glo, gm)) {
            hi = mid;
          } else {
            lo = mid;
            glo = gm;
          }
        }
        t_hit = hi;
        return true;
      }
      ta = tb;
      ga = gb;
    }
    return false;
  }

  double initial_step(double t0, const StateVec& y, const StateVec& f0, double dir) const {
    double d0 = 0.0, d1 = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      double sc = o_.atol + o_.rtol * std::abs(y[i]);
      d0 += sqr(y[i] / sc);
      d1 += sqr(f0[i] / sc);
    }
    d0 = std::sqrt(d0 / double(y.size()));
    d1 = std::sqrt(d1 / double(y.size()));
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    (void)t0;
    (void)dir;
    return h0;
  }

  static DenseStep make_dense(double t, double h, const StateVec& y0, const StateVec& y1,
                              const std::array<StateVec, 7>& k) {
    DenseStep ds;
    ds.t0 = t;
    ds.h = h;
    const std::size_t n = y0.size();
    ds.rcont.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      double ydiff = y1[i] - y0[i];
      double bspl = h * k[0][i] - ydiff;
      ds.rcont[i][0] = y0[i];
      ds.rcont[i][1] = ydiff;
      ds.rcont[i][2] = bspl;
      ds.rcont[i][3] = ydiff - h * k[6][i] - bspl;
      ds.rcont[i][4] = h * (D[0] * k[0][i] + D[2] * k[2][i] + D[3] * k[3][i] +
                            D[4] * k[4][i] + D[5] * k[5][i] + D[6] * k[6][i]);
    }
    return ds;
  }

  OdeRhs f_;
  OdeOptions o_;

  static constexpr double C[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
  static constexpr double A[7][6] = {
      {0, 0, 0, 0, 0, 0},
      {1.0 / 5, 0, 0, 0, 0, 0},
      {3.0 / 40, 9.0 / 40, 0, 0, 0, 0},
      {44.0 / 45, -56.0 / 15, 32.0 / 9, 0, 0, 0},
      {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729, 0, 0},
      {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656, 0},
      {35.0 / 384, 0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
  // b5 - b4 (error weights)
  static constexpr double E[7] = {
      35.0 / 384 - 5179.0 / 57600, 0.0, 500.0 / 1113 - 7571.0 / 16695,
      125.0 / 192 - 393.0 / 640,   -2187.0 / 6784 + 92097.0 / 339200,
      11.0 / 84 - 187.0 / 2100,    -1.0 / 40};
  // dense output weights
  static constexpr double D[7] = {-12715105075.0 / 11282082432.0,
                                  0.0,
                                  87487479700.0 / 32700410799.0,
                                  -10690763975.0 / 1880347072.0,
                                  701980252875.0 / 199316789632.0,
                                  -1453857185.0 / 822651844.0,
                                  69997945.0 / 29380423.0};
};

}  // namespace cmcflow
