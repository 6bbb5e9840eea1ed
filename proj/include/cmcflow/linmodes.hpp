#pragma once

// Linearized CPMC dynamics on dS: per-mode ODEs of Box phi + (d+1) phi = 0,
// the exact ell = 0 solution, the renormalized mode energy and its
// monotonicity, and the 1+1 linear evolution on the circle (spectral
// diagonalization and collocation method-of-lines, cross-checking each
// other) with the multi-bump horizon construction.

#include <functional>
#include <vector>

#include "cmcflow/dsgeom.hpp"
#include "cmcflow/fft.hpp"
#include "cmcflow/jb.hpp"
#include "cmcflow/linalg.hpp"
#include "cmcflow/ode.hpp"

namespace cmcflow {
namespace linmodes {

// Laplacian eigenvalue on S^d for angular momentum ell. The translation
// mode psi_1 = <t> Y_1 forces lambda(1,d) = d, i.e. the standard spectrum
// ell(ell + d - 1).
inline double eigenvalue(int ell, int d) {
  require(ell >= 0, "eigenvalue: ell >= 0");
  return double(ell) * double(ell + d - 1);
}

struct ModeState {
  int ell = 0;
  int d = 1;
  double t = 0.0;
  double psi = 0.0;
  double dpsi = 0.0;
};

// psi'' = ((d+1) psi - (d+1) t psi' - lambda psi / <t>^2) / <t>^2
inline double mode_rhs(const ModeState& m) {
  const double lam = eigenvalue(m.ell, m.d);
  return (double(m.d + 1) * m.psi - double(m.d + 1) * m.t * m.dpsi - lam * m.psi / jb2(m.t)) /
         jb2(m.t);
}

// Adaptive Simpson quadrature (absolute tolerance).
namespace detail {
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double fa, double fm, double fb, double whole, double tol,
                               int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}
}  // namespace detail

inline double quad(const std::function<double(double)>& f, double a, double b,
                   double tol = 1e-12) {
  if (a == b) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 48);
}

// Exact ell = 0 solution psi_0(t) = t (Cp + int_{t_ref}^t C / (s^2 <s>^{d+1}) ds).
inline double ell0_exact(double t, double C, double Cp, double t_ref, int d) {
  require(t * t_ref > 0.0, "ell0_exact: t and t_ref must share a sign (integrand singular at 0)");
  double hat = Cp;
  if (C != 0.0)
    hat += C * quad([d](double s) { return 1.0 / (s * s * std::pow(jb(s), double(d + 1))); },
                    t_ref, t);
  return t * hat;
}

struct ModeRun {
  std::vector<double> t, psi, dpsi;
  std::size_t n_accepted = 0;

  double psi_at_end() const { return psi.back(); }
};

inline ModeRun integrate_mode(const ModeState& m0, double t_end, double rtol = 1e-11,
                              double atol = 1e-13) {
  const double lam = eigenvalue(m0.ell, m0.d);
  const int d = m0.d;
  Dopri5 solver([lam, d](double t, const StateVec& y, StateVec& dy) {
    dy.resize(2);
    dy[0] = y[1];
    dy[1] = (double(d + 1) * y[0] - double(d + 1) * t * y[1] - lam * y[0] / jb2(t)) / jb2(t);
  }, OdeOptions{rtol, atol});
  ModeRun run;
  auto push = [&](double t, const StateVec& y) {
    run.t.push_back(t);
    run.psi.push_back(y[0]);
    run.dpsi.push_back(y[1]);
  };
  push(m0.t, {m0.psi, m0.dpsi});
  StateVec ytmp;
  auto res = solver.integrate(m0.t, {m0.psi, m0.dpsi}, t_end, {}, [&](const DenseStep& ds) {
    ds.eval(ds.t1(), ytmp);
    push(ds.t1(), ytmp);
  });
  require(res.status == OdeStatus::ReachedEnd, "integrate_mode: step failure");
  run.n_accepted = res.n_accepted;
  return run;
}

// Renormalized mode variables vphi = psi/<t>, vphi' computed analytically.
struct Renormalized {
  double vphi;
  double dvphi;
};

inline Renormalized renormalize(double t, double psi, double dpsi) {
  const double r = jb(t);
  return {psi / r, dpsi / r - t * psi / (r * r * r)};
}

// Per-mode energy E = <t>^4 vphi'^2 + (lambda - d) vphi^2; along solutions
// dE/dt = -2(d+1) t <t>^2 vphi'^2, so E is nonincreasing for t > 0. For
// ell = 1 the energy is positive semi-definite (lambda = d); coercive for
// ell > 1.
inline double mode_energy(const ModeState& m) {
  const double lam = eigenvalue(m.ell, m.d);
  auto rn = renormalize(m.t, m.psi, m.dpsi);
  return std::pow(jb(m.t), 4.0) * sqr(rn.dvphi) + (lam - double(m.d)) * sqr(rn.vphi);
}

inline double mode_energy_rate(const ModeState& m) {
  auto rn = renormalize(m.t, m.psi, m.dpsi);
  return -2.0 * double(m.d + 1) * m.t * jb2(m.t) * sqr(rn.dvphi);
}

// ---------------------------------------------------------------------------
// 1+1 linear field on the circle (d = 1)

struct LinearField1D {
  double t = 0.0;
  std::vector<double> phi, dphi;  // N equispaced points, N a power of two

  std::size_t n() const { return phi.size(); }
  void validate() const {
    require(is_pow2(n()) && n() >= 16, "LinearField1D: N must be a power of two, >= 16");
    require(dphi.size() == phi.size(), "LinearField1D: phi/dphi size mismatch");
  }
};

struct LinearTrajectory {
  std::vector<double> times;
  std::vector<LinearField1D> snapshots;
};

// Method A: exact diagonalization into Fourier modes, each integrated by the
// mode ODE (lambda = k^2 on S^1).
inline LinearField1D evolve_linear_spectral(const LinearField1D& f0, double t_end,
                                            double rtol = 1e-11) {
  f0.validate();
  const std::size_t n = f0.n();
  auto a = spectrum(f0.phi);
  auto b = spectrum(f0.dphi);
  for (std::size_t k = 0; k < n; ++k) {
    const int kk = std::abs(wavenumber(k, n));
    const double lam = double(kk) * double(kk);
    const int d = 1;
    Dopri5 solver([lam, d](double t, const StateVec& y, StateVec& dy) {
      dy.resize(2);
      dy[0] = y[1];
      dy[1] = (double(d + 1) * y[0] - double(d + 1) * t * y[1] - lam * y[0] / jb2(t)) / jb2(t);
    }, OdeOptions{rtol, 1e-14});
    // real and imaginary parts evolve independently
    StateVec yr = {a[k].real(), b[k].real()}, yi = {a[k].imag(), b[k].imag()};
    auto rr = solver.integrate(f0.t, yr, t_end);
    auto ri = solver.integrate(f0.t, yi, t_end);
    require(rr.status == OdeStatus::ReachedEnd && ri.status == OdeStatus::ReachedEnd,
            "evolve_linear_spectral: step failure");
    a[k] = {rr.y[0], ri.y[0]};
    b[k] = {rr.y[1], ri.y[1]};
  }
  LinearField1D out;
  out.t = t_end;
  out.phi = from_spectrum(std::move(a));
  out.dphi = from_spectrum(std::move(b));
  return out;
}

// Method B: collocation method of lines on the grid.
inline LinearTrajectory evolve_linear_collocation(const LinearField1D& f0, double t_end,
                                                  const std::vector<double>& snap_times,
                                                  double rtol = 1e-10) {
  f0.validate();
  const std::size_t n = f0.n();
  const int d = 1;
  Dopri5 solver([n, d](double t, const StateVec& y, StateVec& dy) {
    std::vector<double> phi(y.begin(), y.begin() + long(n));
    auto lap = spectral_derivative(phi, 2);
    dy.resize(2 * n);
    for (std::size_t j = 0; j < n; ++j) {
      dy[j] = y[n + j];
      dy[n + j] = (double(d + 1) * y[j] - double(d + 1) * t * y[n + j] + lap[j] / jb2(t)) / jb2(t);
    }
  }, OdeOptions{rtol, 1e-13});

  StateVec y0(2 * n);
  for (std::size_t j = 0; j < n; ++j) {
    y0[j] = f0.phi[j];
    y0[n + j] = f0.dphi[j];
  }
  LinearTrajectory traj;
  std::size_t next = 0;
  double t_cur = f0.t;
  StateVec y = y0;
  auto record = [&](double t, const StateVec& yv) {
    LinearField1D s;
    s.t = t;
    s.phi.assign(yv.begin(), yv.begin() + long(n));
    s.dphi.assign(yv.begin() + long(n), yv.end());
    traj.times.push_back(t);
    traj.snapshots.push_back(std::move(s));
  };
  std::vector<double> stops = snap_times;
  if (stops.empty() || stops.back() < t_end) stops.push_back(t_end);
  for (double ts : stops) {
    auto res = solver.integrate(t_cur, y, ts);
    require(res.status == OdeStatus::ReachedEnd, "evolve_linear_collocation: step failure");
    y = res.y;
    t_cur = ts;
    record(ts, y);
    next++;
  }
  return traj;
}

// ---------------------------------------------------------------------------
// multi-bump data (horizon scenarios)

// C-infinity ramp: 0 for x <= 0, 1 for x >= 1.
inline double smooth_step(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double h0 = std::exp(-1.0 / x), h1 = std::exp(-1.0 / (1.0 - x));
  return h0 / (h0 + h1);
}

// bump with unit plateau |theta - center| <= r_plateau, support radius r_outer
inline double bump(double theta, double center, double r_plateau, double r_outer) {
  double dtheta = std::remainder(theta - center, 2.0 * 3.14159265358979323846);
  double ad = std::abs(dtheta);
  if (ad <= r_plateau) return 1.0;
  if (ad >= r_outer) return 0.0;
  return smooth_step((r_outer - ad) / (r_outer - r_plateau));
}

// angular radius of the domain of dependence of a point from time t0 on:
// integral of the coordinate light speed <s>^-2 from t0 to infinity.
inline double dependence_radius(double t0) {
  return 3.14159265358979323846 / 2.0 - std::atan(t0);
}

struct MultibumpSpec {
  std::vector<double> centers;           // omega_i on S^1
  std::vector<int> forbidden_harmonics;  // Fourier indices k >= 1 (both cos and sin suppressed)
  double t0 = 8.0;
  std::size_t n = 256;
  double r_plateau = 0.0;  // 0: automatic
  double r_outer = 0.0;
};

struct MultibumpData {
  LinearField1D field;
  std::vector<double> eps;  // solved amplitudes, eps[0] = 1
  double max_projection;    // residual of the forbidden-harmonic constraints
};

// Data phi = t0 * sum eps_i B_i, dphi = sum eps_i B_i with the forbidden
// Fourier projections removed by a linear solve with eps_1 = 1.
inline MultibumpData multibump_data(const MultibumpSpec& spec) {
  const std::size_t nb = spec.centers.size();
  require(nb >= 1, "multibump_data: need at least one bump");
  require(2 * spec.forbidden_harmonics.size() + 1 <= nb,
          "multibump_data: need more bumps than constraint rows (2 per harmonic)");
  const double pi = 3.14159265358979323846;
  double min_sep = 2.0 * pi;
  for (std::size_t i = 0; i < nb; ++i)
    for (std::size_t j = i + 1; j < nb; ++j)
      min_sep = std::min(min_sep, std::abs(std::remainder(spec.centers[i] - spec.centers[j], 2.0 * pi)));
  const double rho0 = dependence_radius(spec.t0);
  double r_outer = spec.r_outer > 0 ? spec.r_outer : (nb > 1 ? 0.45 * min_sep : 1.0);
  double r_plateau = spec.r_plateau > 0 ? spec.r_plateau : 2.0 * rho0;
  require(r_plateau < r_outer, "multibump_data: plateau exceeds support; raise t0 or separate bumps");
  require(nb == 1 || 2.0 * r_outer < min_sep + 1e-12, "multibump_data: bump supports overlap");

  // bump samples
  const std::size_t n = spec.n;
  std::vector<std::vector<double>> B(nb, std::vector<double>(n));
  for (std::size_t i = 0; i < nb; ++i)
    for (std::size_t j = 0; j < n; ++j)
      B[i][j] = bump(2.0 * pi * double(j) / double(n), spec.centers[i], r_plateau, r_outer);

  // constraints: for each forbidden k, <sum eps_i B_i, cos k theta> = 0 and sin
  std::vector<std::vector<double>> rows;
  for (int k : spec.forbidden_harmonics) {
    std::vector<double> rc(nb, 0.0), rs(nb, 0.0);
    for (std::size_t i = 0; i < nb; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        double th = 2.0 * pi * double(j) / double(n);
        rc[i] += B[i][j] * std::cos(k * th);
        rs[i] += B[i][j] * std::sin(k * th);
      }
    rows.push_back(rc);
    rows.push_back(rs);
  }
  std::vector<double> eps(nb, 0.0);
  eps[0] = 1.0;
  if (!rows.empty()) {
    // solve rows * eps = 0 with eps[0] = 1 by least squares on eps[1..]
    const std::size_t m = rows.size(), p = nb - 1;
    Mat ata(p, p);
    std::vector<double> atb(p, 0.0);
    for (std::size_t r = 0; r < m; ++r) {
      for (std::size_t i = 0; i < p; ++i) {
        atb[i] -= rows[r][i + 1] * rows[r][0];
        for (std::size_t j = 0; j < p; ++j) ata(i, j) += rows[r][i + 1] * rows[r][j + 1];
      }
    }
    // regularize the normal equations at machine scale
    for (std::size_t i = 0; i < p; ++i) ata(i, i) += 1e-13;
    auto x = lu_solve(ata, atb);
    for (std::size_t i = 0; i < p; ++i) eps[i + 1] = x[i];
  }

  MultibumpData out;
  out.eps = eps;
  out.field.t = spec.t0;
  out.field.phi.assign(n, 0.0);
  out.field.dphi.assign(n, 0.0);
  for (std::size_t i = 0; i < nb; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      out.field.phi[j] += spec.t0 * eps[i] * B[i][j];
      out.field.dphi[j] += eps[i] * B[i][j];
    }
  // verify the projections by quadrature
  out.max_projection = 0.0;
  for (int k : spec.forbidden_harmonics) {
    double pc = 0.0, ps = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      double th = 2.0 * pi * double(j) / double(n);
      pc += out.field.phi[j] * std::cos(k * th) * (2.0 * pi / double(n));
      ps += out.field.phi[j] * std::sin(k * th) * (2.0 * pi / double(n));
    }
    out.max_projection = std::max({out.max_projection, std::abs(pc), std::abs(ps)});
  }
  return out;
}

}  // namespace linmodes
}  // namespace cmcflow
