#pragma once

// Inverse-Gauss-map gauge algebra and the spherically symmetric IGM flow:
// the constraint eta(zeta), the deformation operator A = dPhi and its
// inverse, psi = A^{-1} - I with trace psi = 0 encoding constant mean
// curvature, the zeta evolution and its decay, the coefficient operator B
// acting on curl-type 3-tensors, the background source tensor M_abc, and
// residual evaluators for the first-order divergence-curl system.
//
// All tensors are orthonormal-frame components (frame metric diag(-1,1..1),
// index 0 = tau); self-adjointness with respect to the frame metric is
// matrix symmetry of eta * A.

#include <algorithm>
#include <vector>

#include "cmcflow/dsgeom.hpp"
#include "cmcflow/fields.hpp"
#include "cmcflow/jb.hpp"
#include "cmcflow/linalg.hpp"
#include "cmcflow/ode.hpp"

namespace cmcflow {
namespace igm {

struct GaussMapDegenerate : domain_error {
  explicit GaussMapDegenerate(const std::string& w) : domain_error(w) {}
};

inline void require_invertible(double zeta, int d) {
  if (!(zeta > -1.0 / double(d + 1) + 1e-10))
    throw GaussMapDegenerate("igm: zeta <= -1/(d+1), Gauss map not invertible");
}

inline double nu_of(double zeta, int d) { return double(d + 1) * zeta + 1.0; }

// eta = zeta (1+zeta) / (zeta + 1/(d+1))
inline double eta_from_zeta(double zeta, int d) {
  require_invertible(zeta, d);
  return zeta * (1.0 + zeta) / (zeta + 1.0 / double(d + 1));
}

struct IGMState {
  double zeta = 0.0;
  double t = 0.0;
  int d = 1;

  double nu() const { return nu_of(zeta, d); }
  double eta() const { return eta_from_zeta(zeta, d); }
  void validate() const { require_invertible(zeta, d); }
};

struct AEigen {
  double lam_time;   // (1+zeta)/nu
  double lam_space;  // 1+zeta, multiplicity d
};

inline AEigen A_eigen(double zeta, int d) {
  require_invertible(zeta, d);
  const double nu = nu_of(zeta, d);
  return {(1.0 + zeta) / nu, 1.0 + zeta};
}

// Mixed frame components of A = (1+zeta)[(delta + tau tau) - nu^{-1} tau tau]:
// diag((1+zeta)/nu, (1+zeta), ..., (1+zeta)).
inline Mat A_matrix(double zeta, int d) {
  auto ev = A_eigen(zeta, d);
  Mat a = Mat::identity(std::size_t(d + 1));
  a(0, 0) = ev.lam_time;
  for (int i = 1; i <= d; ++i) a(std::size_t(i), std::size_t(i)) = ev.lam_space;
  return a;
}

inline Mat A_inv_matrix(double zeta, int d) {
  auto ev = A_eigen(zeta, d);
  Mat a = Mat::identity(std::size_t(d + 1));
  a(0, 0) = 1.0 / ev.lam_time;
  for (int i = 1; i <= d; ++i) a(std::size_t(i), std::size_t(i)) = 1.0 / ev.lam_space;
  return a;
}

// phi = A - I for the spherically symmetric state: eta tau_a tau^c + zeta delta.
inline Mat phi_matrix(double zeta, int d) {
  Mat phi = A_matrix(zeta, d);
  for (std::size_t i = 0; i < phi.rows(); ++i) phi(i, i) -= 1.0;
  return phi;
}

// psi from phi (mixed frame components): (I+psi)(I+phi) = I.
inline Mat psi_from_phi(const Mat& phi) {
  const std::size_t n = phi.rows();
  Mat a = phi;
  for (std::size_t i = 0; i < n; ++i) a(i, i) += 1.0;
  Mat inv;
  try {
    inv = inverse(a);
  } catch (const domain_error&) {
    throw GaussMapDegenerate("psi_from_phi: I + phi is singular");
  }
  for (std::size_t i = 0; i < n; ++i) inv(i, i) -= 1.0;
  return inv;
}

inline double trace(const Mat& m) {
  double s = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) s += m(i, i);
  return s;
}

// pointwise |.|_{gbar,tau} of mixed frame components: Euclidean norm after
// the hat-metric contraction, which in the orthonormal frame is the plain
// Frobenius norm.
inline double frame_norm(const Mat& m) { return m.frobenius(); }

struct BoundsReport {
  double phi_norm;
  double psi_norm;
  double trace_phi;
  double c_psi;        // |psi|/|phi|
  double c_trace;      // |tr phi|/|phi|^2
  bool in_regime;      // |phi| < 1/2
  bool cmc_consistent; // |tr psi| small
};

// Empirical constants for |psi| <~ |phi| and |tr phi| <~ |phi|^2 in the
// smallness regime.
inline BoundsReport pointwise_bounds_check(const Mat& phi) {
  BoundsReport r{};
  r.phi_norm = frame_norm(phi);
  Mat psi = psi_from_phi(phi);
  r.psi_norm = frame_norm(psi);
  r.trace_phi = trace(phi);
  r.in_regime = r.phi_norm < 0.5;
  r.cmc_consistent = std::abs(trace(psi)) < 1e-10;
  r.c_psi = r.phi_norm > 0 ? r.psi_norm / r.phi_norm : 0.0;
  r.c_trace = r.phi_norm > 0 ? std::abs(r.trace_phi) / sqr(r.phi_norm) : 0.0;
  return r;
}

// d zeta / dt = -(t/(1+t^2)) ((1+zeta)/(1/(d+1)+zeta)) zeta
inline double zeta_rhs(double t, double zeta, int d) {
  require_invertible(zeta, d);
  return -(t / jb2(t)) * ((1.0 + zeta) / (1.0 / double(d + 1) + zeta)) * zeta;
}

struct ZetaSample {
  double t, zeta, eta, nu;
};

struct ZetaRun {
  std::vector<ZetaSample> samples;
  int d;
  double fitted_exponent;   // p in |zeta| ~ <t>^-p over the final decade
  double fit_residual;      // rms residual of the log-log fit
  std::size_t n_accepted;
};

inline ZetaRun integrate_zeta(double zeta0, double t0, double t_end, int d,
                              double rtol = 1e-11, double atol = 1e-14) {
  require_invertible(zeta0, d);
  require(t0 > 0.0, "integrate_zeta: t0 > 0 required");
  ZetaRun run;
  run.d = d;
  Dopri5 solver([d](double t, const StateVec& y, StateVec& dy) {
    dy.resize(1);
    dy[0] = zeta_rhs(t, y[0], d);
  }, OdeOptions{rtol, atol});

  auto push = [&](double t, double z) {
    run.samples.push_back({t, z, eta_from_zeta(z, d), nu_of(z, d)});
  };
  push(t0, zeta0);
  StateVec ytmp;
  auto res = solver.integrate(t0, {zeta0}, t_end, {}, [&](const DenseStep& ds) {
    ytmp.resize(1);
    ds.eval(ds.t1(), ytmp);
    push(ds.t1(), ytmp[0]);
  });
  require(res.status == OdeStatus::ReachedEnd, "integrate_zeta: step failure");
  run.n_accepted = res.n_accepted;

  // least squares of log|zeta| against log<t> over the final decade
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (const auto& s : run.samples) {
    if (s.t < t_end / 10.0 || std::abs(s.zeta) < 1e-290) continue;
    double x = std::log(jb(s.t)), y = std::log(std::abs(s.zeta));
    sx += x; sy += y; sxx += x * x; sxy += x * y;
    ++n;
  }
  if (n >= 2 && std::abs(zeta0) > 0.0) {
    double denom = double(n) * sxx - sx * sx;
    run.fitted_exponent = -(double(n) * sxy - sx * sy) / denom;
    double a = (sy - (-run.fitted_exponent) * sx) / double(n);
    double rss = 0;
    for (const auto& s : run.samples) {
      if (s.t < t_end / 10.0 || std::abs(s.zeta) < 1e-290) continue;
      rss += sqr(std::log(std::abs(s.zeta)) - (a - run.fitted_exponent * std::log(jb(s.t))));
    }
    run.fit_residual = std::sqrt(rss / double(n));
  } else {
    run.fitted_exponent = 0.0;
    run.fit_residual = 0.0;
  }
  return run;
}

// ---------------------------------------------------------------------------
// coefficient operator B on curl-type 3-tensors

// Dense B^{ijk}_{abc} as a (d+1)^3 x (d+1)^3 matrix acting on T_{ijk}
// (row = abc, column = ijk), assembled from the nu-expansion.
inline Mat B_dense(double zeta, int d) {
  require_invertible(zeta, d);
  const int n = d + 1;
  const double nu = nu_of(zeta, d);
  const double ci = 1.0 / nu - 1.0, cn = nu - 1.0;
  auto tau_up = [](int a) { return a == 0 ? 1.0 : 0.0; };
  auto tau_dn = [](int a) { return a == 0 ? -1.0 : 0.0; };
  auto kron = [](int a, int b) { return a == b ? 1.0 : 0.0; };
  Mat B(std::size_t(n * n * n), std::size_t(n * n * n), 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c) {
              double v = kron(i, a) * kron(j, b) * kron(k, c) - kron(i, b) * kron(j, a) * kron(k, c);
              v -= ci * (tau_up(i) * tau_dn(a) * kron(j, b) * kron(k, c) -
                         tau_up(i) * tau_dn(b) * kron(j, a) * kron(k, c) +
                         tau_up(i) * tau_dn(a) * kron(j, c) * kron(k, b) -
                         tau_up(i) * tau_dn(b) * kron(j, c) * kron(k, a));
              v -= cn * (kron(i, a) * kron(j, b) * tau_up(k) * tau_dn(c) -
                         kron(i, b) * kron(j, a) * tau_up(k) * tau_dn(c) +
                         kron(i, a) * kron(j, c) * tau_up(k) * tau_dn(b) -
                         kron(i, b) * kron(j, c) * tau_up(k) * tau_dn(a));
              v += cn * ci * (tau_up(i) * tau_dn(a) * kron(j, b) * tau_up(k) * tau_dn(c) -
                              tau_up(i) * tau_dn(b) * kron(j, a) * tau_up(k) * tau_dn(c) +
                              tau_up(i) * tau_dn(a) * kron(j, c) * tau_up(k) * tau_dn(b) -
                              tau_up(i) * tau_dn(b) * kron(j, c) * tau_up(k) * tau_dn(a));
              std::size_t row = std::size_t((a * n + b) * n + c);
              std::size_t col = std::size_t((i * n + j) * n + k);
              B(row, col) += v;
            }
  return B;
}

// Basis of the symmetry class of curl(phi): tensors antisymmetric in the
// first index pair with vanishing cyclic sum, generated as c_{abg} - c_{bag}
// with c symmetric in its last two slots. Columns of the returned matrix are
// not orthonormalized; rank equals n^2(n-1)/2 - C(n,3).
inline Mat curl_space_basis(int d) {
  const int n = d + 1;
  std::vector<std::vector<double>> cols;
  for (int al = 0; al < n; ++al)
    for (int be = 0; be < n; ++be)
      for (int ga = be; ga < n; ++ga) {
        std::vector<double> T(std::size_t(n * n * n), 0.0);
        auto add = [&](int i, int j, int k, double v) { T[std::size_t((i * n + j) * n + k)] += v; };
        add(al, be, ga, 0.5);
        add(al, ga, be, 0.5);
        add(be, al, ga, -0.5);
        add(ga, al, be, -0.5);
        bool zero = true;
        for (double v : T)
          if (v != 0.0) zero = false;
        if (!zero) cols.push_back(std::move(T));
      }
  Mat M(std::size_t(n * n * n), cols.size());
  for (std::size_t c = 0; c < cols.size(); ++c)
    for (std::size_t r = 0; r < cols[c].size(); ++r) M(r, c) = cols[c][r];
  return M;
}

// Exact spectrum of B restricted to the curl symmetry class, from the case
// analysis in the three tau-content sectors:
//   symmetric spatial-spatial sector      -> 2/nu, multiplicity d(d+1)/2
//   antisymmetric spatial + double-tau    -> 2 nu, multiplicity d(d+1)/2
//   purely spatial sector                 -> 2,    multiplicity d^2(d-1)/2 - C(d,3)
inline std::vector<double> B_spectrum(double zeta, int d) {
  require_invertible(zeta, d);
  const double nu = nu_of(zeta, d);
  const int m1 = d * (d + 1) / 2;
  const int m_spatial = d * d * (d - 1) / 2 - d * (d - 1) * (d - 2) / 6;
  std::vector<double> ev;
  for (int i = 0; i < m1; ++i) ev.push_back(2.0 / nu);
  for (int i = 0; i < m1; ++i) ev.push_back(2.0 * nu);
  for (int i = 0; i < m_spatial; ++i) ev.push_back(2.0);
  std::sort(ev.begin(), ev.end());
  return ev;
}

inline bool B_invertible(double zeta, int d) {
  auto ev = B_spectrum(zeta, d);
  for (double l : ev)
    if (std::abs(l) <= 0.0) return false;
  return !ev.empty();
}

// ---------------------------------------------------------------------------
// background source tensor M_abc (fully symmetric frame components)

// M_abc = eta (div tau) [ (1/d)(gbar_ab tau_c + gbar_ac tau_b + gbar_bc tau_a
//                          + 3 tau_a tau_b tau_c) + nu^{-2} tau_a tau_b tau_c ]
inline std::vector<double> massterm(double t, double zeta, int d) {
  require_invertible(zeta, d);
  const int n = d + 1;
  const double eta = eta_from_zeta(zeta, d);
  const double divt = div_tau(t, d);
  const double nu = nu_of(zeta, d);
  auto gbar = [](int a, int b) { return a == b ? (a == 0 ? -1.0 : 1.0) : 0.0; };
  auto tau = [](int a) { return a == 0 ? -1.0 : 0.0; };  // lowered
  std::vector<double> M(std::size_t(n * n * n), 0.0);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) {
        double v = (gbar(a, b) * tau(c) + gbar(a, c) * tau(b) + gbar(b, c) * tau(a) +
                    3.0 * tau(a) * tau(b) * tau(c)) / double(d) +
                   tau(a) * tau(b) * tau(c) / sqr(nu);
        M[std::size_t((a * n + b) * n + c)] = eta * divt * v;
      }
  return M;
}

inline double massterm_norm(double t, double zeta, int d) {
  auto M = massterm(t, zeta, d);
  double s = 0.0;
  for (double v : M) s += v * v;
  return std::sqrt(s);
}

// ---------------------------------------------------------------------------
// residuals of the first-order system on a d=1 grid field

struct MainSystemResidual {
  double curl_res;
  double div_res;
};

// curl: nabla_a phi_bc - nabla_b phi_ac = 0
// div : (delta_f^a + 2 psi_f^a + psi^a_e psi^e_f) nabla_a phi^f_c = 0
// evaluated at interior t-levels, max norms over the grid.
inline MainSystemResidual residual_mainsystem(const SymTensorField1D& field) {
  MainSystemResidual out{0.0, 0.0};
  FieldDerivatives1D der(field);
  const std::size_t L = field.t_levels.size(), n = field.n_theta;
  require(L >= 3, "residual_mainsystem: need at least 3 t-levels");
  for (std::size_t l = 1; l + 1 < L; ++l) {
    for (std::size_t j = 0; j < n; ++j) {
      FrameGrad1D D = der.covariant(l, j);
      // curl residual: components (a,b) = (0,1), any c
      for (int c = 0; c < 2; ++c)
        out.curl_res = std::max(out.curl_res, std::abs(D.g[0][1][c] - D.g[1][0][c]));
      // psi at this node
      Mat phi_mixed(2, 2);
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          phi_mixed(std::size_t(a), std::size_t(b)) = frame_eta(a) * field.at(a, b, l, j);
      Mat psi = psi_from_phi(phi_mixed);
      Mat Mfac = Mat::identity(2) + psi * 2.0 + psi * psi;
      // div_c = sum_{a,f} Mfac^a_f (nabla_a phi)^f_c,  (nabla_a phi)^f_c = eta^{ff} D[a][f][c]
      for (int c = 0; c < 2; ++c) {
        double r = 0.0;
        for (int a = 0; a < 2; ++a)
          for (int f = 0; f < 2; ++f)
            r += Mfac(std::size_t(a), std::size_t(f)) * frame_eta(f) * D.g[a][f][c];
        out.div_res = std::max(out.div_res, std::abs(r));
      }
    }
  }
  return out;
}

// The spherically symmetric background as a grid field: phi_ab =
// eta tau_a tau_b + zeta gbar_ab (lowered components).
inline SymTensorField1D background_field(const std::vector<double>& zeta_at_levels,
                                         const std::vector<double>& t_levels, std::size_t n_theta,
                                         int d = 1) {
  SymTensorField1D f;
  f.resize(t_levels, n_theta);
  for (std::size_t l = 0; l < t_levels.size(); ++l) {
    const double z = zeta_at_levels[l];
    const double et = eta_from_zeta(z, d);
    for (std::size_t j = 0; j < n_theta; ++j) {
      f.at(0, 0, l, j) = et * 1.0 + z * (-1.0);  // tau_0 tau_0 = 1, gbar_00 = -1
      f.at(0, 1, l, j) = 0.0;
      f.at(1, 1, l, j) = z;
    }
  }
  return f;
}

}  // namespace igm
}  // namespace cmcflow
