#pragma once

// Background de Sitter geometry: the hyperquadric <x,x> = 1 in R^{1,d+1},
// cylindrical coordinates (t, omega), the normal frame (tau, e_i), boost
// vector fields, the static chart, and the volume/time weights.
//
// Every Minkowski contraction in the project goes through minkowski_dot()
// below; the ambient signature is (-,+,...,+).

#include <vector>

#include "cmcflow/jb.hpp"
#include "cmcflow/linalg.hpp"

namespace cmcflow {

using VecD = std::vector<double>;

// <a,b> with signature (-,+,...,+); component 0 is time.
inline double minkowski_dot(const VecD& a, const VecD& b) {
  double s = -a[0] * b[0];
  for (std::size_t i = 1; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double euclidean_dot(const VecD& a, const VecD& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline VecD axpy(double alpha, const VecD& x, const VecD& y) {
  VecD out(y);
  for (std::size_t i = 0; i < x.size(); ++i) out[i] += alpha * x[i];
  return out;
}

inline VecD scaled(double alpha, const VecD& x) {
  VecD out(x);
  for (double& v : out) v *= alpha;
  return out;
}

struct CylCoord {
  double t = 0.0;
  VecD omega;  // unit vector in R^{d+1}
  int d = 1;

  void validate() const {
    require(d >= 1, "CylCoord: d >= 1 required");
    require(omega.size() == std::size_t(d + 1), "CylCoord: omega must live in R^{d+1}");
    require(std::abs(euclidean_dot(omega, omega) - 1.0) < 1e-14, "CylCoord: |omega| != 1");
  }
};

struct AmbientPoint {
  VecD x;  // (d+2)-vector, x[0] = time component
};

inline CylCoord cyl_from_angle(double t, double theta) {
  return CylCoord{t, {std::cos(theta), std::sin(theta)}, 1};
}

inline AmbientPoint embed(const CylCoord& c) {
  c.validate();
  AmbientPoint p;
  p.x.assign(c.d + 2, 0.0);
  p.x[0] = c.t;
  const double r = jb(c.t);
  for (int i = 0; i <= c.d; ++i) p.x[i + 1] = r * c.omega[i];
  return p;
}

// metric in cylindrical coordinates: -<t>^-2 dt^2 + <t>^2 domega^2
struct MetricComponents {
  double g_tt;
  double g_ww;
};

inline MetricComponents metric_components(double t, int /*d*/) {
  return {-1.0 / jb2(t), jb2(t)};
}

// scalar coefficient in  nabla_b tau^c = (t/<t>)(delta_b^c + tau_b tau^c)
inline double grad_tau(double t) { return t / jb(t); }

// trace nabla_f tau^f = d * t/<t>
inline double div_tau(double t, int d) { return double(d) * t / jb(t); }

// area element <t>^d and time weight w = <t>^{2-d}
struct VolumeWeights {
  double area;
  double tweight;
};

inline VolumeWeights volume_weights(double t, int d) {
  return {std::pow(jb(t), double(d)), std::pow(jb(t), 2.0 - double(d))};
}

// Lorentz boost K_i = x^0 d_i + x^i d_0 as an ambient vector at x (i in 1..d+1).
inline VecD boost_field(const VecD& x, int i) {
  VecD k(x.size(), 0.0);
  k[0] = x[std::size_t(i)];
  k[std::size_t(i)] = x[0];
  return k;
}

// g(K_i, K_i) = (x^0)^2 - (x^i)^2.
inline double boost_norm(const AmbientPoint& p, int i) {
  require(i >= 1 && std::size_t(i) < p.x.size(), "boost_norm: index out of range");
  return sqr(p.x[0]) - sqr(p.x[std::size_t(i)]);
}

// Orthonormal frame (tau, e_1..e_d, inward normal n = -x) at a point of dS,
// all as ambient vectors.
struct FrameData {
  VecD tau;
  std::vector<VecD> spatial;  // d vectors
  VecD normal;
};

// Orthonormal basis of the tangent space of S^d at omega (Gram-Schmidt on
// the coordinate directions).
inline std::vector<VecD> sphere_tangent_basis(const VecD& omega) {
  const std::size_t n = omega.size();
  std::vector<VecD> basis;
  for (std::size_t k = 0; k < n && basis.size() + 1 < n; ++k) {
    VecD v(n, 0.0);
    v[k] = 1.0;
    double c = euclidean_dot(v, omega);
    for (std::size_t i = 0; i < n; ++i) v[i] -= c * omega[i];
    for (const auto& b : basis) {
      double cb = euclidean_dot(v, b);
      for (std::size_t i = 0; i < n; ++i) v[i] -= cb * b[i];
    }
    double nv = std::sqrt(euclidean_dot(v, v));
    if (nv < 1e-8) continue;
    for (double& vi : v) vi /= nv;
    basis.push_back(v);
  }
  return basis;
}

inline FrameData frame_at(const CylCoord& c) {
  c.validate();
  FrameData f;
  const double r = jb(c.t);
  // tau = <t> d_t of the embedding: (<t>, t*omega)
  f.tau.assign(c.d + 2, 0.0);
  f.tau[0] = r;
  for (int i = 0; i <= c.d; ++i) f.tau[i + 1] = c.t * c.omega[i];
  for (const auto& v : sphere_tangent_basis(c.omega)) {
    VecD e(c.d + 2, 0.0);
    for (int i = 0; i <= c.d; ++i) e[i + 1] = v[i];
    f.spatial.push_back(e);
  }
  AmbientPoint p = embed(c);
  f.normal = scaled(-1.0, p.x);
  return f;
}

// tau via eq-of-motion form sum_i x^i K_i / <x^0> (sum over all spatial i).
inline VecD tau_from_boosts(const AmbientPoint& p) {
  VecD tau(p.x.size(), 0.0);
  for (std::size_t i = 1; i < p.x.size(); ++i) {
    VecD k = boost_field(p.x, int(i));
    for (std::size_t j = 0; j < tau.size(); ++j) tau[j] += p.x[i] * k[j];
  }
  return scaled(1.0 / jb(p.x[0]), tau);
}

// Static chart around the x^{d+1} boost: x^0 = sqrt(1-rho^2) sinh(zeta),
// x^{d+1} = sqrt(1-rho^2) cosh(zeta), x^i = rho z^i.
struct StaticChartPoint {
  AmbientPoint x;
  double g_zz;      // -(1-rho^2)
  double g_rr;      // 1/(1-rho^2)
  double g_sphere;  // rho^2
};

inline StaticChartPoint static_chart(double zeta, double rho, const VecD& z, int d) {
  require(std::abs(rho) < 1.0, "static_chart: chart degenerate at |rho| >= 1");
  require(z.size() == std::size_t(d), "static_chart: z must live in R^d");
  if (d >= 1 && rho != 0.0)
    require(std::abs(euclidean_dot(z, z) - 1.0) < 1e-12, "static_chart: |z| != 1");
  StaticChartPoint out;
  out.x.x.assign(d + 2, 0.0);
  const double q = std::sqrt(1.0 - rho * rho);
  out.x.x[0] = q * std::sinh(zeta);
  out.x.x[std::size_t(d) + 1] = q * std::cosh(zeta);
  for (int i = 0; i < d; ++i) out.x.x[i + 1] = rho * z[std::size_t(i)];
  out.g_zz = -(1.0 - rho * rho);
  out.g_rr = 1.0 / (1.0 - rho * rho);
  out.g_sphere = rho * rho;
  return out;
}

// Frame connection coefficients for d = 1 in the parallel frame
// (e_0 = tau = <t> d_t, e_1 = <t>^{-1} d_theta):
//   nabla_{e_1} e_0 = (t/<t>) e_1,  nabla_{e_1} e_1 = (t/<t>) e_0,
//   nabla_{e_0} e_a = 0.
// Frame metric is diag(-1, 1).
struct FrameConnection1D {
  double t;
  double coeff;  // t/<t>
};

inline FrameConnection1D frame_connection_1d(double t) { return {t, grad_tau(t)}; }

}  // namespace cmcflow
