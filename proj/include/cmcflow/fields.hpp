#pragma once

// Discrete symmetric 2-tensor fields on a (t, theta) grid over dS with d = 1,
// stored as orthonormal-frame components, plus frame covariant derivatives
// (spectral in theta, central differences across the stored t levels).

#include <array>
#include <vector>

#include "cmcflow/dsgeom.hpp"
#include "cmcflow/fft.hpp"

namespace cmcflow {

// frame metric diag(-1, 1, ..., 1)
inline double frame_eta(int a) { return a == 0 ? -1.0 : 1.0; }

struct SymTensorField1D {
  std::vector<double> t_levels;  // uniformly spaced, >= 5 for second t-derivatives
  std::size_t n_theta = 0;
  // components (0,0), (0,1), (1,1); index [level * n_theta + j]
  std::array<std::vector<double>, 3> comp;

  double dt() const { return t_levels[1] - t_levels[0]; }
  std::size_t idx(std::size_t level, std::size_t j) const { return level * n_theta + j; }

  double at(int a, int b, std::size_t level, std::size_t j) const {
    return comp[std::size_t(a + b)][idx(level, j)];
  }
  double& at(int a, int b, std::size_t level, std::size_t j) {
    return comp[std::size_t(a + b)][idx(level, j)];
  }

  void resize(std::vector<double> levels, std::size_t n) {
    t_levels = std::move(levels);
    n_theta = n;
    for (auto& c : comp) c.assign(t_levels.size() * n, 0.0);
  }
};

// (nabla_{e_c} phi)_{ab} at one grid node of an interior level. d = 1 frame
// connection: nabla_{e1} e0 = (t/<t>) e1, nabla_{e1} e1 = (t/<t>) e0,
// nabla_{e0} e_a = 0.
struct FrameGrad1D {
  // g[c][a][b], all frame indices in {0,1}
  double g[2][2][2];
};

class FieldDerivatives1D {
 public:
  explicit FieldDerivatives1D(const SymTensorField1D& f) : f_(f) {
    const std::size_t L = f.t_levels.size(), n = f.n_theta;
    dtheta_.resize(3);
    for (int c = 0; c < 3; ++c) {
      dtheta_[std::size_t(c)].assign(L * n, 0.0);
      std::vector<double> slice(n);
      for (std::size_t l = 0; l < L; ++l) {
        for (std::size_t j = 0; j < n; ++j) slice[j] = f.comp[std::size_t(c)][f.idx(l, j)];
        auto d = spectral_derivative(slice, 1);
        for (std::size_t j = 0; j < n; ++j) dtheta_[std::size_t(c)][f.idx(l, j)] = d[j];
      }
    }
  }

  // central difference in t (interior levels only)
  double dt(int a, int b, std::size_t level, std::size_t j) const {
    return (f_.at(a, b, level + 1, j) - f_.at(a, b, level - 1, j)) / (2.0 * f_.dt());
  }

  double dtheta(int a, int b, std::size_t level, std::size_t j) const {
    return dtheta_[std::size_t(a + b)][f_.idx(level, j)];
  }

  FrameGrad1D covariant(std::size_t level, std::size_t j) const {
    const double t = f_.t_levels[level];
    const double w = grad_tau(t);  // t/<t>
    const double jbt = jb(t);
    FrameGrad1D out{};
    for (int a = 0; a < 2; ++a)
      for (int b = a; b < 2; ++b) {
        // e_0 = <t> d_t, frame parallel along tau
        out.g[0][a][b] = jbt * dt(a, b, level, j);
        // e_1 = <t>^{-1} d_theta with connection corrections
        double v = dtheta(a, b, level, j) / jbt;
        // - omega^d_{a 1} phi_{d b} - omega^d_{b 1} phi_{a d}
        // omega^1_{0 1} = omega^0_{1 1} = t/<t>
        auto corr = [&](int idx_fixed, int idx_var) {
          // contribution from differentiating the slot currently equal to idx_var
          return w * f_.at(idx_fixed, idx_var == 0 ? 1 : 0, level, j);
        };
        (void)corr;
        double c1 = (a == 0) ? w * f_.at(1, b, level, j) : w * f_.at(0, b, level, j);
        double c2 = (b == 0) ? w * f_.at(a, 1, level, j) : w * f_.at(a, 0, level, j);
        out.g[1][a][b] = v - c1 - c2;
        out.g[0][b][a] = out.g[0][a][b];
        out.g[1][b][a] = out.g[1][a][b];
      }
    return out;
  }

 private:
  const SymTensorField1D& f_;
  std::vector<std::vector<double>> dtheta_;
};

}  // namespace cmcflow
