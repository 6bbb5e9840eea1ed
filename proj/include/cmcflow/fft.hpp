#pragma once

// Radix-2 FFT on the periodic grid theta_j = 2*pi*j/N plus the spectral
// helpers the 1+1 solvers need: derivatives, Fourier coefficients, 2/3-rule
// dealias filter, and trigonometric evaluation at arbitrary angles.

#include <complex>
#include <vector>

#include "cmcflow/jb.hpp"

namespace cmcflow {

inline bool is_pow2(std::size_t n) { return n && !(n & (n - 1)); }

inline void fft_inplace(std::vector<std::complex<double>>& a, bool inverse) {
  const std::size_t n = a.size();
  require(is_pow2(n), "fft: N must be a power of two");
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  const double pi = 3.14159265358979323846;
  for (std::size_t len = 2; len <= n; len <<= 1) {
    double ang = 2.0 * pi / double(len) * (inverse ? 1.0 : -1.0);
    std::complex<double> wl(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        auto u = a[i + k];
        auto v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wl;
      }
    }
  }
  if (inverse)
    for (auto& z : a) z /= double(n);
}

// Complex spectrum of a real periodic sample vector (index k = 0..N-1,
// frequencies k > N/2 alias to k - N).
inline std::vector<std::complex<double>> spectrum(const std::vector<double>& f) {
  std::vector<std::complex<double>> a(f.begin(), f.end());
  fft_inplace(a, false);
  return a;
}

inline std::vector<double> from_spectrum(std::vector<std::complex<double>> a) {
  fft_inplace(a, true);
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i].real();
  return out;
}

inline int wavenumber(std::size_t k, std::size_t n) {
  return k <= n / 2 ? int(k) : int(k) - int(n);
}

// m-th spectral derivative; the Nyquist mode of odd derivatives is zeroed.
inline std::vector<double> spectral_derivative(const std::vector<double>& f, int order) {
  auto a = spectrum(f);
  const std::size_t n = a.size();
  for (std::size_t k = 0; k < n; ++k) {
    int m = wavenumber(k, n);
    std::complex<double> ik(0.0, double(m));
    std::complex<double> factor = 1.0;
    for (int p = 0; p < order; ++p) factor *= ik;
    if (order % 2 == 1 && k == n / 2) factor = 0.0;
    a[k] *= factor;
  }
  return from_spectrum(std::move(a));
}

// Zero all modes with |k| > N/3 (2/3 rule).
inline void dealias_inplace(std::vector<double>& f) {
  auto a = spectrum(f);
  const std::size_t n = a.size();
  for (std::size_t k = 0; k < n; ++k)
    if (std::abs(wavenumber(k, n)) > int(n) / 3) a[k] = 0.0;
  f = from_spectrum(std::move(a));
}

// Evaluate the trigonometric interpolant (and optionally its derivative)
// at an arbitrary angle.
inline double trig_eval(const std::vector<std::complex<double>>& spec, double theta,
                        int deriv_order = 0) {
  const std::size_t n = spec.size();
  std::complex<double> s(0.0, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    int m = wavenumber(k, n);
    std::complex<double> factor = 1.0;
    for (int p = 0; p < deriv_order; ++p) factor *= std::complex<double>(0.0, double(m));
    if (deriv_order % 2 == 1 && k == n / 2) factor = 0.0;
    s += spec[k] * factor * std::exp(std::complex<double>(0.0, double(m) * theta));
  }
  return s.real() / double(n);
}

// Parseval mismatch between grid and spectrum, used as a consistency check.
inline double parseval_residual(const std::vector<double>& f) {
  auto a = spectrum(f);
  double grid = 0.0, spec = 0.0;
  for (double v : f) grid += v * v;
  for (auto& z : a) spec += std::norm(z);
  spec /= double(f.size());
  return std::abs(grid - spec) / std::max(1.0, grid);
}

}  // namespace cmcflow
