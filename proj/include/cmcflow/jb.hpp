#pragma once

// Japanese bracket <s> = sqrt(1+s^2) and a few scalar helpers shared by
// every module.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace cmcflow {

inline double jb(double s) { return std::hypot(1.0, s); }
inline double jb2(double s) { return 1.0 + s * s; }

inline double sqr(double x) { return x * x; }

// 1 - x^2 without cancellation near |x| = 1.
inline double one_minus_sq(double x) { return (1.0 - x) * (1.0 + x); }

struct domain_error : std::runtime_error {
  explicit domain_error(const std::string& what) : std::runtime_error(what) {}
};

struct guard_breach : std::runtime_error {
  explicit guard_breach(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool cond, const char* msg) {
  if (!cond) throw domain_error(msg);
}

}  // namespace cmcflow
