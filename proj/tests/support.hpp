#pragma once

#include <cmath>

#include "doctest.h"

#include "lpr/reduced_dynamics.hpp"
#include "lpr/systems_catalog.hpp"

namespace lpr::test {

inline BundlePoint random_bundle_point(const SystemSpec& sys, Rng& rng) {
  BundlePoint b;
  b.Q_star = sys.random_slice_point(rng);
  b.f_tilde = sys.random_fiber_point(rng);
  b.a = sys.random_group_point(rng);
  return b;
}

inline double max_abs(const MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

inline VectorXd vec2(double x, double y) {
  VectorXd v(2);
  v << x, y;
  return v;
}

inline VectorXd vec4(double a, double b, double c, double d) {
  VectorXd v(4);
  v << a, b, c, d;
  return v;
}

// Both built-ins with default parameters, constructed once per binary.
inline const SystemSpec& so2() {
  static const SystemSpec sys = make_so2_planar();
  return sys;
}

inline const SystemSpec& su2() {
  static const SystemSpec sys = make_su2_quaternion();
  return sys;
}

}  // namespace lpr::test
