#include "support.hpp"

using namespace lpr;
using namespace lpr::test;

TEST_CASE("faddeev-popov: closed forms on the slice") {
  // so2 with chi = Q^2 at (r, 0): Phi = -r
  CHECK(faddeev_popov(so2(), vec2(1.7, 0))(0, 0) == doctest::Approx(-1.7));

  // su2 at (r,0,0,0): Phi = r I, det = r^3
  const MatrixXd fp = faddeev_popov(su2(), vec4(1.3, 0, 0, 0));
  CHECK(max_abs(fp - 1.3 * MatrixXd::Identity(3, 3)) < 1e-15);
  CHECK(fp.determinant() == doctest::Approx(1.3 * 1.3 * 1.3));

  // orbit through the origin is degenerate
  CHECK_THROWS_AS(faddeev_popov(so2(), vec2(0, 0)), DegeneracyError);
}

TEST_CASE("group-coordinate solve: trivial, planar oracle, quaternion oracle") {
  // already on the surface: a = e without iterating
  const VectorXd a0 =
      solve_group_coordinate(so2(), vec2(1.2, 0), so2().group.identity);
  CHECK(a0[0] == 0.0);

  // planar oracle: a(Q) = -atan2(Q^2, Q^1), including the FP-singular start
  Rng rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    const VectorXd Q = trial == 0 ? vec2(0, 1) : so2().random_ambient_point(rng);
    const VectorXd a = solve_group_coordinate(so2(), Q, so2().group.identity);
    const double expected = -std::atan2(Q[1], Q[0]);
    CHECK(std::abs(a[0] - expected) <= 1e-10);
  }

  // quaternion oracle: a(Q) = log(Q/|Q|), positive real part
  for (int trial = 0; trial < 30; ++trial) {
    VectorXd Q = su2().random_ambient_point(rng);
    if (Q[0] < 0.2) Q[0] = 0.2 + std::abs(Q[0]);  // stay inside the chart tube
    const VectorXd a = solve_group_coordinate(su2(), Q, su2().group.identity);
    const VectorXd expected = quat::log_map(VectorXd(Q / Q.norm()));
    CHECK(max_abs(a - expected) <= 1e-10);
    const auto b = to_bundle(su2(), Q, VectorXd::Zero(4));
    CHECK(b.Q_star[0] == doctest::Approx(Q.norm()));
    CHECK(max_abs(b.Q_star.segment(1, 3)) < 1e-10);
  }
}

TEST_CASE("to_bundle: trivial on-surface case and chart round trip") {
  Rng rng(22);
  for (const SystemSpec* sysp : {&so2(), &su2()}) {
    const SystemSpec& sys = *sysp;
    const VectorXd Qs = sys.random_slice_point(rng);
    const VectorXd f = sys.random_fiber_point(rng);
    const BundlePoint triv = to_bundle(sys, Qs, f);
    CHECK(max_abs(triv.Q_star - Qs) < 1e-12);
    CHECK(max_abs(triv.f_tilde - f) < 1e-12);
    CHECK(max_abs(triv.a) < 1e-12);

    for (int trial = 0; trial < 100; ++trial) {
      const VectorXd Q = sys.random_ambient_point(rng);
      const VectorXd ff = sys.random_fiber_point(rng);
      BundlePoint b;
      try {
        b = to_bundle(sys, Q, ff);
      } catch (const ConvergenceError&) {
        continue;  // outside the section tube (antipodal quaternions)
      }
      const auto [Qb, fb] = from_bundle(sys, b);
      CHECK(max_abs(Qb - Q) <= 1e-10);
      CHECK(max_abs(fb - ff) <= 1e-10);
    }
  }
}

TEST_CASE("from_bundle: quarter rotation") {
  BundlePoint b;
  b.Q_star = vec2(2, 0);
  b.f_tilde = vec2(0, 0);
  b.a = VectorXd(1);
  b.a << M_PI / 2;
  const auto [Q, f] = from_bundle(so2(), b);
  CHECK(Q[0] == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(Q[1] == doctest::Approx(-2.0));
  (void)f;
}

TEST_CASE("to_bundle: gauge covariance at 50 random group shifts") {
  Rng rng(23);
  for (const SystemSpec* sysp : {&so2(), &su2()}) {
    const SystemSpec& sys = *sysp;
    for (int trial = 0; trial < 50; ++trial) {
      const VectorXd Q = sys.random_slice_point(rng);  // base point on Sigma
      const VectorXd f = sys.random_fiber_point(rng);
      const VectorXd g = 0.5 * sys.random_group_point(rng);
      const BundlePoint base = to_bundle(sys, Q, f);
      const auto [Qm, fm] = act(sys, Q, f, g);
      const BundlePoint moved = to_bundle(sys, Qm, fm, g);
      CHECK(max_abs(moved.Q_star - base.Q_star) < 1e-9);
      CHECK(max_abs(moved.f_tilde - base.f_tilde) < 1e-9);
      CHECK(max_abs(moved.a - sys.group.multiply(base.a, g)) < 1e-9);
    }
  }
}

TEST_CASE("velocity lift: inverse pair and finite-difference consistency") {
  Rng rng(24);
  for (const SystemSpec* sysp : {&so2(), &su2()}) {
    const SystemSpec& sys = *sysp;
    for (int trial = 0; trial < 20; ++trial) {
      const BundlePoint b = random_bundle_point(sys, rng);
      BundleVelocity v;
      // tangent slice rate plus free fiber/group rates
      const ProjectorSet proj = projectors(sys, b.Q_star, b.f_tilde);
      v.Qdot_star = proj.P_perp * rng.uniform_vector(sys.dim_P(), -1, 1);
      v.fdot_tilde = rng.uniform_vector(sys.dim_V(), -1, 1);
      v.adot = rng.uniform_vector(sys.dim_G(), -1, 1);

      const auto [Qdot, fdot] = from_bundle_velocity(sys, b, v);
      const BundleVelocity back = to_bundle_velocity(sys, b, Qdot, fdot);
      CHECK(max_abs(back.Qdot_star - v.Qdot_star) < 1e-12);
      CHECK(max_abs(back.fdot_tilde - v.fdot_tilde) < 1e-12);
      CHECK(max_abs(back.adot - v.adot) < 1e-12);
    }

    // d/dt of to_bundle along an ambient line matches the lifted velocity
    const BundlePoint b = random_bundle_point(sys, rng);
    const auto [Q, f] = from_bundle(sys, b);
    const VectorXd dQ = rng.uniform_vector(sys.dim_P(), -1, 1);
    const VectorXd df = rng.uniform_vector(sys.dim_V(), -1, 1);
    const double h = 1e-6;
    const BundlePoint plus =
        to_bundle(sys, VectorXd(Q + h * dQ), VectorXd(f + h * df), b.a, 1e-13);
    const BundlePoint minus =
        to_bundle(sys, VectorXd(Q - h * dQ), VectorXd(f - h * df), b.a, 1e-13);
    const BundleVelocity lifted = to_bundle_velocity(sys, b, dQ, df);
    CHECK(max_abs((plus.Q_star - minus.Q_star) / (2 * h) - lifted.Qdot_star) < 1e-7);
    CHECK(max_abs((plus.f_tilde - minus.f_tilde) / (2 * h) - lifted.fdot_tilde) <
          1e-7);
    CHECK(max_abs((plus.a - minus.a) / (2 * h) - lifted.adot) < 1e-7);
  }
}

TEST_CASE("projectors: frozen planar values and idempotence") {
  // so2 at (r, 0): N = diag(1, 0) and, with the Euclidean metric, P_perp too
  const ProjectorSet p = projectors(so2(), vec2(1.4, 0), vec2(0.7, -0.2));
  MatrixXd expected(2, 2);
  expected << 1, 0, 0, 0;
  CHECK(max_abs(p.N_QQ - expected) < 1e-14);
  CHECK(max_abs(p.P_perp - expected) < 1e-14);

  Rng rng(25);
  for (const SystemSpec* sysp : {&so2(), &su2()}) {
    const SystemSpec& sys = *sysp;
    for (int trial = 0; trial < 100; ++trial) {
      const VectorXd Qs = sys.random_slice_point(rng);
      const VectorXd f = sys.random_fiber_point(rng);
      const ProjectorSet ps = projectors(sys, Qs, f);
      CHECK(max_abs(ps.N_QQ * ps.N_QQ - ps.N_QQ) <= 1e-12);
      CHECK(max_abs(ps.P_perp * ps.P_perp - ps.P_perp) <= 1e-12);
      // N annihilates the Killing directions, including the extended blocks
      CHECK(max_abs(ps.N_QQ * sys.action.killing(Qs)) <= 1e-12);
      CHECK(max_abs(ps.N_VQ * sys.action.killing(Qs) + sys.killing_V(f)) <= 1e-12);
    }
  }
}

TEST_CASE("slice projection restores the surface and preserves the point") {
  Rng rng(26);
  for (const SystemSpec* sysp : {&so2(), &su2()}) {
    const SystemSpec& sys = *sysp;
    BundlePoint b = random_bundle_point(sys, rng);

    // push Q* off the surface by a small normal displacement
    const double eps = 1e-4;
    b.Q_star += eps * sys.gauge.chi_grad(b.Q_star).row(0).transpose();
    const auto [Q_before, f_before] = from_bundle(sys, b);

    const double drift = project_to_slice(sys, b);
    CHECK(drift == doctest::Approx(eps).epsilon(1e-6));
    CHECK(sys.gauge.chi(b.Q_star).cwiseAbs().maxCoeff() < 1e-7);

    // the re-gauge moves along the orbit, so the ambient point is unchanged
    const auto [Q_after, f_after] = from_bundle(sys, b);
    CHECK(max_abs(Q_after - Q_before) < 1e-12);
    CHECK(max_abs(f_after - f_before) < 1e-12);
  }
}
