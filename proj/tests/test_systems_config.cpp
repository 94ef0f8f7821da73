#include "support.hpp"

#include "lpr/report.hpp"

using namespace lpr;
using namespace lpr::test;

TEST_CASE("load_system: builtins pass the load-time check suite") {
  const SystemSpec a = load_system({{"system", "so2_planar"}});
  CHECK(a.dim_P() == 2);
  CHECK(a.dim_G() == 1);
  const SystemSpec b = load_system({{"system", "su2_quaternion"}, {"kappa", 0.1}});
  CHECK(b.dim_P() == 4);
  CHECK(b.dim_G() == 3);
}

TEST_CASE("load_system: schema and invariance violations are rejected") {
  CHECK_THROWS_AS(load_system({{"system", "torus"}}), ConfigError);
  CHECK_THROWS_AS(load_system({{"system", "so2_planar"}, {"bogus", 1}}), ConfigError);
  CHECK_THROWS_AS(load_system({{"system", "so2_planar"}, {"metric_scale", -1.0}}),
                  ConfigError);
  CHECK_THROWS_AS(
      load_system({{"system", "so2_planar"}, {"group_translation", "maybe"}}),
      ConfigError);

  // V = Q^1 is not rotation invariant; the loader must say so
  try {
    load_system({{"system", "so2_planar"}, {"potential_linear_q1", 0.5}});
    CHECK(false);
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("invariant") != std::string::npos);
  }
}

TEST_CASE("finite-difference fallbacks reproduce the analytic geometry") {
  SystemParams fd;
  fd.fd_translation = true;
  fd.fd_derivatives = true;
  for (const std::string name : {"so2_planar", "su2_quaternion"}) {
    const SystemSpec analytic = make_builtin(name);
    const SystemSpec fallback = make_builtin(name, fd);
    Rng rng(71);
    for (int trial = 0; trial < 5; ++trial) {
      const BundlePoint b = random_bundle_point(analytic, rng);
      const GeometryCache ga = geometry_at(analytic, b);
      const GeometryCache gf = geometry_at(fallback, b);
      CHECK(max_abs(ga.At_Q - gf.At_Q) < 1e-7);
      CHECK(max_abs(ga.hmet.d_tilde - gf.hmet.d_tilde) < 1e-7);
      CHECK(max_abs(ga.u - gf.u) < 1e-7);
      for (int a = 0; a < analytic.dim_G(); ++a) {
        CHECK(max_abs(ga.sc.C_G_QQ[a] - gf.sc.C_G_QQ[a]) < 1e-5);
        CHECK(max_abs(ga.sc.curv_QQ[a] - gf.sc.curv_QQ[a]) < 1e-5);
      }
      for (int p = 0; p < analytic.dim_V(); ++p)
        CHECK(max_abs(ga.sc.C_V_QQ[p] - gf.sc.C_V_QQ[p]) < 1e-5);
    }
  }
}

TEST_CASE("metric parameters reach the geometry") {
  SystemParams params;
  params.metric_beta = 0.25;
  params.metric_scale = 1.5;
  const SystemSpec sys = make_so2_planar(params);
  const VectorXd Q = vec2(1.1, 0);
  const double expected = 1.5 * (1.0 + 0.25 * Q.squaredNorm());
  CHECK(sys.action.metric_P(Q)(0, 0) == doctest::Approx(expected));

  // conformal factor feeds the Christoffel terms of the oracle
  AmbientState s = default_initial_state(sys);
  const Accelerations acc = euler_lagrange_rhs(sys, s);
  CHECK(max_abs(acc.Qddot) > 1e-3);

  // and the reduced dynamics still match it
  const Trajectory orig = integrate_original(sys, s, 1e-3, 200);
  const Trajectory red = integrate_reduced(sys, reduce_state(sys, s), 1e-3, 200);
  CHECK(compare_trajectories(sys, orig, red).max() <= 1e-6);
}

TEST_CASE("params echo and manifest serialisation round-trip") {
  SystemParams p;
  p.kappa = 0.7;
  p.fd_translation = true;
  const SystemParams back = params_from_json(params_json(p));
  CHECK(back.kappa == p.kappa);
  CHECK(back.fd_translation == p.fd_translation);

  RunManifest m;
  m.command = "verify";
  m.system = "so2_planar";
  m.config = {{"system", "so2_planar"}};
  m.seed = 7;
  m.tolerances = {{"projector_algebra", 1e-10}};
  m.checks = {{"projector_algebra", true}};
  m.version_stamp = version();
  m.wall_clock_seconds = 1.25;
  m.pass = true;
  m.outputs = {"verify_so2_planar.json"};
  const RunManifest back_m = RunManifest::from_json(m.to_json());
  CHECK(back_m.to_json() == m.to_json());
  CHECK(!version().empty());
}

TEST_CASE("default initial states stay inside the group chart over [0,1]") {
  for (const SystemSpec* sysp : {&so2(), &su2()}) {
    const SystemSpec& sys = *sysp;
    const Trajectory red = integrate_reduced(
        sys, reduce_state(sys, default_initial_state(sys)), 1e-3, 1000);
    for (const VectorXd& y : red.states) {
      const ReducedState s = unpack_reduced(sys, y);
      CHECK(sys.group.in_domain(s.point.a));
    }
  }
}

TEST_CASE("su2 faddeev-popov determinant scales as r cubed") {
  for (double r : {0.6, 1.0, 1.7}) {
    const MatrixXd fp = faddeev_popov(su2(), vec4(r, 0, 0, 0));
    CHECK(fp.determinant() == doctest::Approx(r * r * r));
  }
}
