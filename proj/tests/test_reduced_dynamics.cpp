#include "support.hpp"

using namespace lpr;
using namespace lpr::test;

TEST_CASE("original Lagrangian: rest energy and planar unit speed") {
  AmbientState s;
  s.Q = vec2(1, 0);
  s.f = vec2(0, 0);
  s.Qdot = vec2(0, 1);
  s.fdot = vec2(0, 0);
  CHECK(lagrangian_original(so2(), s) == doctest::Approx(0.5));

  s.Qdot.setZero();
  CHECK(lagrangian_original(so2(), s) ==
        doctest::Approx(-so2().potential.value(s.Q, s.f)));
}

TEST_CASE("quasi-velocities: zero input, connection contraction, inverse pair") {
  Rng rng(51);
  for (const SystemSpec* sysp : {&so2(), &su2()}) {
    const SystemSpec& sys = *sysp;
    const GeometryCache g = geometry_at(sys, random_bundle_point(sys, rng));

    BundleVelocity zero;
    zero.Qdot_star = VectorXd::Zero(sys.dim_P());
    zero.fdot_tilde = VectorXd::Zero(sys.dim_V());
    zero.adot = VectorXd::Zero(sys.dim_G());
    const QuasiVelocity w0 = quasi_velocities(g, zero);
    CHECK(max_abs(w0.Q) == 0.0);
    CHECK(max_abs(w0.V) == 0.0);
    CHECK(max_abs(w0.G) == 0.0);

    // adot = 0: the group quasi-velocity is the connection contraction
    BundleVelocity v;
    v.Qdot_star = g.proj.P_perp * rng.uniform_vector(sys.dim_P(), -1, 1);
    v.fdot_tilde = rng.uniform_vector(sys.dim_V(), -1, 1);
    v.adot = VectorXd::Zero(sys.dim_G());
    const QuasiVelocity w = quasi_velocities(g, v);
    CHECK(max_abs(w.G - (g.At_Q * v.Qdot_star + g.At_V * v.fdot_tilde)) < 1e-12);

    // full round trip through the frame decomposition
    v.adot = rng.uniform_vector(sys.dim_G(), -1, 1);
    const BundleVelocity back = invert_quasi_velocities(g, quasi_velocities(g, v));
    CHECK(max_abs(back.Qdot_star - v.Qdot_star) <= 1e-12);
    CHECK(max_abs(back.fdot_tilde - v.fdot_tilde) <= 1e-12);
    CHECK(max_abs(back.adot - v.adot) <= 1e-12);
  }
}

TEST_CASE("reduced Lagrangian: chart transport, rest energy, vertical block") {
  Rng rng(52);
  for (const SystemSpec* sysp : {&so2(), &su2()}) {
    const SystemSpec& sys = *sysp;
    for (int trial = 0; trial < 100; ++trial) {
      AmbientState s;
      s.Q = sys.random_ambient_point(rng);
      s.f = sys.random_fiber_point(rng);
      s.Qdot = rng.uniform_vector(sys.dim_P(), -1, 1);
      s.fdot = rng.uniform_vector(sys.dim_V(), -1, 1);
      const ReducedState r = reduce_state(sys, s);
      const GeometryCache g = geometry_at(sys, r.point);
      CHECK(std::abs(lagrangian_reduced(g, r.vel) - lagrangian_original(sys, s)) <=
            1e-10);
    }

    const GeometryCache g = geometry_at(sys, random_bundle_point(sys, rng));
    QuasiVelocity w;
    w.Q = VectorXd::Zero(sys.dim_P());
    w.V = VectorXd::Zero(sys.dim_V());
    w.G = VectorXd::Zero(sys.dim_G());
    CHECK(lagrangian_reduced(g, w) == doctest::Approx(-g.V));

    // vertical-only motion: kinetic energy is the d~ quadratic alone
    w.G = rng.uniform_vector(sys.dim_G(), -1, 1);
    CHECK(lagrangian_reduced(g, w) + g.V ==
          doctest::Approx(0.5 * w.G.dot(g.hmet.d_tilde * w.G)));
  }
}

TEST_CASE("reduced equations: equilibrium state has zero accelerations") {
  SystemParams params;
  params.kappa = 0.0;  // V = |f|^2/2 has a critical set at f = 0
  const SystemSpec sys = make_so2_planar(params);
  ReducedState s;
  s.point.Q_star = vec2(1.4, 0);
  s.point.f_tilde = VectorXd::Zero(2);
  s.point.a = VectorXd::Zero(1);
  s.vel.Q = VectorXd::Zero(2);
  s.vel.V = VectorXd::Zero(2);
  s.vel.G = VectorXd::Zero(1);
  const ReducedRhs rhs = lp_rhs(sys, s);
  CHECK(max_abs(rhs.wdot.Q) < 1e-14);
  CHECK(max_abs(rhs.wdot.V) < 1e-14);
  CHECK(max_abs(rhs.wdot.G) < 1e-14);
}

TEST_CASE("euler-lagrange oracle: free flat motion and planar Noether charge") {
  SystemParams free_params;
  free_params.kappa = 0.0;
  free_params.potential_quadratic_f = 0.0;
  const SystemSpec sys = make_so2_planar(free_params);
  AmbientState s = default_initial_state(sys);
  const Accelerations acc = euler_lagrange_rhs(sys, s);
  CHECK(max_abs(acc.Qddot) == 0.0);
  CHECK(max_abs(acc.fddot) == 0.0);

  // coupled system conserves the angular momentum of the co-rotating action
  const SystemSpec coupled = make_so2_planar();
  const Trajectory traj =
      integrate_original(coupled, default_initial_state(coupled), 1e-3, 1000);
  auto angular = [&](const VectorXd& y) {
    const AmbientState st = unpack_ambient(coupled, y);
    return st.Qdot.dot(coupled.action.killing(st.Q).col(0)) +
           st.fdot.dot(coupled.killing_V(st.f).col(0));
  };
  const double J0 = angular(traj.states.front());
  double drift = 0;
  for (const VectorXd& y : traj.states)
    drift = std::max(drift, std::abs(angular(y) - J0));
  CHECK(drift <= 1e-9);

  // energy drift of the oracle integrator
  double e_drift = 0;
  for (double e : traj.energy)
    e_drift = std::max(e_drift, std::abs(e - traj.energy.front()));
  CHECK(e_drift <= 1e-8);
}

TEST_CASE("integrate: zero steps, fourth-order convergence") {
  const SystemSpec& sys = so2();
  const AmbientState init = default_initial_state(sys);
  CHECK(integrate_original(sys, init, 1e-3, 0).times.size() == 1);
  CHECK(integrate_reduced(sys, reduce_state(sys, init), 1e-3, 0).times.size() == 1);
  CHECK_THROWS_AS(integrate_original(sys, init, -1.0, 3), ConfigError);

  // Richardson check against a dt/8 reference; steps large enough that the
  // truncation error stays clear of the roundoff floor
  const double T = 0.8;
  auto endpoint = [&](double dt) {
    const Trajectory t =
        integrate_original(sys, init, dt, static_cast<int>(std::lround(T / dt)));
    return t.states.back();
  };
  const VectorXd ref = endpoint(1e-3);
  const double err1 = max_abs(endpoint(8e-3) - ref);
  const double err2 = max_abs(endpoint(4e-3) - ref);
  CHECK(err1 / err2 > 10.0);
  CHECK(err1 / err2 < 24.0);

  auto endpoint_red = [&](double dt) {
    const Trajectory t = integrate_reduced(sys, reduce_state(sys, init), dt,
                                           static_cast<int>(std::lround(T / dt)));
    return t.states.back();
  };
  const VectorXd ref_r = endpoint_red(1e-3);
  const double r1 = max_abs(endpoint_red(8e-3) - ref_r);
  const double r2 = max_abs(endpoint_red(4e-3) - ref_r);
  CHECK(r1 / r2 > 10.0);
  CHECK(r1 / r2 < 24.0);
}

TEST_CASE("reduced trajectories: momentum, surface residual, tangency") {
  for (const SystemSpec* sysp : {&so2(), &su2()}) {
    const SystemSpec& sys = *sysp;
    const Trajectory traj =
        integrate_reduced(sys, reduce_state(sys, default_initial_state(sys)), 1e-3,
                          1000);
    double pi_drift = 0, chi_max = 0, tan_max = 0, e_drift = 0, mass_res = 0;
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
      pi_drift = std::max(
          pi_drift, max_abs(traj.momentum[k] - traj.momentum.front()));
      chi_max = std::max(chi_max, traj.chi_residual[k]);
      tan_max = std::max(tan_max, traj.tangency[k]);
      e_drift = std::max(e_drift, std::abs(traj.energy[k] - traj.energy.front()));
      mass_res = std::max(mass_res, traj.mass_residual[k]);
    }
    CHECK(pi_drift <= 1e-8);  // exactly conserved here, abelian or not
    CHECK(chi_max <= 1e-8);
    CHECK(tan_max <= 1e-9);
    CHECK(e_drift <= 1e-6);
    CHECK(mass_res <= 1e-10);
  }
}

TEST_CASE("compare: self-comparison is exactly zero") {
  const SystemSpec& sys = so2();
  const Trajectory orig =
      integrate_original(sys, default_initial_state(sys), 1e-3, 50);

  // map the oracle trajectory through the chart and compare with itself
  Trajectory mapped;
  mapped.mode = IntegrationMode::Reduced;
  mapped.dt = orig.dt;
  VectorXd guess = sys.group.identity;
  for (std::size_t k = 0; k < orig.times.size(); ++k) {
    const ReducedState r =
        reduce_state(sys, unpack_ambient(sys, orig.states[k]), guess);
    guess = r.point.a;
    mapped.times.push_back(orig.times[k]);
    mapped.states.push_back(pack_state(r));
  }
  const CompareReport rep = compare_trajectories(sys, orig, mapped);
  CHECK(rep.max() < 1e-13);
}

TEST_CASE("compare: reduced integration tracks the unreduced oracle") {
  {
    const SystemSpec& sys = so2();
    const AmbientState init = default_initial_state(sys);
    const Trajectory orig = integrate_original(sys, init, 1e-3, 1000);
    const Trajectory red =
        integrate_reduced(sys, reduce_state(sys, init), 1e-3, 1000);
    CHECK(compare_trajectories(sys, orig, red).max() <= 1e-6);
  }
  {
    const SystemSpec& sys = su2();
    const AmbientState init = default_initial_state(sys);
    const Trajectory orig = integrate_original(sys, init, 1e-3, 1000);
    const Trajectory red =
        integrate_reduced(sys, reduce_state(sys, init), 1e-3, 1000);
    CHECK(compare_trajectories(sys, orig, red).max() <= 1e-5);
  }
}

TEST_CASE("compare: mismatched grids are rejected") {
  const SystemSpec& sys = so2();
  const AmbientState init = default_initial_state(sys);
  const Trajectory orig = integrate_original(sys, init, 1e-3, 10);
  const Trajectory red = integrate_reduced(sys, reduce_state(sys, init), 1e-3, 9);
  CHECK_THROWS_AS(compare_trajectories(sys, orig, red), ConfigError);
}
