#include "support.hpp"

#include "lpr/variational_checks.hpp"

using namespace lpr;
using namespace lpr::test;

TEST_CASE("diagonal family: omega and w coincide, relations sit at the FD floor") {
  for (const SystemSpec* sysp : {&so2(), &su2()}) {
    const SystemSpec& sys = *sysp;
    Rng rng(61);
    const PathFamily fam = make_diagonal_family(sys, rng);

    const QuasiVelocity omega =
        decompose_rates(sys, fam, 0.0, 0.5, RateDirection::Time, 1e-4);
    const QuasiVelocity w =
        decompose_rates(sys, fam, 0.0, 0.5, RateDirection::Deformation, 1e-4);
    CHECK(max_abs(omega.Q - w.Q) < 1e-8);
    CHECK(max_abs(omega.V - w.V) < 1e-8);
    CHECK(max_abs(omega.G - w.G) < 1e-8);

    const RelationResiduals res = check_relations(sys, fam, 401, 2.5e-3);
    CHECK(res.rel_Q < 1e-5);
    CHECK(res.rel_V < 1e-5);
    CHECK(res.rel_G < 1e-5);
  }
}

TEST_CASE("frozen-fiber family: fiber quasi-velocities and variations vanish") {
  const SystemSpec& sys = so2();
  Rng rng(62);
  const PathFamily base = make_family(sys, rng);
  // freeze the fiber throughout the family
  PathFamily fam;
  fam.eval = [&](double u, double t) {
    BundlePoint b = base.eval(u, t);
    b.f_tilde.setZero();
    return b;
  };

  const QuasiVelocity omega =
      decompose_rates(sys, fam, 0.0, 0.37, RateDirection::Time, 1e-4);
  const QuasiVelocity w =
      decompose_rates(sys, fam, 0.0, 0.37, RateDirection::Deformation, 1e-4);
  CHECK(max_abs(omega.V) < 1e-13);
  CHECK(max_abs(w.V) < 1e-13);
}

TEST_CASE("decomposition recomposes the raw finite-difference rates") {
  Rng rng(63);
  for (const SystemSpec* sysp : {&so2(), &su2()}) {
    const SystemSpec& sys = *sysp;
    const PathFamily fam = make_family(sys, rng);
    for (double t : {0.21, 0.5, 0.83}) {
      CHECK(recomposition_residual(sys, fam, 0.0, t, RateDirection::Time, 1e-3) <=
            1e-10);
      CHECK(recomposition_residual(sys, fam, 0.0, t, RateDirection::Deformation,
                                   1e-3) <= 1e-10);
    }
  }
}

TEST_CASE("variations vanish at the endpoints of the time interval") {
  Rng rng(64);
  const SystemSpec& sys = su2();
  const PathFamily fam = make_family(sys, rng);
  for (double t : {fam.t0, fam.t1}) {
    const QuasiVelocity w =
        decompose_rates(sys, fam, 0.0, t, RateDirection::Deformation, 1e-3);
    CHECK(max_abs(w.Q) < 1e-12);
    CHECK(max_abs(w.V) < 1e-12);
    CHECK(max_abs(w.G) < 1e-12);
  }
}

TEST_CASE("differential relations on random smooth families") {
  Rng rng(65);
  for (const SystemSpec* sysp : {&so2(), &su2()}) {
    const SystemSpec& sys = *sysp;
    const PathFamily fam = make_family(sys, rng);
    const RelationResiduals res = check_relations(sys, fam, 1001, 1e-3);
    CHECK(res.rel_Q <= 1e-4);
    CHECK(res.rel_V <= 1e-4);
    CHECK(res.rel_G <= 1e-4);
    CHECK(res.condensed_gap <= 1e-12);
  }
}

TEST_CASE("relation residuals refine at second order") {
  Rng rng(66);
  for (const SystemSpec* sysp : {&so2(), &su2()}) {
    const SystemSpec& sys = *sysp;
    const PathFamily fam = make_family(sys, rng);
    const RefinementOrder ord = relation_refinement_order(sys, fam, 251);
    CHECK(ord.passes(1.8));
  }
}
