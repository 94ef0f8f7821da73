#include "support.hpp"

#include "lpr/verification.hpp"

using namespace lpr;
using namespace lpr::test;

TEST_CASE("structure constants: antisymmetry in the lower index pair") {
  Rng rng(41);
  for (const SystemSpec* sysp : {&so2(), &su2()}) {
    const SystemSpec& sys = *sysp;
    for (int trial = 0; trial < 20; ++trial) {
      const GeometryCache g = geometry_at(sys, random_bundle_point(sys, rng));
      for (const Tensor3* t : {&g.sc.C_Q_QQ, &g.sc.C_V_QQ, &g.sc.C_G_QQ})
        for (const MatrixXd& m : *t) CHECK(max_abs(m + m.transpose()) < 1e-12);
      for (const MatrixXd& m : g.sc.C_G_VV)
        CHECK(max_abs(m + m.transpose()) < 1e-12);
    }
  }
}

TEST_CASE("abelian planar system: group terms vanish, fiber block is pure gradient") {
  const SystemSpec& sys = so2();
  CHECK(max_abs(sys.group.structure[0]) == 0.0);

  Rng rng(42);
  for (int trial = 0; trial < 10; ++trial) {
    const GeometryCache g = geometry_at(sys, random_bundle_point(sys, rng));

    // with c = 0 the fiber block reduces to the antisymmetrised Lambda
    // gradient sandwiched between N projectors
    const int nP = g.nP(), nV = g.nV();
    for (int p = 0; p < nV; ++p) {
      MatrixXd expected = MatrixXd::Zero(nP, nP);
      for (int a = 0; a < g.nG(); ++a) {
        MatrixXd W(nP, nP);
        for (int d = 0; d < nP; ++d) W.row(d) = g.dLambda[d].row(a);
        expected -= g.K_V(p, a) * g.proj.N_QQ.transpose() * (W - W.transpose()) *
                    g.proj.N_QQ;
      }
      CHECK(max_abs(g.sc.C_V_QQ[p] - expected) < 1e-13);
    }

    // [H_p, H_q] closes on the group block alone: C^a_pq = -curv~^a_pq
    const Tensor3 tilded = g.tilded(g.sc.curv_VV);
    for (int a = 0; a < g.nG(); ++a)
      CHECK(max_abs(g.sc.C_G_VV[a] + tilded[a]) < 1e-13);
  }
}

TEST_CASE("commutator oracle: finite differences match the C-expansion") {
  // full-strength version of acceptance criterion 4
  const CheckResult r2 = check_commutator_oracle(so2(), 1234, 1e-5, 1.8);
  CHECK(r2.pass);
  CHECK(r2.max_residual < 1e-5);
  const CheckResult r4 = check_commutator_oracle(su2(), 4321, 1e-5, 1.8);
  CHECK(r4.pass);
  CHECK(r4.max_residual < 1e-5);
}

TEST_CASE("abelian curvature consistency: pure-N block of C_G_QQ") {
  // with c = 0 and the mixed blocks removed, the group-block structure
  // constants collapse onto the N-sandwiched curvature
  const SystemSpec& sys = so2();
  Rng rng(43);
  for (int trial = 0; trial < 10; ++trial) {
    const GeometryCache g = geometry_at(sys, random_bundle_point(sys, rng));
    const Tensor3 ct_QQ = g.tilded(g.sc.curv_QQ);
    const Tensor3 ct_QV = g.tilded(g.sc.curv_QV);
    const Tensor3 ct_VV = g.tilded(g.sc.curv_VV);
    const MatrixXd& N = g.proj.N_QQ;
    const MatrixXd& Nv = g.proj.N_VQ;
    for (int a = 0; a < g.nG(); ++a) {
      const MatrixXd mixed = N.transpose() * ct_QV[a] * Nv;
      const MatrixXd remainder = g.sc.C_G_QQ[a] + (mixed - mixed.transpose()) -
                                 Nv.transpose() * ct_VV[a].transpose() * Nv;
      CHECK(max_abs(remainder + N.transpose() * ct_QQ[a] * N) < 1e-13);
    }
  }
}
