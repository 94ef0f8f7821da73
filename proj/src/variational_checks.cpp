#include "lpr/variational_checks.hpp"

#include <cmath>

namespace lpr {

namespace {

// Low-order trigonometric polynomial with per-component random harmonics.
// Harmonic k is damped by 1/(k+1)^3 to keep third derivatives, and with them
// the O(h^2) residual constants of the relation checks, of order amplitude.
std::function<VectorXd(double)> random_curve(Rng& rng, int dim, const VectorXd& base,
                                             double amplitude) {
  const int harmonics = 2;
  std::vector<VectorXd> amp, phase;
  for (int k = 0; k < harmonics; ++k) {
    const double scale = amplitude / ((k + 1) * (k + 1) * (k + 1));
    amp.push_back(rng.uniform_vector(dim, -scale, scale));
    phase.push_back(rng.uniform_vector(dim, 0.0, 2.0 * M_PI));
  }
  return [base, amp, phase, harmonics](double t) {
    VectorXd x = base;
    for (int k = 0; k < harmonics; ++k)
      for (int i = 0; i < x.size(); ++i)
        x[i] += amp[k][i] * std::sin(2.0 * M_PI * (k + 1) * t + phase[k][i]);
    return x;
  };
}

// Orthonormal basis of ker(chi_grad) at a slice point.
MatrixXd slice_tangent_basis(const SystemSpec& sys, const VectorXd& Q_star) {
  const MatrixXd chi = sys.gauge.chi_grad(Q_star);
  Eigen::FullPivLU<MatrixXd> lu(chi);
  lu.setThreshold(1e-10);
  return lu.kernel();
}

double bump(double t, double t0, double t1) {
  const double s = std::sin(M_PI * (t - t0) / (t1 - t0));
  return s * s;
}

}  // namespace

PathFamily make_family(const SystemSpec& sys, Rng& rng) {
  const int nG = sys.dim_G(), nV = sys.dim_V();
  const VectorXd Q0 = [&] {
    VectorXd q = sys.random_slice_point(rng);
    // keep the base away from the orbit-degenerate origin under deformation
    return VectorXd(q * (1.2 / std::max(1.0, q.norm())));
  }();
  const MatrixXd T = slice_tangent_basis(sys, Q0);
  const int nS = T.cols();

  auto q_curve = random_curve(rng, nS, VectorXd::Zero(nS), 0.15);
  auto q_deform = random_curve(rng, nS, VectorXd::Zero(nS), 0.6);
  auto f_curve = random_curve(rng, nV, rng.uniform_vector(nV, -0.4, 0.4), 0.2);
  auto f_deform = random_curve(rng, nV, VectorXd::Zero(nV), 0.6);
  auto a_curve =
      random_curve(rng, nG, 0.35 * sys.random_group_point(rng), 0.12);
  auto a_deform = random_curve(rng, nG, VectorXd::Zero(nG), 0.6);

  PathFamily fam;
  const double t0 = fam.t0, t1 = fam.t1;
  fam.eval = [=, &sys](double u, double t) {
    const double ub = u * bump(t, t0, t1);
    const VectorXd cand = Q0 + T * (q_curve(t) + ub * q_deform(t));
    BundlePoint b;
    // Re-project onto Sigma along the orbit (identity for linear surfaces).
    b.Q_star = to_bundle(sys, cand, VectorXd::Zero(nV)).Q_star;
    b.f_tilde = f_curve(t) + ub * f_deform(t);
    b.a = sys.group.multiply(a_curve(t), VectorXd(ub * a_deform(t)));
    return b;
  };
  return fam;
}

PathFamily make_diagonal_family(const SystemSpec& sys, Rng& rng) {
  const int nG = sys.dim_G(), nV = sys.dim_V();
  const VectorXd Q0 = sys.random_slice_point(rng);
  const MatrixXd T = slice_tangent_basis(sys, Q0);
  auto q_curve = random_curve(rng, T.cols(), VectorXd::Zero(T.cols()), 0.15);
  auto f_curve = random_curve(rng, nV, rng.uniform_vector(nV, -0.4, 0.4), 0.2);
  auto a_curve = random_curve(rng, nG, 0.4 * sys.random_group_point(rng), 0.15);

  PathFamily fam;
  fam.eval = [=, &sys](double u, double t) {
    const double s = u + t;
    BundlePoint b;
    b.Q_star = to_bundle(sys, VectorXd(Q0 + T * q_curve(s)), VectorXd::Zero(nV)).Q_star;
    b.f_tilde = f_curve(s);
    b.a = a_curve(s);
    return b;
  };
  return fam;
}

namespace {

BundleVelocity fd_rate(const PathFamily& fam, double u, double t, RateDirection dir,
                       double h) {
  const BundlePoint plus = dir == RateDirection::Time ? fam.eval(u, t + h)
                                                      : fam.eval(u + h, t);
  const BundlePoint minus = dir == RateDirection::Time ? fam.eval(u, t - h)
                                                       : fam.eval(u - h, t);
  BundleVelocity r;
  r.Qdot_star = (plus.Q_star - minus.Q_star) / (2.0 * h);
  r.fdot_tilde = (plus.f_tilde - minus.f_tilde) / (2.0 * h);
  r.adot = (plus.a - minus.a) / (2.0 * h);
  return r;
}

struct RelationTerms {
  QuasiVelocity du_omega;
  QuasiVelocity dt_w;
  QuasiVelocity omega;
  QuasiVelocity w;
};

// Residual vectors of the three relations at one point.
void accumulate_residuals(const SystemSpec& sys, const GeometryCache& g,
                          const RelationTerms& T, RelationResiduals& out) {
  const int nP = g.nP(), nV = g.nV(), nG = g.nG();
  const QuasiVelocity& omega = T.omega;
  const QuasiVelocity& w = T.w;

  // Slice relation: N^A_R (du omega^R - dt w^R + C^R_{PE} omega^E w^P) = 0.
  VectorXd inner_Q = T.du_omega.Q - T.dt_w.Q;
  VectorXd cvec(nP);
  for (int r = 0; r < nP; ++r) cvec[r] = w.Q.dot(g.sc.C_Q_QQ[r] * omega.Q);
  const VectorXd res_Q = g.proj.N_QQ * (inner_Q + cvec);
  out.rel_Q = std::max(out.rel_Q, res_Q.cwiseAbs().maxCoeff());

  // Fiber relation: N^p_T (du omega^T - dt w^T - C^T_{ER} omega^E w^R)
  //   + du omega^p - dt w^p - C^p_{ER} omega^E w^R - C^p_{Eq} omega^E w^q
  //   - C^p_{qR} omega^q w^R = 0.
  VectorXd inner_T(nP);
  for (int t = 0; t < nP; ++t)
    inner_T[t] = T.du_omega.Q[t] - T.dt_w.Q[t] - omega.Q.dot(g.sc.C_Q_QQ[t] * w.Q);
  VectorXd res_V = g.proj.N_VQ * inner_T + T.du_omega.V - T.dt_w.V;
  for (int p = 0; p < nV; ++p) {
    res_V[p] -= omega.Q.dot(g.sc.C_V_QQ[p] * w.Q);
    res_V[p] -= omega.Q.dot(g.sc.C_V_QV[p] * w.V);
    res_V[p] += w.Q.dot(g.sc.C_V_QV[p] * omega.V);
  }
  out.rel_V = std::max(out.rel_V, res_V.cwiseAbs().maxCoeff());

  // Condensed-notation assembly of the same fiber relation over the combined
  // index; the gap against the expanded form is pure algebra.
  {
    MatrixXd Ntilde = MatrixXd::Zero(nP + nV, nP + nV);
    Ntilde.topLeftCorner(nP, nP) = g.proj.N_QQ;
    Ntilde.bottomLeftCorner(nV, nP) = g.proj.N_VQ;
    Ntilde.bottomRightCorner(nV, nV) = MatrixXd::Identity(nV, nV);
    VectorXd du(nP + nV), dw(nP + nV), cterm(nP + nV);
    du << T.du_omega.Q, T.du_omega.V;
    dw << T.dt_w.Q, T.dt_w.V;
    for (int t = 0; t < nP; ++t) cterm[t] = omega.Q.dot(g.sc.C_Q_QQ[t] * w.Q);
    for (int p = 0; p < nV; ++p)
      cterm[nP + p] = omega.Q.dot(g.sc.C_V_QQ[p] * w.Q) +
                      omega.Q.dot(g.sc.C_V_QV[p] * w.V) -
                      w.Q.dot(g.sc.C_V_QV[p] * omega.V);
    const VectorXd condensed = Ntilde * (du - dw - cterm);
    const double gap = (condensed.tail(nV) - res_V).cwiseAbs().maxCoeff();
    out.condensed_gap = std::max(out.condensed_gap, gap);
  }

  // Group relation: du omega^b - dt w^b + C^b_{RE} w^R omega^E
  //   - C^b_{Ep} w^p omega^E + C^b_{Rm} w^R omega^m + C^b_{pm} w^p omega^m
  //   + c^b_{nm} w^n omega^m = 0.
  VectorXd res_G = T.du_omega.G - T.dt_w.G;
  for (int b = 0; b < nG; ++b) {
    res_G[b] += w.Q.dot(g.sc.C_G_QQ[b] * omega.Q);
    res_G[b] -= omega.Q.dot(g.sc.C_G_QV[b] * w.V);
    res_G[b] += w.Q.dot(g.sc.C_G_QV[b] * omega.V);
    res_G[b] += w.V.dot(g.sc.C_G_VV[b] * omega.V);
    res_G[b] += w.G.dot(sys.group.structure[b] * omega.G);
  }
  out.rel_G = std::max(out.rel_G, res_G.cwiseAbs().maxCoeff());
}

}  // namespace

QuasiVelocity decompose_rates(const SystemSpec& sys, const PathFamily& fam,
                              double u, double t, RateDirection dir, double h) {
  const GeometryCache g = geometry_at(sys, fam.eval(u, t));
  return quasi_velocities(g, fd_rate(fam, u, t, dir, h));
}

double recomposition_residual(const SystemSpec& sys, const PathFamily& fam,
                              double u, double t, RateDirection dir, double h) {
  const GeometryCache g = geometry_at(sys, fam.eval(u, t));
  const BundleVelocity rate = fd_rate(fam, u, t, dir, h);
  const BundleVelocity back = invert_quasi_velocities(g, quasi_velocities(g, rate));
  return std::max({(back.Qdot_star - rate.Qdot_star).cwiseAbs().maxCoeff(),
                   (back.fdot_tilde - rate.fdot_tilde).cwiseAbs().maxCoeff(),
                   (back.adot - rate.adot).cwiseAbs().maxCoeff()});
}

RelationResiduals check_relations(const SystemSpec& sys, const PathFamily& fam,
                                  int nt, double h_u) {
  const double dt = (fam.t1 - fam.t0) / (nt - 1);
  RelationResiduals out;

  // Variations w at u = 0 for every grid point, reused by the dt w stencil.
  std::vector<QuasiVelocity> w(nt);
  std::vector<GeometryCache> center(nt);
  for (int it = 0; it < nt; ++it) {
    const double t = fam.t0 + it * dt;
    center[it] = geometry_at(sys, fam.eval(0.0, t));
    w[it] = quasi_velocities(center[it],
                             fd_rate(fam, 0.0, t, RateDirection::Deformation, h_u));
  }

  for (int it = 1; it + 1 < nt; ++it) {
    const double t = fam.t0 + it * dt;
    RelationTerms terms;
    terms.omega = quasi_velocities(center[it],
                                   fd_rate(fam, 0.0, t, RateDirection::Time, dt));
    terms.w = w[it];

    const GeometryCache g_m = geometry_at(sys, fam.eval(-h_u, t));
    const GeometryCache g_p = geometry_at(sys, fam.eval(+h_u, t));
    const QuasiVelocity om =
        quasi_velocities(g_m, fd_rate(fam, -h_u, t, RateDirection::Time, dt));
    const QuasiVelocity op =
        quasi_velocities(g_p, fd_rate(fam, +h_u, t, RateDirection::Time, dt));
    terms.du_omega.Q = (op.Q - om.Q) / (2.0 * h_u);
    terms.du_omega.V = (op.V - om.V) / (2.0 * h_u);
    terms.du_omega.G = (op.G - om.G) / (2.0 * h_u);
    terms.dt_w.Q = (w[it + 1].Q - w[it - 1].Q) / (2.0 * dt);
    terms.dt_w.V = (w[it + 1].V - w[it - 1].V) / (2.0 * dt);
    terms.dt_w.G = (w[it + 1].G - w[it - 1].G) / (2.0 * dt);

    accumulate_residuals(sys, center[it], terms, out);
  }
  return out;
}

RefinementOrder relation_refinement_order(const SystemSpec& sys,
                                          const PathFamily& fam, int nt_coarse) {
  const double h_coarse = (fam.t1 - fam.t0) / (nt_coarse - 1);
  const RelationResiduals coarse = check_relations(sys, fam, nt_coarse, h_coarse);
  const RelationResiduals fine =
      check_relations(sys, fam, 2 * (nt_coarse - 1) + 1, 0.5 * h_coarse);
  RefinementOrder ord;
  ord.coarse_Q = coarse.rel_Q;
  ord.coarse_V = coarse.rel_V;
  ord.coarse_G = coarse.rel_G;
  ord.order_Q = std::log2(coarse.rel_Q / fine.rel_Q);
  ord.order_V = std::log2(coarse.rel_V / fine.rel_V);
  ord.order_G = std::log2(coarse.rel_G / fine.rel_G);
  return ord;
}

bool RefinementOrder::passes(double min_order, double floor) const {
  // A residual at the roundoff floor has no measurable truncation error, so
  // the scaling requirement applies only above the floor.
  auto ok = [&](double coarse, double order) {
    return coarse <= floor || order >= min_order;
  };
  return ok(coarse_Q, order_Q) && ok(coarse_V, order_V) && ok(coarse_G, order_G);
}

}  // namespace lpr
