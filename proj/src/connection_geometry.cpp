#include "lpr/connection_geometry.hpp"

#include <cmath>

namespace lpr {

namespace {

// Orbit metric and potentials from Killing data; shared by the slice and
// ambient evaluations.
void fill_connection(ConnectionData& c, const MatrixXd& K_P, const MatrixXd& K_V,
                     const MatrixXd& G_P, const MatrixXd& G_V) {
  c.gamma = K_P.transpose() * G_P * K_P;
  c.gamma_prime = K_V.transpose() * G_V * K_V;
  c.d = c.gamma + c.gamma_prime;
  c.d_inv = guarded_inverse(c.d, "orbit metric d");
  c.A_Q = c.d_inv * K_P.transpose() * G_P;
  c.A_V = c.d_inv * K_V.transpose() * G_V;
}

HorizontalProjector make_pi(const MatrixXd& K_P, const MatrixXd& K_V,
                            const MatrixXd& G_P, const MatrixXd& G_V,
                            const MatrixXd& d_inv) {
  HorizontalProjector pi;
  const int nP = K_P.rows(), nV = K_V.rows();
  pi.QQ = MatrixXd::Identity(nP, nP) - K_P * d_inv * K_P.transpose() * G_P;
  pi.QV = -K_P * d_inv * K_V.transpose() * G_V;
  pi.VQ = -K_V * d_inv * K_P.transpose() * G_P;
  pi.VV = MatrixXd::Identity(nV, nV) - K_V * d_inv * K_V.transpose() * G_V;
  return pi;
}

}  // namespace

GeometryCache geometry_at(const SystemSpec& sys, const BundlePoint& point,
                          double slice_tol) {
  const double chi_res = sys.gauge.chi(point.Q_star).cwiseAbs().maxCoeff();
  if (chi_res > slice_tol) {
    throw NumericalError("geometry_at: point off the gauge surface (|chi| = " +
                         std::to_string(chi_res) + ") at Q* = " +
                         format_point(point.Q_star));
  }

  GeometryCache g;
  g.point = point;
  const VectorXd& Q = point.Q_star;
  const VectorXd& f = point.f_tilde;
  const int nP = sys.dim_P(), nV = sys.dim_V(), nG = sys.dim_G();

  g.G_P = sys.action.metric_P(Q);
  g.G_P_inv = guarded_inverse(g.G_P, "metric_P");
  g.G_P_grad = sys.action.metric_P_grad(Q);
  g.G_V = sys.action.metric_V;
  g.G_V_inv = guarded_inverse(g.G_V, "metric_V");
  g.K_P = sys.action.killing(Q);
  g.K_P_grad = sys.action.killing_grad(Q);
  g.K_V = sys.killing_V(f);
  g.chi_grad = sys.gauge.chi_grad(Q);
  g.chi_hess = sys.gauge.chi_hess(Q);

  g.proj = projectors(sys, Q, f);
  fill_connection(g.conn, g.K_P, g.K_V, g.G_P, g.G_V);
  g.Pi = make_pi(g.K_P, g.K_V, g.G_P, g.G_V, g.conn.d_inv);

  g.u = sys.group.u(point.a);
  g.v = sys.group.v(point.a);
  g.ubar = sys.group.ubar(point.a);
  g.vbar = sys.group.vbar(point.a);
  g.rho = g.ubar * g.v;
  g.rhobar = guarded_inverse(g.rho, "adjoint matrix rho");
  g.At_Q = g.rhobar * g.conn.A_Q;
  g.At_V = g.rhobar * g.conn.A_V;

  // Horizontal metric and its pseudoinverse blocks.
  HorizontalMetric& h = g.hmet;
  h.QQ = g.G_P - g.G_P * g.K_P * g.conn.d_inv * g.K_P.transpose() * g.G_P;
  h.QV = -g.G_P * g.K_P * g.conn.d_inv * g.K_V.transpose() * g.G_V;
  h.VV = g.G_V - g.G_V * g.K_V * g.conn.d_inv * g.K_V.transpose() * g.G_V;
  h.inv_QQ = g.proj.N_QQ * g.G_P_inv * g.proj.N_QQ.transpose();
  h.inv_QV = g.proj.N_QQ * g.G_P_inv * g.proj.N_VQ.transpose();
  h.inv_VV = g.G_V_inv + g.proj.N_VQ * g.G_P_inv * g.proj.N_VQ.transpose();
  h.d_tilde = g.rho.transpose() * g.conn.d * g.rho;
  h.d_tilde_inv = g.rhobar * g.conn.d_inv * g.rhobar.transpose();

  // --- ordinary derivatives of the connection objects ---

  // dPhi[C](b, m) = dK^A_m/dQ^C chi^b_A + K^A_m chi^b_{A,C}
  Tensor3 dPhi = make_tensor3(nP, nG, nG);
  for (int c = 0; c < nP; ++c)
    for (int b = 0; b < nG; ++b)
      for (int m = 0; m < nG; ++m) {
        double s = 0;
        for (int A = 0; A < nP; ++A) {
          s += g.K_P_grad[m](A, c) * g.chi_grad(b, A);
          s += g.K_P(A, m) * g.chi_hess[b](A, c);
        }
        dPhi[c](b, m) = s;
      }

  g.dLambda = make_tensor3(nP, nG, nP);
  for (int c = 0; c < nP; ++c) {
    MatrixXd dgrad(nG, nP);  // chi^mu_{E,C} as a (mu, E) matrix for fixed C
    for (int m = 0; m < nG; ++m)
      for (int e = 0; e < nP; ++e) dgrad(m, e) = g.chi_hess[m](e, c);
    g.dLambda[c] =
        -g.proj.fp_inv * dPhi[c] * g.proj.fp_inv * g.chi_grad + g.proj.fp_inv * dgrad;
  }

  // Column-C slices of the Killing gradients: KC(A, m) = dK^A_m/dQ^C.
  auto killing_slice = [&](int c) {
    MatrixXd kc(nP, nG);
    for (int m = 0; m < nG; ++m) kc.col(m) = g.K_P_grad[m].col(c);
    return kc;
  };
  // dK_V/df^q slices: KVq(m, a) = (Jbar_a)^m_q.
  auto killing_V_slice = [&](int q) {
    MatrixXd kv(nV, nG);
    for (int a = 0; a < nG; ++a) kv.col(a) = sys.action.generators[a].col(q);
    return kv;
  };

  g.dd_dQ = make_tensor3(nP, nG, nG);
  g.dd_dV = make_tensor3(nV, nG, nG);
  Tensor3 ddinv_dQ = make_tensor3(nP, nG, nG), ddinv_dV = make_tensor3(nV, nG, nG);
  for (int c = 0; c < nP; ++c) {
    const MatrixXd kc = killing_slice(c);
    g.dd_dQ[c] = kc.transpose() * g.G_P * g.K_P + g.K_P.transpose() * g.G_P_grad[c] * g.K_P +
                 g.K_P.transpose() * g.G_P * kc;
    ddinv_dQ[c] = -g.conn.d_inv * g.dd_dQ[c] * g.conn.d_inv;
  }
  for (int q = 0; q < nV; ++q) {
    const MatrixXd kv = killing_V_slice(q);
    g.dd_dV[q] = kv.transpose() * g.G_V * g.K_V + g.K_V.transpose() * g.G_V * kv;
    ddinv_dV[q] = -g.conn.d_inv * g.dd_dV[q] * g.conn.d_inv;
  }

  g.dA_Q_dQ = make_tensor3(nP, nG, nP);
  g.dA_V_dQ = make_tensor3(nP, nG, nV);
  g.dA_Q_dV = make_tensor3(nV, nG, nP);
  g.dA_V_dV = make_tensor3(nV, nG, nV);
  for (int c = 0; c < nP; ++c) {
    const MatrixXd kc = killing_slice(c);
    g.dA_Q_dQ[c] = ddinv_dQ[c] * g.K_P.transpose() * g.G_P +
                   g.conn.d_inv * (kc.transpose() * g.G_P +
                                   g.K_P.transpose() * g.G_P_grad[c]);
    g.dA_V_dQ[c] = ddinv_dQ[c] * g.K_V.transpose() * g.G_V;
  }
  for (int q = 0; q < nV; ++q) {
    const MatrixXd kv = killing_V_slice(q);
    g.dA_Q_dV[q] = ddinv_dV[q] * g.K_P.transpose() * g.G_P;
    g.dA_V_dV[q] = ddinv_dV[q] * g.K_V.transpose() * g.G_V +
                   g.conn.d_inv * kv.transpose() * g.G_V;
  }

  g.dGH_QQ_dQ = make_tensor3(nP, nP, nP);
  g.dGH_QV_dQ = make_tensor3(nP, nP, nV);
  g.dGH_VV_dQ = make_tensor3(nP, nV, nV);
  g.dGH_QQ_dV = make_tensor3(nV, nP, nP);
  g.dGH_QV_dV = make_tensor3(nV, nP, nV);
  g.dGH_VV_dV = make_tensor3(nV, nV, nV);
  const MatrixXd GK = g.G_P * g.K_P;
  const MatrixXd GKV = g.G_V * g.K_V;
  for (int c = 0; c < nP; ++c) {
    const MatrixXd kc = killing_slice(c);
    const MatrixXd dGK = g.G_P_grad[c] * g.K_P + g.G_P * kc;
    g.dGH_QQ_dQ[c] = g.G_P_grad[c] - dGK * g.conn.d_inv * GK.transpose() -
                     GK * ddinv_dQ[c] * GK.transpose() -
                     GK * g.conn.d_inv * dGK.transpose();
    g.dGH_QV_dQ[c] =
        -dGK * g.conn.d_inv * GKV.transpose() - GK * ddinv_dQ[c] * GKV.transpose();
    g.dGH_VV_dQ[c] = -GKV * ddinv_dQ[c] * GKV.transpose();
  }
  for (int q = 0; q < nV; ++q) {
    const MatrixXd kv = killing_V_slice(q);
    const MatrixXd dGKV = g.G_V * kv;
    g.dGH_QQ_dV[q] = -GK * ddinv_dV[q] * GK.transpose();
    g.dGH_QV_dV[q] =
        -GK * (ddinv_dV[q] * GKV.transpose() + g.conn.d_inv * dGKV.transpose());
    g.dGH_VV_dV[q] = -dGKV * g.conn.d_inv * GKV.transpose() -
                     GKV * ddinv_dV[q] * GKV.transpose() -
                     GKV * g.conn.d_inv * dGKV.transpose();
  }

  // --- curvature blocks (slice-projected derivative on the Q slots) ---
  StructureConstants& sc = g.sc;
  sc.curv_QQ = make_tensor3(nG, nP, nP);
  sc.curv_QV = make_tensor3(nG, nP, nV);
  sc.curv_VV = make_tensor3(nG, nV, nV);
  const MatrixXd& Pp = g.proj.P_perp;
  for (int a = 0; a < nG; ++a) {
    MatrixXd raw_QQ(nP, nP);  // dA_Q^a_P/dQ^S as (S, P)
    MatrixXd raw_QV(nP, nV);  // dA_V^a_p/dQ^S as (S, p)
    for (int s = 0; s < nP; ++s) {
      raw_QQ.row(s) = g.dA_Q_dQ[s].row(a);
      raw_QV.row(s) = g.dA_V_dQ[s].row(a);
    }
    MatrixXd raw_VQ(nV, nP);  // dA_Q^a_E/df^p as (p, E)
    MatrixXd raw_VV(nV, nV);  // dA_V^a_m/df^p as (p, m)
    for (int p = 0; p < nV; ++p) {
      raw_VQ.row(p) = g.dA_Q_dV[p].row(a);
      raw_VV.row(p) = g.dA_V_dV[p].row(a);
    }
    const MatrixXd proj_QQ = Pp.transpose() * raw_QQ;
    sc.curv_QQ[a] = proj_QQ - proj_QQ.transpose() +
                    g.conn.A_Q.transpose() * sys.group.structure[a] * g.conn.A_Q;
    sc.curv_QV[a] = Pp.transpose() * raw_QV - raw_VQ.transpose() +
                    g.conn.A_Q.transpose() * sys.group.structure[a] * g.conn.A_V;
    sc.curv_VV[a] = raw_VV - raw_VV.transpose() +
                    g.conn.A_V.transpose() * sys.group.structure[a] * g.conn.A_V;
  }

  // --- structure constants of the horizontal-lift frame ---
  const MatrixXd& N = g.proj.N_QQ;
  const MatrixXd& Nv = g.proj.N_VQ;
  const MatrixXd& La = g.proj.Lambda;

  sc.C_Q_QQ = make_tensor3(nP, nP, nP);
  for (int gidx = 0; gidx < nG; ++gidx) {
    const MatrixXd m = g.K_P_grad[gidx] * N;  // (T, B) = dK^T_g/dQ^R N^R_B
    for (int t = 0; t < nP; ++t)
      sc.C_Q_QQ[t] += La.row(gidx).transpose() * m.row(t) -
                      m.row(t).transpose() * La.row(gidx);
  }

  sc.C_V_QQ = make_tensor3(nV, nP, nP);
  for (int a = 0; a < nG; ++a) {
    MatrixXd W(nP, nP);  // (D, R) = dLambda^a_R/dQ^D
    for (int dIdx = 0; dIdx < nP; ++dIdx) W.row(dIdx) = g.dLambda[dIdx].row(a);
    const MatrixXd S = N.transpose() * (W - W.transpose()) * N;
    for (int p = 0; p < nV; ++p) sc.C_V_QQ[p] -= g.K_V(p, a) * S;
  }
  for (int s = 0; s < nG; ++s) {
    const MatrixXd E = La.transpose() * sys.group.structure[s].transpose() * La;
    for (int p = 0; p < nV; ++p) sc.C_V_QQ[p] -= g.K_V(p, s) * E;
  }

  const Tensor3 curvt_QQ = g.tilded(sc.curv_QQ);
  const Tensor3 curvt_QV = g.tilded(sc.curv_QV);
  const Tensor3 curvt_VV = g.tilded(sc.curv_VV);

  sc.C_G_QQ = make_tensor3(nG, nP, nP);
  sc.C_G_QV = make_tensor3(nG, nP, nV);
  sc.C_G_VV = make_tensor3(nG, nV, nV);
  for (int a = 0; a < nG; ++a) {
    const MatrixXd mixed = N.transpose() * curvt_QV[a] * Nv;
    sc.C_G_QQ[a] = -N.transpose() * curvt_QQ[a] * N - (mixed - mixed.transpose()) +
                   Nv.transpose() * curvt_VV[a].transpose() * Nv;
    sc.C_G_QV[a] = -N.transpose() * curvt_QV[a] - Nv.transpose() * curvt_VV[a];
    sc.C_G_VV[a] = -curvt_VV[a];
  }

  sc.C_V_QV = make_tensor3(nV, nP, nV);
  for (int a = 0; a < nG; ++a)
    for (int m = 0; m < nV; ++m)
      sc.C_V_QV[m] += La.row(a).transpose() * sys.action.generators[a].row(m);

  g.V = sys.potential.value(Q, f);
  g.dV_Q = sys.potential.grad_Q(Q, f);
  g.dV_V = sys.potential.grad_f(Q, f);
  return g;
}

FrameCoefficients ambient_frame(const SystemSpec& sys, const VectorXd& Q,
                                const VectorXd& f, const VectorXd& a) {
  FrameCoefficients fc;
  const int nP = sys.dim_P();
  const MatrixXd K = sys.action.killing(Q);
  const MatrixXd fp = faddeev_popov(sys, Q);
  const MatrixXd Lambda = guarded_inverse(fp, "Faddeev-Popov matrix") *
                          sys.gauge.chi_grad(Q);
  fc.N_QQ = MatrixXd::Identity(nP, nP) - K * Lambda;
  fc.N_VQ = -sys.killing_V(f) * Lambda;

  ConnectionData c;
  fill_connection(c, K, sys.killing_V(f), sys.action.metric_P(Q),
                  sys.action.metric_V);
  const MatrixXd rhobar = sys.group.rhobar(a);
  fc.At_Q = rhobar * c.A_Q;
  fc.At_V = rhobar * c.A_V;
  fc.hgc = fc.At_Q * fc.N_QQ + fc.At_V * fc.N_VQ;
  fc.u = sys.group.u(a);
  fc.v = sys.group.v(a);
  return fc;
}

AmbientGeometry ambient_geometry(const SystemSpec& sys, const VectorXd& Q,
                                 const VectorXd& f) {
  AmbientGeometry a;
  a.K_P = sys.action.killing(Q);
  a.K_V = sys.killing_V(f);
  const MatrixXd G_P = sys.action.metric_P(Q);
  ConnectionData c;
  fill_connection(c, a.K_P, a.K_V, G_P, sys.action.metric_V);
  a.d = c.d;
  a.d_inv = c.d_inv;
  a.A_Q = c.A_Q;
  a.A_V = c.A_V;
  a.Pi = make_pi(a.K_P, a.K_V, G_P, sys.action.metric_V, c.d_inv);
  return a;
}

}  // namespace lpr
