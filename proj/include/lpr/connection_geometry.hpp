#pragma once

#include "lpr/gauge_slice.hpp"
#include "lpr/system_spec.hpp"

namespace lpr {

// Mechanical-connection data at one point.
//
//   gamma       K^A_m G_AB K^B_n          orbit metric, P factor
//   gamma_prime K^p_m G_pq K^q_n          orbit metric, V factor
//   d           gamma + gamma_prime       full orbit metric
//   A_Q, A_V    gauge potentials d^{am} K^D_m G_DB and d^{am} K^q_m G_qp
struct ConnectionData {
  MatrixXd gamma;
  MatrixXd gamma_prime;
  MatrixXd d;
  MatrixXd d_inv;
  MatrixXd A_Q;  // (alpha, B)
  MatrixXd A_V;  // (alpha, m)
};

// Blocks of the horizontal projector Pi = I - K d^{-1} K^T G on the combined
// (Q, f) index.
struct HorizontalProjector {
  MatrixXd QQ;
  MatrixXd QV;
  MatrixXd VQ;
  MatrixXd VV;
};

// Horizontal metric G^H = Pi^T G Pi (degenerate along the orbit) plus the
// pseudoinverse blocks satisfying Ghat * G^H = N on the combined index, and
// the group-sector metric d~ = rho^T d rho.
struct HorizontalMetric {
  MatrixXd QQ;
  MatrixXd QV;
  MatrixXd VV;
  MatrixXd inv_QQ;  // G^{EF} N^A_E N^B_F
  MatrixXd inv_QV;  // G^{EF} N^A_E N^q_F
  MatrixXd inv_VV;  // G^{pq} + G^{AB} N^p_A N^q_B
  MatrixXd d_tilde;
  MatrixXd d_tilde_inv;
};

// Structure constants of the horizontal-lift frame (H_A, H_m, L_a) and the
// curvature blocks of the connection.  Leading tensor index is the upper
// frame index; curvature blocks carry the untilded (a-independent) values.
struct StructureConstants {
  Tensor3 C_Q_QQ;  // [T](A,B)   coefficients of H_T in [H_A, H_B]
  Tensor3 C_V_QQ;  // [p](A,B)   coefficients of H_p in [H_A, H_B]
  Tensor3 C_G_QQ;  // [a](A,B)   coefficients of L_a in [H_A, H_B]
  Tensor3 C_V_QV;  // [m](A,p)   coefficients of H_m in [H_A, H_p]
  Tensor3 C_G_QV;  // [a](A,p)   coefficients of L_a in [H_A, H_p]
  Tensor3 C_G_VV;  // [a](p,q)   coefficients of L_a in [H_p, H_q]
  Tensor3 curv_QQ;  // [a](S,P)  slice-projected Q*-derivatives
  Tensor3 curv_QV;  // [a](E,p)
  Tensor3 curv_VV;  // [a](p,m)
};

// Every geometric object evaluated at one bundle point, immutable after
// construction.  Derivative arrays hold ordinary ambient partials; the
// slice-projected derivative is P_perp-contraction on the derivative slot.
struct GeometryCache {
  BundlePoint point;

  MatrixXd G_P, G_P_inv;
  Tensor3 G_P_grad;  // [C](A,B)
  MatrixXd G_V, G_V_inv;
  MatrixXd K_P;       // (A, alpha)
  Tensor3 K_P_grad;   // [alpha](A, C)
  MatrixXd K_V;       // (m, alpha)
  MatrixXd chi_grad;  // (mu, C)
  Tensor3 chi_hess;   // [mu](C, D)

  ProjectorSet proj;
  ConnectionData conn;
  HorizontalProjector Pi;
  HorizontalMetric hmet;
  StructureConstants sc;

  // Group translation data at a.
  MatrixXd u, v, ubar, vbar, rho, rhobar;
  MatrixXd At_Q, At_V;  // tilded potentials rhobar * A

  // Ordinary derivatives of the connection objects.
  Tensor3 dLambda;                          // [C](nu, E)
  Tensor3 dd_dQ;                            // [C](m, n) of d
  Tensor3 dd_dV;                            // [q](m, n) of d (gamma' part)
  Tensor3 dA_Q_dQ, dA_V_dQ;                 // [C](alpha, .)
  Tensor3 dA_Q_dV, dA_V_dV;                 // [q](alpha, .)
  Tensor3 dGH_QQ_dQ, dGH_QV_dQ, dGH_VV_dQ;  // [C](., .)
  Tensor3 dGH_QQ_dV, dGH_QV_dV, dGH_VV_dV;  // [q](., .)

  double V = 0.0;
  VectorXd dV_Q, dV_V;

  int nP() const { return static_cast<int>(G_P.rows()); }
  int nV() const { return static_cast<int>(G_V.rows()); }
  int nG() const { return static_cast<int>(conn.d.rows()); }

  // Connection one-form on bundle rates: omega_hat = At_Q qdot + At_V fdot + u adot.
  VectorXd connection_form(const BundleVelocity& rate) const {
    return At_Q * rate.Qdot_star + At_V * rate.fdot_tilde + u * rate.adot;
  }

  // Coefficients a^al_M = N^T_M At^al_T + N^m_M At^al_m of L_al inside H_M.
  MatrixXd horizontal_group_coeff() const {
    return At_Q * proj.N_QQ + At_V * proj.N_VQ;
  }

  // rhobar-contraction of an untilded curvature block.
  Tensor3 tilded(const Tensor3& curv) const {
    Tensor3 out = make_tensor3(static_cast<int>(curv.size()), curv[0].rows(),
                               curv[0].cols());
    for (std::size_t a = 0; a < curv.size(); ++a)
      for (std::size_t m = 0; m < curv.size(); ++m) out[a] += rhobar(a, m) * curv[m];
    return out;
  }
};

// Full evaluation at a bundle point.  Requires |chi(Q*)| below slice_tol.
GeometryCache geometry_at(const SystemSpec& sys, const BundlePoint& point,
                          double slice_tol = 1e-8);

// Named views over the one-point evaluation.
inline ConnectionData connection_at(const SystemSpec& sys, const BundlePoint& b) {
  return geometry_at(sys, b).conn;
}
inline StructureConstants structure_constants_at(const SystemSpec& sys,
                                                 const BundlePoint& b) {
  return geometry_at(sys, b).sc;
}
inline HorizontalMetric horizontal_metric_at(const SystemSpec& sys,
                                             const BundlePoint& b) {
  return geometry_at(sys, b).hmet;
}


// Connection and horizontal projector at an arbitrary ambient point (Q, f),
// used by the transformation-law and connection-form tests.
struct AmbientGeometry {
  MatrixXd K_P, K_V;
  MatrixXd d, d_inv;
  MatrixXd A_Q, A_V;  // omega_hat coefficients d^{-1} K^T G
  HorizontalProjector Pi;
};
AmbientGeometry ambient_geometry(const SystemSpec& sys, const VectorXd& Q,
                                 const VectorXd& f);

// Coefficient arrays of the horizontal-lift frame extended off the slice:
// H_M = N^T_M d/dQ^T + N^m_M d/df^m - hgc^al_M L_al and H_m = d/df^m -
// At_V^al_m L_al with L_al = v^n_al d/da^n.  Valid wherever the
// Faddeev-Popov matrix is invertible.
struct FrameCoefficients {
  MatrixXd N_QQ, N_VQ;
  MatrixXd At_Q, At_V;
  MatrixXd hgc;
  MatrixXd u, v;
};
FrameCoefficients ambient_frame(const SystemSpec& sys, const VectorXd& Q,
                                const VectorXd& f, const VectorXd& a);

// Frame coefficient arrays restricted to a bundle point (the operator pair
// H_M, H_m of the horizontal lift, plus the left-invariant frame data).
inline FrameCoefficients horizontal_fields(const GeometryCache& g) {
  FrameCoefficients fc;
  fc.N_QQ = g.proj.N_QQ;
  fc.N_VQ = g.proj.N_VQ;
  fc.At_Q = g.At_Q;
  fc.At_V = g.At_V;
  fc.hgc = g.horizontal_group_coeff();
  fc.u = g.u;
  fc.v = g.v;
  return fc;
}

}  // namespace lpr
