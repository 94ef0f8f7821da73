#pragma once

#include <utility>

#include "lpr/system_spec.hpp"

namespace lpr {

// Adapted coordinates (Q*, f~, a) of a point of P x V.
struct BundlePoint {
  VectorXd Q_star;
  VectorXd f_tilde;
  VectorXd a;
};

// Rates of the adapted coordinates along a curve.
struct BundleVelocity {
  VectorXd Qdot_star;
  VectorXd fdot_tilde;
  VectorXd adot;
};

// Projectors and gauge data at a slice point.
//
//   fp      Faddeev-Popov matrix Phi^b_m = chi^b_A K^A_m
//   Lambda  Lambda^n_E = (Phi^-1)^n_m chi^m_E
//   N_QQ    N^A_C = delta - K^A Lambda_C      (P x P)
//   N_VQ    N^m_A = -K^m_a Lambda^a_A         (V x P); N^A_m = 0, N^m_p = delta
//   P_perp  metric-orthogonal projector onto T Sigma
struct ProjectorSet {
  MatrixXd fp;
  MatrixXd fp_inv;
  MatrixXd Lambda;
  MatrixXd N_QQ;
  MatrixXd N_VQ;
  MatrixXd P_perp;
};

MatrixXd faddeev_popov(const SystemSpec& sys, const VectorXd& Q);

// Solves chi(F(Q, a^-1)) = 0 for the group coordinates a(Q) by a damped
// Newton iteration with the analytic chain-rule Jacobian.
VectorXd solve_group_coordinate(const SystemSpec& sys, const VectorXd& Q,
                                const VectorXd& guess, double tol = 1e-10,
                                int max_iter = 50);

// (Q, f) -> (Q*, f~, a) with Q* = F(Q, a^-1), f~ = D(a) f.
BundlePoint to_bundle(const SystemSpec& sys, const VectorXd& Q, const VectorXd& f,
                      const VectorXd& guess, double tol = 1e-10);
BundlePoint to_bundle(const SystemSpec& sys, const VectorXd& Q, const VectorXd& f);

// Inverse chart map: Q = F(Q*, a), f = Dbar(a) f~.
std::pair<VectorXd, VectorXd> from_bundle(const SystemSpec& sys,
                                          const BundlePoint& b);

// Velocity lift through the chart: given ambient (Qdot, fdot) at the point
// described by b, returns (Qdot*, fdot~, adot); Qdot* is tangent to Sigma.
BundleVelocity to_bundle_velocity(const SystemSpec& sys, const BundlePoint& b,
                                  const VectorXd& Qdot, const VectorXd& fdot);

// Pushforward of bundle rates to ambient velocities.
std::pair<VectorXd, VectorXd> from_bundle_velocity(const SystemSpec& sys,
                                                   const BundlePoint& b,
                                                   const BundleVelocity& v);

ProjectorSet projectors(const SystemSpec& sys, const VectorXd& Q_star,
                        const VectorXd& f_tilde);

// One damped-Newton re-gauge of a near-slice point: moves Q* back onto Sigma
// along the orbit, rotating f~ and a consistently so the ambient point is
// preserved.  Returns the pre-projection slice residual.
double project_to_slice(const SystemSpec& sys, BundlePoint& b);

}  // namespace lpr
