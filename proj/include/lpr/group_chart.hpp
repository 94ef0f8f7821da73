#pragma once

#include <functional>
#include <string>

#include "lpr/linalg.hpp"

namespace lpr {

// Coordinate chart on a compact Lie group.
//
// multiply(a, b) returns the coordinates of the product a*b, identity is the
// coordinate tuple of e, and inverse(a) the coordinates of a^-1.  The
// translation matrices follow the Maurer-Cartan conventions:
//
//   v(a)  = d multiply(a, h)/dh at h = e   (left-invariant frame L_b = v^n_b d_n)
//   u(a)  = v(a)^-1                        (left-invariant coframe u^a_b da^b)
//   vbar(a) = d multiply(h, a)/dh at h = e (right-invariant frame)
//   ubar(a) = vbar(a)^-1
//   rho(a)  = ubar(a) * v(a)               (adjoint matrix)
//
// structure[g](a,b) holds c^g_{ab} with [L_a, L_b] = c^g_{ab} L_g.
struct GroupChart {
  std::string name;
  int dim = 0;
  VectorXd identity;

  std::function<VectorXd(const VectorXd&, const VectorXd&)> multiply;
  std::function<VectorXd(const VectorXd&)> inverse;
  // Jacobian of the inverse map (identity charts of exponential type give -I).
  std::function<MatrixXd(const VectorXd&)> inverse_jacobian;
  std::function<bool(const VectorXd&)> in_domain;

  Tensor3 structure;

  std::function<MatrixXd(const VectorXd&)> u;
  std::function<MatrixXd(const VectorXd&)> v;
  std::function<MatrixXd(const VectorXd&)> ubar;
  std::function<MatrixXd(const VectorXd&)> vbar;

  MatrixXd rho(const VectorXd& a) const { return ubar(a) * v(a); }
  MatrixXd rhobar(const VectorXd& a) const { return rho(inverse(a)); }

  // c-contraction helper: (ad_w)^g_b = c^g_{ab} w^a.
  MatrixXd ad(const VectorXd& w) const {
    MatrixXd m = MatrixXd::Zero(dim, dim);
    for (int g = 0; g < dim; ++g)
      for (int b = 0; b < dim; ++b)
        for (int a = 0; a < dim; ++a) m(g, b) += structure[g](a, b) * w[a];
    return m;
  }
};

// Angle chart on SO(2), theta in (-pi, pi].  All translation matrices are 1.
GroupChart so2_chart();

// Exponential chart on SU(2) realised as unit quaternions, a in a ball of
// radius 0.9*pi.  Translation matrices are closed-form Rodrigues expressions.
GroupChart su2_chart();

// Replace the analytic translation matrices by central finite differences of
// the multiplication map (fallback for user-supplied groups).
void use_fd_translation(GroupChart& chart, double h = 1e-6);

// Structure constants from second derivatives of the multiplication map,
// c^g_{ab} = d2 multiply^g(x,y)/dx^a dy^b - (a<->b) at the identity.
Tensor3 fd_structure_constants(const GroupChart& chart, double h = 1e-4);

// Chart self-consistency checks (identity laws, inverse pairs, antisymmetry
// and Jacobi identity of the structure constants, rho(e) = I).  Throws
// ConfigError naming the failed check.
void validate_chart(const GroupChart& chart, Rng& rng, double tol = 1e-8);

// Quaternion helpers shared by the SU(2) chart and the su2 system.
namespace quat {
VectorXd multiply(const VectorXd& p, const VectorXd& q);
VectorXd conjugate(const VectorXd& q);
VectorXd exp_map(const VectorXd& x);   // R^3 -> unit quaternion
VectorXd log_map(const VectorXd& q);   // unit quaternion -> R^3 (principal)
MatrixXd left_matrix(const VectorXd& p);   // f -> p * f
MatrixXd right_matrix(const VectorXd& p);  // f -> f * p
}  // namespace quat

}  // namespace lpr
