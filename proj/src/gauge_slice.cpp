#include "lpr/gauge_slice.hpp"

#include <cmath>

namespace lpr {

MatrixXd faddeev_popov(const SystemSpec& sys, const VectorXd& Q) {
  const MatrixXd fp = sys.gauge.chi_grad(Q) * sys.action.killing(Q);
  Eigen::FullPivLU<MatrixXd> lu(fp);
  const double scale = std::max(1.0, fp.cwiseAbs().maxCoeff());
  lu.setThreshold(1e-12 * scale);
  if (!lu.isInvertible()) {
    throw DegeneracyError("Faddeev-Popov matrix singular at Q = " + format_point(Q));
  }
  return fp;
}

namespace {

// Damped Newton on chi(F(Q, a^-1)) = 0 from one start.  Returns true on
// convergence; stalls (singular Jacobian, exhausted damping) return false so
// the caller can retry from another start.
bool newton_from(const SystemSpec& sys, const VectorXd& Q, VectorXd& a, double tol,
                 int max_iter) {
  auto residual = [&](const VectorXd& a_try) {
    return VectorXd(sys.gauge.chi(sys.action.F(Q, sys.group.inverse(a_try))));
  };
  VectorXd r = residual(a);
  double rnorm = r.cwiseAbs().maxCoeff();
  for (int iter = 0; iter < max_iter; ++iter) {
    if (rnorm <= tol) return true;
    const VectorXd b = sys.group.inverse(a);
    const VectorXd Qp = sys.action.F(Q, b);
    MatrixXd jac;
    try {
      // d chi(F(Q, inv(a)))/da = Phi(Q') u(inv(a)) d inv/da
      jac = faddeev_popov(sys, Qp) * sys.group.u(b) * sys.group.inverse_jacobian(a);
    } catch (const DegeneracyError&) {
      return false;
    }
    Eigen::FullPivLU<MatrixXd> lu(jac);
    lu.setThreshold(1e-12 * std::max(1.0, jac.cwiseAbs().maxCoeff()));
    if (!lu.isInvertible()) return false;
    const VectorXd step = lu.inverse() * r;

    double lambda = 1.0;
    bool improved = false;
    for (int damp = 0; damp < 10; ++damp) {
      const VectorXd a_try = a - lambda * step;
      // keep the iteration on the chart; aliased roots outside the
      // injectivity ball solve the equation but are not chart coordinates
      if (sys.group.in_domain(a_try) &&
          residual(a_try).cwiseAbs().maxCoeff() < rnorm) {
        a = a_try;
        r = residual(a_try);
        rnorm = r.cwiseAbs().maxCoeff();
        improved = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!improved) return false;
  }
  return rnorm <= tol;
}

}  // namespace

VectorXd solve_group_coordinate(const SystemSpec& sys, const VectorXd& Q,
                                const VectorXd& guess, double tol, int max_iter) {
  const int nG = sys.dim_G();
  // Warm start first, then a fixed fan of chart points; the section predicate
  // picks the intended branch when the orbit meets {chi = 0} more than once.
  std::vector<VectorXd> starts = {guess, sys.group.identity};
  for (double scale : {0.8, -0.8, 1.6, -1.6, 2.4, -2.4}) {
    for (int i = 0; i < nG; ++i) {
      VectorXd s = VectorXd::Zero(nG);
      s[i] = scale;
      if (sys.group.in_domain(s)) starts.push_back(s);
    }
  }

  bool any_converged = false;
  for (const VectorXd& start : starts) {
    VectorXd a = start;
    if (!newton_from(sys, Q, a, tol, max_iter)) continue;
    any_converged = true;
    if (sys.gauge.on_section(sys.action.F(Q, sys.group.inverse(a)))) return a;
  }
  throw ConvergenceError(std::string("group-coordinate solve: ") +
                         (any_converged ? "no root on the selected section"
                                        : "no convergence") +
                         " after " + std::to_string(max_iter) +
                         " iterations at Q = " + format_point(Q));
}

BundlePoint to_bundle(const SystemSpec& sys, const VectorXd& Q, const VectorXd& f,
                      const VectorXd& guess, double tol) {
  BundlePoint b;
  b.a = solve_group_coordinate(sys, Q, guess, tol);
  b.Q_star = sys.action.F(Q, sys.group.inverse(b.a));
  b.f_tilde = sys.action.D(b.a) * f;
  return b;
}

BundlePoint to_bundle(const SystemSpec& sys, const VectorXd& Q, const VectorXd& f) {
  return to_bundle(sys, Q, f, sys.group.identity);
}

std::pair<VectorXd, VectorXd> from_bundle(const SystemSpec& sys,
                                          const BundlePoint& b) {
  return {sys.action.F(b.Q_star, b.a), sys.Dbar(b.a) * b.f_tilde};
}

BundleVelocity to_bundle_velocity(const SystemSpec& sys, const BundlePoint& b,
                                  const VectorXd& Qdot, const VectorXd& fdot) {
  // Invert Qdot = F_jac(Q*, a) (Qdot* + K ubar adot), fdot = Dbar(a)(fdot~ + K_V ubar adot)
  // using chi Qdot* = 0, which isolates ubar adot = Lambda Fcheck Qdot.
  const ProjectorSet proj = projectors(sys, b.Q_star, b.f_tilde);
  const MatrixXd Fj = sys.action.F_jac(b.Q_star, b.a);
  const VectorXd pulled = guarded_inverse(Fj, "F Jacobian") * Qdot;
  const VectorXd ubar_adot = proj.Lambda * pulled;

  BundleVelocity v;
  v.Qdot_star = proj.N_QQ * pulled;
  v.adot = sys.group.vbar(b.a) * ubar_adot;
  v.fdot_tilde = sys.action.D(b.a) * fdot - sys.killing_V(b.f_tilde) * ubar_adot;
  return v;
}

std::pair<VectorXd, VectorXd> from_bundle_velocity(const SystemSpec& sys,
                                                   const BundlePoint& b,
                                                   const BundleVelocity& v) {
  const VectorXd ubar_adot = sys.group.ubar(b.a) * v.adot;
  const VectorXd Qdot = sys.action.F_jac(b.Q_star, b.a) *
                        (v.Qdot_star + sys.action.killing(b.Q_star) * ubar_adot);
  const VectorXd fdot =
      sys.Dbar(b.a) * (v.fdot_tilde + sys.killing_V(b.f_tilde) * ubar_adot);
  return {Qdot, fdot};
}

ProjectorSet projectors(const SystemSpec& sys, const VectorXd& Q_star,
                        const VectorXd& f_tilde) {
  ProjectorSet p;
  const int nP = sys.dim_P();
  const MatrixXd K = sys.action.killing(Q_star);
  const MatrixXd chi_grad = sys.gauge.chi_grad(Q_star);

  p.fp = faddeev_popov(sys, Q_star);
  p.fp_inv = guarded_inverse(p.fp, "Faddeev-Popov matrix");
  p.Lambda = p.fp_inv * chi_grad;
  p.N_QQ = MatrixXd::Identity(nP, nP) - K * p.Lambda;
  p.N_VQ = -sys.killing_V(f_tilde) * p.Lambda;

  const MatrixXd G = sys.action.metric_P(Q_star);
  const MatrixXd gamma = K.transpose() * G * K;
  const MatrixXd chiT =
      guarded_inverse(G, "metric_P") * chi_grad.transpose() * gamma;
  const MatrixXd gram = chi_grad * chiT;
  p.P_perp = MatrixXd::Identity(nP, nP) -
             chiT * guarded_inverse(gram, "chi chi^T Gram matrix") * chi_grad;
  return p;
}

double project_to_slice(const SystemSpec& sys, BundlePoint& b) {
  const VectorXd chi = sys.gauge.chi(b.Q_star);
  const double drift = chi.cwiseAbs().maxCoeff();
  const MatrixXd fp = faddeev_popov(sys, b.Q_star);
  // One Newton step of chi(F(Q*, g(eps)^-1)) = 0 from eps = 0.
  VectorXd eps = guarded_inverse(fp, "slice projection") * chi;
  const VectorXd delta = eps;  // coordinates of the correcting group element
  b.Q_star = sys.action.F(b.Q_star, sys.group.inverse(delta));
  b.f_tilde = sys.action.D(delta) * b.f_tilde;
  b.a = sys.group.multiply(delta, b.a);
  return drift;
}

}  // namespace lpr
