#include "lpr/reduced_dynamics.hpp"

#include <cmath>

namespace lpr {

double lagrangian_original(const SystemSpec& sys, const AmbientState& s) {
  const MatrixXd G = sys.action.metric_P(s.Q);
  return 0.5 * s.Qdot.dot(G * s.Qdot) +
         0.5 * s.fdot.dot(sys.action.metric_V * s.fdot) -
         sys.potential.value(s.Q, s.f);
}

QuasiVelocity quasi_velocities(const GeometryCache& g, const BundleVelocity& rate) {
  QuasiVelocity w;
  w.Q = g.proj.N_QQ * rate.Qdot_star;
  w.V = rate.fdot_tilde - g.proj.N_VQ * w.Q;
  w.G = g.u * rate.adot + g.horizontal_group_coeff() * w.Q + g.At_V * w.V;
  return w;
}

BundleVelocity invert_quasi_velocities(const GeometryCache& g,
                                       const QuasiVelocity& w) {
  BundleVelocity rate;
  rate.Qdot_star = w.Q;
  rate.fdot_tilde = w.V + g.proj.N_VQ * w.Q;
  rate.adot = g.v * (w.G - g.horizontal_group_coeff() * w.Q - g.At_V * w.V);
  return rate;
}

double lagrangian_reduced(const GeometryCache& g, const QuasiVelocity& w) {
  const double kinetic = 0.5 * w.Q.dot(g.hmet.QQ * w.Q) +
                         w.Q.dot(g.hmet.QV * w.V) +
                         0.5 * w.V.dot(g.hmet.VV * w.V) +
                         0.5 * w.G.dot(g.hmet.d_tilde * w.G);
  return kinetic - g.V;
}

double reduced_energy(const GeometryCache& g, const QuasiVelocity& w) {
  return lagrangian_reduced(g, w) + 2.0 * g.V;
}

VectorXd vertical_momentum(const GeometryCache& g, const QuasiVelocity& w) {
  return g.hmet.d_tilde * w.G;
}

ReducedState reduce_state(const SystemSpec& sys, const AmbientState& s,
                          const VectorXd& guess) {
  ReducedState r;
  r.point = to_bundle(sys, s.Q, s.f, guess);
  const GeometryCache g = geometry_at(sys, r.point);
  r.vel = quasi_velocities(g, to_bundle_velocity(sys, r.point, s.Qdot, s.fdot));
  return r;
}

ReducedState reduce_state(const SystemSpec& sys, const AmbientState& s) {
  return reduce_state(sys, s, sys.group.identity);
}

namespace {

// (C_a)^g_n = c^g_{an} contracted with a group vector.
MatrixXd ad_contract(const GroupChart& chart, const VectorXd& x) {
  return chart.ad(x);
}

}  // namespace

ReducedRhs lp_rhs(const SystemSpec& sys, const GeometryCache& g,
                  const QuasiVelocity& w) {
  const int nP = g.nP(), nV = g.nV(), nG = g.nG();
  const Tensor3& c = sys.group.structure;

  ReducedRhs out;
  out.kinematic = invert_quasi_velocities(g, w);

  const VectorXd p_Q = g.hmet.QQ * w.Q + g.hmet.QV * w.V;
  const VectorXd p_V = g.hmet.QV.transpose() * w.Q + g.hmet.VV * w.V;
  const VectorXd pi = g.hmet.d_tilde * w.G;

  // L_a(L) = pi_g c^g_{an} w^n from the a-dependence of d~.
  VectorXd lal(nG);
  for (int a = 0; a < nG; ++a) {
    double s = 0;
    for (int gi = 0; gi < nG; ++gi) s += pi[gi] * (c[gi].row(a).dot(w.G));
    lal[a] = s;
  }

  // Configuration derivatives of the reduced Lagrangian at frozen w.
  VectorXd dL_dQ(nP), dL_dV(nV);
  for (int s = 0; s < nP; ++s) {
    dL_dQ[s] = 0.5 * w.Q.dot(g.dGH_QQ_dQ[s] * w.Q) + w.Q.dot(g.dGH_QV_dQ[s] * w.V) +
               0.5 * w.V.dot(g.dGH_VV_dQ[s] * w.V) +
               0.5 * w.G.dot(g.rho.transpose() * g.dd_dQ[s] * g.rho * w.G) -
               g.dV_Q[s];
  }
  for (int m = 0; m < nV; ++m) {
    dL_dV[m] = 0.5 * w.Q.dot(g.dGH_QQ_dV[m] * w.Q) + w.Q.dot(g.dGH_QV_dV[m] * w.V) +
               0.5 * w.V.dot(g.dGH_VV_dV[m] * w.V) +
               0.5 * w.G.dot(g.rho.transpose() * g.dd_dV[m] * g.rho * w.G) -
               g.dV_V[m];
  }
  const MatrixXd hgc = g.horizontal_group_coeff();  // a^al_E
  const VectorXd HL_Q = g.proj.N_QQ.transpose() * dL_dQ +
                        g.proj.N_VQ.transpose() * dL_dV - hgc.transpose() * lal;
  const VectorXd HL_V = dL_dV - g.At_V.transpose() * lal;

  // Structure-constant force terms of the two horizontal equations.
  VectorXd rhs_Q = HL_Q, rhs_V = HL_V;
  for (int t = 0; t < nP; ++t)
    rhs_Q += p_Q[t] * (g.sc.C_Q_QQ[t].transpose() * w.Q);
  for (int p = 0; p < nV; ++p) {
    rhs_Q += p_V[p] * (g.sc.C_V_QQ[p].transpose() * w.Q);
    rhs_Q -= p_V[p] * (g.sc.C_V_QV[p] * w.V);
    rhs_V += p_V[p] * (g.sc.C_V_QV[p].transpose() * w.Q);
  }
  for (int a = 0; a < nG; ++a) {
    rhs_Q += pi[a] * (g.sc.C_G_QQ[a].transpose() * w.Q);
    rhs_Q -= pi[a] * (g.sc.C_G_QV[a] * w.V);
    rhs_V += pi[a] * (g.sc.C_G_QV[a].transpose() * w.Q);
    rhs_V += pi[a] * (g.sc.C_G_VV[a].transpose() * w.V);
  }

  // Time derivatives of the coefficient matrices along the flow.
  MatrixXd GHdot_QQ = MatrixXd::Zero(nP, nP), GHdot_QV = MatrixXd::Zero(nP, nV),
           GHdot_VV = MatrixXd::Zero(nV, nV), ddot = MatrixXd::Zero(nG, nG);
  for (int s = 0; s < nP; ++s) {
    GHdot_QQ += g.dGH_QQ_dQ[s] * w.Q[s];
    GHdot_QV += g.dGH_QV_dQ[s] * w.Q[s];
    GHdot_VV += g.dGH_VV_dQ[s] * w.Q[s];
    ddot += g.dd_dQ[s] * w.Q[s];
  }
  for (int m = 0; m < nV; ++m) {
    GHdot_QQ += g.dGH_QQ_dV[m] * w.V[m];
    GHdot_QV += g.dGH_QV_dV[m] * w.V[m];
    GHdot_VV += g.dGH_VV_dV[m] * w.V[m];
    ddot += g.dd_dV[m] * w.V[m];
  }
  const VectorXd big_omega = g.u * out.kinematic.adot;
  const MatrixXd c_omega = ad_contract(sys.group, big_omega);
  const MatrixXd dtilde_dot = g.rho.transpose() * ddot * g.rho +
                              c_omega.transpose() * g.hmet.d_tilde +
                              g.hmet.d_tilde * c_omega;

  const VectorXd b_Q = rhs_Q - GHdot_QQ * w.Q - GHdot_QV * w.V;
  const VectorXd b_V = rhs_V - GHdot_QV.transpose() * w.Q - GHdot_VV * w.V;

  // The horizontal mass matrix is degenerate along the orbit; the
  // pseudoinverse solves it on the slice-tangent subspace and the orbit
  // component is fixed by the differentiated constraint chi_A wdot^A = r.
  VectorXd wdot_Q = g.hmet.inv_QQ * b_Q + g.hmet.inv_QV * b_V;
  VectorXd wdot_V = g.hmet.inv_QV.transpose() * b_Q + g.hmet.inv_VV * b_V;
  VectorXd r(nG);
  for (int mu = 0; mu < nG; ++mu) r[mu] = -w.Q.dot(g.chi_hess[mu] * w.Q);
  const VectorXd s_fix = g.proj.fp_inv * (r - g.chi_grad * wdot_Q);
  wdot_Q += g.K_P * s_fix;
  wdot_V += g.K_V * s_fix;

  const double res_Q =
      (g.hmet.QQ * wdot_Q + g.hmet.QV * wdot_V - b_Q).cwiseAbs().maxCoeff();
  const double res_V = (g.hmet.QV.transpose() * wdot_Q + g.hmet.VV * wdot_V - b_V)
                           .cwiseAbs()
                           .maxCoeff();
  out.mass_residual = std::max(res_Q, res_V);
  const double scale =
      std::max({1.0, b_Q.cwiseAbs().maxCoeff(), b_V.cwiseAbs().maxCoeff()});
  if (out.mass_residual > 1e-8 * scale) {
    throw NumericalError("lp_rhs: horizontal mass block inconsistent (residual " +
                         std::to_string(out.mass_residual) + ") at Q* = " +
                         format_point(g.point.Q_star));
  }

  // Vertical equation.
  VectorXd rhs_G = lal;
  for (int a = 0; a < nG; ++a) {
    double s = 0;
    for (int b = 0; b < nG; ++b) {
      // pi_b c^b_{mu a} w^mu
      s += pi[b] * c[b].col(a).dot(w.G);
    }
    rhs_G[a] += s;
  }
  out.wdot.Q = wdot_Q;
  out.wdot.V = wdot_V;
  out.wdot.G = g.hmet.d_tilde_inv * (rhs_G - dtilde_dot * w.G);
  return out;
}

ReducedRhs lp_rhs(const SystemSpec& sys, const ReducedState& state) {
  return lp_rhs(sys, geometry_at(sys, state.point), state.vel);
}

Accelerations euler_lagrange_rhs(const SystemSpec& sys, const AmbientState& s) {
  const int nP = sys.dim_P();
  const MatrixXd G = sys.action.metric_P(s.Q);
  const Tensor3 dG = sys.action.metric_P_grad(s.Q);

  VectorXd force(nP);
  MatrixXd Gdot = MatrixXd::Zero(nP, nP);
  for (int a = 0; a < nP; ++a) force[a] = 0.5 * s.Qdot.dot(dG[a] * s.Qdot);
  for (int c = 0; c < nP; ++c) Gdot += dG[c] * s.Qdot[c];
  force -= Gdot * s.Qdot;
  force -= sys.potential.grad_Q(s.Q, s.f);

  Accelerations acc;
  acc.Qddot = guarded_inverse(G, "metric_P") * force;
  acc.fddot = guarded_inverse(sys.action.metric_V, "metric_V") *
              (-sys.potential.grad_f(s.Q, s.f));
  return acc;
}

VectorXd pack_state(const ReducedState& s) {
  VectorXd y(s.point.Q_star.size() + s.point.f_tilde.size() + s.point.a.size() +
             s.vel.Q.size() + s.vel.V.size() + s.vel.G.size());
  int at = 0;
  for (const VectorXd* part : {&s.point.Q_star, &s.point.f_tilde, &s.point.a,
                               &s.vel.Q, &s.vel.V, &s.vel.G}) {
    y.segment(at, part->size()) = *part;
    at += part->size();
  }
  return y;
}

ReducedState unpack_reduced(const SystemSpec& sys, const VectorXd& y) {
  const int nP = sys.dim_P(), nV = sys.dim_V(), nG = sys.dim_G();
  ReducedState s;
  int at = 0;
  s.point.Q_star = y.segment(at, nP);
  at += nP;
  s.point.f_tilde = y.segment(at, nV);
  at += nV;
  s.point.a = y.segment(at, nG);
  at += nG;
  s.vel.Q = y.segment(at, nP);
  at += nP;
  s.vel.V = y.segment(at, nV);
  at += nV;
  s.vel.G = y.segment(at, nG);
  return s;
}

VectorXd pack_state(const AmbientState& s) {
  VectorXd y(s.Q.size() + s.f.size() + s.Qdot.size() + s.fdot.size());
  int at = 0;
  for (const VectorXd* part : {&s.Q, &s.f, &s.Qdot, &s.fdot}) {
    y.segment(at, part->size()) = *part;
    at += part->size();
  }
  return y;
}

AmbientState unpack_ambient(const SystemSpec& sys, const VectorXd& y) {
  const int nP = sys.dim_P(), nV = sys.dim_V();
  AmbientState s;
  s.Q = y.segment(0, nP);
  s.f = y.segment(nP, nV);
  s.Qdot = y.segment(nP + nV, nP);
  s.fdot = y.segment(2 * nP + nV, nV);
  return s;
}

std::vector<std::string> state_labels(const SystemSpec& sys, IntegrationMode mode) {
  std::vector<std::string> labels;
  auto block = [&](const std::string& base, int n) {
    for (int i = 0; i < n; ++i) labels.push_back(base + std::to_string(i + 1));
  };
  if (mode == IntegrationMode::Original) {
    block("Q", sys.dim_P());
    block("f", sys.dim_V());
    block("Qdot", sys.dim_P());
    block("fdot", sys.dim_V());
  } else {
    block("Qstar", sys.dim_P());
    block("ftilde", sys.dim_V());
    block("a", sys.dim_G());
    block("omegaQ", sys.dim_P());
    block("omegaV", sys.dim_V());
    block("omegaG", sys.dim_G());
  }
  return labels;
}

namespace {

// Classic fixed-step RK4 on a packed state vector.
VectorXd rk4_step(const std::function<VectorXd(const VectorXd&)>& f,
                  const VectorXd& y, double dt) {
  const VectorXd k1 = f(y);
  const VectorXd k2 = f(y + 0.5 * dt * k1);
  const VectorXd k3 = f(y + 0.5 * dt * k2);
  const VectorXd k4 = f(y + dt * k3);
  return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace

Trajectory integrate_original(const SystemSpec& sys, const AmbientState& init,
                              double dt, int steps) {
  if (dt <= 0) throw ConfigError("integrate: dt must be positive");
  Trajectory traj;
  traj.mode = IntegrationMode::Original;
  traj.dt = dt;
  const int nP = sys.dim_P(), nV = sys.dim_V();

  auto rhs = [&](const VectorXd& y) {
    const AmbientState s = unpack_ambient(sys, y);
    const Accelerations acc = euler_lagrange_rhs(sys, s);
    VectorXd dy(y.size());
    dy.segment(0, nP) = s.Qdot;
    dy.segment(nP, nV) = s.fdot;
    dy.segment(nP + nV, nP) = acc.Qddot;
    dy.segment(2 * nP + nV, nV) = acc.fddot;
    return dy;
  };

  VectorXd y = pack_state(init);
  for (int k = 0; k <= steps; ++k) {
    const AmbientState s = unpack_ambient(sys, y);
    traj.times.push_back(k * dt);
    traj.states.push_back(y);
    traj.energy.push_back(lagrangian_original(sys, s) +
                          2.0 * sys.potential.value(s.Q, s.f));
    if (k < steps) y = rk4_step(rhs, y, dt);
  }
  return traj;
}

Trajectory integrate_reduced(const SystemSpec& sys, const ReducedState& init,
                             double dt, int steps) {
  if (dt <= 0) throw ConfigError("integrate: dt must be positive");
  Trajectory traj;
  traj.mode = IntegrationMode::Reduced;
  traj.dt = dt;

  int step_index = 0;
  auto rhs = [&](const VectorXd& y) {
    ReducedState s = unpack_reduced(sys, y);
    ReducedRhs r;
    try {
      // stage points may sit slightly off the surface for curved chi
      r = lp_rhs(sys, geometry_at(sys, s.point, 1e-6), s.vel);
    } catch (const Error& e) {
      throw NumericalError("reduced integration failed at step " +
                           std::to_string(step_index) + ": " + e.what());
    }
    VectorXd dy(y.size());
    int at = 0;
    for (const VectorXd* part :
         {&r.kinematic.Qdot_star, &r.kinematic.fdot_tilde, &r.kinematic.adot,
          &r.wdot.Q, &r.wdot.V, &r.wdot.G}) {
      dy.segment(at, part->size()) = *part;
      at += part->size();
    }
    return dy;
  };

  ReducedState s = init;
  double arrival_drift = 0.0;
  for (step_index = 0; step_index <= steps; ++step_index) {
    const GeometryCache g = geometry_at(sys, s.point);
    traj.times.push_back(step_index * dt);
    traj.states.push_back(pack_state(s));
    traj.energy.push_back(reduced_energy(g, s.vel));
    traj.momentum.push_back(vertical_momentum(g, s.vel));
    traj.tangency.push_back(
        ((MatrixXd::Identity(g.nP(), g.nP()) - g.proj.P_perp) * s.vel.Q)
            .cwiseAbs()
            .maxCoeff());
    traj.mass_residual.push_back(lp_rhs(sys, g, s.vel).mass_residual);
    traj.chi_residual.push_back(std::max(
        arrival_drift, sys.gauge.chi(s.point.Q_star).cwiseAbs().maxCoeff()));
    if (step_index == steps) break;

    VectorXd y = rk4_step(rhs, pack_state(s), dt);
    s = unpack_reduced(sys, y);
    // One Newton re-gauge onto Sigma; the recorded drift is the pre-projection
    // slice residual.  The induced gauge rotation is O(drift) and is applied
    // to the point only; w is re-tangentialised below.
    arrival_drift = project_to_slice(sys, s.point);
    const ProjectorSet proj = projectors(sys, s.point.Q_star, s.point.f_tilde);
    s.vel.Q = proj.N_QQ * s.vel.Q;
  }
  return traj;
}

double CompareReport::max() const {
  double m = sup_Q_star;
  for (double v : {sup_f_tilde, sup_a, sup_omega_Q, sup_omega_V, sup_omega_G})
    m = std::max(m, v);
  return m;
}

CompareReport compare_trajectories(const SystemSpec& sys, const Trajectory& original,
                                   const Trajectory& reduced) {
  if (original.times.size() != reduced.times.size()) {
    throw ConfigError("compare_trajectories: time grids differ in length");
  }
  for (std::size_t k = 0; k < original.times.size(); ++k) {
    if (std::abs(original.times[k] - reduced.times[k]) >
        1e-12 * std::max(1.0, std::abs(reduced.times[k]))) {
      throw ConfigError("compare_trajectories: time grids do not match");
    }
  }
  if (original.mode != IntegrationMode::Original ||
      reduced.mode != IntegrationMode::Reduced) {
    throw ConfigError("compare_trajectories: expected (original, reduced) pair");
  }

  CompareReport rep;
  VectorXd guess = sys.group.identity;
  for (std::size_t k = 0; k < original.times.size(); ++k) {
    const AmbientState amb = unpack_ambient(sys, original.states[k]);
    const ReducedState mapped = reduce_state(sys, amb, guess);
    guess = mapped.point.a;
    const ReducedState red = unpack_reduced(sys, reduced.states[k]);

    auto sup = [](const VectorXd& x, const VectorXd& y) {
      return (x - y).cwiseAbs().maxCoeff();
    };
    rep.sup_Q_star = std::max(rep.sup_Q_star, sup(mapped.point.Q_star, red.point.Q_star));
    rep.sup_f_tilde =
        std::max(rep.sup_f_tilde, sup(mapped.point.f_tilde, red.point.f_tilde));
    rep.sup_a = std::max(rep.sup_a, sup(mapped.point.a, red.point.a));
    rep.sup_omega_Q = std::max(rep.sup_omega_Q, sup(mapped.vel.Q, red.vel.Q));
    rep.sup_omega_V = std::max(rep.sup_omega_V, sup(mapped.vel.V, red.vel.V));
    rep.sup_omega_G = std::max(rep.sup_omega_G, sup(mapped.vel.G, red.vel.G));
  }
  return rep;
}

}  // namespace lpr
