#pragma once

#include <string>
#include <vector>

#include "lpr/connection_geometry.hpp"

namespace lpr {

// Components of a velocity in the horizontal-lift frame (H_A, H_m, L_a).
// Q holds the slice-tangent block, V the fiber block, G the group block.
struct QuasiVelocity {
  VectorXd Q;
  VectorXd V;
  VectorXd G;
};

struct ReducedState {
  BundlePoint point;
  QuasiVelocity vel;
};

enum class IntegrationMode { Original, Reduced };

// Time-stamped states plus per-step diagnostics.  Reduced-mode states pack
// (Q*, f~, a, wQ, wV, wG); original-mode states pack (Q, f, Qdot, fdot).
struct Trajectory {
  IntegrationMode mode = IntegrationMode::Original;
  double dt = 0.0;
  std::vector<double> times;
  std::vector<VectorXd> states;
  std::vector<double> energy;
  std::vector<double> chi_residual;   // reduced mode: pre-projection drift
  std::vector<double> tangency;      // reduced mode: |(I - P_perp) wQ|
  std::vector<VectorXd> momentum;    // reduced mode: pi_a = dtilde wG
  std::vector<double> mass_residual;  // reduced mode: implicit-equation residual
};

double lagrangian_original(const SystemSpec& sys, const AmbientState& s);

// Quasi-velocities from bundle rates (Eqs. of the frame decomposition); exact
// for slice-tangent rates and projecting for nearly tangent FD rates.
QuasiVelocity quasi_velocities(const GeometryCache& g, const BundleVelocity& rate);
BundleVelocity invert_quasi_velocities(const GeometryCache& g,
                                       const QuasiVelocity& w);

double lagrangian_reduced(const GeometryCache& g, const QuasiVelocity& w);
double reduced_energy(const GeometryCache& g, const QuasiVelocity& w);
VectorXd vertical_momentum(const GeometryCache& g, const QuasiVelocity& w);

// Ambient initial data -> reduced state through the chart.
ReducedState reduce_state(const SystemSpec& sys, const AmbientState& s,
                          const VectorXd& guess);
ReducedState reduce_state(const SystemSpec& sys, const AmbientState& s);

// Right-hand side of the reduced equations of motion at one state.
struct ReducedRhs {
  BundleVelocity kinematic;  // (Qdot*, fdot~, adot)
  QuasiVelocity wdot;
  double mass_residual = 0.0;  // residual of the implicit horizontal block
};
ReducedRhs lp_rhs(const SystemSpec& sys, const GeometryCache& g,
                  const QuasiVelocity& w);
ReducedRhs lp_rhs(const SystemSpec& sys, const ReducedState& state);

// Accelerations of the unreduced Euler-Lagrange oracle.
struct Accelerations {
  VectorXd Qddot;
  VectorXd fddot;
};
Accelerations euler_lagrange_rhs(const SystemSpec& sys, const AmbientState& s);

Trajectory integrate_original(const SystemSpec& sys, const AmbientState& init,
                              double dt, int steps);
Trajectory integrate_reduced(const SystemSpec& sys, const ReducedState& init,
                             double dt, int steps);

// Packing helpers shared with the CLI output layer.
VectorXd pack_state(const ReducedState& s);
ReducedState unpack_reduced(const SystemSpec& sys, const VectorXd& y);
VectorXd pack_state(const AmbientState& s);
AmbientState unpack_ambient(const SystemSpec& sys, const VectorXd& y);
std::vector<std::string> state_labels(const SystemSpec& sys, IntegrationMode mode);

// Sup-norm deviations between a reduced trajectory and an original-mode
// trajectory mapped through the chart, per component block.
struct CompareReport {
  double sup_Q_star = 0.0;
  double sup_f_tilde = 0.0;
  double sup_a = 0.0;
  double sup_omega_Q = 0.0;
  double sup_omega_V = 0.0;
  double sup_omega_G = 0.0;
  double max() const;
};
CompareReport compare_trajectories(const SystemSpec& sys, const Trajectory& original,
                                   const Trajectory& reduced);

}  // namespace lpr
