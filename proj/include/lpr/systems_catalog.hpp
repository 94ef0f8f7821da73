#pragma once

#include <string>

#include "lpr/system_spec.hpp"

#include "json.hpp"

namespace lpr {

// Tunable parameters of the built-in systems.  Defaults give the Euclidean
// metric and the invariant coupling V = 1/2 |f|^2 + kappa * <Q, f>.
struct SystemParams {
  double kappa = 0.3;
  double metric_beta = 0.0;    // conformal factor G_P = scale*(1 + beta |Q|^2) I
  double metric_scale = 1.0;
  double metric_V_scale = 1.0;
  double potential_quadratic_f = 1.0;
  double potential_linear_q1 = 0.0;  // non-invariant probe term, must stay 0
  bool fd_translation = false;       // replace group translation matrices by FD
  bool fd_derivatives = false;       // replace killing_grad/chi_hess/metric_grad by FD
};

// Planar system: P = R^2 (minus the origin), V = R^2, G = SO(2) acting
// co-rotating on both factors; Sigma is the positive Q1 axis.
SystemSpec make_so2_planar(const SystemParams& params = {});

// Quaternion system: P = H \ {0}, V = H, G = SU(2) acting by right
// multiplication on P and by g^-1 left multiplication on V; Sigma is the
// positive real axis.
SystemSpec make_su2_quaternion(const SystemParams& params = {});

SystemSpec make_builtin(const std::string& name, const SystemParams& params = {});

// Declarative ingestion: builds the named system with parameter overrides and
// runs the full load-time check suite.  See README for the schema.
SystemSpec load_system(const nlohmann::json& config);
SystemSpec load_system_file(const std::string& path);

// Parameters actually in force, echoed into run manifests.
nlohmann::json params_json(const SystemParams& params);
SystemParams params_from_json(const nlohmann::json& config);

// Documented default initial conditions (ambient coordinates) per system.
AmbientState default_initial_state(const SystemSpec& sys);

}  // namespace lpr
