#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lpr/variational_checks.hpp"

#include "json.hpp"

namespace lpr {

// One named property check: the worst residual observed, the tolerance in
// force, and the wall-clock spent.  Residuals and pass/fail are deterministic
// functions of (system, seed); seconds is environmental.
struct CheckResult {
  std::string name;
  double max_residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  double seconds = 0.0;
  std::string detail;
};

// Property-check battery over random slice points and path families.  Each
// check owns a private RNG seeded from (seed, check index) so the battery is
// deterministic under any scheduling; tol_scale multiplies every tolerance.
std::vector<CheckResult> run_verification(const SystemSpec& sys, std::uint64_t seed,
                                          double tol_scale = 1.0, int workers = 0);

// Individual checks (exposed for the acceptance suite).
CheckResult check_projector_algebra(const SystemSpec& sys, std::uint64_t seed, double tol);
CheckResult check_connection_axioms(const SystemSpec& sys, std::uint64_t seed, double tol);
CheckResult check_pseudoinverse_identities(const SystemSpec& sys, std::uint64_t seed,
                                           double tol);
CheckResult check_commutator_oracle(const SystemSpec& sys, std::uint64_t seed,
                                    double tol, double min_order);
CheckResult check_killing_relations(const SystemSpec& sys, std::uint64_t seed, double tol);
CheckResult check_derived_identities(const SystemSpec& sys, std::uint64_t seed, double tol);
CheckResult check_transformation_laws(const SystemSpec& sys, std::uint64_t seed,
                                      double tol);
CheckResult check_variational_relations(const SystemSpec& sys, std::uint64_t seed,
                                        double tol, int families, double min_order);
CheckResult check_reduction_equivalence(const SystemSpec& sys, double tol, double dt,
                                        int steps);
CheckResult check_conservation(const SystemSpec& sys, double energy_tol,
                               double momentum_tol, double slice_tol, double dt,
                               int steps);
CheckResult check_chart_transport(const SystemSpec& sys, std::uint64_t seed, double tol);

nlohmann::json verification_report(const SystemSpec& sys, std::uint64_t seed,
                                   double tol_scale,
                                   const std::vector<CheckResult>& results);

}  // namespace lpr
