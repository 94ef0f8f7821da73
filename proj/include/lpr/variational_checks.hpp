#pragma once

#include <functional>

#include "lpr/reduced_dynamics.hpp"

namespace lpr {

// Two-parameter family of bundle paths (u, t) -> (Q*(u,t), f~(u,t), a(u,t))
// with Q*(u,t) on Sigma for all samples.  eval is smooth in both arguments so
// the same family can be sampled on refined grids.
struct PathFamily {
  std::function<BundlePoint(double u, double t)> eval;
  double t0 = 0.0;
  double t1 = 1.0;
};

// Random smooth on-slice family: base slice/fiber/group curves are low-order
// trigonometric polynomials, the deformation direction is clamped by
// sin^2(pi t) so all variations vanish at the endpoints, and slice candidates
// are re-projected onto Sigma through the group-coordinate Newton solve.
// The returned family borrows sys, which must outlive it.
PathFamily make_family(const SystemSpec& sys, Rng& rng);

// Diagonal family q(u, t) = base(u + t); swaps the roles of omega and w.
PathFamily make_diagonal_family(const SystemSpec& sys, Rng& rng);

enum class RateDirection { Time, Deformation };

// Central-difference rate of the family at (u, t) in the given direction,
// decomposed in the horizontal-lift frame.  Time rates give quasi-velocities
// omega, deformation rates give variations w.
QuasiVelocity decompose_rates(const SystemSpec& sys, const PathFamily& fam,
                              double u, double t, RateDirection dir, double h);

// Decomposition then recomposition against the raw finite-difference rate.
double recomposition_residual(const SystemSpec& sys, const PathFamily& fam,
                              double u, double t, RateDirection dir, double h);

// Max interior-grid residuals of the three differential relations between
// quasi-velocities and variations, evaluated at u = 0 on nt grid points with
// u-stencil half-width h_u.  condensed_gap is the algebraic difference
// between the condensed-notation assembly and the expanded fiber relation.
struct RelationResiduals {
  double rel_Q = 0.0;      // slice relation, N-projected
  double rel_V = 0.0;      // fiber relation
  double rel_G = 0.0;      // group relation
  double condensed_gap = 0.0;
};
RelationResiduals check_relations(const SystemSpec& sys, const PathFamily& fam,
                                  int nt = 1001, double h_u = 1e-3);

// Measured convergence order between grid spacings h and h/2 (both the time
// grid and the u-stencil are refined together), with the coarse residuals
// kept so callers can exempt relations already at the roundoff floor.
struct RefinementOrder {
  double order_Q = 0.0;
  double order_V = 0.0;
  double order_G = 0.0;
  double coarse_Q = 0.0;
  double coarse_V = 0.0;
  double coarse_G = 0.0;
  bool passes(double min_order, double floor = 1e-9) const;
};
RefinementOrder relation_refinement_order(const SystemSpec& sys,
                                          const PathFamily& fam, int nt_coarse = 501);

}  // namespace lpr
