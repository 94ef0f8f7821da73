#include "lpr/system_spec.hpp"

#include <cmath>

namespace lpr {

std::pair<VectorXd, VectorXd> act(const SystemSpec& sys, const VectorXd& Q,
                                  const VectorXd& f, const VectorXd& g) {
  if (!sys.group.in_domain(g)) {
    throw DomainError("act: group coordinates " + format_point(g) +
                      " outside the chart domain of " + sys.group.name);
  }
  return {sys.action.F(Q, g), sys.Dbar(g) * f};
}

double killing_transform_residual(const SystemSpec& sys, const VectorXd& Q,
                                  const VectorXd& f, const VectorXd& g) {
  const MatrixXd rho = sys.group.rho(g);
  const MatrixXd Fj = sys.action.F_jac(Q, g);
  const MatrixXd lhs_P = sys.action.killing(sys.action.F(Q, g));
  const MatrixXd rhs_P = Fj * sys.action.killing(Q) * rho;

  const MatrixXd Db = sys.Dbar(g);
  const MatrixXd lhs_V = sys.killing_V(Db * f);
  const MatrixXd rhs_V = Db * sys.killing_V(f) * rho;

  return std::max((lhs_P - rhs_P).cwiseAbs().maxCoeff(),
                  (lhs_V - rhs_V).cwiseAbs().maxCoeff());
}

int detect_killing_commutator_sign(const SystemSpec& sys, Rng& rng) {
  const int nG = sys.dim_G();
  double best = 0.0;
  int sign = 0;
  for (int trial = 0; trial < 5; ++trial) {
    const VectorXd Q = sys.random_ambient_point(rng);
    const MatrixXd K = sys.action.killing(Q);
    const Tensor3 dK = sys.action.killing_grad(Q);
    for (int a = 0; a < nG; ++a)
      for (int b = 0; b < nG; ++b) {
        // [K_a, K_b]^A = K^C_b dK^A_a/dQ^C ... with the standard bracket
        const VectorXd bracket = dK[b] * K.col(a) - dK[a] * K.col(b);
        VectorXd ref = VectorXd::Zero(Q.size());
        for (int g = 0; g < nG; ++g) ref += sys.group.structure[g](a, b) * K.col(g);
        if (ref.norm() < 1e-12) continue;
        const double c = bracket.dot(ref) / ref.squaredNorm();
        if (std::abs(c) > best) {
          best = std::abs(c);
          sign = c > 0 ? 1 : -1;
        }
      }
  }
  return sign;
}

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

}  // namespace

void validate_system(SystemSpec& sys, std::uint64_t seed) {
  Rng rng(seed);
  validate_chart(sys.group, rng);

  const int nG = sys.dim_G();
  const double tol = 1e-8;

  for (int trial = 0; trial < 25; ++trial) {
    const VectorXd Q = sys.random_ambient_point(rng);
    const VectorXd f = sys.random_fiber_point(rng);
    const VectorXd g1 = sys.random_group_point(rng);
    const VectorXd g2 = sys.random_group_point(rng);

    // Right-action composition law on both factors.
    const auto [Q1, f1] = act(sys, Q, f, g1);
    const auto [Q12, f12] = act(sys, Q1, f1, g2);
    const auto [Qc, fc] = act(sys, Q, f, sys.group.multiply(g1, g2));
    require((Q12 - Qc).cwiseAbs().maxCoeff() < tol &&
                (f12 - fc).cwiseAbs().maxCoeff() < tol,
            sys.name + ": action composition law fails at Q = " + format_point(Q) +
                ", g1 = " + format_point(g1) + ", g2 = " + format_point(g2));

    // Isometry of G_AB: G_AB(Q) = G_DC(F(Q,g)) F^D_A F^C_B.
    const MatrixXd Fj = sys.action.F_jac(Q, g1);
    const MatrixXd pulled = Fj.transpose() * sys.action.metric_P(Q1) * Fj;
    require((pulled - sys.action.metric_P(Q)).cwiseAbs().maxCoeff() < tol,
            sys.name + ": metric_P is not isometric under F at " + format_point(Q));

    // Isometry of G_mn under Dbar.
    const MatrixXd Db = sys.Dbar(g1);
    require((Db.transpose() * sys.action.metric_V * Db - sys.action.metric_V)
                    .cwiseAbs()
                    .maxCoeff() < 1e-12,
            sys.name + ": metric_V is not isometric under the representation");

    // Potential invariance.
    require(std::abs(sys.potential.value(Q1, f1) - sys.potential.value(Q, f)) < 1e-10,
            sys.name + ": potential is not invariant at Q = " + format_point(Q) +
                ", f = " + format_point(f) + ", g = " + format_point(g1));

    // rho composition convention: rho(g1 g2) = rho(g1) rho(g2).
    const MatrixXd lhs = sys.group.rho(sys.group.multiply(g1, g2));
    const MatrixXd rhs = sys.group.rho(g1) * sys.group.rho(g2);
    require((lhs - rhs).cwiseAbs().maxCoeff() < 1e-7,
            sys.name + ": rho composition law fails");

    // Positive definiteness of the metrics at sampled points.
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(sys.action.metric_P(Q));
    require(es.eigenvalues().minCoeff() > 0,
            sys.name + ": metric_P not positive definite at " + format_point(Q));
  }

  Eigen::SelfAdjointEigenSolver<MatrixXd> esv(sys.action.metric_V);
  require(esv.eigenvalues().minCoeff() > 0, sys.name + ": metric_V not positive definite");

  // Generator commutation relations [Jbar_a, Jbar_b] = -c^g_{ab} Jbar_g.
  for (int a = 0; a < nG; ++a)
    for (int b = 0; b < nG; ++b) {
      MatrixXd lhs = sys.action.generators[a] * sys.action.generators[b] -
                     sys.action.generators[b] * sys.action.generators[a];
      for (int g = 0; g < nG; ++g)
        lhs += sys.group.structure[g](a, b) * sys.action.generators[g];
      require(lhs.cwiseAbs().maxCoeff() < tol,
              sys.name + ": generators do not satisfy [Jbar_a, Jbar_b] = -c Jbar");
    }

  // Killing fields must match the a-derivative of the action at the identity.
  for (int trial = 0; trial < 5; ++trial) {
    const VectorXd Q = sys.random_ambient_point(rng);
    const MatrixXd K_fd = central_jacobian(
        [&](const VectorXd& a) { return sys.action.F(Q, a); }, sys.group.identity,
        1e-5);
    require((K_fd - sys.action.killing(Q)).cwiseAbs().maxCoeff() < 1e-6,
            sys.name + ": killing fields disagree with dF/da at identity");
  }

  // Transversality of the gauge surface on a probe set of slice points.
  for (int trial = 0; trial < 10; ++trial) {
    const VectorXd Qs = sys.random_slice_point(rng);
    require(sys.gauge.chi(Qs).cwiseAbs().maxCoeff() < 1e-10,
            sys.name + ": random_slice_point left the surface");
    const MatrixXd fp = sys.gauge.chi_grad(Qs) * sys.action.killing(Qs);
    Eigen::FullPivLU<MatrixXd> lu(fp);
    const double scale = std::max(1.0, fp.cwiseAbs().maxCoeff());
    lu.setThreshold(1e-12 * scale);
    require(lu.isInvertible(), sys.name +
                                   ": Faddeev-Popov matrix singular on the probe set at " +
                                   format_point(Qs));
  }

  sys.killing_commutator_sign = detect_killing_commutator_sign(sys, rng);
}

std::function<MatrixXd(const VectorXd&)> fd_killing(const ActionSpec& action,
                                                    const GroupChart& chart,
                                                    double h) {
  const auto F = action.F;
  const VectorXd e = chart.identity;
  return [F, e, h](const VectorXd& Q) {
    return central_jacobian([&](const VectorXd& a) { return F(Q, a); }, e, h);
  };
}

std::function<Tensor3(const VectorXd&)> fd_killing_grad(
    std::function<MatrixXd(const VectorXd&)> killing, int dim_G, double h) {
  return [killing, dim_G, h](const VectorXd& Q) {
    Tensor3 out;
    out.reserve(dim_G);
    for (int a = 0; a < dim_G; ++a) {
      out.push_back(central_jacobian(
          [&, a](const VectorXd& q) { return VectorXd(killing(q).col(a)); }, Q, h));
    }
    return out;
  };
}

std::function<Tensor3(const VectorXd&)> fd_chi_hess(
    std::function<MatrixXd(const VectorXd&)> chi_grad, int dim_G, double h) {
  return [chi_grad, dim_G, h](const VectorXd& Q) {
    Tensor3 out;
    out.reserve(dim_G);
    for (int m = 0; m < dim_G; ++m) {
      out.push_back(central_jacobian(
          [&, m](const VectorXd& q) {
            return VectorXd(chi_grad(q).row(m).transpose());
          },
          Q, h));
    }
    return out;
  };
}

std::function<Tensor3(const VectorXd&)> fd_metric_grad(
    std::function<MatrixXd(const VectorXd&)> metric, double h) {
  return [metric, h](const VectorXd& Q) {
    const int n = Q.size();
    Tensor3 out = make_tensor3(n, metric(Q).rows(), metric(Q).cols());
    VectorXd qp = Q, qm = Q;
    for (int c = 0; c < n; ++c) {
      qp[c] += h;
      qm[c] -= h;
      out[c] = (metric(qp) - metric(qm)) / (2.0 * h);
      qp[c] = Q[c];
      qm[c] = Q[c];
    }
    return out;
  };
}

}  // namespace lpr
