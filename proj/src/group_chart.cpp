#include "lpr/group_chart.hpp"

#include <cmath>

namespace lpr {

namespace quat {

VectorXd multiply(const VectorXd& p, const VectorXd& q) {
  VectorXd r(4);
  r[0] = p[0] * q[0] - p[1] * q[1] - p[2] * q[2] - p[3] * q[3];
  r[1] = p[0] * q[1] + p[1] * q[0] + p[2] * q[3] - p[3] * q[2];
  r[2] = p[0] * q[2] - p[1] * q[3] + p[2] * q[0] + p[3] * q[1];
  r[3] = p[0] * q[3] + p[1] * q[2] - p[2] * q[1] + p[3] * q[0];
  return r;
}

VectorXd conjugate(const VectorXd& q) {
  VectorXd r(4);
  r << q[0], -q[1], -q[2], -q[3];
  return r;
}

VectorXd exp_map(const VectorXd& x) {
  const double phi = x.norm();
  VectorXd q(4);
  q[0] = std::cos(phi);
  const double sinc = (phi < 1e-8) ? 1.0 - phi * phi / 6.0 : std::sin(phi) / phi;
  q.segment(1, 3) = sinc * x;
  return q;
}

VectorXd log_map(const VectorXd& q) {
  const double t = q.segment(1, 3).norm();
  const double phi = std::atan2(t, q[0]);
  if (phi > 0.995 * M_PI) {
    throw DomainError("quaternion log: element too close to the chart cut (phi = " +
                      std::to_string(phi) + ")");
  }
  double scale;
  if (t < 1e-8) {
    // atan2(t, w)/t for small t, w > 0
    scale = (1.0 - t * t / (3.0 * q[0] * q[0])) / q[0];
  } else {
    scale = phi / t;
  }
  return scale * q.segment(1, 3);
}

MatrixXd left_matrix(const VectorXd& p) {
  MatrixXd m(4, 4);
  m << p[0], -p[1], -p[2], -p[3],
       p[1],  p[0], -p[3],  p[2],
       p[2],  p[3],  p[0], -p[1],
       p[3], -p[2],  p[1],  p[0];
  return m;
}

MatrixXd right_matrix(const VectorXd& p) {
  MatrixXd m(4, 4);
  m << p[0], -p[1], -p[2], -p[3],
       p[1],  p[0],  p[3], -p[2],
       p[2], -p[3],  p[0],  p[1],
       p[3],  p[2], -p[1],  p[0];
  return m;
}

}  // namespace quat

namespace {

double wrap_angle(double theta) {
  theta = std::fmod(theta + M_PI, 2.0 * M_PI);
  if (theta < 0) theta += 2.0 * M_PI;
  return theta - M_PI;
}

// Cross-product matrix of a unit axis.
MatrixXd hat(const VectorXd& n) {
  MatrixXd m(3, 3);
  m <<    0, -n[2],  n[1],
       n[2],     0, -n[0],
      -n[1],  n[0],     0;
  return m;
}

// I + b*[n]x + c*[n]x^2 for the Rodrigues-type translation matrices.
MatrixXd axis_poly(const VectorXd& x, double b, double c) {
  const double phi = x.norm();
  MatrixXd m = MatrixXd::Identity(3, 3);
  if (phi < 1e-14) return m;
  const MatrixXd nx = hat(x / phi);
  return m + b * nx + c * nx * nx;
}

}  // namespace

GroupChart so2_chart() {
  GroupChart c;
  c.name = "so2";
  c.dim = 1;
  c.identity = VectorXd::Zero(1);
  c.multiply = [](const VectorXd& a, const VectorXd& b) {
    VectorXd r(1);
    r[0] = wrap_angle(a[0] + b[0]);
    return r;
  };
  c.inverse = [](const VectorXd& a) {
    VectorXd r(1);
    r[0] = wrap_angle(-a[0]);
    return r;
  };
  c.inverse_jacobian = [](const VectorXd&) { return -MatrixXd::Identity(1, 1); };
  c.in_domain = [](const VectorXd& a) { return std::abs(a[0]) <= M_PI; };
  c.structure = make_tensor3(1, 1, 1);
  auto one = [](const VectorXd&) { return MatrixXd::Identity(1, 1); };
  c.u = one;
  c.v = one;
  c.ubar = one;
  c.vbar = one;
  return c;
}

GroupChart su2_chart() {
  GroupChart c;
  c.name = "su2";
  c.dim = 3;
  c.identity = VectorXd::Zero(3);
  c.multiply = [](const VectorXd& a, const VectorXd& b) {
    return quat::log_map(quat::multiply(quat::exp_map(a), quat::exp_map(b)));
  };
  c.inverse = [](const VectorXd& a) { return VectorXd(-a); };
  c.inverse_jacobian = [](const VectorXd&) { return -MatrixXd::Identity(3, 3); };
  c.in_domain = [](const VectorXd& a) { return a.norm() < 0.9 * M_PI; };

  // [e_i, e_j] = 2 eps_ijk e_k for the imaginary quaternion units.
  c.structure = make_tensor3(3, 3, 3);
  auto eps = [](int a, int b, int g) -> double {
    if (a == b || b == g || a == g) return 0.0;
    return ((b - a + 3) % 3 == 1) ? 1.0 : -1.0;  // cyclic (a,b,g) positive
  };
  for (int g = 0; g < 3; ++g)
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) c.structure[g](a, b) = 2.0 * eps(a, b, g);

  // Left Maurer-Cartan matrix u = (1 - exp(-ad_x))/ad_x with ad_x = 2 [x]x,
  // and its inverse v; the barred pair flips the sign of x.
  c.u = [](const VectorXd& x) {
    const double phi = x.norm();
    const double b = (phi < 1e-8) ? -phi : -std::sin(phi) * std::sin(phi) / phi;
    const double g = (phi < 1e-8) ? 2.0 * phi * phi / 3.0
                                  : 1.0 - std::sin(2.0 * phi) / (2.0 * phi);
    return axis_poly(x, b, g);
  };
  c.v = [](const VectorXd& x) {
    const double phi = x.norm();
    const double b = phi;
    const double g = (phi < 1e-8) ? phi * phi / 3.0 : 1.0 - phi / std::tan(phi);
    return axis_poly(x, b, g);
  };
  c.ubar = [u = c.u](const VectorXd& x) { return u(VectorXd(-x)); };
  c.vbar = [v = c.v](const VectorXd& x) { return v(VectorXd(-x)); };
  return c;
}

void use_fd_translation(GroupChart& chart, double h) {
  const auto multiply = chart.multiply;
  const VectorXd e = chart.identity;
  auto v_fd = [multiply, e, h](const VectorXd& a) {
    return central_jacobian([&](const VectorXd& g) { return multiply(a, g); }, e, h);
  };
  auto vbar_fd = [multiply, e, h](const VectorXd& a) {
    return central_jacobian([&](const VectorXd& g) { return multiply(g, a); }, e, h);
  };
  chart.v = v_fd;
  chart.vbar = vbar_fd;
  chart.u = [v_fd](const VectorXd& a) { return guarded_inverse(v_fd(a), "u(a)"); };
  chart.ubar = [vbar_fd](const VectorXd& a) {
    return guarded_inverse(vbar_fd(a), "ubar(a)");
  };
}

Tensor3 fd_structure_constants(const GroupChart& chart, double h) {
  const int n = chart.dim;
  Tensor3 c = make_tensor3(n, n, n);
  const VectorXd e = chart.identity;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      VectorXd xa = e, xb = e;
      auto second = [&](double sa, double sb) {
        xa[a] = sa;
        xb[b] = sb;
        return chart.multiply(xa, xb);
      };
      const VectorXd mixed = (second(h, h) - second(h, -h) - second(-h, h) +
                              second(-h, -h)) /
                             (4.0 * h * h);
      for (int g = 0; g < n; ++g) c[g](a, b) += mixed[g];
    }
  for (int g = 0; g < n; ++g) {
    const MatrixXd sym = c[g];
    c[g] = sym - sym.transpose();
  }
  return c;
}

void validate_chart(const GroupChart& chart, Rng& rng, double tol) {
  const int n = chart.dim;
  auto sample = [&]() {
    VectorXd a = rng.uniform_vector(n, -1.0, 1.0);
    while (!chart.in_domain(a)) a *= 0.5;
    return a;
  };

  for (int trial = 0; trial < 20; ++trial) {
    const VectorXd a = sample();
    if ((chart.multiply(a, chart.identity) - a).cwiseAbs().maxCoeff() > tol ||
        (chart.multiply(chart.identity, a) - a).cwiseAbs().maxCoeff() > tol) {
      throw ConfigError("group chart " + chart.name + ": identity law fails at " +
                        format_point(a));
    }
    const VectorXd ainv = chart.inverse(a);
    if (chart.multiply(a, ainv).cwiseAbs().maxCoeff() > tol) {
      throw ConfigError("group chart " + chart.name + ": inverse law fails at " +
                        format_point(a));
    }
    if ((chart.u(a) * chart.v(a) - MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() >
            tol ||
        (chart.ubar(a) * chart.vbar(a) - MatrixXd::Identity(n, n))
                .cwiseAbs()
                .maxCoeff() > tol) {
      throw ConfigError("group chart " + chart.name +
                        ": translation matrices are not inverse pairs at " +
                        format_point(a));
    }
  }

  if ((chart.rho(chart.identity) - MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() >
      tol) {
    throw ConfigError("group chart " + chart.name + ": rho(e) != I");
  }

  // Antisymmetry and Jacobi identity of c^g_{ab}.
  for (int g = 0; g < n; ++g) {
    if ((chart.structure[g] + chart.structure[g].transpose()).cwiseAbs().maxCoeff() >
        tol) {
      throw ConfigError("group chart " + chart.name +
                        ": structure constants not antisymmetric");
    }
  }
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int d = 0; d < n; ++d)
        for (int g = 0; g < n; ++g) {
          double s = 0;
          for (int m = 0; m < n; ++m) {
            s += chart.structure[m](a, b) * chart.structure[g](m, d);
            s += chart.structure[m](b, d) * chart.structure[g](m, a);
            s += chart.structure[m](d, a) * chart.structure[g](m, b);
          }
          if (std::abs(s) > tol) {
            throw ConfigError("group chart " + chart.name + ": Jacobi identity fails");
          }
        }

  // Structure constants must match the multiplication law.
  const Tensor3 c_fd = fd_structure_constants(chart);
  for (int g = 0; g < n; ++g) {
    if ((c_fd[g] - chart.structure[g]).cwiseAbs().maxCoeff() > 1e-5) {
      throw ConfigError("group chart " + chart.name +
                        ": structure constants disagree with multiplication law");
    }
  }
}

}  // namespace lpr
