#include "lpr/systems_catalog.hpp"

#include <cmath>
#include <fstream>

namespace lpr {

namespace {

MatrixXd rotation2(double theta) {
  MatrixXd r(2, 2);
  r << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  return r;
}

// Conformally flat invariant metric scale*(1 + beta |Q|^2) I and its gradient.
void attach_conformal_metric(ActionSpec& action, double scale, double beta) {
  const int n = action.dim_P;
  action.metric_P = [n, scale, beta](const VectorXd& Q) {
    return MatrixXd((scale * (1.0 + beta * Q.squaredNorm())) *
                    MatrixXd::Identity(n, n));
  };
  action.metric_P_grad = [n, scale, beta](const VectorXd& Q) {
    Tensor3 g = make_tensor3(n, n, n);
    for (int c = 0; c < n; ++c)
      g[c] = (2.0 * scale * beta * Q[c]) * MatrixXd::Identity(n, n);
    return g;
  };
}

VectorXd sample_away_from_origin(Rng& rng, int n, double lo, double hi) {
  for (;;) {
    VectorXd q = rng.uniform_vector(n, -hi, hi);
    const double r = q.norm();
    if (r >= lo && r <= hi) return q;
  }
}

}  // namespace

SystemSpec make_so2_planar(const SystemParams& params) {
  SystemSpec sys;
  sys.name = "so2_planar";
  sys.group = so2_chart();
  if (params.fd_translation) use_fd_translation(sys.group);

  ActionSpec& act = sys.action;
  act.dim_P = 2;
  act.dim_V = 2;
  act.F = [](const VectorXd& Q, const VectorXd& a) {
    return VectorXd(rotation2(a[0]).transpose() * Q);
  };
  act.F_jac = [](const VectorXd&, const VectorXd& a) {
    return MatrixXd(rotation2(a[0]).transpose());
  };
  act.D = [](const VectorXd& a) { return rotation2(a[0]); };

  MatrixXd gen(2, 2);
  gen << 0, 1, -1, 0;
  act.generators = {gen};
  act.killing = [gen](const VectorXd& Q) { return MatrixXd(gen * Q); };
  act.killing_grad = [gen](const VectorXd&) { return Tensor3{gen}; };
  attach_conformal_metric(act, params.metric_scale, params.metric_beta);
  act.metric_V = params.metric_V_scale * MatrixXd::Identity(2, 2);

  // Sigma = positive Q1 axis, chi(Q) = Q^2.
  sys.gauge.chi = [](const VectorXd& Q) {
    VectorXd c(1);
    c << Q[1];
    return c;
  };
  sys.gauge.chi_grad = [](const VectorXd&) {
    MatrixXd g(1, 2);
    g << 0, 1;
    return g;
  };
  sys.gauge.chi_hess = [](const VectorXd&) { return make_tensor3(1, 2, 2); };
  sys.gauge.on_section = [](const VectorXd& Q) { return Q[0] > 0; };

  const double kq = params.kappa;
  const double cf = params.potential_quadratic_f;
  const double cl = params.potential_linear_q1;
  sys.potential.value = [kq, cf, cl](const VectorXd& Q, const VectorXd& f) {
    return 0.5 * cf * f.squaredNorm() + kq * Q.dot(f) + cl * Q[0];
  };
  sys.potential.grad_Q = [kq, cl](const VectorXd&, const VectorXd& f) {
    VectorXd g = kq * f;
    g[0] += cl;
    return g;
  };
  sys.potential.grad_f = [kq, cf](const VectorXd& Q, const VectorXd& f) {
    return VectorXd(cf * f + kq * Q);
  };

  sys.random_slice_point = [](Rng& rng) {
    VectorXd q = VectorXd::Zero(2);
    q[0] = rng.uniform(0.5, 2.0);
    return q;
  };
  sys.random_group_point = [](Rng& rng) {
    VectorXd a(1);
    a[0] = rng.uniform(-2.2, 2.2);
    return a;
  };
  sys.random_ambient_point = [](Rng& rng) {
    return sample_away_from_origin(rng, 2, 0.5, 2.0);
  };
  sys.random_fiber_point = [](Rng& rng) { return rng.uniform_vector(2, -1.0, 1.0); };

  if (params.fd_derivatives) {
    act.killing_grad = fd_killing_grad(act.killing, 1);
    sys.gauge.chi_hess = fd_chi_hess(sys.gauge.chi_grad, 1);
    act.metric_P_grad = fd_metric_grad(act.metric_P);
  }

  validate_system(sys);
  return sys;
}

SystemSpec make_su2_quaternion(const SystemParams& params) {
  SystemSpec sys;
  sys.name = "su2_quaternion";
  sys.group = su2_chart();
  if (params.fd_translation) use_fd_translation(sys.group);

  ActionSpec& act = sys.action;
  act.dim_P = 4;
  act.dim_V = 4;
  act.F = [](const VectorXd& Q, const VectorXd& a) {
    return quat::multiply(Q, quat::exp_map(a));
  };
  act.F_jac = [](const VectorXd&, const VectorXd& a) {
    return quat::right_matrix(quat::exp_map(a));
  };
  act.D = [](const VectorXd& a) { return quat::left_matrix(quat::exp_map(a)); };

  Tensor3 gens;
  Tensor3 right_units;
  for (int alpha = 0; alpha < 3; ++alpha) {
    VectorXd e = VectorXd::Zero(4);
    e[alpha + 1] = 1.0;
    gens.push_back(-quat::left_matrix(e));
    right_units.push_back(quat::right_matrix(e));
  }
  act.generators = gens;
  act.killing = [right_units](const VectorXd& Q) {
    MatrixXd k(4, 3);
    for (int a = 0; a < 3; ++a) k.col(a) = right_units[a] * Q;
    return k;
  };
  act.killing_grad = [right_units](const VectorXd&) { return right_units; };
  attach_conformal_metric(act, params.metric_scale, params.metric_beta);
  act.metric_V = params.metric_V_scale * MatrixXd::Identity(4, 4);

  // Sigma = positive real axis, chi = imaginary components.
  sys.gauge.chi = [](const VectorXd& Q) { return VectorXd(Q.segment(1, 3)); };
  sys.gauge.chi_grad = [](const VectorXd&) {
    MatrixXd g = MatrixXd::Zero(3, 4);
    g.block(0, 1, 3, 3) = MatrixXd::Identity(3, 3);
    return g;
  };
  sys.gauge.chi_hess = [](const VectorXd&) { return make_tensor3(3, 4, 4); };
  sys.gauge.on_section = [](const VectorXd& Q) { return Q[0] > 0; };

  const double kq = params.kappa;
  const double cf = params.potential_quadratic_f;
  const double cl = params.potential_linear_q1;
  auto re_prod_grad_Q = [](const VectorXd& f) {
    VectorXd g(4);
    g << f[0], -f[1], -f[2], -f[3];
    return g;
  };
  sys.potential.value = [kq, cf, cl](const VectorXd& Q, const VectorXd& f) {
    const double re_qf = Q[0] * f[0] - Q.segment(1, 3).dot(f.segment(1, 3));
    return 0.5 * cf * f.squaredNorm() + kq * re_qf + cl * Q[1];
  };
  sys.potential.grad_Q = [kq, cl, re_prod_grad_Q](const VectorXd&, const VectorXd& f) {
    VectorXd g = kq * re_prod_grad_Q(f);
    g[1] += cl;
    return g;
  };
  sys.potential.grad_f = [kq, cf, re_prod_grad_Q](const VectorXd& Q, const VectorXd& f) {
    return VectorXd(cf * f + kq * re_prod_grad_Q(Q));
  };

  sys.random_slice_point = [](Rng& rng) {
    VectorXd q = VectorXd::Zero(4);
    q[0] = rng.uniform(0.5, 2.0);
    return q;
  };
  sys.random_group_point = [](Rng& rng) {
    for (;;) {
      VectorXd a = rng.uniform_vector(3, -1.4, 1.4);
      if (a.norm() < 0.8 * M_PI && a.norm() > 1e-3) return a;
    }
  };
  sys.random_ambient_point = [](Rng& rng) {
    return sample_away_from_origin(rng, 4, 0.5, 2.0);
  };
  sys.random_fiber_point = [](Rng& rng) { return rng.uniform_vector(4, -1.0, 1.0); };

  if (params.fd_derivatives) {
    act.killing_grad = fd_killing_grad(act.killing, 3);
    sys.gauge.chi_hess = fd_chi_hess(sys.gauge.chi_grad, 3);
    act.metric_P_grad = fd_metric_grad(act.metric_P);
  }

  validate_system(sys);
  return sys;
}

SystemSpec make_builtin(const std::string& name, const SystemParams& params) {
  if (name == "so2_planar") return make_so2_planar(params);
  if (name == "su2_quaternion") return make_su2_quaternion(params);
  throw ConfigError("unknown system '" + name +
                    "' (expected so2_planar or su2_quaternion)");
}

SystemParams params_from_json(const nlohmann::json& config) {
  SystemParams p;
  static const char* known[] = {"system",
                                "kappa",
                                "metric_beta",
                                "metric_scale",
                                "metric_V_scale",
                                "potential_quadratic_f",
                                "potential_linear_q1",
                                "group_translation",
                                "derivatives"};
  for (auto it = config.begin(); it != config.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || it.key() == k;
    if (!ok) throw ConfigError("unknown config key '" + it.key() + "'");
  }
  p.kappa = config.value("kappa", p.kappa);
  p.metric_beta = config.value("metric_beta", p.metric_beta);
  p.metric_scale = config.value("metric_scale", p.metric_scale);
  p.metric_V_scale = config.value("metric_V_scale", p.metric_V_scale);
  p.potential_quadratic_f =
      config.value("potential_quadratic_f", p.potential_quadratic_f);
  p.potential_linear_q1 = config.value("potential_linear_q1", p.potential_linear_q1);
  if (config.contains("group_translation")) {
    const std::string mode = config["group_translation"];
    if (mode != "analytic" && mode != "fd")
      throw ConfigError("group_translation must be 'analytic' or 'fd'");
    p.fd_translation = mode == "fd";
  }
  if (config.contains("derivatives")) {
    const std::string mode = config["derivatives"];
    if (mode != "analytic" && mode != "fd")
      throw ConfigError("derivatives must be 'analytic' or 'fd'");
    p.fd_derivatives = mode == "fd";
  }
  if (p.metric_scale <= 0 || p.metric_V_scale <= 0 || p.metric_beta < 0)
    throw ConfigError("metric parameters must be positive (beta nonnegative)");
  return p;
}

nlohmann::json params_json(const SystemParams& p) {
  return {{"kappa", p.kappa},
          {"metric_beta", p.metric_beta},
          {"metric_scale", p.metric_scale},
          {"metric_V_scale", p.metric_V_scale},
          {"potential_quadratic_f", p.potential_quadratic_f},
          {"potential_linear_q1", p.potential_linear_q1},
          {"group_translation", p.fd_translation ? "fd" : "analytic"},
          {"derivatives", p.fd_derivatives ? "fd" : "analytic"}};
}

SystemSpec load_system(const nlohmann::json& config) {
  if (!config.contains("system"))
    throw ConfigError("config is missing the 'system' key");
  return make_builtin(config["system"], params_from_json(config));
}

SystemSpec load_system_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  nlohmann::json config;
  try {
    in >> config;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
  return load_system(config);
}

AmbientState default_initial_state(const SystemSpec& sys) {
  AmbientState s;
  if (sys.name == "so2_planar") {
    s.Q = VectorXd(2);
    s.Q << 1.2, 0.4;
    s.f = VectorXd(2);
    s.f << 0.3, -0.2;
    s.Qdot = VectorXd(2);
    s.Qdot << -0.1, 0.5;
    s.fdot = VectorXd(2);
    s.fdot << 0.4, 0.1;
  } else if (sys.name == "su2_quaternion") {
    s.Q = VectorXd(4);
    s.Q << 1.1, 0.2, -0.1, 0.15;
    s.f = VectorXd(4);
    s.f << 0.2, -0.3, 0.1, 0.05;
    s.Qdot = VectorXd(4);
    s.Qdot << 0.05, 0.2, -0.1, 0.15;
    s.fdot = VectorXd(4);
    s.fdot << -0.1, 0.2, 0.05, -0.15;
  } else {
    throw ConfigError("no default initial state for system " + sys.name);
  }
  return s;
}

}  // namespace lpr
