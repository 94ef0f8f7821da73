#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"

#include "lpr/report.hpp"
#include "lpr/systems_catalog.hpp"
#include "lpr/verification.hpp"

namespace {

using namespace lpr;
namespace fs = std::filesystem;

struct CommonOpts {
  std::string system = "so2_planar";
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 7;
  double tol_scale = 1.0;
};

nlohmann::json load_config(const CommonOpts& opts) {
  if (opts.config_path.empty()) return {{"system", opts.system}};
  std::ifstream in(opts.config_path);
  if (!in) throw ConfigError("cannot open config file " + opts.config_path);
  nlohmann::json config;
  try {
    in >> config;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  if (!config.contains("system")) config["system"] = opts.system;
  return config;
}

fs::path resolve_out_dir(const CommonOpts& opts) {
  fs::path dir;
  if (!opts.out_dir.empty()) {
    dir = opts.out_dir;
  } else if (const char* env = std::getenv("LPR_OUT_DIR")) {
    dir = env;
  } else {
    dir = "lpr_out";
  }
  fs::create_directories(dir);
  return dir;
}

nlohmann::json matrix_json(const MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

nlohmann::json vector_json(const VectorXd& v) {
  nlohmann::json out = nlohmann::json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

nlohmann::json tensor_json(const Tensor3& t) {
  nlohmann::json out = nlohmann::json::array();
  for (const MatrixXd& m : t) out.push_back(matrix_json(m));
  return out;
}

VectorXd vector_from_json(const nlohmann::json& j) {
  VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v[i] = j[i];
  return v;
}

AmbientState initial_state(const SystemSpec& sys, const std::string& path) {
  if (path.empty()) return default_initial_state(sys);
  nlohmann::json j;
  if (!path.empty() && path.front() == '{') {
    try {
      j = nlohmann::json::parse(path);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("inline initial state: ") + e.what());
    }
  } else {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open initial-state file " + path);
    in >> j;
  }
  AmbientState s;
  s.Q = vector_from_json(j.at("Q"));
  s.f = vector_from_json(j.at("f"));
  s.Qdot = vector_from_json(j.at("Qdot"));
  s.fdot = vector_from_json(j.at("fdot"));
  if (s.Q.size() != sys.dim_P() || s.f.size() != sys.dim_V() ||
      s.Qdot.size() != sys.dim_P() || s.fdot.size() != sys.dim_V()) {
    throw ConfigError("initial-state dimensions do not match system " + sys.name);
  }
  return s;
}

RunManifest make_manifest(const std::string& command, const nlohmann::json& config,
                          const CommonOpts& opts) {
  RunManifest m;
  m.command = command;
  m.system = config.at("system");
  m.config = config;
  m.seed = opts.seed;
  m.version_stamp = version();
  return m;
}

int cmd_simulate(const CommonOpts& opts, const std::string& mode, double dt,
                 int steps, const std::string& initial_path) {
  const nlohmann::json config = load_config(opts);
  const SystemSpec sys = load_system(config);
  const AmbientState init = initial_state(sys, initial_path);
  const auto t0 = std::chrono::steady_clock::now();

  Trajectory traj;
  if (mode == "original") {
    traj = integrate_original(sys, init, dt, steps);
  } else if (mode == "reduced") {
    traj = integrate_reduced(sys, reduce_state(sys, init), dt, steps);
  } else {
    throw ConfigError("mode must be 'reduced' or 'original'");
  }

  const fs::path dir = resolve_out_dir(opts);
  const fs::path csv = dir / ("trajectory_" + sys.name + "_" + mode + ".csv");
  write_trajectory_csv(csv.string(), sys, traj);

  RunManifest manifest = make_manifest("simulate", config, opts);
  manifest.tolerances = {{"dt", dt}, {"steps", steps}, {"mode", mode}};
  manifest.outputs = {csv.string()};
  manifest.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const fs::path mpath = dir / "manifest_simulate.json";
  write_json(mpath.string(), manifest.to_json());
  std::cout << "wrote " << csv.string() << " (" << traj.times.size()
            << " samples) and " << mpath.string() << "\n";
  return 0;
}

int cmd_verify(const CommonOpts& opts, int workers) {
  const nlohmann::json config = load_config(opts);
  const SystemSpec sys = load_system(config);
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<CheckResult> results =
      run_verification(sys, opts.seed, opts.tol_scale, workers);

  bool all = true;
  std::printf("%-26s %-14s %-10s %-6s %8s\n", "check", "max residual", "tol",
              "pass", "sec");
  for (const CheckResult& r : results) {
    std::printf("%-26s %-14.3e %-10.1e %-6s %8.2f  %s\n", r.name.c_str(),
                r.max_residual, r.tolerance, r.pass ? "PASS" : "FAIL", r.seconds,
                r.detail.c_str());
    all = all && r.pass;
  }

  const fs::path dir = resolve_out_dir(opts);
  const fs::path rpath = dir / ("verify_" + sys.name + ".json");
  write_json(rpath.string(),
             verification_report(sys, opts.seed, opts.tol_scale, results));

  RunManifest manifest = make_manifest("verify", config, opts);
  nlohmann::json tols, checks;
  for (const CheckResult& r : results) {
    tols[r.name] = r.tolerance;
    checks[r.name] = r.pass;
  }
  manifest.tolerances = tols;
  manifest.checks = checks;
  manifest.pass = all;
  manifest.outputs = {rpath.string()};
  manifest.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_json((dir / "manifest_verify.json").string(), manifest.to_json());

  std::cout << (all ? "all checks passed" : "TOLERANCE BREACH") << "; report at "
            << rpath.string() << "\n";
  return all ? 0 : 1;
}

int cmd_inspect(const CommonOpts& opts, const std::string& point_path) {
  const nlohmann::json config = load_config(opts);
  const SystemSpec sys = load_system(config);

  BundlePoint b;
  if (point_path.empty()) {
    const AmbientState init = default_initial_state(sys);
    b = to_bundle(sys, init.Q, init.f);
  } else {
    std::ifstream in(point_path);
    if (!in) throw ConfigError("cannot open point file " + point_path);
    nlohmann::json j;
    in >> j;
    if (j.contains("Q")) {
      b = to_bundle(sys, vector_from_json(j.at("Q")), vector_from_json(j.at("f")));
    } else {
      b.Q_star = vector_from_json(j.at("Q_star"));
      b.f_tilde = vector_from_json(j.at("f_tilde"));
      b.a = j.contains("a") ? vector_from_json(j.at("a")) : sys.group.identity;
    }
  }

  const GeometryCache g = geometry_at(sys, b);
  nlohmann::json out = {
      {"system", sys.name},
      {"point",
       {{"Q_star", vector_json(b.Q_star)},
        {"f_tilde", vector_json(b.f_tilde)},
        {"a", vector_json(b.a)}}},
      {"killing_P", matrix_json(g.K_P)},
      {"killing_V", matrix_json(g.K_V)},
      {"chi_grad", matrix_json(g.chi_grad)},
      {"faddeev_popov", matrix_json(g.proj.fp)},
      {"faddeev_popov_inv", matrix_json(g.proj.fp_inv)},
      {"Lambda", matrix_json(g.proj.Lambda)},
      {"N_QQ", matrix_json(g.proj.N_QQ)},
      {"N_VQ", matrix_json(g.proj.N_VQ)},
      {"P_perp", matrix_json(g.proj.P_perp)},
      {"gamma", matrix_json(g.conn.gamma)},
      {"gamma_prime", matrix_json(g.conn.gamma_prime)},
      {"d", matrix_json(g.conn.d)},
      {"d_inv", matrix_json(g.conn.d_inv)},
      {"A_Q", matrix_json(g.conn.A_Q)},
      {"A_V", matrix_json(g.conn.A_V)},
      {"At_Q", matrix_json(g.At_Q)},
      {"At_V", matrix_json(g.At_V)},
      {"Pi_QQ", matrix_json(g.Pi.QQ)},
      {"Pi_QV", matrix_json(g.Pi.QV)},
      {"Pi_VQ", matrix_json(g.Pi.VQ)},
      {"Pi_VV", matrix_json(g.Pi.VV)},
      {"GH_QQ", matrix_json(g.hmet.QQ)},
      {"GH_QV", matrix_json(g.hmet.QV)},
      {"GH_VV", matrix_json(g.hmet.VV)},
      {"GH_inv_QQ", matrix_json(g.hmet.inv_QQ)},
      {"GH_inv_QV", matrix_json(g.hmet.inv_QV)},
      {"GH_inv_VV", matrix_json(g.hmet.inv_VV)},
      {"d_tilde", matrix_json(g.hmet.d_tilde)},
      {"d_tilde_inv", matrix_json(g.hmet.d_tilde_inv)},
      {"rho", matrix_json(g.rho)},
      {"u", matrix_json(g.u)},
      {"v", matrix_json(g.v)},
      {"ubar", matrix_json(g.ubar)},
      {"vbar", matrix_json(g.vbar)},
      {"C_Q_QQ", tensor_json(g.sc.C_Q_QQ)},
      {"C_V_QQ", tensor_json(g.sc.C_V_QQ)},
      {"C_G_QQ", tensor_json(g.sc.C_G_QQ)},
      {"C_V_QV", tensor_json(g.sc.C_V_QV)},
      {"C_G_QV", tensor_json(g.sc.C_G_QV)},
      {"C_G_VV", tensor_json(g.sc.C_G_VV)},
      {"curv_QQ", tensor_json(g.sc.curv_QQ)},
      {"curv_QV", tensor_json(g.sc.curv_QV)},
      {"curv_VV", tensor_json(g.sc.curv_VV)},
      {"potential", g.V},
      {"potential_grad_Q", vector_json(g.dV_Q)},
      {"potential_grad_f", vector_json(g.dV_V)}};

  std::cout << out.dump(2) << "\n";
  const fs::path dir = resolve_out_dir(opts);
  const fs::path path = dir / ("inspect_" + sys.name + ".json");
  write_json(path.string(), out);

  RunManifest manifest = make_manifest("inspect", config, opts);
  manifest.outputs = {path.string()};
  write_json((dir / "manifest_inspect.json").string(), manifest.to_json());
  return 0;
}

int cmd_compare(const CommonOpts& opts, double dt, int steps,
                const std::string& initial_path) {
  const nlohmann::json config = load_config(opts);
  const SystemSpec sys = load_system(config);
  const AmbientState init = initial_state(sys, initial_path);
  const auto t0 = std::chrono::steady_clock::now();

  const Trajectory orig = integrate_original(sys, init, dt, steps);
  const Trajectory red = integrate_reduced(sys, reduce_state(sys, init), dt, steps);
  const CompareReport rep = compare_trajectories(sys, orig, red);
  const double tol = (sys.dim_G() == 1 ? 1e-6 : 1e-5) * opts.tol_scale;
  const bool pass = rep.max() <= tol;

  std::printf("%-12s %-14s\n", "component", "sup deviation");
  std::printf("%-12s %-14.3e\n", "Q*", rep.sup_Q_star);
  std::printf("%-12s %-14.3e\n", "f~", rep.sup_f_tilde);
  std::printf("%-12s %-14.3e\n", "a", rep.sup_a);
  std::printf("%-12s %-14.3e\n", "omega_Q", rep.sup_omega_Q);
  std::printf("%-12s %-14.3e\n", "omega_V", rep.sup_omega_V);
  std::printf("%-12s %-14.3e\n", "omega_G", rep.sup_omega_G);
  std::printf("max %.3e vs tol %.1e -> %s\n", rep.max(), tol,
              pass ? "PASS" : "FAIL");

  const fs::path dir = resolve_out_dir(opts);
  nlohmann::json report = {{"system", sys.name},
                           {"dt", dt},
                           {"steps", steps},
                           {"tolerance", tol},
                           {"sup_Q_star", rep.sup_Q_star},
                           {"sup_f_tilde", rep.sup_f_tilde},
                           {"sup_a", rep.sup_a},
                           {"sup_omega_Q", rep.sup_omega_Q},
                           {"sup_omega_V", rep.sup_omega_V},
                           {"sup_omega_G", rep.sup_omega_G},
                           {"pass", pass}};
  const fs::path rpath = dir / ("compare_" + sys.name + ".json");
  write_json(rpath.string(), report);

  RunManifest manifest = make_manifest("compare", config, opts);
  manifest.tolerances = {{"sup_norm", tol}, {"dt", dt}, {"steps", steps}};
  manifest.pass = pass;
  manifest.outputs = {rpath.string()};
  manifest.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_json((dir / "manifest_compare.json").string(), manifest.to_json());
  return pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lagrange-Poincare reduction toolkit"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string mode = "reduced";
  std::string initial_path;
  std::string point_path;
  double dt = 1e-3;
  int steps = 1000;
  int workers = 0;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--system", opts.system, "builtin system name");
    cmd->add_option("--config", opts.config_path, "JSON config file");
    cmd->add_option("--seed", opts.seed, "RNG seed");
    cmd->add_option("--out", opts.out_dir, "output directory (or $LPR_OUT_DIR)");
    cmd->add_option("--tol-scale", opts.tol_scale, "tolerance multiplier");
  };

  CLI::App* sim = app.add_subcommand("simulate", "integrate one trajectory");
  add_common(sim);
  sim->add_option("--mode", mode, "reduced|original");
  sim->add_option("--dt", dt, "time step");
  sim->add_option("--steps", steps, "step count");
  sim->add_option("--initial", initial_path,
                  "initial state: JSON file path or inline {...}");

  CLI::App* ver = app.add_subcommand("verify", "run the property-check battery");
  add_common(ver);
  ver->add_option("--workers", workers, "worker pool size (0 = hardware)");

  CLI::App* ins = app.add_subcommand("inspect", "dump geometry at a point");
  add_common(ins);
  ins->add_option("--point", point_path, "JSON point file");

  CLI::App* cmp = app.add_subcommand("compare",
                                     "reduced vs unreduced-oracle deviation table");
  add_common(cmp);
  cmp->add_option("--dt", dt, "time step");
  cmp->add_option("--steps", steps, "step count");
  cmp->add_option("--initial", initial_path,
                  "initial state: JSON file path or inline {...}");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (sim->parsed()) return cmd_simulate(opts, mode, dt, steps, initial_path);
    if (ver->parsed()) return cmd_verify(opts, workers);
    if (ins->parsed()) return cmd_inspect(opts, point_path);
    if (cmp->parsed()) return cmd_compare(opts, dt, steps, initial_path);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
