#include "lpr/report.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>

#ifndef LPR_VERSION
#define LPR_VERSION "unversioned"
#endif

namespace lpr {

std::string version() { return LPR_VERSION; }

nlohmann::json RunManifest::to_json() const {
  return {{"command", command},
          {"system", system},
          {"config", config},
          {"seed", seed},
          {"tolerances", tolerances},
          {"checks", checks},
          {"version", version_stamp},
          {"wall_clock_seconds", wall_clock_seconds},
          {"pass", pass},
          {"outputs", outputs}};
}

RunManifest RunManifest::from_json(const nlohmann::json& j) {
  RunManifest m;
  m.command = j.at("command");
  m.system = j.at("system");
  m.config = j.at("config");
  m.seed = j.at("seed");
  m.tolerances = j.at("tolerances");
  m.checks = j.at("checks");
  m.version_stamp = j.at("version");
  m.wall_clock_seconds = j.at("wall_clock_seconds");
  m.pass = j.at("pass");
  m.outputs = j.at("outputs").get<std::vector<std::string>>();
  return m;
}

void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << j.dump(2) << "\n";
}

void write_trajectory_csv(const std::string& path, const SystemSpec& sys,
                          const Trajectory& traj) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);

  out << "t";
  for (const std::string& label : state_labels(sys, traj.mode)) out << "," << label;
  out << ",energy";
  const bool reduced = traj.mode == IntegrationMode::Reduced;
  if (reduced) {
    out << ",chi_residual,tangency,mass_residual";
    for (int a = 0; a < sys.dim_G(); ++a) out << ",pi" << a + 1;
  }
  out << "\n";

  char buf[32];
  auto emit = [&](double x) {
    std::snprintf(buf, sizeof buf, "%.17g", x);
    out << "," << buf;
  };
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g", traj.times[k]);
    out << buf;
    for (int i = 0; i < traj.states[k].size(); ++i) emit(traj.states[k][i]);
    emit(traj.energy[k]);
    if (reduced) {
      emit(traj.chi_residual[k]);
      emit(traj.tangency[k]);
      emit(traj.mass_residual[k]);
      for (int a = 0; a < sys.dim_G(); ++a) emit(traj.momentum[k][a]);
    }
    out << "\n";
  }
}

}  // namespace lpr
