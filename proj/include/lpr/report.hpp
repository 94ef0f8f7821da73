#pragma once

#include <string>

#include "lpr/reduced_dynamics.hpp"

#include "json.hpp"

namespace lpr {

// Build version stamp (git describe of the source tree).
std::string version();

// Environmental record written next to every deterministic report: echoes
// the configuration, seed and tolerances in force, and carries the
// wall-clock, which is deliberately kept out of the reports themselves.
struct RunManifest {
  std::string command;
  std::string system;
  nlohmann::json config;
  std::uint64_t seed = 0;
  nlohmann::json tolerances;
  nlohmann::json checks;  // pass/fail per check, when the command runs checks
  std::string version_stamp;
  double wall_clock_seconds = 0.0;
  bool pass = true;
  std::vector<std::string> outputs;

  nlohmann::json to_json() const;
  static RunManifest from_json(const nlohmann::json& j);
};

void write_json(const std::string& path, const nlohmann::json& j);

// CSV trajectory: header row "t,<state labels>,energy[,chi,tangency,pi_*]".
void write_trajectory_csv(const std::string& path, const SystemSpec& sys,
                          const Trajectory& traj);

}  // namespace lpr
