#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "jumphinf/model.hpp"
#include "jumphinf/sim.hpp"
#include "jumphinf/solver.hpp"
#include "jumphinf/synthesis.hpp"

namespace jumphinf::tools {

struct SimulationConfig {
  double T = 10.0;
  double dt = 1e-3;
  int n_traj = 100;
  std::uint64_t seed = 0;
  DisturbanceSignal disturbance;
  std::vector<double> checkpoints;
  UncertaintySet uncertainty;
  std::string controller = "local";  // none | local | global
};

struct ReferenceGains {
  bool has_global = false;
  bool has_local = false;
  GainTable global_gains;  // [i-1][mu-1]
  GainTable local_gains;   // [i-1][nu-1]
  std::vector<std::vector<double>> beta_u;  // optional, [i-1][mu-1]
};

struct RunConfig {
  int schema_version = 1;
  LargeScaleModel model;
  SolverOptions solver;
  SimulationConfig simulation;
  ReferenceGains reference;
};

// Parses and fully validates; throws ConfigError whose message lists every
// problem as "field.path: expected ... found ...".
RunConfig parse_config(const std::string& path);
RunConfig parse_config_text(const std::string& text, const std::string& origin);

nlohmann::json config_to_json(const RunConfig& config);

// Canonical serialized form used for config hashing and round-trip checks.
std::string canonical_config_dump(const RunConfig& config);

}  // namespace jumphinf::tools
