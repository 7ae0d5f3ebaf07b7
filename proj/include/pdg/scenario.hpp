#pragma once

// Scenario files: one JSON document holding the vehicle, path limits,
// boundary conditions, solver settings and Monte Carlo dispersions.

#include <array>
#include <cstdint>
#include <string>

#include "pdg/scvx.hpp"

namespace pdg {

struct MonteCarloConfig {
  int trials = 100;
  int nodes = 10;                          // N used for every trial
  std::uint64_t seed = 1;
  double mass_spread = 0.1;                // m0 ~ U[(1 - a) m0, (1 + a) m0]
  Vec3 velocity_sigma = Vec3(7, 7, 4);     // m/s, added to the nominal v0
  std::array<double, 2> downrange{100.0, 600.0};   // x, m
  std::array<double, 2> crossrange{-200.0, 200.0}; // y, m
  std::array<double, 2> altitude{200.0, 700.0};    // z, m
  int max_attempts = 200;                  // position draws per trial
  double success_position_m = 10.0;
  double success_velocity_mps = 0.15;
  int threads = 0;                         // 0: hardware concurrency

  void validate() const;
};

struct Scenario {
  std::string name;
  GuidanceProblem problem;
  ScvxConfig scvx;
  MonteCarloConfig montecarlo;

  /// Copy of the problem with the line-of-sight constraint switched on or off.
  GuidanceProblem with_stc(bool on) const;
  /// Throws ConfigError naming the offending field.
  void validate() const;
};

/// Parses and validates a scenario. Unknown keys are rejected. `source` is
/// used in error messages only.
Scenario parse_scenario(const std::string& text, const std::string& source = "<string>");

/// Throws ConfigError if the file cannot be read or is invalid.
Scenario load_scenario(const std::string& path);

/// Serializes to the same schema that parse_scenario accepts.
std::string scenario_to_json(const Scenario& s);

}  // namespace pdg
