#pragma once

// Dispersed initial conditions for Monte Carlo campaigns. Positions are drawn
// from a box and accepted only if a three degree-of-freedom point-mass
// relaxation of the landing problem is feasible.

#include <cstdint>
#include <random>
#include <vector>

#include "pdg/scenario.hpp"

namespace pdg {

struct InitialConditions {
  double m0 = 0.0;
  Vec3 r0_I = Vec3::Zero();
  Vec3 v0_I = Vec3::Zero();
  int attempts = 0;  // position draws used
};

struct PointMassOracle {
  int nodes = 20;
  /// Candidate burn times; the oracle accepts if any of them is feasible.
  std::vector<double> tf_grid_s = {15, 20, 25, 30, 35, 40, 45, 50, 55, 60, 70, 80};
};

/// True iff the point-mass relaxation (mass depletion, thrust magnitude in
/// [u_min, u_max], thrust inside the tilt plus gimbal cone, approach cone,
/// final mass >= m_dry) admits a trajectory from (m0, r0, v0) to the target
/// for some burn time on the grid. Decided by solving small SOCPs.
bool point_mass_feasible(const GuidanceProblem& prob, const PointMassOracle& oracle = {});

/// Mass and velocity part of a draw; consumes the stream in the order used by
/// sample_initial_conditions (mass, then velocity x, y, z).
InitialConditions sample_dispersion(std::mt19937_64& rng, const Scenario& nominal);

/// Seed of trial `id`'s private stream, derived from the campaign seed.
std::uint64_t trial_seed(std::uint64_t master, int id);

/// Deterministic in `seed`. Mass is uniform in (1 +- mass_spread) m0,
/// velocity is the nominal plus per-axis Gaussian noise, position is drawn
/// from the box until the oracle accepts. Throws SamplingFailure after
/// `max_attempts` rejected positions.
InitialConditions sample_initial_conditions(std::uint64_t seed, const Scenario& nominal,
                                            const PointMassOracle& oracle = {});

}  // namespace pdg
