#pragma once

// Single solves, the line-of-sight case study, Monte Carlo campaigns and
// parameter sweeps built on the guidance solver.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pdg/sampler.hpp"
#include "pdg/scenario.hpp"

namespace pdg {

struct OpenLoopError {
  double position_m = 0.0;
  double velocity_mps = 0.0;
};

/// Integrates the converged controls once through the nonlinear dynamics from
/// the first node and compares the final position and velocity with the target.
OpenLoopError open_loop_error(const GuidanceProblem& prob, const Iterate& it, int substeps);

/// Worst angle (deg) between the sensor axis and the landing-site direction
/// over nodes whose slant range lies in [rho_min, rho_max]; 0 if none does.
/// Evaluated whether or not the constraint is enabled.
double max_los_in_band(const MatX& X, const ConstraintParams& p);

struct SolveOutcome {
  GuidanceProblem problem;
  ScvxConfig config;
  ConvergedSolution solution;
  MatX dense;                  // ((N - 1) * dense_per_interval + 1) x 17
  int dense_per_interval = 0;
  OpenLoopError open_loop;
  double max_los_deg = 0.0;    // in the trigger band
  double node_gap = 0.0;       // max scaled |dense - node| at the nodes
  double wall_ms = 0.0;
};

/// Solves one problem and propagates it densely for plotting. Solver and
/// propagation exceptions are passed through.
SolveOutcome solve_problem(const GuidanceProblem& prob, const ScvxConfig& cfg, int dense_per_interval = 20);

struct CaseStudy {
  SolveOutcome baseline;
  SolveOutcome constrained;
  double xi_max_deg = 0.0;
};

/// Solves the scenario with the line-of-sight constraint off and on.
CaseStudy run_case_study(const Scenario& sc, int dense_per_interval = 20);

struct TrialRecord {
  int id = 0;
  std::uint64_t seed = 0;
  InitialConditions ic;
  std::string status;      // converged, max_iterations, solver_failure, propagation_failure, sampling_failure, error
  std::string message;
  bool success = false;
  double position_error_m = 0.0;
  double velocity_error_mps = 0.0;
  double burn_time_s = 0.0;
  double final_mass_kg = 0.0;
  int iterations = 0;
  double mean_step_ms = 0.0;  // per SCvx iteration
  double total_ms = 0.0;
};

/// Statistics of log errors (errors are modeled as lognormal).
struct LogStats {
  int count = 0;
  double mu = 0.0;     // mean of ln e
  double sigma = 0.0;  // sample standard deviation of ln e
  double geometric_mean() const;
  /// exp(mu + 3 sigma)
  double three_sigma() const;
};

/// Nonzero errors only; zeros are skipped.
LogStats log_stats(const std::vector<double>& errors);

/// Nearest-rank percentile, q in [0, 100]. Empty input gives 0.
double percentile(std::vector<double> v, double q);

struct CampaignSummary {
  int trials = 0;
  int converged = 0;
  int successes = 0;
  double success_rate = 0.0;
  double mean_iterations = 0.0;  // over converged trials
  LogStats position;             // over converged trials
  LogStats velocity;
  double ms_mean = 0.0, ms_p50 = 0.0, ms_p90 = 0.0, ms_p99 = 0.0, ms_max = 0.0;
  double wall_s = 0.0;
};

CampaignSummary summarize(const std::vector<TrialRecord>& records);

/// One trial: sample, solve with N = montecarlo.nodes, score open loop.
/// Never throws; failures are recorded in the status.
TrialRecord run_trial(const Scenario& sc, int id, std::uint64_t master_seed);

struct Campaign {
  std::vector<TrialRecord> records;  // sorted by id
  CampaignSummary summary;
};

/// Trials are claimed dynamically by `threads` workers (0: hardware
/// concurrency). Every trial draws from its own stream, so results do not
/// depend on the thread count. `progress` is called after each trial from
/// the worker that ran it.
Campaign run_monte_carlo(const Scenario& sc, int trials, std::uint64_t seed, int threads = 0,
                         const std::function<void(const TrialRecord&)>& progress = {});

struct SweepCell {
  int nodes = 0;
  double dx_tol = 0.0;
  CampaignSummary summary;
};

/// A campaign for every (N, dx_tol) pair with the same seed.
std::vector<SweepCell> run_sweep(const Scenario& sc, const std::vector<int>& nodes, const std::vector<double>& tols,
                                 int trials, std::uint64_t seed, int threads = 0);

}  // namespace pdg
