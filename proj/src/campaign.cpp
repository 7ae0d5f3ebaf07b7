#include "pdg/campaign.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <thread>

#include <spdlog/spdlog.h>

#include "pdg/errors.hpp"

namespace pdg {

namespace si = state_index;

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

Vec3 position_of(const StateVector& x) {
  return extract_position(DualQuaternion(Vec8(x.segment<8>(si::kPose)))).r_I;
}

Vec3 velocity_of(const StateVector& x) {
  return to_inertial(Quaternion(Vec4(x.segment<4>(si::kAttitude))), x.segment<3>(si::kVelocity));
}

}  // namespace

OpenLoopError open_loop_error(const GuidanceProblem& prob, const Iterate& it, int substeps) {
  const VehicleSystem sys(prob.vehicle);
  const MatX X = propagate_nonlinear(sys, it.X.row(0).transpose(), it.U, it.s, substeps);
  const StateVector xf = X.row(X.rows() - 1).transpose();
  return {(position_of(xf) - prob.bc.rf_I).norm(), (velocity_of(xf) - prob.bc.vf_I).norm()};
}

double max_los_in_band(const MatX& X, const ConstraintParams& p) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const StateVector x = X.row(i).transpose();
    const Vec3 r = position_of(x);
    const double rho = r.norm();
    if (rho < p.rho_min || rho > p.rho_max) continue;
    const Vec3 to_site_B = to_body(Quaternion(Vec4(x.segment<4>(si::kAttitude))), -r) / rho;
    const double c = std::clamp(p.p_B.normalized().dot(to_site_B), -1.0, 1.0);
    worst = std::max(worst, std::acos(c) * 180.0 / M_PI);
  }
  return worst;
}

SolveOutcome solve_problem(const GuidanceProblem& prob, const ScvxConfig& cfg, int dense_per_interval) {
  const auto t0 = Clock::now();
  SolveOutcome out;
  out.problem = prob;
  out.config = cfg;
  out.solution = solve_guidance(prob, cfg);
  out.wall_ms = ms_since(t0);
  const Iterate& it = out.solution.iterate;
  out.open_loop = open_loop_error(prob, it, cfg.substeps);
  out.max_los_deg = max_los_in_band(it.X, prob.limits);
  if (dense_per_interval > 0) {
    out.dense_per_interval = dense_per_interval;
    out.dense = propagate_dense(VehicleSystem(prob.vehicle), it.X.row(0).transpose(), it.U, it.s, cfg.substeps,
                                dense_per_interval);
    const ScalingSet sc = build_scaling(prob, it.s);
    for (int i = 0; i < it.N(); ++i) {
      const StateVector d = (out.dense.row(i * dense_per_interval) - it.X.row(i)).transpose();
      out.node_gap = std::max(out.node_gap, d.cwiseQuotient(sc.Px).cwiseAbs().maxCoeff());
    }
  }
  return out;
}

CaseStudy run_case_study(const Scenario& sc, int dense_per_interval) {
  CaseStudy cs;
  cs.xi_max_deg = sc.problem.limits.xi_max * 180.0 / M_PI;
  spdlog::info("case study: baseline");
  cs.baseline = solve_problem(sc.with_stc(false), sc.scvx, dense_per_interval);
  spdlog::info("case study: line-of-sight constrained");
  cs.constrained = solve_problem(sc.with_stc(true), sc.scvx, dense_per_interval);
  return cs;
}

double LogStats::geometric_mean() const { return std::exp(mu); }
double LogStats::three_sigma() const { return std::exp(mu + 3.0 * sigma); }

LogStats log_stats(const std::vector<double>& errors) {
  LogStats s;
  std::vector<double> logs;
  for (double e : errors) {
    if (e > 0.0) logs.push_back(std::log(e));
  }
  s.count = static_cast<int>(logs.size());
  if (logs.empty()) return s;
  double sum = 0.0;
  for (double l : logs) sum += l;
  s.mu = sum / s.count;
  if (s.count > 1) {
    double ss = 0.0;
    for (double l : logs) ss += (l - s.mu) * (l - s.mu);
    s.sigma = std::sqrt(ss / (s.count - 1));
  }
  return s;
}

double percentile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const double rank = std::ceil(std::clamp(q, 0.0, 100.0) / 100.0 * static_cast<double>(v.size()));
  const auto idx = static_cast<std::size_t>(std::max(1.0, rank)) - 1;
  return v[idx];
}

CampaignSummary summarize(const std::vector<TrialRecord>& records) {
  CampaignSummary s;
  s.trials = static_cast<int>(records.size());
  std::vector<double> pos, vel, ms;
  double iters = 0.0;
  for (const TrialRecord& r : records) {
    if (r.success) ++s.successes;
    if (r.status != "converged") continue;
    ++s.converged;
    iters += r.iterations;
    pos.push_back(r.position_error_m);
    vel.push_back(r.velocity_error_mps);
    ms.push_back(r.total_ms);
  }
  s.success_rate = s.trials > 0 ? static_cast<double>(s.successes) / s.trials : 0.0;
  s.mean_iterations = s.converged > 0 ? iters / s.converged : 0.0;
  s.position = log_stats(pos);
  s.velocity = log_stats(vel);
  if (!ms.empty()) {
    double total = 0.0;
    for (double m : ms) total += m;
    s.ms_mean = total / static_cast<double>(ms.size());
    s.ms_p50 = percentile(ms, 50);
    s.ms_p90 = percentile(ms, 90);
    s.ms_p99 = percentile(ms, 99);
    s.ms_max = *std::max_element(ms.begin(), ms.end());
  }
  return s;
}

TrialRecord run_trial(const Scenario& sc, int id, std::uint64_t master_seed) {
  TrialRecord rec;
  rec.id = id;
  rec.seed = trial_seed(master_seed, id);
  try {
    rec.ic = sample_initial_conditions(rec.seed, sc);
  } catch (const SamplingFailure& e) {
    rec.status = "sampling_failure";
    rec.message = e.what();
    return rec;
  }

  GuidanceProblem prob = sc.problem;
  prob.bc.m0 = rec.ic.m0;
  prob.bc.r0_I = rec.ic.r0_I;
  prob.bc.v0_I = rec.ic.v0_I;
  ScvxConfig cfg = sc.scvx;
  cfg.N = sc.montecarlo.nodes;
  cfg.dump_dir.clear();

  const auto t0 = Clock::now();
  try {
    const ConvergedSolution sol = solve_guidance(prob, cfg);
    rec.total_ms = ms_since(t0);
    rec.status = to_string(sol.status);
    rec.iterations = sol.iterations;
    rec.burn_time_s = sol.iterate.s;
    rec.final_mass_kg = sol.iterate.X(cfg.N - 1, si::kMass);
    rec.mean_step_ms = sol.iterations > 0 ? rec.total_ms / sol.iterations : 0.0;
    const OpenLoopError err = open_loop_error(prob, sol.iterate, cfg.substeps);
    rec.position_error_m = err.position_m;
    rec.velocity_error_mps = err.velocity_mps;
    rec.success = sol.status == ScvxStatus::Converged && err.position_m <= sc.montecarlo.success_position_m &&
                  err.velocity_mps <= sc.montecarlo.success_velocity_mps;
  } catch (const SolverFailure& e) {
    rec.status = "solver_failure";
    rec.message = e.what();
  } catch (const PropagationFailure& e) {
    rec.status = "propagation_failure";
    rec.message = e.what();
  } catch (const std::exception& e) {
    rec.status = "error";
    rec.message = e.what();
  }
  if (rec.total_ms == 0.0) rec.total_ms = ms_since(t0);
  return rec;
}

Campaign run_monte_carlo(const Scenario& sc, int trials, std::uint64_t seed, int threads,
                         const std::function<void(const TrialRecord&)>& progress) {
  if (trials < 1) throw InvalidArgument("trials: must be at least 1");
  const auto t0 = Clock::now();
  int workers = threads > 0 ? threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = std::min(workers, trials);

  Campaign out;
  out.records.resize(trials);
  std::atomic<int> next{0};
  std::mutex progress_mutex;
  auto work = [&] {
    for (int id = next++; id < trials; id = next++) {
      out.records[id] = run_trial(sc, id, seed);
      if (progress) {
        std::lock_guard lock(progress_mutex);
        progress(out.records[id]);
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  // records are indexed by id already
  out.summary = summarize(out.records);
  out.summary.wall_s = ms_since(t0) / 1000.0;
  return out;
}

std::vector<SweepCell> run_sweep(const Scenario& sc, const std::vector<int>& nodes, const std::vector<double>& tols,
                                 int trials, std::uint64_t seed, int threads) {
  std::vector<SweepCell> cells;
  for (int N : nodes) {
    for (double tol : tols) {
      Scenario cell = sc;
      cell.montecarlo.nodes = N;
      cell.scvx.dx_tol = tol;
      cell.validate();
      spdlog::info("sweep: N = {}, dx_tol = {}", N, tol);
      cells.push_back({N, tol, run_monte_carlo(cell, trials, seed, threads).summary});
    }
  }
  return cells;
}

}  // namespace pdg
