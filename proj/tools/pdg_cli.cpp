// Command-line driver: single solves, the line-of-sight case study, Monte
// Carlo campaigns and N / dx_tol sweeps.
//
// Exit codes: 0 success, 2 convergence failure, 3 I/O or configuration error.
// Log verbosity comes from PDG_LOG_LEVEL (spdlog syntax, e.g. "debug").

#include <cstdlib>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/cfg/helpers.h>
#include <spdlog/spdlog.h>

#include "pdg/campaign.hpp"
#include "pdg/errors.hpp"
#include "pdg/report.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kNotConverged = 2;
constexpr int kConfigError = 3;

struct Options {
  std::string config;
  std::string out;
  bool stc = false;
  int nodes = 0;
  double tol = 0.0;
  int dense = 20;
  int trials = 0;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = -1;
  std::vector<int> sweep_nodes;
  std::vector<double> sweep_tols;
};

void configure_logging() {
  spdlog::set_level(spdlog::level::info);
  if (const char* env = std::getenv("PDG_LOG_LEVEL")) spdlog::cfg::helpers::load_levels(env);
}

pdg::Scenario load(const Options& o) {
  pdg::Scenario sc = pdg::load_scenario(o.config);
  if (o.nodes > 0) sc.scvx.N = o.nodes;
  if (o.tol > 0.0) sc.scvx.dx_tol = o.tol;
  sc.validate();
  return sc;
}

int run_solve(const Options& o) {
  const pdg::Scenario sc = load(o);
  const pdg::SolveOutcome out = pdg::solve_problem(sc.with_stc(o.stc || sc.problem.limits.stc_enabled), sc.scvx, o.dense);
  pdg::emit_solve_reports(o.out, out);
  const auto& sol = out.solution;
  spdlog::info("{} after {} iterations: final mass {:.2f} kg, burn {:.2f} s, open-loop error {:.3g} m / {:.3g} m/s",
               pdg::to_string(sol.status), sol.iterations, sol.iterate.X(sol.iterate.N() - 1, 0), sol.iterate.s,
               out.open_loop.position_m, out.open_loop.velocity_mps);
  return sol.status == pdg::ScvxStatus::Converged ? kOk : kNotConverged;
}

int run_casestudy(const Options& o) {
  const pdg::Scenario sc = load(o);
  const pdg::CaseStudy cs = pdg::run_case_study(sc, o.dense);
  pdg::emit_case_study_reports(o.out, cs);
  spdlog::info("worst line-of-sight angle in band: baseline {:.2f} deg, constrained {:.2f} deg (limit {:.1f})",
               cs.baseline.max_los_deg, cs.constrained.max_los_deg, cs.xi_max_deg);
  const bool ok = cs.baseline.solution.status == pdg::ScvxStatus::Converged &&
                  cs.constrained.solution.status == pdg::ScvxStatus::Converged;
  return ok ? kOk : kNotConverged;
}

int run_montecarlo(const Options& o) {
  pdg::Scenario sc = load(o);
  if (o.nodes > 0) sc.montecarlo.nodes = o.nodes;
  const int trials = o.trials > 0 ? o.trials : sc.montecarlo.trials;
  const std::uint64_t seed = o.seed_set ? o.seed : sc.montecarlo.seed;
  const int threads = o.threads >= 0 ? o.threads : sc.montecarlo.threads;
  const pdg::Campaign c = pdg::run_monte_carlo(sc, trials, seed, threads, [](const pdg::TrialRecord& r) {
    spdlog::info("trial {:4d}: {} ({} iterations, {:.3g} m, {:.3g} m/s){}", r.id, r.status, r.iterations,
                 r.position_error_m, r.velocity_error_mps, r.success ? "" : " unsuccessful");
  });
  pdg::emit_campaign_reports(o.out, c, seed);
  const auto& s = c.summary;
  spdlog::info("{} / {} successful ({:.1f}%), {} converged, mean solve {:.0f} ms, p99 {:.0f} ms", s.successes,
               s.trials, 100.0 * s.success_rate, s.converged, s.ms_mean, s.ms_p99);
  return kOk;
}

int run_sweep(const Options& o) {
  const pdg::Scenario sc = load(o);
  const int trials = o.trials > 0 ? o.trials : sc.montecarlo.trials;
  const std::uint64_t seed = o.seed_set ? o.seed : sc.montecarlo.seed;
  const int threads = o.threads >= 0 ? o.threads : sc.montecarlo.threads;
  const auto cells = pdg::run_sweep(sc, o.sweep_nodes, o.sweep_tols, trials, seed, threads);
  std::ostringstream csv;
  pdg::write_sweep_csv(csv, cells);
  pdg::write_file(o.out, "sweep.csv", csv.str());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();
  CLI::App app{"6-DoF powered-descent guidance"};
  app.require_subcommand(1);
  Options o;

  auto common = [&o](CLI::App* cmd) {
    cmd->add_option("--config", o.config, "scenario JSON file")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", o.out, "output directory")->required();
  };
  auto campaign = [&o](CLI::App* cmd) {
    cmd->add_option("--trials", o.trials, "number of trials (default: from the scenario)")->check(CLI::PositiveNumber);
    cmd->add_option_function<std::uint64_t>(
        "--seed", [&o](std::uint64_t s) { o.seed = s, o.seed_set = true; }, "campaign seed");
    cmd->add_option("--threads", o.threads, "worker threads, 0 for all cores")->check(CLI::NonNegativeNumber);
  };

  CLI::App* solve = app.add_subcommand("solve", "solve one trajectory");
  common(solve);
  solve->add_flag("--stc", o.stc, "enable the line-of-sight constraint");
  solve->add_option("--nodes", o.nodes, "temporal nodes N")->check(CLI::Range(2, 1000));
  solve->add_option("--tol", o.tol, "convergence tolerance dx_tol")->check(CLI::PositiveNumber);
  solve->add_option("--dense", o.dense, "propagated samples per interval")->check(CLI::NonNegativeNumber);

  CLI::App* cs = app.add_subcommand("casestudy", "baseline and line-of-sight constrained solves");
  common(cs);
  cs->add_option("--dense", o.dense, "propagated samples per interval")->check(CLI::NonNegativeNumber);

  CLI::App* mc = app.add_subcommand("montecarlo", "dispersed open-loop campaign");
  common(mc);
  campaign(mc);
  mc->add_option("--nodes", o.nodes, "temporal nodes N per trial")->check(CLI::Range(2, 1000));

  CLI::App* sw = app.add_subcommand("sweep", "campaign for each N and dx_tol");
  common(sw);
  campaign(sw);
  sw->add_option("--node-grid", o.sweep_nodes, "values of N")->required()->delimiter(',');
  sw->add_option("--tol-grid", o.sweep_tols, "values of dx_tol")->required()->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  try {
    if (*solve) return run_solve(o);
    if (*cs) return run_casestudy(o);
    if (*mc) return run_montecarlo(o);
    return run_sweep(o);
  } catch (const pdg::ConfigError& e) {
    spdlog::error("{}", e.what());
    return kConfigError;
  } catch (const pdg::SolverFailure& e) {
    spdlog::error("{}", e.what());
    return kNotConverged;
  } catch (const pdg::PropagationFailure& e) {
    spdlog::error("{}", e.what());
    return kNotConverged;
  } catch (const pdg::Error& e) {
    spdlog::error("{}", e.what());
    return kConfigError;
  }
}
