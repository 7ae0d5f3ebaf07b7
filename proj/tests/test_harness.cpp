#include <doctest.h>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pdg/campaign.hpp"
#include "pdg/errors.hpp"
#include "pdg/report.hpp"

using namespace pdg;
namespace si = state_index;

namespace {

constexpr double kDeg = M_PI / 180.0;

std::string nominal_path() { return std::string(PDG_DATA_DIR) + "/nominal.json"; }

std::string nominal_text() {
  std::ifstream f(nominal_path());
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// Replaces the first occurrence of `from`; fails the test if absent.
std::string edited(const std::string& from, const std::string& to) {
  std::string t = nominal_text();
  const auto pos = t.find(from);
  REQUIRE(pos != std::string::npos);
  return t.replace(pos, from.size(), to);
}

std::string config_error_field(const std::string& text) {
  try {
    parse_scenario(text);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "<no error>";
}

bool well_formed_xml(const std::string& s) {
  std::istringstream in(s);
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_xml(in, tree);
  } catch (const boost::property_tree::xml_parser_error&) {
    return false;
  }
  return tree.count("svg") == 1;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

// Vertical descent with the thrust held near vertical, for oracle checks.
GuidanceProblem vertical(double altitude, double sink_rate) {
  GuidanceProblem p = load_scenario(nominal_path()).problem;
  p.limits.theta_max = 1.0 * kDeg;
  p.limits.delta_max = 0.0;
  p.bc.r0_I = Vec3(0, 0, altitude);
  p.bc.v0_I = Vec3(0, 0, -sink_rate);
  return p;
}

Scenario small_campaign() {
  Scenario sc = load_scenario(nominal_path());
  sc.montecarlo.trials = 3;
  return sc;
}

}  // namespace

TEST_CASE("bundled scenario holds the lander parameters") {
  const Scenario sc = load_scenario(nominal_path());
  const GuidanceProblem& p = sc.problem;
  CHECK(p.vehicle.isp == 225.0);
  CHECK(p.vehicle.m_dry == 2100.0);
  CHECK(p.vehicle.J.isApprox(Vec3(5687.5, 5687.5, 6500.0).asDiagonal().toDenseMatrix()));
  CHECK(p.vehicle.r_u == Vec3(0, 0, -0.25));
  CHECK(p.vehicle.g_I == Vec3(0, 0, -1.62));
  CHECK(p.limits.gamma_max == doctest::Approx(80 * kDeg));
  CHECK(p.limits.theta_max == doctest::Approx(80 * kDeg));
  CHECK(p.limits.omega_max == doctest::Approx(28.6 * kDeg));
  CHECK(p.limits.u_min == 6000.0);
  CHECK(p.limits.u_max == 22500.0);
  CHECK(p.limits.delta_max == doctest::Approx(20 * kDeg));
  CHECK(p.bc.m0 == 3250.0);
  CHECK(p.bc.r0_I == Vec3(250, 0, 433));
  CHECK(p.bc.v0_I == Vec3(-30, 0, -15));
  CHECK(p.bc.rf_I == Vec3(0, 0, 30));
  CHECK(p.bc.vf_I == Vec3(0, 0, -1));
  CHECK_FALSE(p.limits.stc_enabled);
  CHECK(p.limits.rho_min == 200.0);
  CHECK(p.limits.rho_max == 450.0);
  CHECK(p.limits.xi_max == doctest::Approx(20 * kDeg));
  CHECK(p.limits.p_B.isApprox(Vec3(0.91, 0, -0.42) / std::hypot(0.91, 0.42)));
  CHECK(sc.scvx.N == 35);
  CHECK(sc.scvx.dx_tol == 0.01);
  CHECK(sc.montecarlo.nodes == 10);
  CHECK(sc.montecarlo.velocity_sigma == Vec3(7, 7, 4));
}

TEST_CASE("scenario errors name the field") {
  CHECK(config_error_field(edited("\"u_max_N\": 22500,", "")) == "limits.u_max_N");
  CHECK(config_error_field(edited("\"gamma_max_deg\": 80", "\"gamma_max_deg\": 95")) == "limits.gamma_max");
  CHECK(config_error_field(edited("\"m0_kg\": 3250", "\"m0_kg\": 2000")) == "boundary.m0");
  CHECK(config_error_field(edited("\"isp_s\": 225,", "\"isp_s\": 225, \"colour\": 1,")) == "vehicle.colour");
  CHECK(config_error_field(edited("\"nodes\": 35", "\"nodes\": 35.5")) == "scvx.nodes");
  CHECK(config_error_field(edited("\"r0_m\": [250, 0, 433]", "\"r0_m\": [250, 0]")) == "boundary.r0_m");
  CHECK(config_error_field(edited("\"r0_m\": [250, 0, 433]", "\"r0_m\": [2000, 0, 100]")) == "boundary.r0_I");
  CHECK(config_error_field(edited("\"dx_tol\": 0.01", "\"dx_tol\": 0.01, \"trust_region\": \"box\"")) ==
        "scvx.trust_region");
  CHECK(config_error_field(nominal_text()) == "<no error>");

  // syntax errors carry the line number
  const std::string broken = edited("\"isp_s\": 225,", "\"isp_s\": 225,,");
  try {
    parse_scenario(broken, "broken.json");
    FAIL("expected a parse error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("broken.json:4:") != std::string::npos);
  }
  CHECK_THROWS_AS(load_scenario("/nonexistent/scenario.json"), ConfigError);
}

TEST_CASE("scenario round trip") {
  const Scenario a = load_scenario(nominal_path());
  const Scenario b = parse_scenario(scenario_to_json(a));
  CHECK(scenario_to_json(b) == scenario_to_json(a));
  CHECK(b.problem.bc.r0_I == a.problem.bc.r0_I);
  CHECK(b.problem.limits.p_B.isApprox(a.problem.limits.p_B, 1e-15));
}

TEST_CASE("dispersion draws") {
  const Scenario sc = load_scenario(nominal_path());
  std::mt19937_64 rng(5);
  double lo = 1e9, hi = 0.0;
  Vec3 sum = Vec3::Zero(), sq = Vec3::Zero();
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const InitialConditions ic = sample_dispersion(rng, sc);
    lo = std::min(lo, ic.m0);
    hi = std::max(hi, ic.m0);
    const Vec3 dv = ic.v0_I - sc.problem.bc.v0_I;
    sum += dv;
    sq += dv.cwiseProduct(dv);
  }
  CHECK(lo >= 0.9 * 3250.0);
  CHECK(hi <= 1.1 * 3250.0);
  CHECK(lo < 0.91 * 3250.0);  // the whole range is used
  CHECK(hi > 1.09 * 3250.0);
  const Vec3 sd = (sq / n - (sum / n).cwiseProduct(sum / n)).cwiseSqrt();
  CHECK(sd.x() == doctest::Approx(7.0).epsilon(0.03));
  CHECK(sd.y() == doctest::Approx(7.0).epsilon(0.03));
  CHECK(sd.z() == doctest::Approx(4.0).epsilon(0.03));
}

TEST_CASE("point-mass oracle against stopping-distance bounds") {
  // Net deceleration is at most u_max / m_dry - g and at least about
  // u_min / m0 - g, so from a 15 m/s sink the stopping distance lies in
  // [12.3, 495] m.
  CHECK(point_mass_feasible(vertical(230.0, 15.0)));
  CHECK_FALSE(point_mass_feasible(vertical(38.0, 15.0)));
  CHECK_FALSE(point_mass_feasible(vertical(1030.0, 15.0)));
  const Scenario sc = load_scenario(nominal_path());
  CHECK(point_mass_feasible(sc.problem));
  GuidanceProblem light = sc.problem;
  light.bc.m0 = 2110.0;  // 10 kg of fuel is about 10 m/s of delta-v
  CHECK_FALSE(point_mass_feasible(light));
}

TEST_CASE("initial condition sampler") {
  const Scenario sc = load_scenario(nominal_path());
  const InitialConditions a = sample_initial_conditions(trial_seed(11, 4), sc);
  const InitialConditions b = sample_initial_conditions(trial_seed(11, 4), sc);
  CHECK(a.m0 == b.m0);
  CHECK(a.r0_I == b.r0_I);
  CHECK(a.v0_I == b.v0_I);
  CHECK(trial_seed(11, 4) != trial_seed(11, 5));
  CHECK(trial_seed(11, 4) != trial_seed(12, 4));

  // the mass and velocity come first in the stream
  std::mt19937_64 rng(trial_seed(11, 4));
  const InitialConditions d = sample_dispersion(rng, sc);
  CHECK(d.m0 == a.m0);
  CHECK(d.v0_I == a.v0_I);

  PointMassOracle finer;
  finer.nodes = 40;
  for (int id = 0; id < 8; ++id) {
    const InitialConditions ic = sample_initial_conditions(trial_seed(3, id), sc);
    CHECK(ic.r0_I.x() >= 100.0);
    CHECK(ic.r0_I.x() <= 600.0);
    CHECK(std::abs(ic.r0_I.y()) <= 200.0);
    CHECK(ic.r0_I.z() >= 200.0);
    CHECK(ic.r0_I.z() <= 700.0);
    GuidanceProblem p = sc.problem;
    p.bc.m0 = ic.m0;
    p.bc.r0_I = ic.r0_I;
    p.bc.v0_I = ic.v0_I;
    CHECK(point_mass_feasible(p, finer));
  }

  Scenario hopeless = sc;
  hopeless.montecarlo.downrange = {4000, 5000};
  hopeless.montecarlo.max_attempts = 3;
  CHECK_THROWS_AS(sample_initial_conditions(1, hopeless), SamplingFailure);
}

TEST_CASE("log-error statistics and percentiles") {
  const std::vector<double> e = {std::exp(1.0), std::exp(2.0), std::exp(3.0), 0.0};
  const LogStats s = log_stats(e);
  CHECK(s.count == 3);
  CHECK(s.mu == doctest::Approx(2.0));
  CHECK(s.sigma == doctest::Approx(1.0));
  CHECK(s.geometric_mean() == doctest::Approx(std::exp(2.0)));
  CHECK(s.three_sigma() == doctest::Approx(std::exp(5.0)));
  CHECK(percentile({5, 1, 4, 2, 3}, 50) == 3);
  CHECK(percentile({5, 1, 4, 2, 3}, 100) == 5);
  CHECK(percentile({5, 1, 4, 2, 3}, 0) == 1);
  CHECK(percentile({}, 50) == 0);

  std::vector<TrialRecord> recs(4);
  recs[0].status = recs[1].status = recs[2].status = "converged";
  recs[3].status = "solver_failure";
  recs[0].success = recs[2].success = true;
  const CampaignSummary sum = summarize(recs);
  CHECK(sum.converged == 3);
  CHECK(sum.successes == 2);
  CHECK(sum.success_rate == doctest::Approx(0.5));
}

TEST_CASE("campaign results do not depend on the thread count") {
  const Scenario sc = small_campaign();
  const Campaign one = run_monte_carlo(sc, 3, 77, 1);
  const Campaign many = run_monte_carlo(sc, 3, 77, 3);
  REQUIRE(one.records.size() == 3);
  int flagged = 0;
  for (int i = 0; i < 3; ++i) {
    const TrialRecord& a = one.records[i];
    const TrialRecord& b = many.records[i];
    CHECK(a.id == i);
    CHECK(b.id == i);
    CHECK(a.seed == b.seed);
    CHECK(a.status == b.status);
    CHECK(a.ic.r0_I == b.ic.r0_I);
    CHECK(a.position_error_m == b.position_error_m);
    CHECK(a.final_mass_kg == b.final_mass_kg);
    CHECK(a.position_error_m >= 0.0);
    CHECK(a.velocity_error_mps >= 0.0);
    flagged += a.success;
  }
  CHECK(one.summary.success_rate == doctest::Approx(flagged / 3.0));
}

TEST_CASE("a trial without dispersion reproduces the nominal solve") {
  Scenario sc = load_scenario(nominal_path());
  sc.montecarlo.mass_spread = 0.0;
  sc.montecarlo.velocity_sigma.setZero();
  const Vec3 r0 = sc.problem.bc.r0_I;
  sc.montecarlo.downrange = {r0.x(), r0.x()};
  sc.montecarlo.crossrange = {r0.y(), r0.y()};
  sc.montecarlo.altitude = {r0.z(), r0.z()};
  const TrialRecord rec = run_trial(sc, 0, 99);
  REQUIRE(rec.status == "converged");
  CHECK(rec.ic.m0 == sc.problem.bc.m0);
  CHECK(rec.ic.r0_I == r0);
  CHECK(rec.ic.v0_I == sc.problem.bc.v0_I);

  ScvxConfig cfg = sc.scvx;
  cfg.N = sc.montecarlo.nodes;
  const ConvergedSolution sol = solve_guidance(sc.problem, cfg);
  CHECK(rec.iterations == sol.iterations);
  CHECK(rec.final_mass_kg == sol.iterate.X(cfg.N - 1, si::kMass));
  CHECK(rec.burn_time_s == sol.iterate.s);
  CHECK(rec.success);
}

TEST_CASE("case study and report files") {
  const Scenario sc = load_scenario(nominal_path());
  const CaseStudy cs = run_case_study(sc, 10);
  REQUIRE(cs.baseline.solution.status == ScvxStatus::Converged);
  REQUIRE(cs.constrained.solution.status == ScvxStatus::Converged);
  CHECK(cs.baseline.max_los_deg > 20.0);
  CHECK(cs.constrained.max_los_deg <= 20.0 + 0.1);

  for (const SolveOutcome* o : {&cs.baseline, &cs.constrained}) {
    // Each interval integrated from its node lands on the next node.
    const Iterate& it = o->solution.iterate;
    const ScalingSet scale = build_scaling(o->problem, it.s);
    const VehicleSystem sys(o->problem.vehicle);
    const double dt = it.s / (it.N() - 1);
    for (int i = 0; i + 1 < it.N(); ++i) {
      const MatX seg = propagate_nonlinear(sys, it.X.row(i).transpose(), it.U.middleRows(i, 2), dt, sc.scvx.substeps);
      const StateVector diff = (seg.row(1) - it.X.row(i + 1)).transpose();
      CHECK(diff.cwiseQuotient(scale.Px).cwiseAbs().maxCoeff() <= 1e-6);
    }
    // The single-shot curve accumulates those gaps.
    CHECK(o->node_gap <= 1e-5);
  }

  std::ostringstream a, b;
  write_trajectory_csv(a, cs.baseline);
  write_trajectory_csv(b, solve_problem(sc.with_stc(false), sc.scvx, 10));
  CHECK(a.str() == b.str());

  std::istringstream lines(a.str());
  std::string header, row;
  std::getline(lines, header);
  CHECK(split(header) == trajectory_columns());
  CHECK(trajectory_columns().size() == 24);
  CHECK(trajectory_columns().front() == "tau");
  CHECK(trajectory_columns()[22] == "los_deg");
  int rows = 0, dense_rows = 0;
  while (std::getline(lines, row)) {
    const auto cells = split(row);
    CHECK(cells.size() == 24);
    ++rows;
    dense_rows += cells.back() == "1";
  }
  CHECK(rows - dense_rows == 35);
  CHECK(dense_rows == 34 * 10 + 1);

  const auto dir = std::filesystem::temp_directory_path() / "pdg_report_test";
  std::filesystem::remove_all(dir);
  emit_case_study_reports(dir.string(), cs);
  for (const char* f : {"comparison.json", "los_comparison.svg", "baseline/trajectory.csv", "baseline/los.svg",
                        "constrained/summary.json", "constrained/thrust.svg"}) {
    CHECK(std::filesystem::exists(dir / f));
  }
  for (const auto& entry : std::filesystem::recursive_directory_iterator(dir)) {
    if (entry.path().extension() != ".svg") continue;
    std::ifstream f(entry.path());
    std::stringstream ss;
    ss << f.rdbuf();
    CHECK_MESSAGE(well_formed_xml(ss.str()), entry.path().string());
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("svg plots escape text and survive degenerate data") {
  SvgPlot p("a < b & c", "x", "y");
  p.line({0, 1}, {1, 1}, "red", "flat <line>");
  p.histogram({2, 2, 2}, 4, "blue");
  p.error_ellipse({1, 2, 3}, {1, 2, 3}, 3.0, "green");
  p.hline(0.5, "black");
  CHECK(well_formed_xml(p.render()));
  CHECK(well_formed_xml(SvgPlot("empty", "", "").render()));
}
