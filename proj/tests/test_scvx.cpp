#include <doctest.h>

#include <cmath>

#include "pdg/errors.hpp"
#include "pdg/scvx.hpp"
#include "test_support.hpp"

using namespace pdg;
namespace si = state_index;

namespace {

constexpr double kDeg = M_PI / 180.0;

GuidanceProblem lander(bool stc = false) {
  GuidanceProblem p;
  p.vehicle.isp = 225.0;
  p.vehicle.m_dry = 2100.0;
  p.vehicle.J = Vec3(5687.5, 5687.5, 6500.0).asDiagonal();
  p.vehicle.r_u = Vec3(0, 0, -0.25);
  p.vehicle.g_I = Vec3(0, 0, -1.62);
  p.limits.gamma_max = 80 * kDeg;
  p.limits.theta_max = 80 * kDeg;
  p.limits.omega_max = 28.6 * kDeg;
  p.limits.u_min = 6000.0;
  p.limits.u_max = 22500.0;
  p.limits.delta_max = 20 * kDeg;
  p.limits.rho_min = 200.0;
  p.limits.rho_max = 450.0;
  p.limits.xi_max = 20 * kDeg;
  p.limits.p_B = Vec3(0.91, 0, -0.42).normalized();
  p.limits.stc_enabled = stc;
  p.bc.m0 = 3250.0;
  p.bc.r0_I = Vec3(250, 0, 433);
  p.bc.v0_I = Vec3(-30, 0, -15);
  p.bc.rf_I = Vec3(0, 0, 30);
  p.bc.vf_I = Vec3(0, 0, -1);
  return p;
}

Vec3 inertial_position(const StateVector& x) {
  return extract_position(DualQuaternion(Vec8(x.segment<8>(si::kPose)))).r_I;
}

Vec3 inertial_velocity(const StateVector& x) {
  return to_inertial(Quaternion(Vec4(x.segment<4>(si::kAttitude))), x.segment<3>(si::kVelocity));
}

// Cone program dimensions for the squared trust region with no STC and no
// rate rows, counted row by row from the formulation.
std::pair<int, int> expected_dimensions(int N) {
  const int node_vars = N * (kStateDim + kControlDim);
  const int builder_vars = node_vars + 1 + 2 * (N - 1) * kStateDim + 2 * N;
  const int per_node_slacks = 22 + (5 + 3 + 6) + (4 + 1 + 4);
  const int slacks = 1 + N * per_node_slacks + 1;
  const int equalities = (N - 1) * kStateDim + N + 2 * (N - 2) + 13 + 16;
  return {builder_vars + slacks, equalities + slacks};
}

struct Setup {
  GuidanceProblem prob;
  ScvxConfig cfg;
  Iterate ref;
  ScalingSet sc;
  std::vector<DiscreteLtvNode> ltv;
  VecX w;
};

Setup setup_at(const Iterate& ref, const GuidanceProblem& prob, const ScvxConfig& cfg) {
  Setup s{prob, cfg, ref, build_scaling(prob, ref.s), {}, {}};
  s.ltv = discretize(VehicleSystem(prob.vehicle), ref.reference(), cfg.substeps, s.sc.Px);
  VecX d(s.ltv.size());
  for (size_t i = 0; i < s.ltv.size(); ++i) d(static_cast<Eigen::Index>(i)) = s.ltv[i].defect;
  s.ref.defects = d;
  s.w = update_trust_weights(d, cfg.defect_floor);
  return s;
}

}  // namespace

TEST_CASE("trust weights follow the defects and cap at the floor") {
  const double floor = 1e-4;
  VecX d(4);
  d << 10 * floor, 0.0, 0.5, 2 * floor;
  const VecX w = update_trust_weights(d, floor);
  REQUIRE(w.size() == 5);
  CHECK(w(0) == doctest::Approx(1.0 / (10 * floor)));
  CHECK(w(1) == doctest::Approx(1.0 / floor));
  CHECK(w(2) == doctest::Approx(2.0));
  CHECK(w(4) == w(3));
  // smaller defect, larger weight
  VecX sweep = VecX::LinSpaced(50, 1e-6, 1.0);
  const VecX ws = update_trust_weights(sweep, floor);
  for (int i = 1; i < 50; ++i) CHECK(ws(i) <= ws(i - 1));
}

TEST_CASE("scaling matrices for the lander scenario") {
  const GuidanceProblem p = lander();
  const ScalingSet sc = build_scaling(p, 20.0);
  CHECK(sc.Px(si::kMass) == 3250.0);
  const double half_range = 0.5 * std::sqrt(250.0 * 250.0 + 433.0 * 433.0);
  for (int k = 0; k < 4; ++k) {
    CHECK(sc.Px(si::kAttitude + k) == 1.0);
    CHECK(sc.Px(si::kDualPart + k) == doctest::Approx(half_range).epsilon(1e-12));
    CHECK(sc.Px(si::kOmega + k) == doctest::Approx(28.6 * kDeg));
    CHECK(sc.Px(si::kVelocity + k) == doctest::Approx(std::sqrt(30.0 * 30.0 + 15.0 * 15.0)));
  }
  CHECK(sc.Pu == 22500.0);
  CHECK(sc.pt == 20.0);

  const Iterate g = initial_guess(p, 35);
  const StateVector x0 = g.X.row(0).transpose();
  CHECK(x0.cwiseQuotient(sc.Px).cwiseAbs().maxCoeff() <= 1.0 + 1e-12);

  GuidanceProblem at_origin = p;
  at_origin.bc.v0_I.setZero();
  CHECK(build_scaling(at_origin, 1.0).Px(si::kVelocity) == 1.0);
}

TEST_CASE("initial guess matches the boundary conditions") {
  const GuidanceProblem p = lander();
  const int N = 35;
  const Iterate g = initial_guess(p, N);
  REQUIRE(g.N() == N);
  const StateVector x0 = g.X.row(0).transpose();
  const StateVector xf = g.X.row(N - 1).transpose();
  CHECK(x0(si::kMass) == p.bc.m0);
  CHECK(testing::max_abs(inertial_position(x0) - p.bc.r0_I) < 1e-12);
  CHECK(testing::max_abs(inertial_velocity(x0) - p.bc.v0_I) < 1e-12);
  CHECK(testing::max_abs(inertial_position(xf) - p.bc.rf_I) < 1e-12);
  CHECK(testing::max_abs(inertial_velocity(xf) - p.bc.vf_I) < 1e-12);
  CHECK(xf(si::kMass) == doctest::Approx(0.9 * p.bc.m0));
  for (int i = 0; i < N; ++i) {
    const double u = g.U.row(i).norm();
    CHECK(u >= 0.0);
    CHECK(u <= p.limits.u_max + 1e-9);
  }
  CHECK(g.s >= 1.0);
  CHECK(g.s <= 100.0);

  const Setup s = setup_at(g, p, ScvxConfig{});
  CHECK(s.ref.defects.maxCoeff() > 1e-3);
}

TEST_CASE("convergence test is strict and works in scaled units") {
  const GuidanceProblem p = lander();
  const ScalingSet sc = build_scaling(p, 20.0);
  const Iterate g = initial_guess(p, 10);
  CHECK(converged(g.X, g.X, sc, 1e-12));

  const double tol = 0.01;
  MatX X = g.X;
  X(3, si::kMass) += tol * sc.Px(si::kMass);
  CHECK(scaled_state_change(X, g.X, sc) == doctest::Approx(tol).epsilon(1e-9));
  X(3, si::kMass) = g.X(3, si::kMass) + tol * sc.Px(si::kMass) * (1 + 1e-9);
  CHECK_FALSE(converged(X, g.X, sc, tol));
  X(3, si::kMass) = g.X(3, si::kMass) + 0.5 * tol * sc.Px(si::kMass);
  CHECK(converged(X, g.X, sc, tol));

  // 1 rad/s on a rate and a 1 m shift of the dual part are not the same size
  MatX Xw = g.X, Xr = g.X;
  Xw(2, si::kOmega) += 1.0;
  Xr(2, si::kDualPart) += 1.0;
  CHECK(scaled_state_change(Xw, g.X, sc) == doctest::Approx(1.0 / sc.Px(si::kOmega)));
  CHECK(scaled_state_change(Xr, g.X, sc) == doctest::Approx(1.0 / sc.Px(si::kDualPart)));
  CHECK(scaled_state_change(Xw, g.X, sc) > 100 * scaled_state_change(Xr, g.X, sc));
}

TEST_CASE("pose projection keeps positions and restores the unit manifold") {
  std::mt19937_64 rng(3);
  MatX X = MatX::Zero(20, kStateDim);
  std::vector<Vec3> r(20);
  for (int i = 0; i < 20; ++i) {
    const DualQuaternion dq = testing::random_unit_pose(rng);
    r[i] = extract_position(dq).r_I;
    const double k = 1.0 + 0.01 * (i - 10);
    X.row(i).segment<8>(si::kPose) = (k * dq.vector()).transpose();
  }
  project_poses(X);
  for (int i = 0; i < 20; ++i) {
    const DualQuaternion dq(Vec8(X.row(i).segment<8>(si::kPose).transpose()));
    CHECK(dq.is_unit(1e-12));
    CHECK(testing::max_abs(extract_position(dq).r_I - r[i]) < 1e-9);
  }
  MatX bad = MatX::Zero(1, kStateDim);
  CHECK_THROWS_AS(project_poses(bad), InvalidState);
}

TEST_CASE("subproblem dimensions follow the row count") {
  const GuidanceProblem p = lander();
  for (int N : {3, 10, 35}) {
    const Setup s = setup_at(initial_guess(p, N), p, ScvxConfig{});
    const ConeProgram prog = build_subproblem(s.ref, s.ltv, s.w, s.sc, p, s.cfg).builder.build();
    const auto [n, m] = expected_dimensions(N);
    CHECK(prog.n() == n);
    CHECK(prog.m() == m);
  }
}

TEST_CASE("virtual control removes artificial infeasibility") {
  const GuidanceProblem p = lander();
  const Setup s = setup_at(initial_guess(p, 10), p, ScvxConfig{});
  const Subproblem with = build_subproblem(s.ref, s.ltv, s.w, s.sc, p, s.cfg, true);
  const Subproblem without = build_subproblem(s.ref, s.ltv, s.w, s.sc, p, s.cfg, false);
  CHECK(solve(with.builder.build()).status == SolverStatus::Optimal);
  CHECK(solve(without.builder.build()).status == SolverStatus::PrimalInfeasible);
}

TEST_CASE("baseline lander converges and re-solving at the solution is stationary") {
  const GuidanceProblem p = lander();
  ScvxConfig cfg;
  const ConvergedSolution sol = solve_guidance(p, cfg);
  REQUIRE(sol.status == ScvxStatus::Converged);
  CHECK(sol.iterations <= 30);
  const Iterate& it = sol.iterate;
  CHECK(it.X(cfg.N - 1, si::kMass) > p.vehicle.m_dry);
  CHECK(evaluate_violations(it.X, it.U, p.limits).max() <= 1e-6);
  CHECK(it.defects.maxCoeff() <= 1e-6);
  CHECK(it.defects.sum() <= sol.history.front().total_defect);
  for (const IterationRecord& r : sol.history) CHECK(r.max_scaled_state <= 2.0);

  // Open-loop: the converged controls through the nonlinear dynamics.
  const VehicleSystem sys(p.vehicle);
  const MatX Xp = propagate_nonlinear(sys, it.X.row(0).transpose(), it.U, it.s, cfg.substeps);
  const StateVector xf = Xp.row(cfg.N - 1).transpose();
  CHECK((inertial_position(xf) - p.bc.rf_I).norm() <= 10.0);
  CHECK((inertial_velocity(xf) - p.bc.vf_I).norm() <= 0.15);

  // Linearizing about the converged iterate gives back the same trajectory
  // with no trust-region or virtual-control cost.
  Setup s = setup_at(it, p, cfg);
  const Subproblem sub = build_subproblem(s.ref, s.ltv, s.w, s.sc, p, cfg);
  const SolverSolution ss = solve(sub.builder.build(), cfg.solver);
  REQUIRE(ss.primal_residual < 1e-6);
  const Iterate again = extract_iterate(sub, sub.builder.values(ss.x), s.sc, s.w, p, cfg);
  CHECK(again.eta.lpNorm<1>() < 1e-6);
  CHECK(again.nu.lpNorm<1>() < 1e-6);
  CHECK(ss.objective == doctest::Approx(-again.X(cfg.N - 1, si::kMass) / p.bc.m0).epsilon(1e-6));
  CHECK(scaled_state_change(again.X, it.X, s.sc) < cfg.dx_tol);
}

TEST_CASE("line-of-sight case keeps the landing site in view inside the band") {
  const GuidanceProblem p = lander(true);
  const ConvergedSolution sol = solve_guidance(p, ScvxConfig{});
  REQUIRE(sol.status == ScvxStatus::Converged);
  const ConstraintViolation v = evaluate_violations(sol.iterate.X, sol.iterate.U, p.limits);
  CHECK(v.max() <= 1e-6);
  CHECK(v.los_deg <= 20.0 + 0.1);
}

TEST_CASE("configuration and scenario validation") {
  ScvxConfig c;
  c.N = 1;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = ScvxConfig{};
  c.w_vc = 0.0;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  GuidanceProblem p = lander();
  p.bc.m0 = 2000.0;
  CHECK_THROWS_AS(p.validate(), InvalidArgument);
  p = lander();
  p.bc.r0_I = Vec3(1000, 0, 10);
  CHECK_THROWS_AS(p.validate(), InvalidArgument);
  CHECK_THROWS_AS(initial_guess(lander(), 1), InvalidArgument);
}
