// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
// Reference values come from oracles written here (Cartesian geometry, finite
// differences, matrix exponentials, hand-built RK4, constructed SOCP
// certificates), not from the library routines under test.

#include <unsupported/Eigen/MatrixFunctions>

#include <Eigen/Geometry>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <fmt/format.h>

#include "pdg/campaign.hpp"
#include "pdg/errors.hpp"

using namespace pdg;
namespace si = state_index;

namespace {

constexpr double kDeg = M_PI / 180.0;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

// ---------------------------------------------------------------- geometry oracles

// Hamilton product in (v, s) storage, written out component-wise.
Vec4 hamilton(const Vec4& a, const Vec4& b) {
  const Vec3 av = a.head<3>(), bv = b.head<3>();
  Vec4 out;
  out.head<3>() = a(3) * bv + b(3) * av + av.cross(bv);
  out(3) = a(3) * b(3) - av.dot(bv);
  return out;
}

// Body-to-inertial rotation matrix of a unit quaternion in (v, s) storage.
Mat3 rotation(const Vec4& q) { return Eigen::Quaterniond(q(3), q(0), q(1), q(2)).toRotationMatrix(); }

Vec8 make_pose(const Vec4& q, const Vec3& r_I) {
  Vec8 dq;
  dq.head<4>() = q;
  dq.tail<4>() = 0.5 * hamilton(Vec4(r_I.x(), r_I.y(), r_I.z(), 0.0), q);
  return dq;
}

Vec4 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  return Vec4(n(rng), n(rng), n(rng), n(rng)).normalized();
}

Vec3 random_vec(std::mt19937_64& rng, double scale) {
  std::normal_distribution<double> n(0.0, scale);
  return {n(rng), n(rng), n(rng)};
}

Vec3 node_position(const StateVector& x) {
  const Vec4 q1 = x.segment<4>(si::kAttitude);
  const Vec4 q2 = x.segment<4>(si::kDualPart);
  const Vec4 conj(-q1(0), -q1(1), -q1(2), q1(3));
  return 2.0 * hamilton(q2, conj).head<3>();
}

// ---------------------------------------------------------------- problem setup

GuidanceProblem lander(bool stc) {
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

ScvxConfig table_config() {
  ScvxConfig cfg;
  cfg.N = 35;
  cfg.dx_tol = 0.01;
  return cfg;
}

struct Solved {
  GuidanceProblem prob;
  ScvxConfig cfg;
  std::optional<ConvergedSolution> sol;
  std::string error;
  double seconds = 0.0;
};

Solved solve_case(bool stc) {
  Solved s{lander(stc), table_config(), std::nullopt, {}, 0.0};
  const auto t0 = Clock::now();
  try {
    s.sol = solve_guidance(s.prob, s.cfg);
  } catch (const std::exception& e) {
    s.error = e.what();
  }
  s.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return s;
}

const Solved& baseline() {
  static const Solved s = solve_case(false);
  return s;
}

const Solved& constrained() {
  static const Solved s = solve_case(true);
  return s;
}

// Integrates dx/dtau = s f(x, u(tau)) from node i to node i + 1 with linearly
// interpolated thrust, classical RK4, no manifold projection.
StateVector rk4_interval(const VehicleParams& veh, const Iterate& it, int i, int steps) {
  const double dtau = 1.0 / (it.N() - 1);
  const Vec3 u0 = it.U.row(i).transpose(), u1 = it.U.row(i + 1).transpose();
  auto rate = [&](const StateVector& x, double frac) {
    return StateVector(it.s * state_rate(x, Vec3((1.0 - frac) * u0 + frac * u1), veh));
  };
  StateVector x = it.X.row(i).transpose();
  const double h = dtau / steps;
  for (int k = 0; k < steps; ++k) {
    const double f0 = static_cast<double>(k) / steps, f1 = static_cast<double>(k + 1) / steps;
    const double fm = 0.5 * (f0 + f1);
    const StateVector k1 = rate(x, f0);
    const StateVector k2 = rate(StateVector(x + 0.5 * h * k1), fm);
    const StateVector k3 = rate(StateVector(x + 0.5 * h * k2), fm);
    const StateVector k4 = rate(StateVector(x + h * k3), f1);
    x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return x;
}

StateVector unit_scales(const GuidanceProblem& p, const Iterate& it) { return build_scaling(p, it.s).Px; }

double worst_interval_gap(const GuidanceProblem& p, const Iterate& it, const StateVector& scale) {
  double worst = 0.0;
  for (int i = 0; i + 1 < it.N(); ++i) {
    const StateVector d = rk4_interval(p.vehicle, it, i, 300) - it.X.row(i + 1).transpose();
    worst = std::max(worst, d.cwiseQuotient(scale).cwiseAbs().maxCoeff());
  }
  return worst;
}

// Worst normalized violation of the node path constraints, evaluated from
// Cartesian quantities.
double worst_path_violation(const GuidanceProblem& p, const Iterate& it) {
  const ConstraintParams& L = p.limits;
  double worst = 0.0;
  auto note = [&worst](double v) { worst = std::max(worst, v); };
  for (int i = 0; i < it.N(); ++i) {
    const StateVector x = it.X.row(i).transpose();
    const Vec4 q = x.segment<4>(si::kAttitude);
    const Vec3 r = node_position(x);
    const Vec3 u = it.U.row(i).transpose();
    const Mat3 R = rotation(q.normalized());
    note(std::abs(q.norm() - 1.0));
    note(std::abs(q.dot(x.segment<4>(si::kDualPart))) / std::max(1.0, r.norm()));
    note((r.norm() * std::cos(L.gamma_max) - r.z()) / std::max(1.0, r.norm()));
    note(std::cos(L.theta_max) - R(2, 2));
    note((x.segment<3>(si::kOmega).cwiseAbs().maxCoeff() - L.omega_max) / L.omega_max);
    note((u.norm() - L.u_max) / L.u_max);
    note((L.u_min - u.norm()) / L.u_min);
    note(std::cos(L.delta_max) - u.z() / u.norm());
    note((p.vehicle.m_dry - x(si::kMass)) / p.vehicle.m_dry);
  }
  return worst;
}

// Worst relative boundary-condition residual.
double worst_boundary_residual(const GuidanceProblem& p, const Iterate& it) {
  double worst = 0.0;
  auto note = [&worst](double v) { worst = std::max(worst, v); };
  const StateVector x0 = it.X.row(0).transpose(), xf = it.X.row(it.N() - 1).transpose();
  const Mat3 R0 = rotation(Vec4(x0.segment<4>(si::kAttitude)).normalized());
  const Mat3 Rf = rotation(Vec4(xf.segment<4>(si::kAttitude)).normalized());
  note(std::abs(x0(si::kMass) - p.bc.m0) / p.bc.m0);
  note((node_position(x0) - p.bc.r0_I).norm() / p.bc.r0_I.norm());
  note((R0 * x0.segment<3>(si::kVelocity) - p.bc.v0_I).norm() / p.bc.v0_I.norm());
  note((node_position(xf) - p.bc.rf_I).norm() / p.bc.r0_I.norm());
  note((Rf * xf.segment<3>(si::kVelocity) - p.bc.vf_I).norm() / p.bc.v0_I.norm());
  note((Rf - Mat3::Identity()).cwiseAbs().maxCoeff());
  note(x0.segment<3>(si::kOmega).norm());
  note(xf.segment<3>(si::kOmega).norm());
  return worst;
}

// Worst angle between the sensor axis and the landing-site direction over the
// nodes whose slant range lies in [rho_min, rho_max].
double worst_los_in_band(const GuidanceProblem& p, const MatX& X) {
  double worst = 0.0;
  for (int i = 0; i < X.rows(); ++i) {
    const StateVector x = X.row(i).transpose();
    const Vec3 r = node_position(x);
    const double rho = r.norm();
    if (rho < p.limits.rho_min || rho > p.limits.rho_max) continue;
    const Vec3 site_B = rotation(Vec4(x.segment<4>(si::kAttitude)).normalized()).transpose() * (-r / rho);
    worst = std::max(worst, std::acos(std::clamp(site_B.dot(p.limits.p_B.normalized()), -1.0, 1.0)) / kDeg);
  }
  return worst;
}

// ---------------------------------------------------------------- criteria

Outcome criterion_bilinear_forms() {
  std::mt19937_64 rng(101);
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const Vec4 q = random_unit(rng);
    const Vec3 r_I = random_vec(rng, 400.0);
    const Vec8 dq = make_pose(q, r_I);
    const Mat3 R = rotation(q);
    const Vec3 r_B = R.transpose() * r_I;
    const Vec3 a = random_vec(rng, 1.0), b_B = random_vec(rng, 1.0);
    worst = std::max(worst, std::abs(inertial_projection_form(a).evaluate(dq) - r_I.dot(a)));
    worst = std::max(worst, std::abs(body_projection_form(a).evaluate(dq) - r_B.dot(a)));
    worst = std::max(worst, std::abs(axis_alignment_form(a, b_B).evaluate(dq) - a.dot(R * b_B)));
    worst = std::max(worst, std::abs(2.0 * (dual_selector().m * dq).norm() - r_I.norm()));
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  return {worst <= 1e-10 && secs < 1.0, fmt::format("max abs error {:.2e} over 1000 poses, {:.3f} s", worst, secs)};
}

Outcome criterion_jacobians() {
  const VehicleParams veh = lander(false).vehicle;
  std::mt19937_64 rng(102);
  std::uniform_real_distribution<double> mass(2100.0, 3500.0);
  StateVector step;
  step << 3000.0, Vec4::Ones(), 150.0 * Vec4::Ones(), 0.5 * Vec4::Ones(), 30.0 * Vec4::Ones();
  step *= 1e-6;
  const auto t0 = Clock::now();
  double worst_rel = 0.0;
  int bad = 0, s_mismatch = 0;
  auto compare = [&](const StateVector& fd, const StateVector& an) {
    for (int i = 0; i < kStateDim; ++i) {
      const double err = std::abs(fd(i) - an(i));
      if (err <= 1e-7) continue;  // both effectively zero
      const double rel = err / std::abs(fd(i));
      worst_rel = std::max(worst_rel, rel);
      if (rel > 1e-5) ++bad;
    }
  };
  for (int k = 0; k < 100; ++k) {
    StateVector x;
    x(si::kMass) = mass(rng);
    x.segment<8>(si::kPose) = make_pose(random_unit(rng), random_vec(rng, 300.0));
    x.segment<4>(si::kOmega) << random_vec(rng, 0.3), 0.0;
    x.segment<4>(si::kVelocity) << random_vec(rng, 20.0), 0.0;
    const Vec3 u = random_vec(rng, 8000.0) + Vec3(0, 0, 12000.0);
    const double s = 40.0;
    const Linearization lin = linearize(s, x, u, veh);
    for (int j = 0; j < kStateDim; ++j) {
      StateVector xp = x, xm = x;
      xp(j) += step(j);
      xm(j) -= step(j);
      compare((dilated_rate(s, xp, u, veh) - dilated_rate(s, xm, u, veh)) / (2 * step(j)), lin.A.col(j));
    }
    for (int j = 0; j < kControlDim; ++j) {
      Vec3 up = u, um = u;
      up(j) += 0.02;
      um(j) -= 0.02;
      compare((dilated_rate(s, x, up, veh) - dilated_rate(s, x, um, veh)) / 0.04, lin.B.col(j));
    }
    if ((lin.S - state_rate(x, u, veh)).cwiseAbs().maxCoeff() != 0.0) ++s_mismatch;
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  return {bad == 0 && s_mismatch == 0 && secs < 5.0,
          fmt::format("{} entries over 1e-5 relative (worst {:.1e}), S != f at {} points, {:.2f} s", bad, worst_rel,
                      s_mismatch, secs)};
}

Outcome criterion_discretization() {
  // LTI: exponential of the augmented generator [sA sB 0; 0 0 I; 0 0 0].
  std::mt19937_64 rng(103);
  std::normal_distribution<double> g(0.0, 1.0);
  const int n = 4, m = 2, N = 11;
  MatX A(n, n), B(n, m);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) A(r, c) = g(rng);
    for (int c = 0; c < m; ++c) B(r, c) = g(rng);
  }
  ReferenceTrajectory ref;
  ref.s_bar = 1.7;
  ref.x_bar = MatX::Zero(N, n);
  ref.u_bar = MatX::Zero(N, m);
  for (int i = 0; i < N; ++i) {
    for (int c = 0; c < n; ++c) ref.x_bar(i, c) = g(rng);
    for (int c = 0; c < m; ++c) ref.u_bar(i, c) = g(rng);
  }
  const double d = ref.dtau();
  MatX M = MatX::Zero(n + 2 * m, n + 2 * m);
  M.block(0, 0, n, n) = ref.s_bar * A;
  M.block(0, n, n, m) = ref.s_bar * B;
  M.block(n, n + m, m, m) = MatX::Identity(m, m);
  const MatX E = (M * d).exp();
  const MatX Ad = E.block(0, 0, n, n);
  const MatX Bsum = E.block(0, n, n, m);  // B- + B+ = integral of Phi B
  const MatX Bp = E.block(0, n + m, n, m) / d;
  double lti = 0.0;
  const LinearSystem sys(A, B);
  for (int i = 0; i + 1 < N; ++i) {
    const DiscreteLtvNode node = discretize_interval(sys, ref, i);
    lti = std::max({lti, (node.A - Ad).cwiseAbs().maxCoeff(), (node.Bm + node.Bp - Bsum).cwiseAbs().maxCoeff(),
                    (node.Bp - Bp).cwiseAbs().maxCoeff()});
  }

  // Converged 6-DoF references: the discrete model built about the solution
  // reproduces each next node.
  double recon = 0.0;
  std::string missing;
  for (const Solved* s : {&baseline(), &constrained()}) {
    if (!s->sol) {
      missing = s->error;
      continue;
    }
    const Iterate& it = s->sol->iterate;
    const StateVector scale = unit_scales(s->prob, it);
    const auto ltv = discretize(VehicleSystem(s->prob.vehicle), it.reference());
    for (int i = 0; i + 1 < it.N(); ++i) {
      const DiscreteLtvNode& nd = ltv[i];
      const StateVector pred = nd.A * it.X.row(i).transpose() + nd.Bm * it.U.row(i).transpose() +
                               nd.Bp * it.U.row(i + 1).transpose() + nd.S * it.s + nd.R_quadrature;
      recon = std::max(recon, (pred - it.X.row(i + 1).transpose()).cwiseQuotient(scale).cwiseAbs().maxCoeff());
    }
  }
  if (!missing.empty()) return {false, "no converged reference: " + missing};
  return {lti <= 1e-9 && recon <= 1e-6,
          fmt::format("LTI max error {:.1e}; 6-DoF reconstruction max scaled error {:.1e}", lti, recon)};
}

Outcome criterion_stc_equivalence() {
  const ConstraintParams p = lander(true).limits;
  std::mt19937_64 rng(104);
  std::uniform_real_distribution<double> range(0.0, 650.0);
  int on = 0, counterexamples = 0;
  for (int k = 0; k < 10000; ++k) {
    const Vec4 q = random_unit(rng);
    const Vec3 r = random_vec(rng, 1.0).normalized() * range(rng);
    const double rho = r.norm();
    const bool triggered = rho > p.rho_min && rho < p.rho_max;
    const Vec3 site_B = rotation(q).transpose() * (-r / rho);
    const bool in_view = std::acos(std::clamp(site_B.dot(p.p_B), -1.0, 1.0)) <= p.xi_max;
    const double h = stc_compound_h(make_pose(q, r), p);
    on += triggered;
    if ((h <= 0.0) != (!triggered || in_view)) ++counterexamples;
    if (!triggered && h != 0.0) ++counterexamples;
  }
  return {counterexamples == 0 && on > 1000 && on < 9000,
          fmt::format("{} counterexamples in 10000 poses ({} triggered)", counterexamples, on)};
}

Outcome criterion_baseline() {
  const Solved& s = baseline();
  if (!s.sol) return {false, "solver error: " + s.error};
  const ConvergedSolution& sol = *s.sol;
  const Iterate& it = sol.iterate;
  const double mN = it.X(it.N() - 1, si::kMass);
  const double viol = std::max(worst_path_violation(s.prob, it), worst_boundary_residual(s.prob, it));
  const double gap = worst_interval_gap(s.prob, it, unit_scales(s.prob, it));
  const bool ok = sol.status == ScvxStatus::Converged && sol.iterations <= 30 && mN > s.prob.vehicle.m_dry &&
                  viol <= 1e-6 && gap <= 1e-6 && s.seconds <= 60.0;
  return {ok, fmt::format("{} in {} iterations, m_N {:.2f} kg, burn {:.2f} s, constraint violation {:.1e}, "
                          "interval propagation gap {:.1e} scaled, {:.2f} s",
                          to_string(sol.status), sol.iterations, mN, it.s, viol, gap, s.seconds)};
}

Outcome criterion_case_study() {
  const Solved& b = baseline();
  const Solved& c = constrained();
  if (!b.sol || !c.sol) return {false, "solver error: " + b.error + c.error};
  const double los_c = worst_los_in_band(c.prob, c.sol->iterate.X);
  const double los_b = worst_los_in_band(b.prob, b.sol->iterate.X);
  const double viol = worst_path_violation(c.prob, c.sol->iterate);
  const double bc = worst_boundary_residual(c.prob, c.sol->iterate);
  const bool ok = c.sol->status == ScvxStatus::Converged && los_c <= 20.0 + 0.1 && los_b > 20.0 && viol <= 1e-6;
  return {ok, fmt::format("constrained: {} in {} iterations, worst in-band LoS {:.3f} deg, m_N {:.2f} kg; "
                          "path constraint violation {:.1e}, boundary residual {:.1e}; baseline worst in-band LoS {:.2f} deg",
                          to_string(c.sol->status), c.sol->iterations, los_c,
                          c.sol->iterate.X(c.sol->iterate.N() - 1, si::kMass), viol, bc, los_b)};
}

std::optional<Campaign> g_campaign;
double g_campaign_seconds = 0.0;

Outcome criterion_monte_carlo() {
  Scenario sc = load_scenario(std::string(PDG_DATA_DIR) + "/nominal.json");
  const MonteCarloConfig& mc = sc.montecarlo;
  const bool setup = mc.trials == 100 && mc.nodes == 10 && sc.scvx.dx_tol == 0.01 && mc.mass_spread == 0.1 &&
                     mc.velocity_sigma == Vec3(7, 7, 4) && mc.success_position_m == 10.0 &&
                     mc.success_velocity_mps == 0.15;
  const auto t0 = Clock::now();
  g_campaign = run_monte_carlo(sc, mc.trials, mc.seed, 1);
  g_campaign_seconds = std::chrono::duration<double>(Clock::now() - t0).count();

  int successes = 0, inconsistent = 0;
  std::string failures;
  for (const TrialRecord& r : g_campaign->records) {
    const bool meets = r.status == "converged" && r.position_error_m <= 10.0 && r.velocity_error_mps <= 0.15;
    inconsistent += meets != r.success;
    successes += meets;
    if (!meets) failures += fmt::format(" #{}:{}", r.id, r.status);
  }
  const double rate = successes / 100.0;
  const bool ok = setup && inconsistent == 0 && rate >= 0.90 && g_campaign_seconds <= 900.0;
  return {ok, fmt::format("{}/100 successful ({:.0f}%), single thread {:.1f} s; unsuccessful:{}", successes,
                          100.0 * rate, g_campaign_seconds, failures.empty() ? " none" : failures)};
}

// Standard-form SOCP min c'x, Ax = b, x in K with a constructed strictly
// complementary primal-dual pair.
struct Certified {
  ConeProgram prog;
  double optimum = 0.0;
};

Certified random_certified(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> pos(0.2, 2.0), unit(0.0, 1.0);
  auto pick = [&rng](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  Certified c;
  ConeSpec& k = c.prog.cones;
  do {
    k.free = pick(0, 4);
    k.nonneg = pick(0, 12);
    k.soc.clear();
    for (int j = pick(0, 4); j > 0; --j) k.soc.push_back(pick(2, 7));
  } while (k.size() < 3 || k.size() > 45 || k.size() == k.free);
  const int n = k.size();
  VecX x = VecX::Zero(n), z = VecX::Zero(n);
  for (int i = 0; i < k.free; ++i) x(i) = g(rng);
  for (int i = k.free; i < k.free + k.nonneg; ++i) (unit(rng) < 0.5 ? x(i) : z(i)) = pos(rng);
  int off = k.free + k.nonneg;
  for (int q : k.soc) {
    VecX v(q - 1);
    for (int i = 0; i < q - 1; ++i) v(i) = g(rng);
    const double mode = unit(rng);
    if (mode < 0.33) {
      x(off) = v.norm() + pos(rng);
      x.segment(off + 1, q - 1) = v;
    } else if (mode < 0.66) {
      z(off) = v.norm() + pos(rng);
      z.segment(off + 1, q - 1) = v;
    } else {
      const double t = pos(rng);
      x(off) = v.norm();
      x.segment(off + 1, q - 1) = v;
      z(off) = t * v.norm();
      z.segment(off + 1, q - 1) = -t * v;
    }
    off += q;
  }
  const int m = pick(std::max(1, k.free), std::max(1, n - 1));
  MatX A(m, n);
  for (int r = 0; r < m; ++r) {
    for (int col = 0; col < n; ++col) A(r, col) = unit(rng) < 0.6 ? g(rng) : 0.0;
  }
  for (int col = 0; col < k.free; ++col) A(col, col) += 3.0;
  VecX y(m);
  for (int r = 0; r < m; ++r) y(r) = g(rng);
  c.prog.A = A.sparseView();
  c.prog.b = A * x;
  c.prog.c = A.transpose() * y + z;
  c.optimum = c.prog.c.dot(x);
  return c;
}

// Distance of v outside the cone (0 when inside).
double cone_violation(const ConeSpec& k, const VecX& v, bool dual) {
  double worst = 0.0;
  if (dual) {
    for (int i = 0; i < k.free; ++i) worst = std::max(worst, std::abs(v(i)));
  }
  for (int i = k.free; i < k.free + k.nonneg; ++i) worst = std::max(worst, -v(i));
  int off = k.free + k.nonneg;
  for (int q : k.soc) {
    worst = std::max(worst, v.segment(off + 1, q - 1).norm() - v(off));
    off += q;
  }
  return worst;
}

Outcome criterion_socp() {
  std::mt19937_64 rng(108);
  int not_optimal = 0, bad_objective = 0, bad_kkt = 0;
  double worst_obj = 0.0, worst_kkt = 0.0;
  for (int t = 0; t < 200; ++t) {
    const Certified cp = random_certified(rng);
    const SolverSolution sol = solve(cp.prog);
    if (sol.status != SolverStatus::Optimal) {
      ++not_optimal;
      continue;
    }
    const ConeProgram& P = cp.prog;
    const double obj = P.c.dot(sol.x);
    const double rel = std::abs(obj - cp.optimum) / std::max(1.0, std::abs(cp.optimum));
    worst_obj = std::max(worst_obj, rel);
    bad_objective += rel > 1e-6;
    const double primal = (P.A * sol.x - P.b).norm() / (1.0 + P.b.norm());
    const double dualr = (VecX(P.A.transpose() * sol.y) + sol.z - P.c).norm() / (1.0 + P.c.norm());
    const double gap = std::abs(sol.x.dot(sol.z)) / (1.0 + std::abs(obj));
    const double kkt = std::max({primal, dualr, gap, cone_violation(P.cones, sol.x, false),
                                 cone_violation(P.cones, sol.z, true)});
    worst_kkt = std::max(worst_kkt, kkt);
    bad_kkt += kkt > 1e-8;
  }

  // min -x s.t. x <= 2, x >= 0: x = 2.
  ProgramBuilder lp;
  const int x = lp.add_nonneg(1, "x");
  lp.add_objective(x, -1.0);
  lp.add_nonneg_constraint(LinExpr(2.0).add(x, -1.0), "upper");
  const SolverSolution lps = solve(lp.build());
  const double lp_err = lps.status == SolverStatus::Optimal ? std::abs(lp.values(lps.x)(x) - 2.0) : 1.0;

  // Projection of a onto the unit ball: a / |a| at distance |a| - 1.
  const Vec3 a(3.0, -4.0, 1.5);
  ProgramBuilder pj;
  const int t = pj.add_free(1, "t");
  const int p = pj.add_free(3, "p");
  pj.add_objective(t, 1.0);
  std::vector<LinExpr> dist{LinExpr::var(t)}, ball{LinExpr(1.0)};
  for (int i = 0; i < 3; ++i) {
    dist.push_back(LinExpr::var(p + i).add(LinExpr(-a(i))));
    ball.push_back(LinExpr::var(p + i));
  }
  pj.add_soc_constraint(dist, "distance");
  pj.add_soc_constraint(ball, "ball");
  const SolverSolution pjs = solve(pj.build());
  double proj_err = 1.0;
  if (pjs.status == SolverStatus::Optimal) {
    const VecX v = pj.values(pjs.x);
    proj_err = std::max((v.segment(p, 3) - a.normalized()).cwiseAbs().maxCoeff(), std::abs(v(t) - (a.norm() - 1.0)));
  }

  const bool ok = not_optimal == 0 && bad_objective == 0 && bad_kkt == 0 && lp_err <= 1e-8 && proj_err <= 1e-8;
  return {ok, fmt::format("200 random: {} not optimal, worst objective error {:.1e}, worst KKT {:.1e}; "
                          "LP error {:.1e}, projection error {:.1e}",
                          not_optimal, worst_obj, worst_kkt, lp_err, proj_err)};
}

std::string declared_note() {
  if (!g_campaign) return "campaign did not run";
  const CampaignSummary& s = g_campaign->summary;
  std::vector<double> ms;
  for (const TrialRecord& r : g_campaign->records) {
    if (r.status == "converged") ms.push_back(r.total_ms);
  }
  const LogStats lt = log_stats(ms);
  return fmt::format("absolute runtimes and the full N x dx_tol grid are hardware and scale bound; "
                     "measured N=10 solve time mean {:.0f} ms, p99 {:.0f} ms, lognormal 3-sigma {:.0f} ms, "
                     "{} hardware threads; sweep mode available in the CLI",
                     s.ms_mean, s.ms_p99, lt.three_sigma(), std::thread::hardware_concurrency());
}

}  // namespace

int main() {
  struct Entry {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Entry> entries{
      {1, "bilinear pose forms vs Cartesian", criterion_bilinear_forms},
      {2, "Jacobians vs central differences", criterion_jacobians},
      {3, "discretization vs exact LTI and converged references", criterion_discretization},
      {4, "state-triggered constraint logic", criterion_stc_equivalence},
      {5, "baseline lander convergence", criterion_baseline},
      {6, "line-of-sight case study", criterion_case_study},
      {7, "Monte Carlo campaign", criterion_monte_carlo},
      {8, "SOCP solver validation", criterion_socp},
  };
  int failures = 0;
  for (const Entry& e : entries) {
    Outcome o;
    const auto t0 = Clock::now();
    try {
      o = e.run();
    } catch (const std::exception& ex) {
      o = {false, std::string("exception: ") + ex.what()};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    failures += !o.pass;
    std::printf("criterion %d %s: %s [%s] (%.1f s)\n", e.id, o.pass ? "PASS" : "FAIL", e.name, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("criterion 9 DECLARED: not reproducible at desk scale [%s]\n", declared_note().c_str());
  std::printf("%s: %d of 8 checked criteria failed\n", failures == 0 ? "ACCEPTED" : "REJECTED", failures);
  return failures == 0 ? 0 : 1;
}
