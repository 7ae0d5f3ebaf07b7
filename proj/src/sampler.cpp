#include "pdg/sampler.hpp"

#include <cmath>
#include <random>

#include <spdlog/spdlog.h>

#include "pdg/errors.hpp"

namespace pdg {

namespace {

// Nondimensional units for the point-mass program.
constexpr double kL = 100.0;  // m
constexpr double kT = 10.0;   // s
constexpr double kA = kL / (kT * kT);

// One fixed-burn-time feasibility problem in the lossless-convexification
// variables z = ln(m / m0), u = thrust / m, sigma >= |u|.
bool feasible_for(const GuidanceProblem& prob, double tf, int K) {
  const VehicleParams& veh = prob.vehicle;
  const ConstraintParams& lim = prob.limits;
  const BoundaryConditions& bc = prob.bc;
  const double alpha = veh.alpha();
  const double h = tf / (K - 1);
  const double hh = h / kT;
  const Vec3 g = veh.g_I / kA;

  if (1.0 - alpha * lim.u_max * tf / bc.m0 <= 0.0) return false;

  ProgramBuilder pb;
  std::vector<int> r(K), v(K), u(K), z(K), sg(K);
  for (int k = 0; k < K; ++k) {
    r[k] = pb.add_free(3);
    v[k] = pb.add_free(3);
    u[k] = pb.add_free(3);
    z[k] = pb.add_free(1);
    sg[k] = pb.add_free(1);
  }
  const double cos_dir = std::cos(std::min(lim.theta_max + lim.delta_max, M_PI));
  const double cos_gs = std::cos(lim.gamma_max);
  for (int k = 0; k < K; ++k) {
    const double t = k * h;
    const double z0 = std::log(1.0 - alpha * lim.u_max * t / bc.m0);
    const double zmax = std::log(1.0 - alpha * lim.u_min * t / bc.m0);
    const double mu1 = lim.u_min / bc.m0 * std::exp(-z0) / kA;
    const double mu2 = lim.u_max / bc.m0 * std::exp(-z0) / kA;

    std::vector<LinExpr> cone{LinExpr::var(sg[k])};
    for (int a = 0; a < 3; ++a) cone.push_back(LinExpr::var(u[k] + a));
    pb.add_soc_constraint(cone);
    // mu1 (1 - (z - z0)) <= sigma <= mu2 (1 - (z - z0))
    pb.add_nonneg_constraint(LinExpr::var(sg[k]).add(z[k], mu1).add(LinExpr(-mu1 * (1.0 + z0))));
    pb.add_nonneg_constraint(LinExpr(mu2 * (1.0 + z0)).add(z[k], -mu2).add(sg[k], -1.0));
    pb.add_nonneg_constraint(LinExpr::var(z[k]).add(LinExpr(-z0)));
    pb.add_nonneg_constraint(LinExpr(zmax).add(z[k], -1.0));
    pb.add_nonneg_constraint(LinExpr::var(u[k] + 2).add(sg[k], -cos_dir));
    if (cos_gs > 0.0) {
      std::vector<LinExpr> gs{LinExpr::var(r[k] + 2, 1.0 / cos_gs)};
      for (int a = 0; a < 3; ++a) gs.push_back(LinExpr::var(r[k] + a));
      pb.add_soc_constraint(gs);
    }
  }
  for (int k = 0; k + 1 < K; ++k) {
    for (int a = 0; a < 3; ++a) {
      LinExpr dv = LinExpr::var(v[k + 1] + a, -1.0).add(v[k] + a, 1.0);
      dv.add(u[k] + a, 0.5 * hh).add(u[k + 1] + a, 0.5 * hh).add(LinExpr(hh * g(a)));
      pb.add_equality(dv);
      LinExpr dr = LinExpr::var(r[k + 1] + a, -1.0).add(r[k] + a, 1.0).add(v[k] + a, hh);
      dr.add(u[k] + a, hh * hh / 3.0).add(u[k + 1] + a, hh * hh / 6.0).add(LinExpr(0.5 * hh * hh * g(a)));
      pb.add_equality(dr);
    }
    LinExpr dz = LinExpr::var(z[k + 1], -1.0).add(z[k], 1.0);
    dz.add(sg[k], -0.5 * alpha * h * kA).add(sg[k + 1], -0.5 * alpha * h * kA);
    pb.add_equality(dz);
  }
  const double vs = kL / kT;
  for (int a = 0; a < 3; ++a) {
    pb.add_equality(LinExpr::var(r[0] + a).add(LinExpr(-bc.r0_I(a) / kL)));
    pb.add_equality(LinExpr::var(v[0] + a).add(LinExpr(-bc.v0_I(a) / vs)));
    pb.add_equality(LinExpr::var(r[K - 1] + a).add(LinExpr(-bc.rf_I(a) / kL)));
    pb.add_equality(LinExpr::var(v[K - 1] + a).add(LinExpr(-bc.vf_I(a) / vs)));
  }
  pb.add_equality(LinExpr::var(z[0]));
  pb.add_nonneg_constraint(LinExpr::var(z[K - 1]).add(LinExpr(-std::log(veh.m_dry / bc.m0))));
  pb.add_objective(z[K - 1], -1.0);

  const SolverSolution sol = solve(pb.build());
  return sol.status == SolverStatus::Optimal;
}

}  // namespace

bool point_mass_feasible(const GuidanceProblem& prob, const PointMassOracle& oracle) {
  if (oracle.nodes < 2) throw InvalidArgument("nodes: need at least 2");
  for (double tf : oracle.tf_grid_s) {
    if (feasible_for(prob, tf, oracle.nodes)) return true;
  }
  return false;
}

std::uint64_t trial_seed(std::uint64_t master, int id) {
  std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
                    static_cast<std::uint32_t>(id)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
}

InitialConditions sample_dispersion(std::mt19937_64& rng, const Scenario& nominal) {
  const MonteCarloConfig& mc = nominal.montecarlo;
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  InitialConditions ic;
  ic.m0 = nominal.problem.bc.m0 * (1.0 + mc.mass_spread * unit(rng));
  for (int a = 0; a < 3; ++a) ic.v0_I(a) = nominal.problem.bc.v0_I(a) + mc.velocity_sigma(a) * normal(rng);
  return ic;
}

InitialConditions sample_initial_conditions(std::uint64_t seed, const Scenario& nominal,
                                            const PointMassOracle& oracle) {
  const MonteCarloConfig& mc = nominal.montecarlo;
  std::mt19937_64 rng(seed);
  InitialConditions ic = sample_dispersion(rng, nominal);

  auto draw = [&rng](const std::array<double, 2>& r) {
    return std::uniform_real_distribution<double>(r[0], r[1])(rng);
  };
  GuidanceProblem p = nominal.problem;
  p.bc.m0 = ic.m0;
  p.bc.v0_I = ic.v0_I;
  for (ic.attempts = 1; ic.attempts <= mc.max_attempts; ++ic.attempts) {
    p.bc.r0_I = Vec3(draw(mc.downrange), draw(mc.crossrange), draw(mc.altitude));
    try {
      p.validate();
    } catch (const InvalidArgument&) {
      continue;
    }
    if (point_mass_feasible(p, oracle)) {
      ic.r0_I = p.bc.r0_I;
      return ic;
    }
    spdlog::debug("sampler: rejected r0 = [{:.1f}, {:.1f}, {:.1f}]", p.bc.r0_I.x(), p.bc.r0_I.y(), p.bc.r0_I.z());
  }
  throw SamplingFailure("no feasible initial position after " + std::to_string(mc.max_attempts) + " draws");
}

}  // namespace pdg
