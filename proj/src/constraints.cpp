#include "pdg/constraints.hpp"

#include <algorithm>
#include <cmath>

#include "pdg/errors.hpp"

namespace pdg {

namespace si = state_index;

namespace {

constexpr double kPi = 3.14159265358979323846;

double slant(const Vec8& dq) { return slant_range(dq); }

// Gradient of ||2 q2|| with respect to the pose; zero at the origin.
Vec8 slant_grad(const Vec8& dq) {
  Vec8 g = Vec8::Zero();
  const double n = dq.tail<4>().norm();
  if (n > 0.0) g.tail<4>() = 2.0 * dq.tail<4>() / n;
  return g;
}

void require(bool ok, const char* field, const char* what) {
  if (!ok) throw InvalidArgument(std::string(field) + ": " + what);
}

}  // namespace

void ConstraintParams::validate() const {
  require(gamma_max >= 0.0 && gamma_max <= 0.5 * kPi, "gamma_max", "must lie in [0, 90] deg");
  require(theta_max > 0.0 && theta_max <= kPi, "theta_max", "must lie in (0, 180] deg");
  require(omega_max > 0.0, "omega_max", "must be positive");
  require(u_min > 0.0, "u_min", "must be positive");
  require(u_max > u_min, "u_max", "must exceed u_min");
  require(delta_max >= 0.0 && delta_max < 0.5 * kPi, "delta_max", "must lie in [0, 90) deg");
  require(!gimbal_rate_max || *gimbal_rate_max > 0.0, "gimbal_rate_max", "must be positive");
  require(!uz_rate_max || *uz_rate_max > 0.0, "uz_rate_max", "must be positive");
  if (stc_enabled) {
    require(rho_min > 0.0 && rho_max > rho_min, "rho_min/rho_max", "need 0 < rho_min < rho_max");
    require(xi_max > 0.0 && xi_max < 0.5 * kPi, "xi_max", "must lie in (0, 90) deg");
    require(std::abs(p_B.norm() - 1.0) <= 1e-9, "p_B", "must be a unit vector");
  }
}

DualQuaternion BoundaryConditions::final_pose() const { return pose_from(qf, rf_I); }

DualVelocity BoundaryConditions::final_velocity() const { return {wf_B, to_body(qf, vf_I)}; }

double approach_cone(const Vec8& dq, double gamma_max) {
  return -approach_cone_form().evaluate(dq) + slant(dq) * std::cos(gamma_max);
}

double tilt(const Vec8& dq, double theta_max) { return tilt_form().evaluate(dq) + std::cos(theta_max); }

double los_angle_fn(const Vec8& dq, const Vec3& p_B, double xi_max) {
  return line_of_sight_form(p_B).evaluate(dq) + slant(dq) * std::cos(xi_max);
}

double stc_compound_h(const Vec8& dq, const ConstraintParams& p) {
  const double rho = slant(dq);
  const double s1 = stc_sigma(p.rho_min - rho);
  const double s2 = stc_sigma(rho - p.rho_max);
  if (s1 == 0.0 || s2 == 0.0) return 0.0;
  return s1 * s2 * los_angle_fn(dq, p.p_B, p.xi_max);
}

Vec8 stc_compound_grad(const Vec8& dq, const ConstraintParams& p) {
  const double rho = slant(dq);
  const double g1 = p.rho_min - rho;
  const double g2 = rho - p.rho_max;
  const double s1 = stc_sigma(g1), s2 = stc_sigma(g2);
  if (s1 == 0.0 || s2 == 0.0) return Vec8::Zero();
  const Vec8 drho = slant_grad(dq);
  // d sigma/dq = -dg/dq on the active side
  const Vec8 ds1 = drho;   // g1 = rho_min - rho
  const Vec8 ds2 = -drho;  // g2 = rho - rho_max
  const BilinearForm ml = line_of_sight_form(p.p_B);
  const double c = ml.evaluate(dq) + rho * std::cos(p.xi_max);
  const Vec8 dc = ml.gradient(dq) + std::cos(p.xi_max) * drho;
  return s2 * c * ds1 + s1 * c * ds2 + s1 * s2 * dc;
}

Vec3 body_velocity(const Vec4& q, const Vec3& v_I) { return to_body(Quaternion(q), v_I); }

Eigen::Matrix<double, 3, 4> body_velocity_jacobian(const Vec4& q4, const Vec3& v_I) {
  // d/dq [q* (x) v (x) q] = Lambda*(v (x) q) C + Lambda(q* (x) v)
  const Quaternion q(q4);
  const Quaternion v = embed(v_I);
  Mat4 conj_map = Mat4::Identity();
  conj_map.topLeftCorner<3, 3>() *= -1.0;
  const Mat4 d = right_matrix(multiply(v, q)) * conj_map + left_matrix(multiply(conjugate(q), v));
  return d.topRows<3>();
}

void add_state_path_rows(ProgramBuilder& pb, const NodeVariables& v, const StateVector& x_bar,
                         const ConstraintParams& p, const std::string& tag) {
  // Approach cone ||r|| cos(gamma) <= r_z with ||r|| = ||2 q2|| and r_z = q'M_g q
  // linearized about the reference pose. Rows are divided by the position scale.
  const Vec8 qb = x_bar.segment<8>(si::kPose);
  const Mat8 mg = approach_cone_form().m;
  const Vec8 grad = (mg + mg.transpose()) * qb;
  const double pos_scale = std::max(1.0, v.x_scale(si::kDualPart));
  std::vector<LinExpr> cone(5);
  cone[0].constant = -qb.dot(mg * qb) / pos_scale;
  for (int k = 0; k < 8; ++k) cone[0].add(v.state(si::kPose + k, grad(k) / pos_scale));
  for (int k = 0; k < 4; ++k) cone[1 + k] = v.state(si::kDualPart + k, 2.0 * std::cos(p.gamma_max) / pos_scale);
  pb.add_soc_constraint(cone, tag + ".approach");

  // Tilt: on the unit sphere q'M_t q = 2(qx^2 + qy^2) - 1, so the constraint is
  // ||(qx, qy)|| <= sin(theta_max / 2).
  if (p.theta_max < kPi) {
    std::vector<LinExpr> t{LinExpr(std::sin(0.5 * p.theta_max)), v.state(si::kAttitude + 0),
                           v.state(si::kAttitude + 1)};
    pb.add_soc_constraint(t, tag + ".tilt");
  }

  for (int k = 0; k < 3; ++k) {
    LinExpr up(1.0), lo(1.0);
    up.add(v.state(si::kOmega + k, -1.0 / p.omega_max));
    lo.add(v.state(si::kOmega + k, 1.0 / p.omega_max));
    pb.add_nonneg_constraint(up, tag + ".omega_hi");
    pb.add_nonneg_constraint(lo, tag + ".omega_lo");
  }
}

void add_control_rows(ProgramBuilder& pb, const NodeVariables& v, const Vec3& u_bar, const ConstraintParams& p,
                      const std::string& tag) {
  const double un = u_bar.norm();
  if (!(un > 0.0)) throw DegenerateReference(tag + ": zero reference thrust");
  const double s = 1.0 / p.u_max;

  std::vector<LinExpr> mag{LinExpr(1.0)};
  for (int k = 0; k < 3; ++k) mag.push_back(v.control(k, s));
  pb.add_soc_constraint(mag, tag + ".thrust_max");

  LinExpr lo(-p.u_min * s);
  for (int k = 0; k < 3; ++k) lo.add(v.control(k, s * u_bar(k) / un));
  pb.add_nonneg_constraint(lo, tag + ".thrust_min");

  std::vector<LinExpr> gim{v.control(2, s / std::cos(p.delta_max))};
  for (int k = 0; k < 3; ++k) gim.push_back(v.control(k, s));
  pb.add_soc_constraint(gim, tag + ".gimbal");
}

void add_rate_rows(ProgramBuilder& pb, const NodeVariables& a, const NodeVariables& b, double dt,
                   const ConstraintParams& p, const std::string& tag) {
  const double s = 1.0 / p.u_max;
  if (p.gimbal_rate_max) {
    std::vector<LinExpr> cone{a.control(2, s * *p.gimbal_rate_max)};
    for (int k = 0; k < 2; ++k) {
      LinExpr d = b.control(k, s / dt);
      d.add(a.control(k, -s / dt));
      cone.push_back(d);
    }
    pb.add_soc_constraint(cone, tag + ".gimbal_rate");
  }
  if (p.uz_rate_max) {
    const double lim = *p.uz_rate_max * dt * s;
    LinExpr up(lim), lo(lim);
    up.add(b.control(2, -s)).add(a.control(2, s));
    lo.add(b.control(2, s)).add(a.control(2, -s));
    pb.add_nonneg_constraint(up, tag + ".uz_rate_hi");
    pb.add_nonneg_constraint(lo, tag + ".uz_rate_lo");
  }
}

void add_stc_row(ProgramBuilder& pb, const NodeVariables& v, const StateVector& x_bar, const ConstraintParams& p,
                 const std::string& tag) {
  const Vec8 qb = x_bar.segment<8>(si::kPose);
  const double h = stc_compound_h(qb, p);
  const Vec8 g = stc_compound_grad(qb, p);
  const double scale = 1.0 / (p.rho_max * p.rho_max * p.rho_max);
  // -(h + g'(q - q_bar)) >= 0
  LinExpr row(-(h - g.dot(qb)) * scale);
  for (int k = 0; k < 8; ++k) row.add(v.state(si::kPose + k, -g(k) * scale));
  pb.add_nonneg_constraint(row, tag + ".stc");
}

void add_initial_rows(ProgramBuilder& pb, const NodeVariables& v, const BoundaryConditions& bc, const Vec4& q1_bar) {
  const double mass_scale = 1.0 / std::max(1.0, bc.m0);
  LinExpr m = v.state(si::kMass, mass_scale);
  m.constant = -bc.m0 * mass_scale;
  pb.add_equality(m, "initial.mass");

  // q2 = 1/2 Lambda(r0) q1, rows divided by the position scale
  const Mat4 half_r = 0.5 * left_matrix(embed(bc.r0_I));
  const double ps = 1.0 / std::max(1.0, v.x_scale(si::kDualPart));
  for (int r = 0; r < 4; ++r) {
    LinExpr e = v.state(si::kDualPart + r, ps);
    for (int c = 0; c < 4; ++c) e.add(v.state(si::kAttitude + c, -half_r(r, c) * ps));
    pb.add_equality(e, "initial.pose");
  }

  for (int k = 0; k < 4; ++k) {
    LinExpr e = v.state(si::kOmega + k, 1.0 / v.x_scale(si::kOmega + k));
    e.constant = -(k < 3 ? bc.w0_B(k) : 0.0) / v.x_scale(si::kOmega + k);
    pb.add_equality(e, "initial.omega");
  }

  const Vec3 b0 = body_velocity(q1_bar, bc.v0_I);
  const Eigen::Matrix<double, 3, 4> J = body_velocity_jacobian(q1_bar, bc.v0_I);
  const double vs = 1.0 / v.x_scale(si::kVelocity);
  for (int r = 0; r < 3; ++r) {
    // v_r - J_r q1 = b0_r - J_r q1_bar
    LinExpr e = v.state(si::kVelocity + r, vs);
    for (int c = 0; c < 4; ++c) e.add(v.state(si::kAttitude + c, -J(r, c) * vs));
    e.constant = -(b0(r) - J.row(r).dot(q1_bar)) * vs;
    pb.add_equality(e, "initial.velocity");
  }
  LinExpr slot = v.state(si::kVelocity + 3, vs);
  pb.add_equality(slot, "initial.velocity");
}

void add_final_rows(ProgramBuilder& pb, const NodeVariables& v, const BoundaryConditions& bc, double m_dry) {
  StateVector target = StateVector::Zero();
  target.segment<8>(si::kPose) = bc.final_pose().vector();
  target.segment<8>(si::kDualVelocity) = bc.final_velocity().vector();
  for (int k = si::kPose; k < kStateDim; ++k) {
    LinExpr e = v.state(k, 1.0 / v.x_scale(k));
    e.constant = -target(k) / v.x_scale(k);
    pb.add_equality(e, "final.state");
  }
  const double ms = 1.0 / v.x_scale(si::kMass);
  LinExpr m = v.state(si::kMass, ms);
  m.constant = -m_dry * ms;
  pb.add_nonneg_constraint(m, "final.dry_mass");
}

double ConstraintViolation::max() const { return std::max({approach, tilt, omega, thrust, gimbal, stc}); }

ConstraintViolation evaluate_violations(const Eigen::MatrixXd& X, const Eigen::MatrixXd& U,
                                        const ConstraintParams& p) {
  ConstraintViolation out;
  for (int i = 0; i < X.rows(); ++i) {
    const StateVector x = X.row(i).transpose();
    const Vec8 dq = x.segment<8>(si::kPose);
    const double rho = slant(dq);
    out.approach = std::max(out.approach, approach_cone(dq, p.gamma_max) / std::max(1.0, rho));
    out.tilt = std::max(out.tilt, tilt(dq, p.theta_max));
    out.omega = std::max(out.omega, (x.segment<3>(si::kOmega).lpNorm<Eigen::Infinity>() - p.omega_max) / p.omega_max);
    const Vec3 u = U.row(i).transpose();
    out.thrust = std::max({out.thrust, (u.norm() - p.u_max) / p.u_max, (p.u_min - u.norm()) / p.u_max});
    out.gimbal = std::max(out.gimbal, (u.norm() * std::cos(p.delta_max) - u.z()) / p.u_max);
    if (p.stc_enabled) {
      out.stc = std::max(out.stc, stc_compound_h(dq, p) / (p.rho_max * p.rho_max * p.rho_max));
      if (rho > p.rho_min && rho < p.rho_max) {
        const double cosang = -line_of_sight_form(p.p_B).evaluate(dq) / rho;
        out.los_deg = std::max(out.los_deg, std::acos(std::clamp(cosang, -1.0, 1.0)) * 180.0 / kPi);
      }
    }
  }
  for (double* f : {&out.approach, &out.tilt, &out.omega, &out.thrust, &out.gimbal, &out.stc}) *f = std::max(0.0, *f);
  return out;
}

}  // namespace pdg
