#pragma once

// Path constraints, boundary conditions and the line-of-sight state-triggered
// constraint: evaluation on poses, linearization, and emission of conic rows
// into a ProgramBuilder.

#include <optional>

#include "pdg/dualquat.hpp"
#include "pdg/dynamics.hpp"
#include "pdg/socp.hpp"

namespace pdg {

struct ConstraintParams {
  double gamma_max = 0.0;  // rad, approach cone half-angle from vertical
  double theta_max = 0.0;  // rad, tilt
  double omega_max = 0.0;  // rad/s, per axis
  double u_min = 0.0;      // N
  double u_max = 0.0;      // N
  double delta_max = 0.0;  // rad, gimbal
  std::optional<double> gimbal_rate_max;  // rad/s
  std::optional<double> uz_rate_max;      // N/s
  double rho_min = 0.0;    // m
  double rho_max = 0.0;    // m
  double xi_max = 0.0;     // rad
  Vec3 p_B = Vec3::UnitX();
  bool stc_enabled = false;

  /// Throws InvalidArgument naming the offending field.
  void validate() const;
};

struct BoundaryConditions {
  double m0 = 0.0;
  Vec3 r0_I = Vec3::Zero(), v0_I = Vec3::Zero(), w0_B = Vec3::Zero();
  Vec3 rf_I = Vec3::Zero(), vf_I = Vec3::Zero(), wf_B = Vec3::Zero();
  Quaternion qf = Quaternion::identity();

  /// Terminal pose [qf; 1/2 rf (x) qf].
  DualQuaternion final_pose() const;
  /// Terminal dual velocity [wf; 0; qf* (x) vf (x) qf; 0].
  DualVelocity final_velocity() const;
};

// Scalar constraint functions; each is satisfied iff the value is <= 0.

/// -q'M_g q + ||2 E_d q|| cos(gamma_max)
double approach_cone(const Vec8& dq, double gamma_max);
/// q'M_t q + cos(theta_max)
double tilt(const Vec8& dq, double theta_max);
/// q'M_l q + ||2 E_d q|| cos(xi_max)
double los_angle_fn(const Vec8& dq, const Vec3& p_B, double xi_max);

/// sigma(g) = -min(0, g)
inline double stc_sigma(double g) { return g < 0.0 ? -g : 0.0; }

/// sigma(rho_min - rho) sigma(rho - rho_max) c(q), rho the slant range.
double stc_compound_h(const Vec8& dq, const ConstraintParams& p);
/// Product-rule gradient of stc_compound_h. At a trigger kink (g = 0) the
/// sigma derivative is taken as 0.
Vec8 stc_compound_grad(const Vec8& dq, const ConstraintParams& p);

/// v_B(q) = q* (x) v_I (x) q and its 3x4 Jacobian with respect to q.
Vec3 body_velocity(const Vec4& q, const Vec3& v_I);
Eigen::Matrix<double, 3, 4> body_velocity_jacobian(const Vec4& q, const Vec3& v_I);

/// Decision variables of one temporal node: the scaled state x^ (kStateDim ids
/// starting at `x`) and scaled control u^ (3 ids starting at `u`), with
/// physical x = diag(x_scale) x^ and u = u_scale u^.
struct NodeVariables {
  int x = -1;
  int u = -1;
  StateVector x_scale = StateVector::Ones();
  double u_scale = 1.0;

  /// Physical state component k as an expression (times coef).
  LinExpr state(int k, double coef = 1.0) const { return LinExpr::var(x + k, coef * x_scale(k)); }
  LinExpr control(int k, double coef = 1.0) const { return LinExpr::var(u + k, coef * u_scale); }
};

/// Approach cone (linearized about x_bar's pose), tilt cone and the six
/// angular-rate rows.
void add_state_path_rows(ProgramBuilder& pb, const NodeVariables& v, const StateVector& x_bar,
                         const ConstraintParams& p, const std::string& tag);

/// Thrust magnitude cone, linearized minimum-thrust row and gimbal cone.
/// Throws DegenerateReference when ||u_bar|| = 0.
void add_control_rows(ProgramBuilder& pb, const NodeVariables& v, const Vec3& u_bar, const ConstraintParams& p,
                      const std::string& tag);

/// Optional gimbal-rate and throttle-rate rows between consecutive nodes; dt
/// is the physical time between them. No rows unless the limits are set.
void add_rate_rows(ProgramBuilder& pb, const NodeVariables& a, const NodeVariables& b, double dt,
                   const ConstraintParams& p, const std::string& tag);

/// Linearized compound state-triggered row about x_bar's pose.
void add_stc_row(ProgramBuilder& pb, const NodeVariables& v, const StateVector& x_bar, const ConstraintParams& p,
                 const std::string& tag);

/// m_1 = m0, q2_1 = 1/2 r0 (x) q1_1, w_1 = w0, v_1 = b(q1_bar) + db/dq (q1_1 - q1_bar).
void add_initial_rows(ProgramBuilder& pb, const NodeVariables& v, const BoundaryConditions& bc, const Vec4& q1_bar);

/// Terminal pose and dual velocity equalities and m_N >= m_dry.
void add_final_rows(ProgramBuilder& pb, const NodeVariables& v, const BoundaryConditions& bc, double m_dry);

/// Dimensionless worst-case violations (0 when satisfied).
struct ConstraintViolation {
  double approach = 0.0;  // c_g / max(1, ||r||)
  double tilt = 0.0;      // c_t
  double omega = 0.0;     // (|w| - w_max) / w_max
  double thrust = 0.0;    // bound excess / u_max
  double gimbal = 0.0;    // (||u|| cos(delta_max) - u_z) / u_max
  double stc = 0.0;       // h / rho_max^3
  double los_deg = 0.0;   // worst LoS angle inside the trigger band, deg (0 if none)

  double max() const;
};

/// Worst violation of the original (unlinearized) path constraints over the
/// node states X (N x 17) and controls U (N x 3).
ConstraintViolation evaluate_violations(const Eigen::MatrixXd& X, const Eigen::MatrixXd& U,
                                        const ConstraintParams& p);

}  // namespace pdg
