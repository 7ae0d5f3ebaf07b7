#pragma once

// Six degree-of-freedom rigid-body dynamics in the packed 17-dimensional state
//   x = [m, q1(4), q2(4), w_B(3), 0, v_B(3), 0]
// with mass depletion, dual quaternion kinematics and Newton-Euler dynamics,
// their time-dilated form F(s, x, u) = s f(x, u), and analytic Jacobians.

#include <Eigen/Dense>

#include "pdg/dualquat.hpp"

namespace pdg {

inline constexpr int kStateDim = 17;
inline constexpr int kControlDim = 3;
inline constexpr double kStandardGravity = 9.806;

using StateVector = Eigen::Matrix<double, kStateDim, 1>;
using StateMatrix = Eigen::Matrix<double, kStateDim, kStateDim>;
using InputMatrix = Eigen::Matrix<double, kStateDim, kControlDim>;

namespace state_index {
inline constexpr int kMass = 0;
inline constexpr int kPose = 1;      // 8 entries: q1 then q2
inline constexpr int kAttitude = 1;  // q1
inline constexpr int kDualPart = 5;  // q2
inline constexpr int kDualVelocity = 9;
inline constexpr int kOmega = 9;
inline constexpr int kVelocity = 13;
}  // namespace state_index

struct RigidBodyState {
  double m = 1.0;
  DualQuaternion pose;
  DualVelocity dvel;

  StateVector pack() const;
  /// Throws InvalidState if m <= 0 or a dual velocity scalar slot is nonzero.
  static RigidBodyState unpack(const StateVector& x);
};

struct VehicleParams {
  double isp = 225.0;             // s
  Mat3 J = Mat3::Identity();      // kg m^2, body principal axes
  Vec3 r_u = Vec3(0, 0, -0.25);   // m, engine offset from center of mass
  Vec3 g_I = Vec3(0, 0, -1.62);   // m/s^2
  double m_dry = 1.0;             // kg

  /// Fuel consumption coefficient 1 / (Isp g_e), s/m.
  double alpha() const { return 1.0 / (isp * kStandardGravity); }
  void validate() const;
};

/// dm/dt = -alpha ||u_B||.
double mass_rate(const Vec3& u_B, const VehicleParams& p);

/// d(pose)/dt = 1/2 pose (x) dual_velocity.
Vec8 pose_rate(const Vec8& pose, const Vec8& dual_velocity);

/// Body-frame gravity q* (x) g_I (x) q. No normalization of q is applied.
Vec3 body_gravity(const Vec4& q1, const Vec3& g_I);

/// Time derivative of [w_B; 0; v_B; 0] from the dual Newton-Euler equations.
Vec8 dual_velocity_rate(const StateVector& x, const Vec3& u_B, const VehicleParams& p);

/// Stacked derivative of the full state.
StateVector state_rate(const StateVector& x, const Vec3& u_B, const VehicleParams& p);

/// F(s, x, u) = s f(x, u); throws InvalidArgument for s <= 0.
StateVector dilated_rate(double s, const StateVector& x, const Vec3& u_B, const VehicleParams& p);

/// Jacobians of F about (s, x, u) and the affine remainder R = -A x - B u, so
/// that F = A x + B u + S s + R holds at the expansion point.
struct Linearization {
  StateMatrix A;
  InputMatrix B;
  StateVector S;
  StateVector R;
};

Linearization linearize(double s, const StateVector& x, const Vec3& u_B, const VehicleParams& p);

/// Projects the pose back onto the unit manifold: q1 <- q1/|q1|,
/// q2 <- q2 - (q1.q2) q1. Other entries are untouched.
void renormalize_pose(StateVector& x);

}  // namespace pdg
