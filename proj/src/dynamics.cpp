#include "pdg/dynamics.hpp"

#include <cmath>

#include "pdg/errors.hpp"

namespace pdg {

namespace si = state_index;

StateVector RigidBodyState::pack() const {
  StateVector x;
  x(si::kMass) = m;
  x.segment<8>(si::kPose) = pose.vector();
  x.segment<8>(si::kDualVelocity) = dvel.vector();
  return x;
}

RigidBodyState RigidBodyState::unpack(const StateVector& x) {
  if (!(x(si::kMass) > 0.0)) {
    throw InvalidState("mass must be positive");
  }
  const Vec8 w = x.segment<8>(si::kDualVelocity);
  if (w(3) != 0.0 || w(7) != 0.0) {
    throw InvalidState("dual velocity scalar slots must be zero");
  }
  RigidBodyState s;
  s.m = x(si::kMass);
  s.pose = DualQuaternion(Vec8(x.segment<8>(si::kPose)));
  s.dvel = DualVelocity::from_vector(w);
  return s;
}

void VehicleParams::validate() const {
  if (!(isp > 0.0)) throw InvalidArgument("isp must be positive");
  if (!(m_dry > 0.0)) throw InvalidArgument("m_dry must be positive");
  if ((J - J.transpose()).cwiseAbs().maxCoeff() > 1e-9 * J.cwiseAbs().maxCoeff()) {
    throw InvalidArgument("inertia matrix must be symmetric");
  }
  Eigen::LLT<Mat3> llt(J);
  if (llt.info() != Eigen::Success) throw InvalidArgument("inertia matrix must be positive definite");
}

double mass_rate(const Vec3& u_B, const VehicleParams& p) { return -p.alpha() * u_B.norm(); }

Vec8 pose_rate(const Vec8& pose, const Vec8& dual_velocity) {
  return 0.5 * left_matrix(DualQuaternion(pose)) * dual_velocity;
}

Vec3 body_gravity(const Vec4& q1, const Vec3& g_I) {
  const Quaternion q(q1);
  return multiply(multiply(conjugate(q), embed(g_I)), q).vec();
}

Vec8 dual_velocity_rate(const StateVector& x, const Vec3& u_B, const VehicleParams& p) {
  const double m = x(si::kMass);
  if (!(m > 0.0)) {
    throw InvalidState("mass must be positive");
  }
  const Vec3 w = x.segment<3>(si::kOmega);
  const Vec3 v = x.segment<3>(si::kVelocity);
  const Vec3 g_B = body_gravity(x.segment<4>(si::kAttitude), p.g_I);

  Vec8 out = Vec8::Zero();
  out.head<3>() = p.J.ldlt().solve(p.r_u.cross(u_B) - w.cross(p.J * w));
  out.segment<3>(4) = u_B / m + g_B - w.cross(v);
  return out;
}

StateVector state_rate(const StateVector& x, const Vec3& u_B, const VehicleParams& p) {
  StateVector dx;
  dx(si::kMass) = mass_rate(u_B, p);
  dx.segment<8>(si::kPose) = pose_rate(x.segment<8>(si::kPose), x.segment<8>(si::kDualVelocity));
  dx.segment<8>(si::kDualVelocity) = dual_velocity_rate(x, u_B, p);
  return dx;
}

StateVector dilated_rate(double s, const StateVector& x, const Vec3& u_B, const VehicleParams& p) {
  if (!(s > 0.0)) {
    throw InvalidArgument("time dilation must be positive");
  }
  return s * state_rate(x, u_B, p);
}

Linearization linearize(double s, const StateVector& x, const Vec3& u_B, const VehicleParams& p) {
  if (!(s > 0.0)) {
    throw InvalidArgument("time dilation must be positive");
  }
  const double m = x(si::kMass);
  if (!(m > 0.0)) {
    throw InvalidState("mass must be positive");
  }
  const Quaternion q1(Vec4(x.segment<4>(si::kAttitude)));
  const Quaternion q2(Vec4(x.segment<4>(si::kDualPart)));
  const Quaternion w4(Vec4(x.segment<4>(si::kOmega)));
  const Quaternion v4(Vec4(x.segment<4>(si::kVelocity)));
  const Vec3 w = w4.vec();
  const Vec3 v = v4.vec();
  const Mat3 J_inv = p.J.inverse();

  StateMatrix A = StateMatrix::Zero();
  InputMatrix B = InputMatrix::Zero();

  // mass
  const double u_norm = u_B.norm();
  if (u_norm > 0.0) {
    B.row(si::kMass) = -p.alpha() * u_B.transpose() / u_norm;
  }

  // q1' = 1/2 q1 (x) w
  A.block<4, 4>(si::kAttitude, si::kAttitude) = 0.5 * right_matrix(w4);
  A.block<4, 4>(si::kAttitude, si::kOmega) = 0.5 * left_matrix(q1);

  // q2' = 1/2 (q1 (x) v + q2 (x) w)
  A.block<4, 4>(si::kDualPart, si::kAttitude) = 0.5 * right_matrix(v4);
  A.block<4, 4>(si::kDualPart, si::kDualPart) = 0.5 * right_matrix(w4);
  A.block<4, 4>(si::kDualPart, si::kOmega) = 0.5 * left_matrix(q2);
  A.block<4, 4>(si::kDualPart, si::kVelocity) = 0.5 * left_matrix(q1);

  // w' = J^-1 (r_u x u - w x J w)
  A.block<3, 3>(si::kOmega, si::kOmega) = J_inv * (skew(p.J * w) - skew(w) * p.J);
  B.block<3, 3>(si::kOmega, 0) = J_inv * skew(p.r_u);

  // v' = u/m + q* (x) g (x) q - w x v
  A.block<3, 1>(si::kVelocity, si::kMass) = -u_B / (m * m);
  {
    // d/dq [q* (x) g (x) q] = Lambda*(g (x) q) C + Lambda(q* (x) g), C = diag(-1,-1,-1,1)
    const Quaternion g4 = embed(p.g_I);
    Mat4 conj_map = Mat4::Identity();
    conj_map.topLeftCorner<3, 3>() *= -1.0;
    const Mat4 dg = right_matrix(multiply(g4, q1)) * conj_map + left_matrix(multiply(conjugate(q1), g4));
    A.block<3, 4>(si::kVelocity, si::kAttitude) = dg.topRows<3>();
  }
  A.block<3, 3>(si::kVelocity, si::kOmega) = skew(v);
  A.block<3, 3>(si::kVelocity, si::kVelocity) = -skew(w);
  B.block<3, 3>(si::kVelocity, 0) = Mat3::Identity() / m;

  Linearization lin;
  lin.S = state_rate(x, u_B, p);
  lin.A = s * A;
  lin.B = s * B;
  lin.R = -lin.A * x - lin.B * u_B;
  return lin;
}

void renormalize_pose(StateVector& x) {
  Vec4 q1 = x.segment<4>(si::kAttitude);
  Vec4 q2 = x.segment<4>(si::kDualPart);
  const double n = q1.norm();
  if (!(n > 0.0)) {
    throw InvalidState("attitude quaternion has zero norm");
  }
  q1 /= n;
  q2 -= q1.dot(q2) * q1;
  x.segment<4>(si::kAttitude) = q1;
  x.segment<4>(si::kDualPart) = q2;
}

}  // namespace pdg
