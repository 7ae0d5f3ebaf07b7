#pragma once

// Quaternion and unit dual quaternion algebra.
//
// Component ordering is (vector, scalar) everywhere: a quaternion is stored as
// (v1, v2, v3, s) and the identity is (0, 0, 0, 1). Many libraries (Eigen's
// Quaterniond included) use (s, v) storage; do not mix the two.
//
// A dual quaternion q1 + eps q2 is handled as the 8-vector [q1; q2]. Poses use
// the convention that q maps inertial coordinates to body coordinates, i.e.
// r_B = q* (x) r_I (x) q.

#include <Eigen/Dense>

namespace pdg {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Vec8 = Eigen::Matrix<double, 8, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Mat8 = Eigen::Matrix<double, 8, 8>;

inline constexpr double kUnitTolerance = 1e-9;

Mat3 skew(const Vec3& v);

struct Quaternion {
  Vec4 c = Vec4(0.0, 0.0, 0.0, 1.0);

  Quaternion() = default;
  explicit Quaternion(const Vec4& components) : c(components) {}
  Quaternion(const Vec3& vec, double scalar) { c << vec, scalar; }

  static Quaternion identity() { return Quaternion(); }
  static Quaternion zero() { return Quaternion(Vec4::Zero()); }
  /// Rotation of `angle` radians about `axis` (normalized internally).
  static Quaternion from_axis_angle(const Vec3& axis, double angle);

  Vec3 vec() const { return c.head<3>(); }
  double scalar() const { return c(3); }

  double dot(const Quaternion& o) const { return c.dot(o.c); }
  double norm() const { return c.norm(); }
  bool is_unit(double tol = kUnitTolerance) const { return std::abs(c.squaredNorm() - 1.0) <= tol; }
  bool is_pure() const { return c(3) == 0.0; }
};

/// Pure quaternion (v, 0). This is the only sanctioned 3 -> 4 embedding.
inline Quaternion embed(const Vec3& v) { return Quaternion(v, 0.0); }

Quaternion operator+(const Quaternion& a, const Quaternion& b);
Quaternion operator-(const Quaternion& a, const Quaternion& b);
Quaternion operator*(double k, const Quaternion& a);

/// Hamilton product a (x) b.
Quaternion multiply(const Quaternion& a, const Quaternion& b);
Quaternion conjugate(const Quaternion& a);
/// Quaternion cross product a (/) b: the vector part of a (x) b with a zero scalar slot.
Quaternion cross(const Quaternion& a, const Quaternion& b);

/// Lambda(a) with a (x) b = Lambda(a) b.
Mat4 left_matrix(const Quaternion& a);
/// Lambda*(b) with a (x) b = Lambda*(b) a.
Mat4 right_matrix(const Quaternion& b);

/// Rotate a vector from the inertial to the body frame: q* (x) v (x) q.
Vec3 to_body(const Quaternion& q, const Vec3& v_I);
/// Rotate a vector from the body to the inertial frame: q (x) v (x) q*.
Vec3 to_inertial(const Quaternion& q, const Vec3& v_B);

struct DualQuaternion {
  Quaternion real = Quaternion::identity();
  Quaternion dual = Quaternion::zero();

  DualQuaternion() = default;
  DualQuaternion(const Quaternion& r, const Quaternion& d) : real(r), dual(d) {}
  explicit DualQuaternion(const Vec8& v) : real(Vec4(v.head<4>())), dual(Vec4(v.tail<4>())) {}

  static DualQuaternion identity() { return DualQuaternion(); }

  Vec8 vector() const {
    Vec8 v;
    v << real.c, dual.c;
    return v;
  }
  /// Both unit-manifold conditions: q1.q1 = 1 and q1.q2 = 0.
  bool is_unit(double tol = kUnitTolerance) const {
    return real.is_unit(tol) && std::abs(real.dot(dual)) <= tol;
  }
};

DualQuaternion operator+(const DualQuaternion& a, const DualQuaternion& b);
DualQuaternion operator*(double k, const DualQuaternion& a);

DualQuaternion multiply(const DualQuaternion& a, const DualQuaternion& b);
DualQuaternion conjugate(const DualQuaternion& a);
DualQuaternion cross(const DualQuaternion& a, const DualQuaternion& b);

Mat8 left_matrix(const DualQuaternion& a);
Mat8 right_matrix(const DualQuaternion& b);

inline Quaternion operator*(const Quaternion& a, const Quaternion& b) { return multiply(a, b); }
inline DualQuaternion operator*(const DualQuaternion& a, const DualQuaternion& b) {
  return multiply(a, b);
}

/// Body angular velocity and body linear velocity, packed as [w; 0; v; 0].
struct DualVelocity {
  Vec3 omega_B = Vec3::Zero();
  Vec3 v_B = Vec3::Zero();

  Vec8 vector() const {
    Vec8 out;
    out << omega_B, 0.0, v_B, 0.0;
    return out;
  }
  DualQuaternion as_dual_quaternion() const { return {embed(omega_B), embed(v_B)}; }
  /// Drops the scalar slots; throws InvalidArgument if they are not exactly zero.
  static DualVelocity from_vector(const Vec8& v);
};

/// Pose of the body frame: real part q, dual part 1/2 r_I (x) q.
/// Throws InvalidArgument when q is not a unit quaternion.
DualQuaternion pose_from(const Quaternion& q, const Vec3& r_I);

struct PositionPair {
  Vec3 r_I;
  Vec3 r_B;
};

/// Recovers r_I = vec(2 q2 (x) q1*) and r_B = vec(2 q1* (x) q2).
/// Throws InvalidArgument when dq is off the unit manifold.
PositionPair extract_position(const DualQuaternion& dq);

/// Slant range ||2 E_d q||, valid on the unit manifold.
inline double slant_range(const Vec8& dq) { return 2.0 * dq.tail<4>().norm(); }

enum class FormKind { InertialProjection, BodyProjection, AxisAlignment, ApproachCone, Tilt, LineOfSight, DualSelector };

/// 8x8 matrix M whose quadratic form dq' M dq reproduces a Cartesian quantity
/// for every unit pose dq.
struct BilinearForm {
  FormKind kind;
  Mat8 m;

  double evaluate(const Vec8& dq) const { return dq.dot(m * dq); }
  /// Gradient of dq' M dq.
  Vec8 gradient(const Vec8& dq) const { return (m + m.transpose()) * dq; }
};

/// dq' M dq = r_I . a_I
BilinearForm inertial_projection_form(const Vec3& a_I);
/// dq' M dq = r_B . a_B
BilinearForm body_projection_form(const Vec3& a_B);
/// dq' M dq = a_I . b_I, where b_B are the body coordinates of b.
BilinearForm axis_alignment_form(const Vec3& a_I, const Vec3& b_B);
/// E_d: selects the dual part, so ||2 E_d dq|| = ||r_I||.
BilinearForm dual_selector();

/// M_g = inertial_projection_form(z_I); approach-cone quadratic term.
BilinearForm approach_cone_form();
/// M_t = -axis_alignment_form(z_I, z_B); dq' M_t dq = -cos(tilt).
BilinearForm tilt_form();
/// M_l = body_projection_form(p_B); dq' M_l dq = r_B . p_B.
BilinearForm line_of_sight_form(const Vec3& p_B);

}  // namespace pdg
