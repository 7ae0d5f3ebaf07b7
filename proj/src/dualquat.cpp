#include "pdg/dualquat.hpp"

#include <cmath>

#include "pdg/errors.hpp"

namespace pdg {

Mat3 skew(const Vec3& v) {
  Mat3 s;
  s << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return s;
}

Quaternion Quaternion::from_axis_angle(const Vec3& axis, double angle) {
  const Vec3 n = axis.normalized();
  return Quaternion(std::sin(0.5 * angle) * n, std::cos(0.5 * angle));
}

Quaternion operator+(const Quaternion& a, const Quaternion& b) { return Quaternion(Vec4(a.c + b.c)); }
Quaternion operator-(const Quaternion& a, const Quaternion& b) { return Quaternion(Vec4(a.c - b.c)); }
Quaternion operator*(double k, const Quaternion& a) { return Quaternion(Vec4(k * a.c)); }

Quaternion multiply(const Quaternion& a, const Quaternion& b) {
  const Vec3 av = a.vec();
  const Vec3 bv = b.vec();
  return Quaternion(a.scalar() * bv + b.scalar() * av + av.cross(bv), a.scalar() * b.scalar() - av.dot(bv));
}

Quaternion conjugate(const Quaternion& a) { return Quaternion(-a.vec(), a.scalar()); }

Quaternion cross(const Quaternion& a, const Quaternion& b) {
  const Vec3 av = a.vec();
  const Vec3 bv = b.vec();
  return Quaternion(a.scalar() * bv + b.scalar() * av + av.cross(bv), 0.0);
}

Mat4 left_matrix(const Quaternion& a) {
  Mat4 m;
  m.topLeftCorner<3, 3>() = a.scalar() * Mat3::Identity() + skew(a.vec());
  m.topRightCorner<3, 1>() = a.vec();
  m.bottomLeftCorner<1, 3>() = -a.vec().transpose();
  m(3, 3) = a.scalar();
  return m;
}

Mat4 right_matrix(const Quaternion& b) {
  Mat4 m;
  m.topLeftCorner<3, 3>() = b.scalar() * Mat3::Identity() - skew(b.vec());
  m.topRightCorner<3, 1>() = b.vec();
  m.bottomLeftCorner<1, 3>() = -b.vec().transpose();
  m(3, 3) = b.scalar();
  return m;
}

Vec3 to_body(const Quaternion& q, const Vec3& v_I) {
  return multiply(multiply(conjugate(q), embed(v_I)), q).vec();
}

Vec3 to_inertial(const Quaternion& q, const Vec3& v_B) {
  return multiply(multiply(q, embed(v_B)), conjugate(q)).vec();
}

DualQuaternion operator+(const DualQuaternion& a, const DualQuaternion& b) {
  return {a.real + b.real, a.dual + b.dual};
}

DualQuaternion operator*(double k, const DualQuaternion& a) { return {k * a.real, k * a.dual}; }

DualQuaternion multiply(const DualQuaternion& a, const DualQuaternion& b) {
  return {multiply(a.real, b.real), multiply(a.real, b.dual) + multiply(a.dual, b.real)};
}

DualQuaternion conjugate(const DualQuaternion& a) { return {conjugate(a.real), conjugate(a.dual)}; }

DualQuaternion cross(const DualQuaternion& a, const DualQuaternion& b) {
  return {cross(a.real, b.real), cross(a.real, b.dual) + cross(a.dual, b.real)};
}

Mat8 left_matrix(const DualQuaternion& a) {
  Mat8 m = Mat8::Zero();
  const Mat4 l1 = left_matrix(a.real);
  m.topLeftCorner<4, 4>() = l1;
  m.bottomRightCorner<4, 4>() = l1;
  m.bottomLeftCorner<4, 4>() = left_matrix(a.dual);
  return m;
}

Mat8 right_matrix(const DualQuaternion& b) {
  Mat8 m = Mat8::Zero();
  const Mat4 r1 = right_matrix(b.real);
  m.topLeftCorner<4, 4>() = r1;
  m.bottomRightCorner<4, 4>() = r1;
  m.bottomLeftCorner<4, 4>() = right_matrix(b.dual);
  return m;
}

DualVelocity DualVelocity::from_vector(const Vec8& v) {
  if (v(3) != 0.0 || v(7) != 0.0) {
    throw InvalidArgument("dual velocity scalar slots must be zero");
  }
  return {v.head<3>(), v.segment<3>(4)};
}

DualQuaternion pose_from(const Quaternion& q, const Vec3& r_I) {
  if (!q.is_unit()) {
    throw InvalidArgument("pose_from: attitude quaternion is not unit");
  }
  return {q, 0.5 * multiply(embed(r_I), q)};
}

PositionPair extract_position(const DualQuaternion& dq) {
  if (!dq.is_unit()) {
    throw InvalidArgument("extract_position: dual quaternion is not unit");
  }
  const Vec3 r_I = 2.0 * multiply(dq.dual, conjugate(dq.real)).vec();
  const Vec3 r_B = 2.0 * multiply(conjugate(dq.real), dq.dual).vec();
  return {r_I, r_B};
}

namespace {

BilinearForm off_diagonal(FormKind kind, const Mat4& block) {
  Mat8 m = Mat8::Zero();
  m.topRightCorner<4, 4>() = block.transpose();
  m.bottomLeftCorner<4, 4>() = block;
  return {kind, m};
}

}  // namespace

BilinearForm inertial_projection_form(const Vec3& a_I) {
  return off_diagonal(FormKind::InertialProjection, left_matrix(embed(a_I)));
}

BilinearForm body_projection_form(const Vec3& a_B) {
  return off_diagonal(FormKind::BodyProjection, right_matrix(embed(a_B)));
}

BilinearForm axis_alignment_form(const Vec3& a_I, const Vec3& b_B) {
  // q1' Lambda(a) Lambda*(b) q1 is the scalar part of a_B (x) b_B, i.e. -a.b;
  // the sign is flipped so the form returns +a.b.
  Mat8 m = Mat8::Zero();
  m.topLeftCorner<4, 4>() = -left_matrix(embed(a_I)) * right_matrix(embed(b_B));
  return {FormKind::AxisAlignment, m};
}

BilinearForm dual_selector() {
  Mat8 m = Mat8::Zero();
  m.bottomRightCorner<4, 4>() = Mat4::Identity();
  return {FormKind::DualSelector, m};
}

BilinearForm approach_cone_form() {
  BilinearForm f = inertial_projection_form(Vec3::UnitZ());
  f.kind = FormKind::ApproachCone;
  return f;
}

BilinearForm tilt_form() {
  BilinearForm f = axis_alignment_form(Vec3::UnitZ(), Vec3::UnitZ());
  f.m = -f.m;
  f.kind = FormKind::Tilt;
  return f;
}

BilinearForm line_of_sight_form(const Vec3& p_B) {
  BilinearForm f = body_projection_form(p_B);
  f.kind = FormKind::LineOfSight;
  return f;
}

}  // namespace pdg
