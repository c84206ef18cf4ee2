#pragma once

#include <cmath>

#include <Eigen/Core>

namespace sortarm {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

/// Values of the independently commanded joints: degrees for revolute
/// joints, centimetres for prismatic ones.
using JointVector = Eigen::VectorXd;

/// Positional Jacobian: rows are (x, y, z) in cm, one column per
/// independent joint, units cm/rad (revolute) or cm/cm (prismatic).
using Jacobian = Eigen::Matrix<double, 3, Eigen::Dynamic>;

inline constexpr double kPi = 3.14159265358979323846;

constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

/// Wraps an angle in degrees onto (-180, 180].
inline double wrap_degrees(double deg) {
  double r = std::fmod(deg + 180.0, 360.0);
  if (r <= 0.0) r += 360.0;
  return r - 180.0;
}

/// Rigid transform (rotation + translation), composable with operator*.
template <typename Scalar>
struct Transform3 {
  Eigen::Matrix<Scalar, 3, 3> rotation = Eigen::Matrix<Scalar, 3, 3>::Identity();
  Eigen::Matrix<Scalar, 3, 1> translation = Eigen::Matrix<Scalar, 3, 1>::Zero();

  static Transform3 identity() { return Transform3{}; }

  /// Applies the transform to a point.
  Eigen::Matrix<Scalar, 3, 1> apply(const Eigen::Matrix<Scalar, 3, 1>& p) const {
    return rotation * p + translation;
  }

  /// 4x4 homogeneous matrix view.
  Eigen::Matrix<Scalar, 4, 4> matrix() const {
    Eigen::Matrix<Scalar, 4, 4> m = Eigen::Matrix<Scalar, 4, 4>::Identity();
    m.template topLeftCorner<3, 3>() = rotation;
    m.template topRightCorner<3, 1>() = translation;
    return m;
  }

  /// True when the rotation block is orthonormal with determinant +1.
  bool is_rigid(Scalar tol = Scalar(1e-9)) const {
    const Eigen::Matrix<Scalar, 3, 3> rtr = rotation.transpose() * rotation;
    return (rtr - Eigen::Matrix<Scalar, 3, 3>::Identity()).cwiseAbs().maxCoeff() <= tol &&
           std::abs(rotation.determinant() - Scalar(1)) <= tol;
  }

  friend Transform3 operator*(const Transform3& a, const Transform3& b) {
    return Transform3{a.rotation * b.rotation, a.rotation * b.translation + a.translation};
  }
};

using Transform = Transform3<double>;

}  // namespace sortarm
