#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/SVD>

#include "sortarm/errors.hpp"
#include "sortarm/types.hpp"

namespace sortarm::kin {

enum class JointType { Revolute, Prismatic };

/// One Denavit-Hartenberg row. Angles are degrees, normalised onto
/// (-180, 180]; lengths are centimetres. For a revolute row `theta_deg`
/// is the home offset added to the joint variable; for a prismatic row
/// the same role falls to `d`.
struct DhRow {
  double theta_deg = 0.0;  ///< joint angle offset
  double alpha_deg = 0.0;  ///< link twist
  double a = 0.0;          ///< link length, must be >= 0
  double d = 0.0;          ///< link offset
  JointType type = JointType::Revolute;

  DhRow() = default;
  DhRow(double theta_deg_, double alpha_deg_, double a_, double d_,
        JointType type_ = JointType::Revolute);
};

/// Linear coupling of one joint onto lower-indexed ones:
/// q[dependent] = sum_i coeffs[i] * q[i] for i in [0, dependent).
struct Coupling {
  int dependent = 0;
  std::vector<double> coeffs;
};

/// Ordered DH chain with an optional single linear joint coupling.
struct DhChain {
  std::vector<DhRow> rows;
  std::optional<Coupling> coupling;

  DhChain() = default;
  explicit DhChain(std::vector<DhRow> rows_,
                   std::optional<Coupling> coupling_ = std::nullopt);

  /// Number of independently commanded joints.
  int independent_count() const;

  /// Expands independent joint values to one value per row, applying the
  /// coupling. Throws std::invalid_argument on a size mismatch.
  Eigen::VectorXd expand(const JointVector& joints) const;
};

/// Four-revolute colour-sorting arm: link lengths (3, 22.3, 31.5, 14) cm,
/// base lift 17.5 cm, first twist 90 degrees, and the parallelogram
/// coupling q4 = -(q2 + q3) that keeps the gripper level.
DhChain sorting_arm_chain();

/// Homogeneous transform of a single DH row; angles in radians, lengths cm.
template <typename Scalar>
Transform3<Scalar> dh_transform(Scalar theta_rad, Scalar alpha_rad, Scalar a,
                                Scalar d) {
  using std::cos;
  using std::sin;
  const Scalar ct = cos(theta_rad), st = sin(theta_rad);
  const Scalar ca = cos(alpha_rad), sa = sin(alpha_rad);
  Transform3<Scalar> t;
  t.rotation << ct, -ca * st, sa * st,
                st, ca * ct, -sa * ct,
                Scalar(0), sa, ca;
  t.translation << a * ct, a * st, d;
  return t;
}

/// DH row evaluated at joint value q (degrees if revolute, cm if prismatic).
Transform row_transform(const DhRow& row, double q);

/// Base-to-frame transforms T_0^i for i = 0..n (identity first, end last),
/// evaluated at the expanded joint values.
std::vector<Transform> frame_chain(const DhChain& chain, const JointVector& joints);

/// Base-to-end-effector pose at the given independent joint values.
Transform forward_kinematics(const DhChain& chain, const JointVector& joints);

/// Positional Jacobian of the end-effector with respect to the independent
/// joints, constraint-reduced through the coupling. Units cm/rad (revolute
/// columns) or cm/cm (prismatic columns).
Jacobian geometric_jacobian(const DhChain& chain, const JointVector& joints);

/// Moore-Penrose pseudoinverse via SVD. Singular values below
/// rel_tol * sigma_max are truncated to zero.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>
pseudoinverse(const Eigen::MatrixBase<Derived>& m, double rel_tol = 1e-8) {
  using Scalar = typename Derived::Scalar;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sigma = svd.singularValues();
  const Scalar cutoff =
      sigma.size() > 0 ? Scalar(rel_tol) * sigma(0) : Scalar(0);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> inv_sigma(sigma.size());
  for (Eigen::Index i = 0; i < sigma.size(); ++i)
    inv_sigma(i) = (sigma(i) >= cutoff && sigma(i) > Scalar(0))
                       ? Scalar(1) / sigma(i)
                       : Scalar(0);
  return svd.matrixV() * inv_sigma.asDiagonal() * svd.matrixU().transpose();
}

}  // namespace sortarm::kin
