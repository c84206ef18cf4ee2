#pragma once

#include <vector>

#include "sortarm/kinematics.hpp"

namespace sortarm::ik {

/// Proportional-derivative gains applied to the Cartesian position error.
struct PdGains {
  double kp = 0.1;
  double kd = 0.01;
};

/// Inclusive joint interval in degrees, canonicalised so min <= max.
struct JointLimit {
  double min = -180.0;
  double max = 180.0;

  static JointLimit canonical(double a, double b) {
    return a <= b ? JointLimit{a, b} : JointLimit{b, a};
  }
  bool contains(double v) const { return v >= min && v <= max; }
};

using JointLimits = std::vector<JointLimit>;

/// Catalogued servo ranges of the sorting arm:
/// q1 [20, 160], q2 [-80, 30], q3 [-80, -20] degrees.
JointLimits strict_limits();

/// Ranges widened so the canonical ready pose (120, 93, -132) and every
/// sorting route are feasible: q1 [20, 160], q2 [-80, 100], q3 [-150, -20].
/// This is the default profile.
JointLimits extended_limits();

/// Axis-aligned reachable-workspace box in cm, bounds inclusive.
struct WorkspaceBox {
  Vec3 lo = Vec3(-40.0, 20.0, 10.0);
  Vec3 hi = Vec3(40.0, 60.0, 60.0);

  bool contains(const Vec3& p, double slack = 0.0) const {
    return (p.array() >= lo.array() - slack).all() &&
           (p.array() <= hi.array() + slack).all();
  }
};

/// True when `p` lies inside the box expanded by `slack` on every face.
inline bool check_workspace(const Vec3& p, const WorkspaceBox& box,
                            double slack = 0.0) {
  return box.contains(p, slack);
}

/// PD update of the commanded Cartesian step. Pass prev_error == error to
/// zero the derivative term (first iteration).
inline Vec3 pd_step(const Vec3& error, const Vec3& prev_error,
                    const PdGains& gains) {
  return gains.kp * error + gains.kd * (error - prev_error);
}

/// Applies `delta` to `current` per joint; a joint whose update would leave
/// its limit is frozen at the current value (the delta is dropped, the joint
/// is not clamped to the bound).
JointVector clamp_joints(const JointVector& current, const JointVector& delta,
                         const JointLimits& limits);

/// One recorded iterate of the solver.
struct IkIterate {
  JointVector joints;    ///< independent joints, degrees
  Eigen::VectorXd full;  ///< all joint rows with the coupling applied, degrees
  Vec3 ee;               ///< end-effector position, cm
  double error = 0.0;    ///< Euclidean distance to the target, cm
};

/// Complete solve record; iterates[0] is the start pose.
struct IkTrace {
  std::vector<IkIterate> iterates;
  Vec3 target = Vec3::Zero();
  bool converged = false;

  /// Number of update steps actually executed.
  int iterations() const { return static_cast<int>(iterates.size()) - 1; }
  double initial_error() const { return iterates.front().error; }
  double final_error() const { return iterates.back().error; }
  const JointVector& final_joints() const { return iterates.back().joints; }
  const Vec3& final_ee() const { return iterates.back().ee; }
  std::vector<double> errors() const;
};

struct SolveOptions {
  PdGains gains{};
  JointLimits limits = extended_limits();
  WorkspaceBox box{};
  double tol = 0.032;  ///< convergence threshold on the error norm, cm
  int max_iter = 200;
};

/// Iterates the pseudoinverse-Jacobian PD loop from `start_deg` (degrees)
/// towards the Cartesian `target` (cm). Records every iterate including the
/// start. Throws WorkspaceViolationError when the target is outside the box,
/// InvalidStartError when the start violates the limits, and
/// std::invalid_argument on non-finite input or size mismatches.
IkTrace solve(const kin::DhChain& chain, const JointVector& start_deg,
              const Vec3& target, const SolveOptions& opts = {});

/// True when every recorded end-effector position stays inside the box
/// expanded by `slack`.
bool trajectory_within(const IkTrace& trace, const WorkspaceBox& box,
                       double slack = 0.0);

}  // namespace sortarm::ik
