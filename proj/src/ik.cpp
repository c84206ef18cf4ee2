#include "sortarm/ik.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace sortarm::ik {

JointLimits strict_limits() {
  return {JointLimit::canonical(20.0, 160.0), JointLimit::canonical(30.0, -80.0),
          JointLimit::canonical(-20.0, -80.0)};
}

JointLimits extended_limits() {
  return {JointLimit{20.0, 160.0}, JointLimit{-80.0, 100.0},
          JointLimit{-150.0, -20.0}};
}

JointVector clamp_joints(const JointVector& current, const JointVector& delta,
                         const JointLimits& limits) {
  if (current.size() != delta.size())
    throw std::invalid_argument("clamp_joints: current/delta size mismatch");
  if (static_cast<std::size_t>(current.size()) != limits.size())
    throw std::invalid_argument("clamp_joints: limits size mismatch");
  JointVector next = current;
  for (Eigen::Index i = 0; i < current.size(); ++i) {
    const double candidate = current(i) + delta(i);
    if (limits[static_cast<std::size_t>(i)].contains(candidate))
      next(i) = candidate;
  }
  return next;
}

std::vector<double> IkTrace::errors() const {
  std::vector<double> out;
  out.reserve(iterates.size());
  for (const IkIterate& it : iterates) out.push_back(it.error);
  return out;
}

namespace {

IkIterate make_iterate(const kin::DhChain& chain, const JointVector& joints,
                       const Vec3& target) {
  IkIterate it;
  it.joints = joints;
  it.full = chain.expand(joints);
  it.ee = kin::forward_kinematics(chain, joints).translation;
  it.error = (target - it.ee).norm();
  return it;
}

}  // namespace

IkTrace solve(const kin::DhChain& chain, const JointVector& start_deg,
              const Vec3& target, const SolveOptions& opts) {
  if (!target.allFinite())
    throw std::invalid_argument("solve: target must be finite");
  if (start_deg.size() != chain.independent_count())
    throw std::invalid_argument("solve: start has wrong joint count");
  if (!start_deg.allFinite())
    throw std::invalid_argument("solve: start must be finite");
  if (static_cast<int>(opts.limits.size()) != chain.independent_count())
    throw std::invalid_argument("solve: one limit per independent joint required");
  if (opts.tol <= 0.0) throw std::invalid_argument("solve: tol must be > 0");
  if (opts.max_iter < 0) throw std::invalid_argument("solve: max_iter must be >= 0");

  if (!opts.box.contains(target)) {
    std::ostringstream msg;
    msg << "solve: target (" << target.x() << ", " << target.y() << ", "
        << target.z() << ") is outside the workspace box";
    throw WorkspaceViolationError(msg.str());
  }
  for (std::size_t i = 0; i < opts.limits.size(); ++i) {
    if (!opts.limits[i].contains(start_deg(static_cast<Eigen::Index>(i)))) {
      std::ostringstream msg;
      msg << "solve: start joint " << (i + 1) << " = "
          << start_deg(static_cast<Eigen::Index>(i)) << " outside ["
          << opts.limits[i].min << ", " << opts.limits[i].max << "]";
      throw InvalidStartError(msg.str());
    }
  }

  IkTrace trace;
  trace.target = target;
  trace.iterates.push_back(make_iterate(chain, start_deg, target));

  Vec3 prev_error = target - trace.iterates.back().ee;  // zero derivative first
  while (trace.iterations() < opts.max_iter &&
         trace.iterates.back().error >= opts.tol) {
    const IkIterate& cur = trace.iterates.back();
    const Vec3 error = target - cur.ee;
    const Vec3 step = pd_step(error, prev_error, opts.gains);
    const Jacobian jac = kin::geometric_jacobian(chain, cur.joints);
    const Eigen::VectorXd delta_rad = kin::pseudoinverse(jac) * step;
    const JointVector delta_deg = delta_rad.unaryExpr(
        [](double v) { return rad_to_deg(v); });
    const JointVector next = clamp_joints(cur.joints, delta_deg, opts.limits);
    prev_error = error;
    trace.iterates.push_back(make_iterate(chain, next, target));
  }
  trace.converged = trace.iterates.back().error < opts.tol;
  return trace;
}

bool trajectory_within(const IkTrace& trace, const WorkspaceBox& box,
                       double slack) {
  for (const IkIterate& it : trace.iterates)
    if (!box.contains(it.ee, slack)) return false;
  return true;
}

}  // namespace sortarm::ik
