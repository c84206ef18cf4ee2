#include "sortarm/kinematics.hpp"

#include <stdexcept>
#include <string>

namespace sortarm::kin {

DhRow::DhRow(double theta_deg_, double alpha_deg_, double a_, double d_,
             JointType type_)
    : theta_deg(wrap_degrees(theta_deg_)),
      alpha_deg(wrap_degrees(alpha_deg_)),
      a(a_),
      d(d_),
      type(type_) {
  if (!(a >= 0.0))
    throw std::invalid_argument("DhRow: link length a must be >= 0, got " +
                                std::to_string(a_));
}

DhChain::DhChain(std::vector<DhRow> rows_, std::optional<Coupling> coupling_)
    : rows(std::move(rows_)), coupling(std::move(coupling_)) {
  if (rows.empty()) throw std::invalid_argument("DhChain: needs at least one row");
  if (coupling) {
    const int dep = coupling->dependent;
    if (dep < 0 || dep >= static_cast<int>(rows.size()))
      throw std::invalid_argument("DhChain: coupling.dependent out of range");
    if (static_cast<int>(coupling->coeffs.size()) != dep)
      throw std::invalid_argument(
          "DhChain: coupling must reference exactly the joints below the "
          "dependent one");
  }
}

int DhChain::independent_count() const {
  return static_cast<int>(rows.size()) - (coupling ? 1 : 0);
}

Eigen::VectorXd DhChain::expand(const JointVector& joints) const {
  const int n = static_cast<int>(rows.size());
  if (joints.size() != independent_count())
    throw std::invalid_argument(
        "DhChain::expand: expected " + std::to_string(independent_count()) +
        " joint values, got " + std::to_string(joints.size()));
  Eigen::VectorXd full(n);
  if (!coupling) {
    full = joints;
    return full;
  }
  const int dep = coupling->dependent;
  for (int r = 0; r < n; ++r) {
    if (r == dep) continue;
    full(r) = joints(r < dep ? r : r - 1);
  }
  double coupled = 0.0;
  for (int i = 0; i < dep; ++i) coupled += coupling->coeffs[i] * full(i);
  full(dep) = coupled;
  return full;
}

DhChain sorting_arm_chain() {
  std::vector<DhRow> rows = {
      DhRow(0.0, 90.0, 3.0, 17.5),
      DhRow(0.0, 0.0, 22.3, 0.0),
      DhRow(0.0, 0.0, 31.5, 0.0),
      DhRow(0.0, 0.0, 14.0, 0.0),
  };
  return DhChain(std::move(rows), Coupling{3, {0.0, -1.0, -1.0}});
}

Transform row_transform(const DhRow& row, double q) {
  const double theta = row.type == JointType::Revolute ? row.theta_deg + q
                                                       : row.theta_deg;
  const double d = row.type == JointType::Prismatic ? row.d + q : row.d;
  return dh_transform(deg_to_rad(theta), deg_to_rad(row.alpha_deg), row.a, d);
}

std::vector<Transform> frame_chain(const DhChain& chain,
                                   const JointVector& joints) {
  const Eigen::VectorXd full = chain.expand(joints);
  std::vector<Transform> frames;
  frames.reserve(chain.rows.size() + 1);
  frames.push_back(Transform::identity());
  for (std::size_t i = 0; i < chain.rows.size(); ++i)
    frames.push_back(frames.back() *
                     row_transform(chain.rows[i], full(static_cast<int>(i))));
  return frames;
}

Transform forward_kinematics(const DhChain& chain, const JointVector& joints) {
  return frame_chain(chain, joints).back();
}

Jacobian geometric_jacobian(const DhChain& chain, const JointVector& joints) {
  const std::vector<Transform> frames = frame_chain(chain, joints);
  const int n = static_cast<int>(chain.rows.size());
  const Vec3 origin_end = frames.back().translation;

  Jacobian full(3, n);
  for (int i = 0; i < n; ++i) {
    const Vec3 z_axis = frames[i].rotation.col(2);
    if (chain.rows[i].type == JointType::Revolute)
      full.col(i) = z_axis.cross(origin_end - frames[i].translation);
    else
      full.col(i) = z_axis;
  }
  if (!chain.coupling) return full;

  // Chain rule through the coupling: the dependent column folds into each
  // referencing column with its coefficient.
  const int dep = chain.coupling->dependent;
  Jacobian reduced(3, n - 1);
  for (int r = 0, j = 0; r < n; ++r) {
    if (r == dep) continue;
    reduced.col(j) = full.col(r);
    if (r < dep) reduced.col(j) += chain.coupling->coeffs[r] * full.col(dep);
    ++j;
  }
  return reduced;
}

}  // namespace sortarm::kin
