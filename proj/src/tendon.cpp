#include "catch919/tendon.hpp"

#include <cmath>
#include <string>

#include "catch919/error.hpp"
#include "catch919/kernels.hpp"

namespace catch919 {

double excursion(const CableRoute& route, const Pose& q) {
  double sum = 0.0;
  for (const RouteSegment& s : route.segments) {
    const auto slot = slot_of(s.joint);
    if (!slot) throw ReferenceError("cable " + std::string(to_string(route.cable)) + " crosses unknown joint " +
                                    joint_name(s.joint));
    sum += s.sign * s.moment_arm_mm * deg2rad(q[*slot]);
  }
  return sum;
}

CableVector excursions(const HandModel& model, const Pose& q) {
  CableVector e{};
  for (const CableRoute& r : model.routes) e[idx(r.cable)] = excursion(r, q);
  return e;
}

ExcursionJacobian jacobian(const HandModel& model, const Pose&) {
  ExcursionJacobian jac;
  for (const CableRoute& r : model.routes) {
    for (const RouteSegment& s : r.segments) {
      const auto slot = slot_of(s.joint);
      if (!slot) throw ReferenceError("cable route crosses unknown joint " + joint_name(s.joint));
      jac.rows[idx(r.cable)][idx(*slot)] += s.sign * s.moment_arm_mm * deg2rad(1.0);
    }
  }
  return jac;
}

JointTorques torques_from_tensions(const HandModel& model, const Pose& q, const CableVector& tensions_n) {
  for (CableId c : kAllCables) {
    const double t = tensions_n[idx(c)];
    if (!(t >= 0.0) || !std::isfinite(t)) {
      throw InvariantError("tensions." + std::string(to_string(c)), "tension must be finite and >= 0");
    }
  }
  // Work per degree in N.mm/deg, converted back to N.mm per radian of rotation.
  const ExcursionJacobian jac = jacobian(model, q);
  JointTorques tau{};
  for (std::size_t j = 0; j < kJointSlots; ++j) {
    double s = 0.0;
    for (std::size_t c = 0; c < kCableCount; ++c) s += jac.rows[c][j] * tensions_n[c];
    tau[j] = rad2deg(s);
  }
  return tau;
}

std::vector<double> batch_excursions(const HandModel& model, const std::vector<Pose>& poses) {
  const ExcursionJacobian jac = jacobian(model, Pose{});
  std::vector<double> rows(kCableCount * kJointSlots);
  for (std::size_t c = 0; c < kCableCount; ++c) {
    for (std::size_t j = 0; j < kJointSlots; ++j) rows[c * kJointSlots + j] = jac.rows[c][j];
  }
  const auto& k = kernels::active();
  std::vector<double> out(poses.size() * kCableCount);
  for (std::size_t p = 0; p < poses.size(); ++p) {
    k.gemv_rows(rows.data(), kCableCount, kJointSlots, kJointSlots, poses[p].values().data(), out.data() + p * kCableCount);
  }
  return out;
}

}  // namespace catch919
