#pragma once

#include <vector>

#include "catch919/hand_model.hpp"
#include "catch919/joint.hpp"

namespace catch919 {

struct CableState {
  CableId cable = CableId::IndexBL;
  double commanded_displacement_mm = 0.0;
  double tension_n = 0.0;
};

// d(excursion)/d(angle) in mm/deg; rows are cables (CableId order), columns
// are joint slots.
struct ExcursionJacobian {
  std::array<std::array<double, kJointSlots>, kCableCount> rows{};

  double operator()(CableId c, Slot s) const { return rows[idx(c)][idx(s)]; }
};

using JointTorques = std::array<double, kJointSlots>;  // N.mm, flexion positive

// Cable length reeled in (mm) to hold q: sum of sign * r * angle(rad).
double excursion(const CableRoute& route, const Pose& q);

CableVector excursions(const HandModel& model, const Pose& q);

ExcursionJacobian jacobian(const HandModel& model, const Pose& q);

// tau = J^T f. Throws InvariantError on negative or non-finite tension.
JointTorques torques_from_tensions(const HandModel& model, const Pose& q, const CableVector& tensions_n);

// Excursions for many poses at once, row-major n_poses x kCableCount.
std::vector<double> batch_excursions(const HandModel& model, const std::vector<Pose>& poses);

}  // namespace catch919
