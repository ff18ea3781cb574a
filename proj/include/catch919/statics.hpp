#pragma once

#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "catch919/hand_model.hpp"
#include "catch919/joint.hpp"
#include "catch919/tendon.hpp"

namespace catch919 {

// A force pressing on the palmar side of a fingertip. The push direction is
// the dorsal normal of the distal phalanx, fixed once per solve.
struct ExternalForce {
  Finger finger = Finger::Index;
  double magnitude_n = 0.0;
  // Unit vector in the sagittal plane; resolved from q_init when empty.
  std::optional<Point2> direction;

  bool operator==(const ExternalForce&) const = default;
};

struct SolverOptions {
  double gradient_tolerance = 1e-6;  // N.mm/deg on the projected gradient
  int max_iterations = 10000;
};

struct EquilibriumProblem {
  ModelPtr model;
  CableVector commands_mm{};               // reel-in displacement per cable
  std::map<Slot, double> direct_joints;    // target angle per direct servo
  std::optional<ExternalForce> external_force;
  double cable_stiffness_n_per_mm = 50.0;
  // Upper bounds standing in for object contact (thumb resistance).
  std::map<Slot, double> contact_stops;
  SolverOptions options;
};

struct EquilibriumResult {
  Pose q_star;
  double energy = 0.0;             // N.mm
  CableVector cable_tensions{};    // N
  double residual_norm = 0.0;      // projected gradient, N.mm/deg
  int iterations = 0;
  std::vector<JointId> active_limits;
  double chute_extension_deg = 0.0;
  bool converged = false;
};

// Slots the solver moves; everything else is fixed or derived.
const std::vector<Slot>& free_slots();

// Range the solver keeps a slot in: joint limits, contact stops, and the PIP
// travel at which a linkage DIP reaches its own limit.
std::pair<double, double> slot_bounds(const EquilibriumProblem& p, Slot s);

// Fills the derived slots of q: direct servo targets, linkage DIPs and the
// palm arch. Free slots are clamped into range (and under contact stops).
Pose complete_pose(const EquilibriumProblem& p, const Pose& q);

// Stretch of each cable beyond its slack length (mm, negative = slack).
CableVector cable_stretch(const EquilibriumProblem& p, const Pose& q);

// Cable rows of d(excursion)/d(free slot) with the linkage chain rule folded
// in; non-free columns are zero.
ExcursionJacobian reduced_jacobian(const HandModel& model, const Pose& q);

double potential_energy(const EquilibriumProblem& p, const Pose& q);

// dE/dq on the free slots (N.mm/deg), with the linkage and chute chain rule
// folded in. Derived and fixed slots are zero.
std::array<double, kJointSlots> energy_gradient(const EquilibriumProblem& p, const Pose& q);

// Throws InvariantError / ReferenceError for malformed problems.
void check_problem(const EquilibriumProblem& p);

EquilibriumResult solve_equilibrium(const EquilibriumProblem& p, const Pose& q_init);

// Same solve with the force direction resolved at q_init; rejects fingers
// without a sagittal fingertip chain.
EquilibriumResult apply_fingertip_force(const EquilibriumProblem& p, const Pose& q_init);

// Sagittal forward kinematics from the MCP (thumb: CMC) pin, x along the
// straight finger, flexion toward -y. Includes the chute slide on the index.
Point2 fingertip_position(const HandModel& model, Finger finger, const Pose& q);

// Joint pins and fingertip along the same chain, base first.
std::vector<Point2> finger_chain(const HandModel& model, Finger finger, const Pose& q);

// Dorsal normal of the distal phalanx at q.
Point2 dorsal_normal(const HandModel& model, Finger finger, const Pose& q);

// Force at which the chute starts to open on a straight index finger.
double chute_threshold_n(const HandModel& model);

}  // namespace catch919
