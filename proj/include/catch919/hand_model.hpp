#pragma once

#include <array>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "catch919/joint.hpp"
#include "catch919/linkage.hpp"

namespace catch919 {

enum class Drive { Cable, DirectServo, Passive, LinkageCoupled };

struct JointSpec {
  JointId id;
  double min_deg = 0.0;
  double max_deg = 0.0;
  double rest_deg = 0.0;
  Drive drive = Drive::Cable;

  bool operator==(const JointSpec&) const = default;
};

enum class PhalanxName { Metacarpal, Proximal, Middle, Distal };

struct PhalanxSpec {
  PhalanxName name = PhalanxName::Metacarpal;
  double length_mm = 0.0;

  bool operator==(const PhalanxSpec&) const = default;
};

enum class CableId {
  IndexBL,
  IndexOL,
  IndexPL,
  MiddleFlexor,
  RingLittleFlexor,
  ThumbYellow,
  ThumbLightBlue,
  ThumbPink,
};

inline constexpr std::size_t kCableCount = 8;
inline constexpr std::array<CableId, kCableCount> kAllCables = {
    CableId::IndexBL,      CableId::IndexOL,          CableId::IndexPL,     CableId::MiddleFlexor,
    CableId::RingLittleFlexor, CableId::ThumbYellow, CableId::ThumbLightBlue, CableId::ThumbPink};

constexpr std::size_t idx(CableId c) { return static_cast<std::size_t>(c); }

// Per-cable scalar (commands in mm, tensions in N), indexed by CableId.
using CableVector = std::array<double, kCableCount>;

struct RouteSegment {
  JointId joint;
  double moment_arm_mm = 0.0;
  int sign = 1;  // +1: tension flexes the joint, -1: tension extends it

  bool operator==(const RouteSegment&) const = default;
};

struct CableRoute {
  CableId cable = CableId::IndexBL;
  std::vector<RouteSegment> segments;
  bool slack_allowed = true;

  bool operator==(const CableRoute&) const = default;
};

enum class SpringKind { Torsional, LinearReturn };

// Which physical spring of the hand a SpringSpec stands for.
enum class SpringRole { Spring1, Spring2, ThumbTorsional, ThumbCmcReturn, ThumbReturn, FingerReturn };

struct SpringSpec {
  SpringRole role = SpringRole::FingerReturn;
  JointId joint;
  double stiffness_nmm_per_deg = 0.0;
  double rest_deg = 0.0;
  SpringKind kind = SpringKind::Torsional;
  // Constant torque that must be overcome before the joint leaves rest. Only
  // allowed when rest sits on a joint limit.
  double preload_nmm = 0.0;

  bool operator==(const SpringSpec&) const = default;
};

enum class ActuatorKind { CableSpool, DirectJoint };

struct ActuatorSpec {
  int id = 0;
  ActuatorKind kind = ActuatorKind::CableSpool;
  std::variant<CableId, JointId> target;
  double max_torque_nmm = 0.0;
  double spool_radius_mm = 0.0;

  bool operator==(const ActuatorSpec&) const = default;
};

inline constexpr double kNmmPerKgcm = 98.0665;

struct HandModel {
  std::array<JointSpec, kJointSlots> joints{};
  std::map<Finger, std::vector<PhalanxSpec>> phalanges;
  std::vector<CableRoute> routes;
  std::vector<SpringSpec> springs;
  std::vector<ActuatorSpec> actuators;
  std::map<Finger, FourBarDims> linkages;
  double palm_coupling_gain = 0.2;
  // Thumb-to-middle proximal phalanx angle in the palm plane at rest.
  double reference_pose_offset_deg = 75.0;
  // Axial slide of the fingertip per degree of chute extension.
  double chute_slide_mm_per_deg = 0.1;

  bool operator==(const HandModel&) const = default;

  const JointSpec& joint(Slot s) const { return joints[idx(s)]; }
  const CableRoute* route(CableId c) const;
  const SpringSpec* spring_at(Slot s) const;
  const FourBarDims* linkage(Finger f) const;
  double phalanx_length(Finger f, PhalanxName name) const;  // 0 when absent
  Pose rest_pose() const;
};

using ModelPtr = std::shared_ptr<const HandModel>;

std::string_view to_string(CableId c);
std::optional<CableId> cable_from_string(std::string_view s);
std::string_view to_string(Drive d);
std::string_view to_string(PhalanxName p);
std::string_view to_string(SpringRole r);
std::string_view to_string(SpringKind k);
std::string_view to_string(ActuatorKind k);

struct LoadOptions {
  // Joint ranges, actuator count/torque and the spring set must match the
  // physical hand. Off for ablation studies and custom hands.
  bool enforce_reference_hand = true;
};

// Structural checks always run; reference checks per options. Throws
// InvariantError / ReferenceError naming the offending path.
void validate(const HandModel& model, const LoadOptions& options = {});

// Hand Description File (JSON) round trip.
HandModel load_model(std::string_view document, const LoadOptions& options = {});
HandModel load_model_file(const std::string& path, const LoadOptions& options = {});
std::string serialize(const HandModel& model);
// Hand Description File fragment holding one linkage's dims.
std::string dims_fragment(const FourBarDims& dims);

HandModel default_catch919();
ModelPtr default_model_ptr();

// Clamps every slot into range; linkage-coupled DIP slots are recomputed from
// PIP (and the chute on the index) and the palm arch from ring/little MCP.
Pose clamp_pose(const HandModel& model, const Pose& q);

// DIP angle implied by the linkage for the given finger's PIP in q.
double coupled_dip(const HandModel& model, Finger finger, const Pose& q);

// Palm arch implied by ring and little MCP flexion.
double palm_arch(const HandModel& model, const Pose& q);

std::size_t dof_count(const HandModel& model);

// The nine (slot, min, max) joint ranges of the physical index and thumb.
struct ReferenceRange {
  Slot slot;
  double min_deg;
  double max_deg;
};
const std::array<ReferenceRange, 9>& reference_ranges();

// Linkage dims for the index finger; the other fingers scale these by their
// phalanx scale factor.
FourBarDims canonical_index_linkage();

}  // namespace catch919
