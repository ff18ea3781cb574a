#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace catch919 {

enum class Finger { Thumb, Index, Middle, Ring, Little, Palm };
enum class JointKind { CMC, MCP, PIP, DIP, IP, Arch };
enum class Axis { FlexExt, AbdAdd, ProSup, Chute };

struct JointId {
  Finger finger{};
  JointKind joint{};
  Axis axis{};

  auto operator<=>(const JointId&) const = default;
};

// Fixed slot layout of every joint-angle vector. Only the legal
// (finger, joint, axis) combinations have a slot.
enum class Slot : std::size_t {
  ThumbCmcFlex,
  ThumbCmcAbd,
  ThumbMcpFlex,
  ThumbMcpProSup,
  ThumbIp,
  IndexMcpFlex,
  IndexMcpAbd,
  IndexPip,
  IndexDip,
  IndexChute,
  MiddleMcp,
  MiddlePip,
  MiddleDip,
  RingMcp,
  RingPip,
  RingDip,
  LittleMcp,
  LittlePip,
  LittleDip,
  PalmArch,
};

inline constexpr std::size_t kJointSlots = 20;

// The chute is a compliance slider and does not count as a degree of freedom.
inline constexpr std::size_t kDofCount = 19;

constexpr std::size_t idx(Slot s) { return static_cast<std::size_t>(s); }

JointId joint_id(Slot s);
std::optional<Slot> slot_of(const JointId& id);
bool is_legal(const JointId& id);
bool counts_as_dof(Slot s);

std::string_view to_string(Finger f);
std::string_view to_string(JointKind j);
std::string_view to_string(Axis a);
std::optional<Finger> finger_from_string(std::string_view s);
std::optional<JointKind> joint_kind_from_string(std::string_view s);
std::optional<Axis> axis_from_string(std::string_view s);

// "Index.MCP.FlexExt"
std::string joint_name(Slot s);
std::string joint_name(const JointId& id);
std::optional<Slot> slot_from_name(std::string_view name);
// Parses the three name parts without checking that the combination is legal.
std::optional<JointId> parse_joint_name(std::string_view name);

constexpr double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }
constexpr double rad2deg(double rad) { return rad * 180.0 / std::numbers::pi; }

// Joint-angle vector in degrees, indexed by slot.
class Pose {
 public:
  Pose() { values_.fill(0.0); }

  double& operator[](Slot s) { return values_[idx(s)]; }
  double operator[](Slot s) const { return values_[idx(s)]; }
  double& at(std::size_t i) { return values_.at(i); }
  double at(std::size_t i) const { return values_.at(i); }

  std::span<double, kJointSlots> values() { return values_; }
  std::span<const double, kJointSlots> values() const { return values_; }

  bool operator==(const Pose&) const = default;

 private:
  std::array<double, kJointSlots> values_;
};

// Sagittal-plane point in mm.
struct Point2 {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point2&) const = default;
};

}  // namespace catch919
