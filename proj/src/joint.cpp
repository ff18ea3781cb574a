#include "catch919/joint.hpp"

#include <algorithm>

namespace catch919 {
namespace {

constexpr std::array<JointId, kJointSlots> kSlotTable = {{
    {Finger::Thumb, JointKind::CMC, Axis::FlexExt},
    {Finger::Thumb, JointKind::CMC, Axis::AbdAdd},
    {Finger::Thumb, JointKind::MCP, Axis::FlexExt},
    {Finger::Thumb, JointKind::MCP, Axis::ProSup},
    {Finger::Thumb, JointKind::IP, Axis::FlexExt},
    {Finger::Index, JointKind::MCP, Axis::FlexExt},
    {Finger::Index, JointKind::MCP, Axis::AbdAdd},
    {Finger::Index, JointKind::PIP, Axis::FlexExt},
    {Finger::Index, JointKind::DIP, Axis::FlexExt},
    {Finger::Index, JointKind::DIP, Axis::Chute},
    {Finger::Middle, JointKind::MCP, Axis::FlexExt},
    {Finger::Middle, JointKind::PIP, Axis::FlexExt},
    {Finger::Middle, JointKind::DIP, Axis::FlexExt},
    {Finger::Ring, JointKind::MCP, Axis::FlexExt},
    {Finger::Ring, JointKind::PIP, Axis::FlexExt},
    {Finger::Ring, JointKind::DIP, Axis::FlexExt},
    {Finger::Little, JointKind::MCP, Axis::FlexExt},
    {Finger::Little, JointKind::PIP, Axis::FlexExt},
    {Finger::Little, JointKind::DIP, Axis::FlexExt},
    {Finger::Palm, JointKind::Arch, Axis::FlexExt},
}};

constexpr std::array<std::string_view, 6> kFingerNames = {"Thumb", "Index", "Middle",
                                                          "Ring",  "Little", "Palm"};
constexpr std::array<std::string_view, 6> kJointNames = {"CMC", "MCP", "PIP", "DIP", "IP", "Arch"};
constexpr std::array<std::string_view, 4> kAxisNames = {"FlexExt", "AbdAdd", "ProSup", "Chute"};

template <typename E, std::size_t N>
std::optional<E> lookup(const std::array<std::string_view, N>& names, std::string_view s) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == s) return static_cast<E>(i);
  }
  return std::nullopt;
}

}  // namespace

JointId joint_id(Slot s) { return kSlotTable[idx(s)]; }

std::optional<Slot> slot_of(const JointId& id) {
  auto it = std::find(kSlotTable.begin(), kSlotTable.end(), id);
  if (it == kSlotTable.end()) return std::nullopt;
  return static_cast<Slot>(it - kSlotTable.begin());
}

bool is_legal(const JointId& id) { return slot_of(id).has_value(); }

bool counts_as_dof(Slot s) { return s != Slot::IndexChute; }

std::string_view to_string(Finger f) { return kFingerNames[static_cast<std::size_t>(f)]; }
std::string_view to_string(JointKind j) { return kJointNames[static_cast<std::size_t>(j)]; }
std::string_view to_string(Axis a) { return kAxisNames[static_cast<std::size_t>(a)]; }

std::optional<Finger> finger_from_string(std::string_view s) { return lookup<Finger>(kFingerNames, s); }
std::optional<JointKind> joint_kind_from_string(std::string_view s) {
  return lookup<JointKind>(kJointNames, s);
}
std::optional<Axis> axis_from_string(std::string_view s) { return lookup<Axis>(kAxisNames, s); }

std::string joint_name(const JointId& id) {
  std::string out(to_string(id.finger));
  out += '.';
  out += to_string(id.joint);
  out += '.';
  out += to_string(id.axis);
  return out;
}

std::string joint_name(Slot s) { return joint_name(joint_id(s)); }

std::optional<Slot> slot_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kJointSlots; ++i) {
    if (joint_name(kSlotTable[i]) == name) return static_cast<Slot>(i);
  }
  return std::nullopt;
}

std::optional<JointId> parse_joint_name(std::string_view name) {
  const auto a = name.find('.');
  if (a == std::string_view::npos) return std::nullopt;
  const auto b = name.find('.', a + 1);
  if (b == std::string_view::npos) return std::nullopt;
  auto f = finger_from_string(name.substr(0, a));
  auto j = joint_kind_from_string(name.substr(a + 1, b - a - 1));
  auto x = axis_from_string(name.substr(b + 1));
  if (!f || !j || !x) return std::nullopt;
  return JointId{*f, *j, *x};
}

}  // namespace catch919
