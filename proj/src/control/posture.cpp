#include <array>

#include "catch919/control.hpp"

namespace catch919 {
namespace {

using L = ActivationLevel;
constexpr L kOff = L::Inactive;
constexpr L kOn = L::Active;
constexpr L kCond = L::Conditional;

// Robot control strategies, rows A..F, columns BL OL SP PL.
constexpr std::array<ActivationSet, 6> kRobotTable = {{
    {kOff, kOff, kCond, kOn},
    {kOn, kOn, kCond, kOn},
    {kOn, kOn, kCond, kCond},
    {kOn, kOn, kCond, kCond},
    {kCond, kOn, kCond, kOff},
    {kCond, kOn, kCond, kOff},
}};

// Human muscle activation, columns FDP FDS PI/DI EDC, copied as printed.
constexpr std::array<MuscleSet, 6> kHumanTable = {{
    {kOff, kOff, kOn, kOn},
    {kOn, kOn, kOff, kOn},
    {kOn, kOn, kOn, kCond},
    {kOn, kOn, kOff, kCond},
    {kCond, kOn, kOn, kOff},
    {kCond, kOn, kOff, kOff},
}};

}  // namespace

std::string_view to_string(PostureClass c) {
  static constexpr std::array<std::string_view, 6> names = {"A", "B", "C", "D", "E", "F"};
  return names[static_cast<std::size_t>(c)];
}

std::string_view describe(PostureClass c) {
  switch (c) {
    case PostureClass::A_McpExtIpExt:
      return "MCP (hyper)extension, IP extension";
    case PostureClass::B_McpExtIpFlex:
      return "MCP (hyper)extension, IP flexion";
    case PostureClass::C_McpFlexIpExt:
      return "MCP flexion, IP extension";
    case PostureClass::D_McpFlexIpFlex:
      return "MCP flexion, IP flexion";
    case PostureClass::E_ForcedPipExt:
      return "external force, PIP extension";
    case PostureClass::F_ForcedPipFlex:
      return "external force, PIP flexion";
  }
  return "";
}

std::optional<PostureClass> posture_from_string(std::string_view s) {
  for (PostureClass c : kAllPostureClasses) {
    if (to_string(c) == s) return c;
  }
  return std::nullopt;
}

bool is_forced(PostureClass c) { return c == PostureClass::E_ForcedPipExt || c == PostureClass::F_ForcedPipFlex; }

std::string_view to_string(ActivationLevel a) {
  switch (a) {
    case ActivationLevel::Active:
      return "+";
    case ActivationLevel::Conditional:
      return "(+)";
    case ActivationLevel::Inactive:
      break;
  }
  return "";
}

PostureClass classify_posture(const Pose& q, bool forced, double eps_deg) {
  const bool ip_flexed = q[Slot::IndexPip] > eps_deg;
  if (forced) return ip_flexed ? PostureClass::F_ForcedPipFlex : PostureClass::E_ForcedPipExt;
  const bool mcp_flexed = q[Slot::IndexMcpFlex] > eps_deg;
  if (mcp_flexed) return ip_flexed ? PostureClass::D_McpFlexIpFlex : PostureClass::C_McpFlexIpExt;
  return ip_flexed ? PostureClass::B_McpExtIpFlex : PostureClass::A_McpExtIpExt;
}

ActivationSet activation_for(PostureClass c) { return kRobotTable[static_cast<std::size_t>(c)]; }

MuscleSet human_reference_activation(HumanPosture p) { return kHumanTable[static_cast<std::size_t>(p)]; }

HumanPosture human_analog(PostureClass c) { return static_cast<HumanPosture>(static_cast<std::size_t>(c)); }

ActivationSet robot_equivalent(const MuscleSet& m) { return {m.fds, m.fdp, m.pidi, m.edc}; }

}  // namespace catch919
