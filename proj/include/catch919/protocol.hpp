#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "catch919/control.hpp"
#include "catch919/error.hpp"
#include "catch919/hand_model.hpp"
#include "catch919/statics.hpp"

namespace catch919 {

inline constexpr int kProtocolVersion = 1;

class ProtocolError : public Error {
 public:
  using Error::Error;
};

struct SetCable {
  CableId cable = CableId::IndexBL;
  double displacement_mm = 0.0;
  bool operator==(const SetCable&) const = default;
};
struct SetDirectJoint {
  Slot joint = Slot::IndexMcpAbd;
  double deg = 0.0;
  bool operator==(const SetDirectJoint&) const = default;
};
struct SetForce {
  Finger finger = Finger::Index;
  double newtons = 0.0;
  bool operator==(const SetForce&) const = default;
};
struct SetResistance {
  bool on = false;
  bool operator==(const SetResistance&) const = default;
};
struct LoadPreset {
  int taxonomy_id = 0;
  bool operator==(const LoadPreset&) const = default;
};
struct Reset {
  bool operator==(const Reset&) const = default;
};
// Asks for the current state; never changes the session.
struct GetState {
  bool operator==(const GetState&) const = default;
};

using Command = std::variant<SetCable, SetDirectJoint, SetForce, SetResistance, LoadPreset, Reset, GetState>;

struct CommandMessage {
  std::optional<std::string> id;  // echoed in the ack
  Command command;
  bool operator==(const CommandMessage&) const = default;
};

std::string_view command_name(const Command& c);

// Throws ProtocolError with a readable reason.
CommandMessage parse_command(std::string_view text);
std::string command_json(const CommandMessage& m);

struct Ack {
  std::uint64_t tick = 0;
  bool accepted = false;
  std::string reason;
  std::optional<std::string> id;
  bool operator==(const Ack&) const = default;
};

std::string ack_json(const Ack& a);
Ack parse_ack(std::string_view text);

struct SessionState {
  std::uint64_t tick = 0;
  Pose q;
  CableVector commands_mm{};
  CableVector tensions_n{};
  std::map<Slot, double> direct_joints;
  PostureClass posture_class = PostureClass::A_McpExtIpExt;
  ThumbStage thumb_stage = ThumbStage::McpFlexing;
  double thumb_progress = 0.0;
  std::optional<ExternalForce> external_force;
  bool resistance = false;
  std::optional<int> preset;
  double energy = 0.0;
  bool converged = true;
  double chute_extension_deg = 0.0;
  bool operator==(const SessionState&) const = default;
};

// Full state document, with the sagittal chains of every finger and the
// palm-plane angles a viewer needs.
std::string state_json(const SessionState& s, const HandModel& model);
// Reads back the state fields (geometry is derived and ignored).
SessionState parse_state(std::string_view text);

}  // namespace catch919
