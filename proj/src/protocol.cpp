#include "catch919/protocol.hpp"

#include <cmath>

#include "json_util.hpp"

namespace catch919 {
namespace {

using detail::Json;

constexpr std::array<Finger, 5> kDigits = {Finger::Thumb, Finger::Index, Finger::Middle, Finger::Ring, Finger::Little};

const Json& field(const Json& j, const char* key) {
  if (!j.contains(key)) throw ProtocolError(std::string("missing field '") + key + "'");
  return j.at(key);
}

double number(const Json& j, const char* key) {
  const Json& v = field(j, key);
  if (!v.is_number()) throw ProtocolError(std::string("field '") + key + "' must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ProtocolError(std::string("field '") + key + "' must be finite");
  return d;
}

std::string text(const Json& j, const char* key) {
  const Json& v = field(j, key);
  if (!v.is_string()) throw ProtocolError(std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

void only(const Json& j, std::initializer_list<const char*> keys) {
  for (const auto& [k, v] : j.items()) {
    bool known = false;
    for (const char* key : keys) known = known || k == key;
    if (!known) throw ProtocolError("unknown field '" + k + "'");
  }
}

CableId cable_named(const std::string& s) {
  auto c = cable_from_string(s);
  if (!c) throw ProtocolError("unknown cable '" + s + "'");
  return *c;
}

Finger finger_named(const std::string& s) {
  auto f = finger_from_string(s);
  if (!f) throw ProtocolError("unknown finger '" + s + "'");
  return *f;
}

Slot slot_named(const std::string& s) {
  auto slot = slot_from_name(s);
  if (!slot) throw ProtocolError("unknown joint '" + s + "'");
  return *slot;
}

Json point(const Point2& p) { return Json::array({p.x, p.y}); }

}  // namespace

std::string_view command_name(const Command& c) {
  static constexpr std::array<std::string_view, 7> names = {"set_cable",   "set_direct_joint", "set_force", "set_resistance",
                                                            "load_preset", "reset",            "get_state"};
  return names[c.index()];
}

CommandMessage parse_command(std::string_view raw) {
  Json j;
  try {
    j = Json::parse(raw);
  } catch (const Json::parse_error& e) {
    throw ProtocolError(std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw ProtocolError("message must be a JSON object");
  const Json& v = field(j, "v");
  if (!v.is_number_integer() || v.get<long long>() != kProtocolVersion) {
    throw ProtocolError("unsupported protocol version " + v.dump());
  }
  CommandMessage m;
  if (j.contains("id")) {
    if (!j["id"].is_string()) throw ProtocolError("field 'id' must be a string");
    m.id = j["id"].get<std::string>();
  }
  const std::string cmd = text(j, "cmd");
  if (cmd == "set_cable") {
    only(j, {"v", "id", "cmd", "cable", "displacement_mm"});
    m.command = SetCable{cable_named(text(j, "cable")), number(j, "displacement_mm")};
  } else if (cmd == "set_direct_joint") {
    only(j, {"v", "id", "cmd", "joint", "deg"});
    m.command = SetDirectJoint{slot_named(text(j, "joint")), number(j, "deg")};
  } else if (cmd == "set_force") {
    only(j, {"v", "id", "cmd", "finger", "newtons"});
    m.command = SetForce{finger_named(text(j, "finger")), number(j, "newtons")};
  } else if (cmd == "set_resistance") {
    only(j, {"v", "id", "cmd", "on"});
    const Json& on = field(j, "on");
    if (!on.is_boolean()) throw ProtocolError("field 'on' must be a boolean");
    m.command = SetResistance{on.get<bool>()};
  } else if (cmd == "load_preset") {
    only(j, {"v", "id", "cmd", "taxonomy_id"});
    const Json& t = field(j, "taxonomy_id");
    if (!t.is_number_integer()) throw ProtocolError("field 'taxonomy_id' must be an integer");
    m.command = LoadPreset{t.get<int>()};
  } else if (cmd == "reset") {
    only(j, {"v", "id", "cmd"});
    m.command = Reset{};
  } else if (cmd == "get_state") {
    only(j, {"v", "id", "cmd"});
    m.command = GetState{};
  } else {
    throw ProtocolError("unknown command '" + cmd + "'");
  }
  return m;
}

std::string command_json(const CommandMessage& m) {
  Json j;
  j["v"] = kProtocolVersion;
  if (m.id) j["id"] = *m.id;
  j["cmd"] = std::string(command_name(m.command));
  std::visit(
      [&](const auto& c) {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, SetCable>) {
          j["cable"] = std::string(to_string(c.cable));
          j["displacement_mm"] = c.displacement_mm;
        } else if constexpr (std::is_same_v<T, SetDirectJoint>) {
          j["joint"] = joint_name(c.joint);
          j["deg"] = c.deg;
        } else if constexpr (std::is_same_v<T, SetForce>) {
          j["finger"] = std::string(to_string(c.finger));
          j["newtons"] = c.newtons;
        } else if constexpr (std::is_same_v<T, SetResistance>) {
          j["on"] = c.on;
        } else if constexpr (std::is_same_v<T, LoadPreset>) {
          j["taxonomy_id"] = c.taxonomy_id;
        }
      },
      m.command);
  return j.dump();
}

std::string ack_json(const Ack& a) {
  Json j;
  j["v"] = kProtocolVersion;
  j["type"] = "ack";
  j["tick"] = a.tick;
  if (a.id) j["id"] = *a.id;
  j["accepted"] = a.accepted;
  if (!a.accepted) j["reason"] = a.reason;
  return j.dump();
}

Ack parse_ack(std::string_view raw) {
  const Json j = detail::parse_json(raw, "ack");
  if (j.value("type", "") != "ack") throw ProtocolError("not an ack");
  Ack a;
  a.tick = field(j, "tick").get<std::uint64_t>();
  a.accepted = field(j, "accepted").get<bool>();
  if (j.contains("reason")) a.reason = j["reason"].get<std::string>();
  if (j.contains("id")) a.id = j["id"].get<std::string>();
  return a;
}

std::string state_json(const SessionState& s, const HandModel& model) {
  Json j;
  j["v"] = kProtocolVersion;
  j["type"] = "state";
  j["tick"] = s.tick;
  Json q = Json::object();
  for (std::size_t i = 0; i < kJointSlots; ++i) q[joint_name(static_cast<Slot>(i))] = s.q.at(i);
  j["q"] = std::move(q);
  Json cmd = Json::object();
  Json ten = Json::object();
  for (CableId c : kAllCables) {
    cmd[std::string(to_string(c))] = s.commands_mm[idx(c)];
    ten[std::string(to_string(c))] = s.tensions_n[idx(c)];
  }
  j["commands_mm"] = std::move(cmd);
  j["tensions_n"] = std::move(ten);
  Json dj = Json::object();
  for (const auto& [slot, deg] : s.direct_joints) dj[joint_name(slot)] = deg;
  j["direct_joints"] = std::move(dj);
  j["posture_class"] = std::string(to_string(s.posture_class));
  j["thumb_stage"] = std::string(to_string(s.thumb_stage));
  j["thumb_progress"] = s.thumb_progress;
  if (s.external_force) {
    Json f;
    f["finger"] = std::string(to_string(s.external_force->finger));
    f["newtons"] = s.external_force->magnitude_n;
    const Point2 d = s.external_force->direction.value_or(Point2{0.0, 0.0});
    f["direction"] = point(d);
    j["external_force"] = std::move(f);
  } else {
    j["external_force"] = nullptr;
  }
  j["resistance"] = s.resistance;
  j["preset"] = s.preset ? Json(*s.preset) : Json(nullptr);
  j["energy"] = s.energy;
  j["converged"] = s.converged;
  j["chute_extension_deg"] = s.chute_extension_deg;

  Json sag = Json::object();
  for (Finger f : kDigits) {
    Json chain = Json::array();
    for (const Point2& p : finger_chain(model, f, s.q)) chain.push_back(point(p));
    sag[std::string(to_string(f))] = std::move(chain);
  }
  Json palm;
  palm["thumb_cmc_abd_deg"] = s.q[Slot::ThumbCmcAbd];
  palm["thumb_cmc_flex_deg"] = s.q[Slot::ThumbCmcFlex];
  palm["index_abd_deg"] = s.q[Slot::IndexMcpAbd];
  palm["arch_deg"] = s.q[Slot::PalmArch];
  palm["reference_offset_deg"] = model.reference_pose_offset_deg;
  Json geo;
  geo["sagittal"] = std::move(sag);
  geo["palm"] = std::move(palm);
  j["geometry"] = std::move(geo);
  return j.dump();
}

SessionState parse_state(std::string_view raw) {
  const Json j = detail::parse_json(raw, "state");
  if (!j.is_object() || j.value("type", "") != "state") throw ProtocolError("not a state document");
  if (field(j, "v") != kProtocolVersion) throw ProtocolError("unsupported protocol version");
  SessionState s;
  s.tick = field(j, "tick").get<std::uint64_t>();
  const Json& q = field(j, "q");
  for (std::size_t i = 0; i < kJointSlots; ++i) s.q.at(i) = number(q, joint_name(static_cast<Slot>(i)).c_str());
  const Json& cmd = field(j, "commands_mm");
  const Json& ten = field(j, "tensions_n");
  for (CableId c : kAllCables) {
    const std::string name(to_string(c));
    s.commands_mm[idx(c)] = number(cmd, name.c_str());
    s.tensions_n[idx(c)] = number(ten, name.c_str());
  }
  for (const auto& [k, v] : field(j, "direct_joints").items()) s.direct_joints[slot_named(k)] = v.get<double>();
  auto pc = posture_from_string(text(j, "posture_class"));
  if (!pc) throw ProtocolError("unknown posture class");
  s.posture_class = *pc;
  auto st = thumb_stage_from_string(text(j, "thumb_stage"));
  if (!st) throw ProtocolError("unknown thumb stage");
  s.thumb_stage = *st;
  s.thumb_progress = number(j, "thumb_progress");
  const Json& f = field(j, "external_force");
  if (!f.is_null()) {
    ExternalForce ef;
    ef.finger = finger_named(text(f, "finger"));
    ef.magnitude_n = number(f, "newtons");
    const Json& d = field(f, "direction");
    ef.direction = Point2{d.at(0).get<double>(), d.at(1).get<double>()};
    s.external_force = ef;
  }
  s.resistance = field(j, "resistance").get<bool>();
  if (!field(j, "preset").is_null()) s.preset = j["preset"].get<int>();
  s.energy = number(j, "energy");
  s.converged = field(j, "converged").get<bool>();
  s.chute_extension_deg = number(j, "chute_extension_deg");
  return s;
}

}  // namespace catch919
