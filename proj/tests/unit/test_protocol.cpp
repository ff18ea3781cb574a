#include <doctest.h>

#include <nlohmann/json.hpp>

#include "catch919/protocol.hpp"

using namespace catch919;
using nlohmann::json;

TEST_SUITE("protocol") {
  TEST_CASE("each command parses and serializes back") {
    const std::vector<CommandMessage> all = {
        {"a", SetCable{CableId::IndexOL, 4.5}},
        {std::nullopt, SetDirectJoint{Slot::IndexMcpAbd, -12}},
        {"f", SetForce{Finger::Middle, 3}},
        {std::nullopt, SetResistance{true}},
        {"p", LoadPreset{17}},
        {std::nullopt, Reset{}},
        {"s", GetState{}},
    };
    for (const CommandMessage& m : all) {
      CAPTURE(command_json(m));
      CHECK(parse_command(command_json(m)) == m);
    }
  }

  TEST_CASE("wire format") {
    const CommandMessage m = parse_command(R"({"v":1,"cmd":"set_cable","cable":"ThumbPink","displacement_mm":12.5})");
    CHECK(std::get<SetCable>(m.command) == SetCable{CableId::ThumbPink, 12.5});
    CHECK_FALSE(m.id.has_value());
    const json j = json::parse(command_json({"x", SetForce{Finger::Index, 2}}));
    CHECK(j == json::parse(R"({"v":1,"id":"x","cmd":"set_force","finger":"Index","newtons":2.0})"));
    CHECK(command_name(Command{LoadPreset{}}) == "load_preset");
  }

  TEST_CASE("rejections carry a reason") {
    const char* bad[] = {
        "not json",
        "[1,2]",
        R"({"cmd":"reset"})",
        R"({"v":2,"cmd":"reset"})",
        R"({"v":1,"cmd":"fly"})",
        R"({"v":1,"cmd":"reset","extra":1})",
        R"({"v":1,"cmd":"set_cable","cable":"IndexXL","displacement_mm":1})",
        R"({"v":1,"cmd":"set_cable","cable":"IndexBL"})",
        R"({"v":1,"cmd":"set_cable","cable":"IndexBL","displacement_mm":"3"})",
        R"({"v":1,"cmd":"set_direct_joint","joint":"Index.MCP.Twist","deg":1})",
        R"({"v":1,"cmd":"set_force","finger":"Toe","newtons":1})",
        R"({"v":1,"cmd":"set_resistance","on":1})",
        R"({"v":1,"cmd":"load_preset","taxonomy_id":1.5})",
        R"({"v":1,"id":7,"cmd":"reset"})",
    };
    for (const char* text : bad) {
      CAPTURE(text);
      CHECK_THROWS_AS(parse_command(text), ProtocolError);
    }
  }

  TEST_CASE("ack round trip") {
    const Ack ok{5, true, "", "abc"};
    CHECK(parse_ack(ack_json(ok)) == ok);
    const Ack no{5, false, "out of range", std::nullopt};
    CHECK(parse_ack(ack_json(no)) == no);
    CHECK(json::parse(ack_json(ok)).contains("reason") == false);
  }

  TEST_CASE("state round trip and geometry") {
    const HandModel m = default_catch919();
    SessionState s;
    s.tick = 9;
    s.q = m.rest_pose();
    s.q[Slot::IndexPip] = 30;
    s.q[Slot::IndexDip] = coupled_dip(m, Finger::Index, s.q);
    s.commands_mm[idx(CableId::IndexBL)] = 3.25;
    s.tensions_n[idx(CableId::IndexBL)] = 1.5;
    s.direct_joints[Slot::IndexMcpAbd] = 10;
    s.posture_class = PostureClass::B_McpExtIpFlex;
    s.thumb_stage = ThumbStage::Pronating;
    s.thumb_progress = 0.25;
    s.external_force = ExternalForce{Finger::Index, 2.0, Point2{0.0, 1.0}};
    s.resistance = true;
    s.preset = 4;
    s.energy = 12.0;
    s.converged = true;
    s.chute_extension_deg = 1.5;
    const std::string text = state_json(s, m);
    CHECK(parse_state(text) == s);
    const json j = json::parse(text);
    CHECK(j["type"] == "state");
    CHECK(j["v"] == kProtocolVersion);
    CHECK(j["geometry"]["sagittal"]["Index"].size() == 5);
    CHECK(j["geometry"]["palm"]["reference_offset_deg"] == 75.0);
    CHECK(j["q"]["Index.PIP.FlexExt"] == 30.0);
    CHECK_THROWS_AS(parse_state(ack_json(Ack{})), ProtocolError);
  }

  TEST_CASE("null force and preset") {
    const HandModel m = default_catch919();
    SessionState s;
    s.q = m.rest_pose();
    const json j = json::parse(state_json(s, m));
    CHECK(j["external_force"].is_null());
    CHECK(j["preset"].is_null());
    CHECK(parse_state(j.dump()) == s);
  }
}
