#include <doctest.h>

#include <random>
#include <thread>

#include "catch919/session.hpp"

using namespace catch919;

namespace {

CommandMessage msg(Command c) { return {std::nullopt, std::move(c)}; }

void in_limits(const HandModel& m, const Pose& q) {
  for (std::size_t i = 0; i < kJointSlots; ++i) {
    CHECK(q.at(i) >= m.joints[i].min_deg - 1e-9);
    CHECK(q.at(i) <= m.joints[i].max_deg + 1e-9);
  }
}

}  // namespace

TEST_SUITE("session") {
  TEST_CASE("starts at rest, reset bumps the tick") {
    SimSession s(default_model_ptr());
    CHECK(s.snapshot().tick == 0);
    CHECK(s.snapshot().q == s.model().rest_pose());
    const ApplyResult r = s.apply(msg(Reset{}));
    CHECK(r.ack.accepted);
    CHECK(r.ack.tick == 1);
    REQUIRE(r.state.has_value());
    CHECK(r.state->q == s.model().rest_pose());
  }

  TEST_CASE("purple line hyperextends the MCP") {
    SimSession s(default_model_ptr());
    REQUIRE(s.apply(msg(SetCable{CableId::IndexBL, -5})).ack.accepted);
    REQUIRE(s.apply(msg(SetCable{CableId::IndexOL, -5})).ack.accepted);
    const ApplyResult r = s.apply(msg(SetCable{CableId::IndexPL, 5}));
    REQUIRE(r.ack.accepted);
    CHECK(r.state->q[Slot::IndexMcpFlex] < 0);
    CHECK(r.state->posture_class == PostureClass::A_McpExtIpExt);
    CHECK(r.state->tensions_n[idx(CableId::IndexPL)] > 0);
  }

  TEST_CASE("a held blue line couples MCP hyperextension into PIP flexion") {
    SimSession s(default_model_ptr());
    const ApplyResult r = s.apply(msg(SetCable{CableId::IndexPL, 5}));
    REQUIRE(r.ack.accepted);
    CHECK(r.state->q[Slot::IndexMcpFlex] < 0);
    CHECK(r.state->q[Slot::IndexPip] > 0);
    CHECK(r.state->tensions_n[idx(CableId::IndexBL)] > 0);
  }

  TEST_CASE("rejected commands leave the tick and state alone") {
    SimSession s(default_model_ptr());
    s.apply(msg(SetCable{CableId::IndexBL, 3}));
    const SessionState before = s.snapshot();
    const Command bad[] = {SetCable{CableId::IndexBL, 1e6},        SetDirectJoint{Slot::IndexPip, 10},
                           SetDirectJoint{Slot::IndexMcpAbd, 31},  SetForce{Finger::Thumb, 1},
                           SetForce{Finger::Index, 51},            SetForce{Finger::Index, -1},
                           LoadPreset{34}};
    for (const Command& c : bad) {
      const ApplyResult r = s.apply(msg(c));
      CHECK_FALSE(r.ack.accepted);
      CHECK_FALSE(r.ack.reason.empty());
      CHECK(r.ack.tick == before.tick);
      CHECK_FALSE(r.state.has_value());
    }
    CHECK(s.snapshot() == before);
    CHECK(s.ack_log().size() == 1);
    const ApplyResult t = s.apply_text("{oops");
    CHECK_FALSE(t.ack.accepted);
    CHECK(s.snapshot() == before);
  }

  TEST_CASE("get_state is answered without a tick") {
    SimSession s(default_model_ptr());
    const ApplyResult r = s.apply({"q", GetState{}});
    CHECK(r.ack.accepted);
    CHECK(r.ack.id == "q");
    CHECK(r.ack.tick == 0);
    CHECK(s.ack_log().empty());
  }

  TEST_CASE("presets land within the residual bound") {
    SimSession s(default_model_ptr());
    for (int id : {1, 11, 17, 33}) {
      const ApplyResult r = s.apply(msg(LoadPreset{id}));
      REQUIRE(r.ack.accepted);
      CHECK(r.state->preset == id);
      const Pose& t = load_catalog()[static_cast<std::size_t>(id - 1)].targets;
      for (std::size_t i = 0; i < kJointSlots; ++i) {
        if (!counts_as_dof(static_cast<Slot>(i))) continue;
        CAPTURE(joint_name(static_cast<Slot>(i)));
        CHECK(std::abs(r.state->q.at(i) - t.at(i)) <= 5.0);
      }
    }
  }

  TEST_CASE("force, resistance and servo commands show up in the state") {
    SimSession s(default_model_ptr());
    s.apply(msg(SetCable{CableId::IndexOL, 1}));
    s.apply(msg(SetCable{CableId::IndexPL, 1}));
    ApplyResult r = s.apply(msg(SetForce{Finger::Index, 20}));
    REQUIRE(r.ack.accepted);
    REQUIRE(r.state->external_force.has_value());
    CHECK(r.state->chute_extension_deg == doctest::Approx(30));
    r = s.apply(msg(SetForce{Finger::Index, 0}));
    CHECK_FALSE(r.state->external_force.has_value());
    CHECK(r.state->chute_extension_deg == 0);
    r = s.apply(msg(SetDirectJoint{Slot::IndexMcpAbd, 15}));
    CHECK(r.state->q[Slot::IndexMcpAbd] == 15);
    CHECK(r.state->direct_joints.at(Slot::IndexMcpAbd) == 15);
    r = s.apply(msg(SetResistance{true}));
    CHECK(r.state->resistance);
  }

  TEST_CASE("pink line ramp walks the thumb stages") {
    SimSession s(default_model_ptr());
    int last = 0;
    const double hi = cable_command_range(s.model(), CableId::ThumbPink, 50.0).second;
    for (double mm = 1; mm <= hi; mm += 1) {
      const ApplyResult r = s.apply(msg(SetCable{CableId::ThumbPink, mm}));
      REQUIRE(r.ack.accepted);
      const int k = static_cast<int>(r.state->thumb_stage);
      CHECK(k >= last);
      last = k;
    }
    CHECK(last == static_cast<int>(ThumbStage::IpFlexing));
  }

  TEST_CASE("replaying the log reproduces every state") {
    SimSession s(default_model_ptr());
    std::vector<SessionState> seen;
    const Command script[] = {SetCable{CableId::IndexBL, 4},  SetCable{CableId::IndexPL, 1}, SetForce{Finger::Index, 3},
                              SetResistance{true},             SetCable{CableId::ThumbPink, 9}, LoadPreset{2},
                              SetDirectJoint{Slot::IndexMcpAbd, -5}, Reset{},                     SetCable{CableId::MiddleFlexor, 6}};
    for (const Command& c : script) {
      const ApplyResult r = s.apply(msg(c));
      REQUIRE(r.ack.accepted);
      seen.push_back(*r.state);
    }
    const std::vector<SessionState> again = replay(s.model_ptr(), s.ack_log());
    REQUIRE(again.size() == seen.size());
    for (std::size_t i = 0; i < seen.size(); ++i) CHECK(again[i] == seen[i]);
  }

  TEST_CASE("concurrent clients see a consistent serial history") {
    SimSession s(default_model_ptr());
    std::vector<std::thread> threads;
    for (int t = 0; t < 4; ++t) {
      threads.emplace_back([&s, t] {
        for (int i = 0; i < 10; ++i) {
          const auto c = static_cast<CableId>(t);
          s.apply({std::to_string(t), SetCable{c, 0.5 * i}});
          s.apply({std::nullopt, GetState{}});
        }
      });
    }
    for (auto& th : threads) th.join();
    const auto log = s.ack_log();
    CHECK(log.size() == 40);
    for (std::size_t i = 0; i < log.size(); ++i) CHECK(log[i].tick == i + 1);
    CHECK(s.snapshot().tick == 40);
    CHECK(replay(s.model_ptr(), log).back() == s.snapshot());
  }

  TEST_CASE("limits hold under random command streams") {
    SimSession s(default_model_ptr());
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> pick(0, 7);
    std::uniform_real_distribution<double> u(0, 1);
    for (int i = 0; i < 60; ++i) {
      const auto c = static_cast<CableId>(pick(rng));
      const auto [lo, hi] = cable_command_range(s.model(), c, 50.0);
      const ApplyResult r = s.apply(msg(SetCable{c, lo + u(rng) * (hi - lo)}));
      REQUIRE(r.ack.accepted);
      in_limits(s.model(), r.state->q);
      for (double t : r.state->tensions_n) CHECK(t >= 0);
    }
  }
}
