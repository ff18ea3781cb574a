#include <doctest.h>

#include <set>
#include <stdexcept>

#include "catch919/joint.hpp"

using namespace catch919;

TEST_SUITE("joint") {
  TEST_CASE("every slot has a distinct legal id and a name that parses back") {
    std::set<JointId> seen;
    for (std::size_t i = 0; i < kJointSlots; ++i) {
      const auto s = static_cast<Slot>(i);
      const JointId id = joint_id(s);
      CHECK(is_legal(id));
      CHECK(seen.insert(id).second);
      CHECK(slot_of(id) == s);
      CHECK(slot_from_name(joint_name(s)) == s);
    }
  }

  TEST_CASE("legal combinations are exactly the slot table") {
    int legal = 0;
    for (int f = 0; f <= static_cast<int>(Finger::Palm); ++f)
      for (int j = 0; j <= static_cast<int>(JointKind::Arch); ++j)
        for (int a = 0; a <= static_cast<int>(Axis::Chute); ++a)
          legal += is_legal({static_cast<Finger>(f), static_cast<JointKind>(j), static_cast<Axis>(a)});
    CHECK(legal == static_cast<int>(kJointSlots));
    CHECK_FALSE(is_legal({Finger::Middle, JointKind::MCP, Axis::AbdAdd}));
    CHECK_FALSE(is_legal({Finger::Thumb, JointKind::PIP, Axis::FlexExt}));
  }

  TEST_CASE("19 degrees of freedom, chute excluded") {
    std::size_t n = 0;
    for (std::size_t i = 0; i < kJointSlots; ++i) n += counts_as_dof(static_cast<Slot>(i));
    CHECK(n == kDofCount);
    CHECK_FALSE(counts_as_dof(Slot::IndexChute));
    CHECK(counts_as_dof(Slot::PalmArch));
  }

  TEST_CASE("names") {
    CHECK(joint_name(Slot::IndexMcpFlex) == "Index.MCP.FlexExt");
    CHECK(joint_name(Slot::ThumbMcpProSup) == "Thumb.MCP.ProSup");
    CHECK_FALSE(slot_from_name("Index.MCP").has_value());
    CHECK_FALSE(slot_from_name("Middle.MCP.AbdAdd").has_value());
    CHECK(parse_joint_name("Middle.MCP.AbdAdd").has_value());
    CHECK_FALSE(finger_from_string("Pinky").has_value());
  }

  TEST_CASE("pose is value-initialized and compares by value") {
    Pose a, b;
    for (double v : a.values()) CHECK(v == 0.0);
    b[Slot::IndexPip] = 10;
    CHECK(a != b);
    a[Slot::IndexPip] = 10;
    CHECK(a == b);
    CHECK_THROWS_AS(a.at(kJointSlots), std::out_of_range);
  }
}
