#include <algorithm>
#include <cmath>

#include "catch919/control.hpp"
#include "catch919/error.hpp"

namespace catch919 {
namespace {

double arm_on(const HandModel& m, CableId c, Slot s) {
  const CableRoute* r = m.route(c);
  if (r == nullptr) throw ControlError("cable " + std::string(to_string(c)) + " is not routed");
  for (const RouteSegment& seg : r->segments) {
    if (seg.joint == joint_id(s)) return seg.moment_arm_mm;
  }
  throw ControlError("cable " + std::string(to_string(c)) + " does not cross " + joint_name(s));
}

// Joint rotation (deg) bought by a cable displacement over a moment arm.
double mm_to_deg(double mm, double arm) { return rad2deg(mm / arm); }
double deg_to_mm(double deg, double arm) { return deg2rad(deg) * arm; }

}  // namespace

std::string_view to_string(ThumbStage s) {
  switch (s) {
    case ThumbStage::McpFlexing:
      return "McpFlexing";
    case ThumbStage::Pronating:
      return "Pronating";
    case ThumbStage::IpFlexing:
      return "IpFlexing";
  }
  return "unknown";
}

std::optional<ThumbStage> thumb_stage_from_string(std::string_view s) {
  for (ThumbStage t : {ThumbStage::McpFlexing, ThumbStage::Pronating, ThumbStage::IpFlexing}) {
    if (to_string(t) == s) return t;
  }
  return std::nullopt;
}

ThumbStager::ThumbStager(const HandModel& model) {
  const std::array<Slot, 3> slots = {Slot::ThumbMcpFlex, Slot::ThumbMcpProSup, Slot::ThumbIp};
  for (std::size_t k = 0; k < 3; ++k) {
    arm_mm_[k] = arm_on(model, CableId::ThumbPink, slots[k]);
    max_deg_[k] = model.joint(slots[k]).max_deg;
  }
}

void ThumbStager::reset() {
  last_mm_ = 0.0;
  state_ = ThumbTargets{};
}

ThumbTargets ThumbStager::step(double pink_displacement_mm, bool resistance) {
  if (pink_displacement_mm < last_mm_) reset();
  double remaining = std::max(0.0, pink_displacement_mm - last_mm_);
  last_mm_ = std::max(last_mm_, pink_displacement_mm);

  ThumbTargets& s = state_;
  if (resistance && s.stage == ThumbStage::McpFlexing) s.stage = ThumbStage::Pronating;

  std::array<double*, 3> angle = {&s.mcp_deg, &s.prosup_deg, &s.ip_deg};
  for (;;) {
    const auto k = static_cast<std::size_t>(s.stage);
    const double room = max_deg_[k] - *angle[k];
    const double take = std::min(room, mm_to_deg(remaining, arm_mm_[k]));
    *angle[k] += take;
    remaining -= deg_to_mm(take, arm_mm_[k]);
    const bool full = *angle[k] >= max_deg_[k] - 1e-12;
    if (full) *angle[k] = max_deg_[k];
    if (!full || s.stage == ThumbStage::IpFlexing) break;
    s.stage = static_cast<ThumbStage>(k + 1);
  }
  const auto k = static_cast<std::size_t>(s.stage);
  s.progress = max_deg_[k] > 0.0 ? std::clamp(*angle[k] / max_deg_[k], 0.0, 1.0) : 1.0;
  return s;
}

CmcTargets cmc_step(double lightblue_mm, double yellow_mm, const HandModel& model) {
  if (lightblue_mm < 0.0 || yellow_mm < 0.0) throw ControlError("CMC displacements must be >= 0");
  const JointSpec& flex = model.joint(Slot::ThumbCmcFlex);
  const JointSpec& abd = model.joint(Slot::ThumbCmcAbd);
  const double blue_abd = arm_on(model, CableId::ThumbLightBlue, Slot::ThumbCmcAbd);
  const double blue_flex = arm_on(model, CableId::ThumbLightBlue, Slot::ThumbCmcFlex);
  const double yellow_abd = arm_on(model, CableId::ThumbYellow, Slot::ThumbCmcAbd);

  const double net_deg = mm_to_deg(lightblue_mm, blue_abd) - mm_to_deg(yellow_mm, yellow_abd);
  const double wanted = abd.rest_deg + net_deg;
  CmcTargets t;
  t.abd_deg = std::clamp(wanted, abd.min_deg, abd.max_deg);
  const double excess_mm = deg_to_mm(std::max(0.0, wanted - abd.max_deg), blue_abd);
  t.flex_deg = std::clamp(flex.rest_deg + mm_to_deg(excess_mm, blue_flex), flex.min_deg, flex.max_deg);
  return t;
}

std::pair<double, double> cmc_displacements(const CmcTargets& targets, const HandModel& model) {
  const JointSpec& flex = model.joint(Slot::ThumbCmcFlex);
  const JointSpec& abd = model.joint(Slot::ThumbCmcAbd);
  const double blue_abd = arm_on(model, CableId::ThumbLightBlue, Slot::ThumbCmcAbd);
  const double blue_flex = arm_on(model, CableId::ThumbLightBlue, Slot::ThumbCmcFlex);
  const double yellow_abd = arm_on(model, CableId::ThumbYellow, Slot::ThumbCmcAbd);
  if (targets.flex_deg > flex.rest_deg && targets.abd_deg < abd.max_deg) {
    throw ControlError("CMC flexion is reached only with adduction at its limit");
  }
  double blue = 0.0;
  double yellow = 0.0;
  const double net = targets.abd_deg - abd.rest_deg;
  if (net >= 0.0) {
    blue = deg_to_mm(net, blue_abd);
  } else {
    yellow = deg_to_mm(-net, yellow_abd);
  }
  if (targets.flex_deg > flex.rest_deg) blue += deg_to_mm(targets.flex_deg - flex.rest_deg, blue_flex);
  return {blue, yellow};
}

}  // namespace catch919
