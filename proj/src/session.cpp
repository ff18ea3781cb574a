#include "catch919/session.hpp"

#include <algorithm>
#include <cmath>

#include "catch919/tendon.hpp"

namespace catch919 {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

constexpr double kMaxForceN = 50.0;

double spool_capacity_n(const HandModel& m, CableId c) {
  for (const ActuatorSpec& a : m.actuators) {
    if (a.kind == ActuatorKind::CableSpool && std::get<CableId>(a.target) == c && a.spool_radius_mm > 0.0) {
      return a.max_torque_nmm / a.spool_radius_mm;
    }
  }
  return 0.0;
}

}  // namespace

std::pair<double, double> cable_command_range(const HandModel& model, CableId cable, double k) {
  const CableRoute* r = model.route(cable);
  if (r == nullptr) throw ControlError("cable " + std::string(to_string(cable)) + " is not routed");
  const Pose rest = model.rest_pose();
  const double e0 = excursion(*r, rest);
  double lo = 0.0;
  double hi = 0.0;
  for (const RouteSegment& s : r->segments) {
    const JointSpec& j = model.joint(*slot_of(s.joint));
    const double a = s.sign * deg2rad(j.min_deg) * s.moment_arm_mm;
    const double b = s.sign * deg2rad(j.max_deg) * s.moment_arm_mm;
    lo += std::min(a, b);
    hi += std::max(a, b);
  }
  // Paying out more than one extra route span only adds slack.
  return {lo - (hi - lo) - e0, hi - e0 + spool_capacity_n(model, cable) / k};
}

SimSession::SimSession(ModelPtr model, std::vector<GraspPreset> catalog)
    : model_(std::move(model)), catalog_(std::move(catalog)), map_(exact_map(*model_)), stager_(*model_) {
  problem_.model = model_;
  state_.q = model_->rest_pose();
  solve();
}

void SimSession::validate(const Command& c) const {
  const HandModel& m = *model_;
  std::visit(Overloaded{
                 [&](const SetCable& s) {
                   const auto [lo, hi] = cable_command_range(m, s.cable, problem_.cable_stiffness_n_per_mm);
                   if (s.displacement_mm < lo || s.displacement_mm > hi) {
                     throw ControlError(std::string(to_string(s.cable)) + " displacement " +
                                        std::to_string(s.displacement_mm) + " mm outside [" + std::to_string(lo) +
                                        ", " + std::to_string(hi) + "]");
                   }
                 },
                 [&](const SetDirectJoint& s) {
                   const JointSpec& j = m.joint(s.joint);
                   if (j.drive != Drive::DirectServo) throw ControlError(joint_name(s.joint) + " is not servo driven");
                   if (s.deg < j.min_deg || s.deg > j.max_deg) {
                     throw ControlError(joint_name(s.joint) + " target " + std::to_string(s.deg) + " outside [" +
                                        std::to_string(j.min_deg) + ", " + std::to_string(j.max_deg) + "]");
                   }
                 },
                 [&](const SetForce& s) {
                   if (s.finger == Finger::Thumb || s.finger == Finger::Palm) {
                     throw ControlError("no fingertip force model for " + std::string(to_string(s.finger)));
                   }
                   if (s.newtons < 0.0 || s.newtons > kMaxForceN) {
                     throw ControlError("force " + std::to_string(s.newtons) + " N outside [0, " +
                                        std::to_string(kMaxForceN) + "]");
                   }
                 },
                 [&](const LoadPreset& s) {
                   const bool known = std::any_of(catalog_.begin(), catalog_.end(),
                                                  [&](const GraspPreset& p) { return p.taxonomy_id == s.taxonomy_id; });
                   if (!known) throw ControlError("no preset with taxonomy id " + std::to_string(s.taxonomy_id));
                 },
                 [](const auto&) {},
             },
             c);
}

void SimSession::execute(const Command& c) {
  const HandModel& m = *model_;
  std::visit(Overloaded{
                 [&](const SetCable& s) {
                   problem_.commands_mm[idx(s.cable)] = s.displacement_mm;
                   if (s.cable == CableId::ThumbPink) stager_.step(std::max(0.0, s.displacement_mm), state_.resistance);
                   state_.preset.reset();
                 },
                 [&](const SetDirectJoint& s) {
                   problem_.direct_joints[s.joint] = s.deg;
                   state_.preset.reset();
                 },
                 [&](const SetForce& s) {
                   if (s.newtons == 0.0) {
                     problem_.external_force.reset();
                   } else {
                     ExternalForce f{s.finger, s.newtons, std::nullopt};
                     f.direction = dorsal_normal(m, s.finger, state_.q);
                     problem_.external_force = f;
                   }
                 },
                 [&](const SetResistance& s) {
                   state_.resistance = s.on;
                   if (s.on) {
                     problem_.contact_stops[Slot::ThumbMcpFlex] = state_.q[Slot::ThumbMcpFlex];
                     stager_.step(std::max(0.0, problem_.commands_mm[idx(CableId::ThumbPink)]), true);
                   } else {
                     problem_.contact_stops.erase(Slot::ThumbMcpFlex);
                   }
                 },
                 [&](const LoadPreset& s) {
                   const GraspPreset& preset = *std::find_if(catalog_.begin(), catalog_.end(), [&](const GraspPreset& p) {
                     return p.taxonomy_id == s.taxonomy_id;
                   });
                   const GraspPlan plan = plan_grasp(model_, preset, map_);
                   problem_ = plan.problem;
                   state_.resistance = plan.resistance;
                   stager_.reset();
                   stager_.step(plan.pink_mcp_mm, false);
                   stager_.step(plan.pink_mm, plan.resistance);
                   state_.preset = s.taxonomy_id;
                   // Grasps close from the open hand; the index MCP has no
                   // return spring and would otherwise keep a stale angle.
                   state_.q = m.rest_pose();
                 },
                 [&](const Reset&) {
                   problem_ = EquilibriumProblem{};
                   problem_.model = model_;
                   stager_.reset();
                   state_.resistance = false;
                   state_.preset.reset();
                   state_.q = m.rest_pose();
                 },
                 [](const GetState&) {},
             },
             c);
}

void SimSession::solve() {
  const EquilibriumResult r = solve_equilibrium(problem_, state_.q);
  state_.q = r.q_star;
  state_.commands_mm = problem_.commands_mm;
  state_.tensions_n = r.cable_tensions;
  state_.direct_joints = problem_.direct_joints;
  state_.external_force = problem_.external_force;
  const bool forced = problem_.external_force && problem_.external_force->finger == Finger::Index &&
                      problem_.external_force->magnitude_n > 0.0;
  state_.posture_class = classify_posture(r.q_star, forced);
  state_.thumb_stage = stager_.current().stage;
  state_.thumb_progress = stager_.current().progress;
  state_.energy = r.energy;
  state_.converged = r.converged;
  state_.chute_extension_deg = r.chute_extension_deg;
}

ApplyResult SimSession::apply(const CommandMessage& msg) {
  std::lock_guard lock(mutex_);
  ApplyResult out;
  out.ack.id = msg.id;
  if (std::holds_alternative<GetState>(msg.command)) {
    out.ack.tick = state_.tick;
    out.ack.accepted = true;
    out.state = state_;
    return out;
  }
  try {
    validate(msg.command);
  } catch (const Error& e) {
    out.ack.tick = state_.tick;
    out.ack.reason = e.what();
    return out;
  }
  // Work on copies so a failing solve leaves the session untouched.
  const EquilibriumProblem saved_problem = problem_;
  const ThumbStager saved_stager = stager_;
  const SessionState saved_state = state_;
  try {
    execute(msg.command);
    solve();
  } catch (const Error& e) {
    problem_ = saved_problem;
    stager_ = saved_stager;
    state_ = saved_state;
    out.ack.tick = state_.tick;
    out.ack.reason = e.what();
    return out;
  }
  state_.tick += 1;
  log_.push_back({state_.tick, msg});
  out.ack.tick = state_.tick;
  out.ack.accepted = true;
  out.state = state_;
  return out;
}

ApplyResult SimSession::apply_text(std::string_view text) {
  CommandMessage msg;
  try {
    msg = parse_command(text);
  } catch (const ProtocolError& e) {
    std::lock_guard lock(mutex_);
    ApplyResult out;
    out.ack.tick = state_.tick;
    out.ack.reason = e.what();
    return out;
  }
  return apply(msg);
}

SessionState SimSession::snapshot() const {
  std::lock_guard lock(mutex_);
  return state_;
}

std::vector<LogEntry> SimSession::ack_log() const {
  std::lock_guard lock(mutex_);
  return log_;
}

std::vector<SessionState> replay(const ModelPtr& model, const std::vector<LogEntry>& log) {
  SimSession s(model);
  std::vector<SessionState> out;
  for (const LogEntry& e : log) {
    const ApplyResult r = s.apply(e.message);
    if (!r.ack.accepted || r.ack.tick != e.tick) {
      throw ControlError("replay diverged at tick " + std::to_string(e.tick) + ": " + r.ack.reason);
    }
    out.push_back(*r.state);
  }
  return out;
}

}  // namespace catch919
