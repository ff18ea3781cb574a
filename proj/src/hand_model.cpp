#include "catch919/hand_model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "catch919/error.hpp"

namespace catch919 {
namespace {

constexpr double kMomentArmMm = 8.0;
constexpr double kSpoolRadiusMm = 10.0;
constexpr double kServoTorqueKgcm = 40.0;

JointId jid(Slot s) { return joint_id(s); }

RouteSegment seg(Slot s, int sign) { return {jid(s), kMomentArmMm, sign}; }

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

constexpr std::array<ReferenceRange, 9> kReferenceRanges = {{
    {Slot::ThumbCmcFlex, -30.0, 45.0},
    {Slot::ThumbCmcAbd, -45.0, 45.0},
    {Slot::ThumbMcpFlex, 0.0, 90.0},
    {Slot::ThumbMcpProSup, 0.0, 45.0},
    {Slot::ThumbIp, 0.0, 90.0},
    {Slot::IndexMcpFlex, -30.0, 90.0},
    {Slot::IndexMcpAbd, -30.0, 30.0},
    {Slot::IndexPip, 0.0, 90.0},
    {Slot::IndexDip, -30.0, 90.0},
}};

// Fingers whose DIP is driven through a four-bar from PIP.
constexpr std::array<Finger, 4> kLinkageFingers = {Finger::Index, Finger::Middle, Finger::Ring, Finger::Little};

Slot pip_slot(Finger f) {
  switch (f) {
    case Finger::Index:
      return Slot::IndexPip;
    case Finger::Middle:
      return Slot::MiddlePip;
    case Finger::Ring:
      return Slot::RingPip;
    default:
      return Slot::LittlePip;
  }
}

Slot dip_slot(Finger f) {
  switch (f) {
    case Finger::Index:
      return Slot::IndexDip;
    case Finger::Middle:
      return Slot::MiddleDip;
    case Finger::Ring:
      return Slot::RingDip;
    default:
      return Slot::LittleDip;
  }
}

std::string joint_path(const std::string& prefix, const JointId& j) { return prefix + "(" + joint_name(j) + ")"; }

}  // namespace

const std::array<ReferenceRange, 9>& reference_ranges() { return kReferenceRanges; }

FourBarDims canonical_index_linkage() {
  // Reconstructed, not measured: synthesize() fit to dip = pip on [0, 90]
  // from {25, 9, 24.5, 9.5, 70} with the ground link held at 25 mm.
  return {25.0, 9.0, 24.999974591662582, 9.000002016018684, 57.26624158102375, 57.26644212294444, Branch::Open};
}

const CableRoute* HandModel::route(CableId c) const {
  for (const auto& r : routes) {
    if (r.cable == c) return &r;
  }
  return nullptr;
}

const SpringSpec* HandModel::spring_at(Slot s) const {
  const JointId j = joint_id(s);
  for (const auto& sp : springs) {
    if (sp.joint == j) return &sp;
  }
  return nullptr;
}

const FourBarDims* HandModel::linkage(Finger f) const {
  auto it = linkages.find(f);
  return it == linkages.end() ? nullptr : &it->second;
}

double HandModel::phalanx_length(Finger f, PhalanxName name) const {
  auto it = phalanges.find(f);
  if (it == phalanges.end()) return 0.0;
  for (const auto& p : it->second) {
    if (p.name == name) return p.length_mm;
  }
  return 0.0;
}

Pose HandModel::rest_pose() const {
  Pose q;
  for (std::size_t i = 0; i < kJointSlots; ++i) q.at(i) = joints[i].rest_deg;
  return q;
}

std::string_view to_string(CableId c) {
  switch (c) {
    case CableId::IndexBL:
      return "IndexBL";
    case CableId::IndexOL:
      return "IndexOL";
    case CableId::IndexPL:
      return "IndexPL";
    case CableId::MiddleFlexor:
      return "MiddleFlexor";
    case CableId::RingLittleFlexor:
      return "RingLittleFlexor";
    case CableId::ThumbYellow:
      return "ThumbYellow";
    case CableId::ThumbLightBlue:
      return "ThumbLightBlue";
    case CableId::ThumbPink:
      return "ThumbPink";
  }
  return "unknown";
}

std::optional<CableId> cable_from_string(std::string_view s) {
  for (CableId c : kAllCables) {
    if (to_string(c) == s) return c;
  }
  return std::nullopt;
}

std::string_view to_string(Drive d) {
  switch (d) {
    case Drive::Cable:
      return "Cable";
    case Drive::DirectServo:
      return "DirectServo";
    case Drive::Passive:
      return "Passive";
    case Drive::LinkageCoupled:
      return "LinkageCoupled";
  }
  return "unknown";
}

std::string_view to_string(PhalanxName p) {
  switch (p) {
    case PhalanxName::Metacarpal:
      return "Metacarpal";
    case PhalanxName::Proximal:
      return "Proximal";
    case PhalanxName::Middle:
      return "Middle";
    case PhalanxName::Distal:
      return "Distal";
  }
  return "unknown";
}

std::string_view to_string(SpringRole r) {
  switch (r) {
    case SpringRole::Spring1:
      return "Spring1";
    case SpringRole::Spring2:
      return "Spring2";
    case SpringRole::ThumbTorsional:
      return "ThumbTorsional";
    case SpringRole::ThumbCmcReturn:
      return "ThumbCmcReturn";
    case SpringRole::ThumbReturn:
      return "ThumbReturn";
    case SpringRole::FingerReturn:
      return "FingerReturn";
  }
  return "unknown";
}

std::string_view to_string(SpringKind k) { return k == SpringKind::Torsional ? "Torsional" : "LinearReturn"; }

std::string_view to_string(ActuatorKind k) { return k == ActuatorKind::CableSpool ? "CableSpool" : "DirectJoint"; }

HandModel default_catch919() {
  HandModel m;

  auto set = [&](Slot s, double lo, double hi, double rest, Drive drive) {
    m.joints[idx(s)] = JointSpec{jid(s), lo, hi, rest, drive};
  };
  // Initial thumb position: CMC 30 deg extension (and the 45 deg adduction
  // that defines the frame), MCP and IP straight.
  set(Slot::ThumbCmcFlex, -30, 45, -30, Drive::Cable);
  set(Slot::ThumbCmcAbd, -45, 45, 45, Drive::Cable);
  set(Slot::ThumbMcpFlex, 0, 90, 0, Drive::Cable);
  set(Slot::ThumbMcpProSup, 0, 45, 0, Drive::Cable);
  set(Slot::ThumbIp, 0, 90, 0, Drive::Cable);
  set(Slot::IndexMcpFlex, -30, 90, 0, Drive::Cable);
  set(Slot::IndexMcpAbd, -30, 30, 0, Drive::DirectServo);
  set(Slot::IndexPip, 0, 90, 0, Drive::Cable);
  set(Slot::IndexDip, -30, 90, 0, Drive::LinkageCoupled);
  set(Slot::IndexChute, 0, 30, 0, Drive::Passive);
  for (auto [mcp, pip, dip] : {std::array{Slot::MiddleMcp, Slot::MiddlePip, Slot::MiddleDip},
                               std::array{Slot::RingMcp, Slot::RingPip, Slot::RingDip},
                               std::array{Slot::LittleMcp, Slot::LittlePip, Slot::LittleDip}}) {
    set(mcp, 0, 90, 0, Drive::Cable);
    set(pip, 0, 90, 0, Drive::Cable);
    set(dip, 0, 90, 0, Drive::LinkageCoupled);
  }
  set(Slot::PalmArch, 0, 20, 0, Drive::Passive);

  const std::array<double, 4> index_lengths = {70.0, 45.0, 25.0, 22.0};
  const std::map<Finger, double> scale = {
      {Finger::Index, 1.0}, {Finger::Middle, 1.08}, {Finger::Ring, 1.0}, {Finger::Little, 0.82}};
  for (const auto& [finger, k] : scale) {
    m.phalanges[finger] = {{PhalanxName::Metacarpal, index_lengths[0] * k},
                           {PhalanxName::Proximal, index_lengths[1] * k},
                           {PhalanxName::Middle, index_lengths[2] * k},
                           {PhalanxName::Distal, index_lengths[3] * k}};
  }
  m.phalanges[Finger::Thumb] = {
      {PhalanxName::Metacarpal, 50.0}, {PhalanxName::Proximal, 32.0}, {PhalanxName::Distal, 25.0}};

  m.routes = {
      {CableId::IndexBL, {seg(Slot::IndexMcpFlex, 1), seg(Slot::IndexPip, 1)}, true},
      // The chute segment cancels the distal hyperextension: the orange line
      // anchors on the linkage side of the chute, not on the fingertip.
      {CableId::IndexOL,
       {seg(Slot::IndexMcpFlex, 1), seg(Slot::IndexPip, 1), seg(Slot::IndexDip, 1), seg(Slot::IndexChute, 1)},
       true},
      {CableId::IndexPL, {seg(Slot::IndexMcpFlex, -1)}, true},
      {CableId::MiddleFlexor, {seg(Slot::MiddleMcp, 1), seg(Slot::MiddlePip, 1), seg(Slot::MiddleDip, 1)}, true},
      {CableId::RingLittleFlexor,
       {seg(Slot::RingMcp, 1), seg(Slot::RingPip, 1), seg(Slot::RingDip, 1), seg(Slot::LittleMcp, 1),
        seg(Slot::LittlePip, 1), seg(Slot::LittleDip, 1)},
       true},
      {CableId::ThumbYellow, {seg(Slot::ThumbCmcAbd, -1)}, true},
      {CableId::ThumbLightBlue, {seg(Slot::ThumbCmcAbd, 1), seg(Slot::ThumbCmcFlex, 1)}, true},
      {CableId::ThumbPink, {seg(Slot::ThumbMcpFlex, 1), seg(Slot::ThumbMcpProSup, 1), seg(Slot::ThumbIp, 1)}, true},
  };

  // Preloads order the pink-line stages: MCP flexes until its limit (135
  // N.mm), then pronation (150..285 N.mm), then IP (from 300 N.mm).
  m.springs = {
      {SpringRole::Spring1, jid(Slot::IndexPip), 2.0, 0.0, SpringKind::Torsional, 0.0},
      {SpringRole::Spring2, jid(Slot::IndexChute), 1.0, 0.0, SpringKind::LinearReturn, 50.0},
      {SpringRole::ThumbTorsional, jid(Slot::ThumbMcpProSup), 3.0, 0.0, SpringKind::Torsional, 150.0},
      {SpringRole::ThumbCmcReturn, jid(Slot::ThumbCmcFlex), 1.5, -30.0, SpringKind::LinearReturn, 20.0},
      {SpringRole::ThumbCmcReturn, jid(Slot::ThumbCmcAbd), 1.5, 45.0, SpringKind::LinearReturn, 0.0},
      {SpringRole::ThumbReturn, jid(Slot::ThumbMcpFlex), 1.5, 0.0, SpringKind::LinearReturn, 0.0},
      {SpringRole::ThumbReturn, jid(Slot::ThumbIp), 1.5, 0.0, SpringKind::LinearReturn, 300.0},
  };
  for (Slot s : {Slot::MiddleMcp, Slot::MiddlePip, Slot::RingMcp, Slot::RingPip, Slot::LittleMcp, Slot::LittlePip}) {
    m.springs.push_back({SpringRole::FingerReturn, jid(s), 1.5, 0.0, SpringKind::LinearReturn, 0.0});
  }

  const double torque = kServoTorqueKgcm * kNmmPerKgcm;
  auto spool = [&](int id, CableId c) {
    return ActuatorSpec{id, ActuatorKind::CableSpool, c, torque, kSpoolRadiusMm};
  };
  m.actuators = {
      spool(0, CableId::RingLittleFlexor),
      spool(1, CableId::MiddleFlexor),
      spool(2, CableId::IndexBL),
      spool(3, CableId::IndexOL),
      spool(4, CableId::IndexPL),
      ActuatorSpec{5, ActuatorKind::DirectJoint, jid(Slot::IndexMcpAbd), torque, 0.0},
      spool(6, CableId::ThumbYellow),
      spool(7, CableId::ThumbLightBlue),
      spool(8, CableId::ThumbPink),
  };

  const FourBarDims index_link = canonical_index_linkage();
  for (const auto& [finger, k] : scale) m.linkages[finger] = scaled(index_link, k);

  m.palm_coupling_gain = 0.2;
  m.reference_pose_offset_deg = 75.0;
  m.chute_slide_mm_per_deg = 0.1;
  return m;
}

ModelPtr default_model_ptr() {
  static const ModelPtr model = std::make_shared<const HandModel>(default_catch919());
  return model;
}

std::size_t dof_count(const HandModel& model) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < kJointSlots; ++i) {
    if (counts_as_dof(static_cast<Slot>(i)) && model.joints[i].max_deg > model.joints[i].min_deg) ++n;
  }
  return n;
}

double coupled_dip(const HandModel& model, Finger finger, const Pose& q) {
  const FourBarDims* dims = model.linkage(finger);
  if (dims == nullptr) throw ReferenceError("finger " + std::string(to_string(finger)) + " has no linkage");
  double dip = solve_coupler(*dims, q[pip_slot(finger)]);
  if (finger == Finger::Index) dip -= q[Slot::IndexChute];
  const JointSpec& spec = model.joint(dip_slot(finger));
  return std::clamp(dip, spec.min_deg, spec.max_deg);
}

double palm_arch(const HandModel& model, const Pose& q) {
  const JointSpec& spec = model.joint(Slot::PalmArch);
  const double mean = 0.5 * (q[Slot::RingMcp] + q[Slot::LittleMcp]);
  return std::clamp(model.palm_coupling_gain * mean, spec.min_deg, spec.max_deg);
}

Pose clamp_pose(const HandModel& model, const Pose& q) {
  Pose out = q;
  for (std::size_t i = 0; i < kJointSlots; ++i) {
    out.at(i) = std::clamp(q.at(i), model.joints[i].min_deg, model.joints[i].max_deg);
  }
  for (Finger f : kLinkageFingers) {
    if (model.linkage(f) != nullptr) out[dip_slot(f)] = coupled_dip(model, f, out);
  }
  out[Slot::PalmArch] = palm_arch(model, out);
  return out;
}

void validate(const HandModel& m, const LoadOptions& options) {
  // Joints.
  for (std::size_t i = 0; i < kJointSlots; ++i) {
    const JointSpec& j = m.joints[i];
    const std::string path = "joints[" + joint_name(static_cast<Slot>(i)) + "]";
    if (j.id != joint_id(static_cast<Slot>(i))) throw InvariantError(path, "joint id does not match its slot");
    if (!(j.min_deg < j.max_deg)) throw InvariantError(path, "min_deg must be < max_deg");
    if (j.rest_deg < j.min_deg || j.rest_deg > j.max_deg) throw InvariantError(path, "rest_deg outside [min, max]");
  }

  // Phalanges.
  for (Finger f : {Finger::Thumb, Finger::Index, Finger::Middle, Finger::Ring, Finger::Little}) {
    auto it = m.phalanges.find(f);
    const std::string path = "phalanges." + std::string(to_string(f));
    if (it == m.phalanges.end()) throw InvariantError(path, "missing");
    std::set<PhalanxName> names;
    for (const auto& p : it->second) {
      if (!(p.length_mm > 0.0)) throw InvariantError(path + "." + std::string(to_string(p.name)), "length must be > 0");
      if (!names.insert(p.name).second) throw InvariantError(path, "duplicate phalanx " + std::string(to_string(p.name)));
    }
    const std::size_t expected = f == Finger::Thumb ? 3 : 4;
    if (names.size() != expected || !names.contains(PhalanxName::Metacarpal) || !names.contains(PhalanxName::Proximal) ||
        !names.contains(PhalanxName::Distal)) {
      throw InvariantError(path, "expected " + std::to_string(expected) + " phalanges");
    }
  }

  // Cable routes.
  std::set<CableId> seen_cables;
  for (std::size_t r = 0; r < m.routes.size(); ++r) {
    const CableRoute& route = m.routes[r];
    const std::string path = "cables[" + std::string(to_string(route.cable)) + "]";
    if (!seen_cables.insert(route.cable).second) throw InvariantError(path, "duplicate cable");
    for (std::size_t s = 0; s < route.segments.size(); ++s) {
      const RouteSegment& sg = route.segments[s];
      const std::string spath = path + ".segments[" + std::to_string(s) + "]";
      if (!is_legal(sg.joint)) throw ReferenceError(spath + ": route references nonexistent joint " + joint_name(sg.joint));
      if (!(sg.moment_arm_mm > 0.0)) throw InvariantError(spath, "moment_arm must be > 0");
      if (sg.sign != 1 && sg.sign != -1) throw InvariantError(spath, "sign must be +1 or -1");
    }
  }
  if (seen_cables.size() != kCableCount) throw InvariantError("cables", "exactly 8 cables required");

  // Springs.
  std::set<JointId> sprung;
  for (const SpringSpec& sp : m.springs) {
    const std::string path = joint_path("springs" + std::string("[") + std::string(to_string(sp.role)) + "]", sp.joint);
    if (!is_legal(sp.joint)) throw ReferenceError(path + ": spring references nonexistent joint");
    if (!(sp.stiffness_nmm_per_deg > 0.0)) throw InvariantError(path, "stiffness must be > 0");
    if (!(sp.preload_nmm >= 0.0)) throw InvariantError(path, "preload must be >= 0");
    if (!sprung.insert(sp.joint).second) throw InvariantError(path, "joint carries more than one spring");
    const JointSpec& js = m.joint(*slot_of(sp.joint));
    if (sp.rest_deg < js.min_deg || sp.rest_deg > js.max_deg) throw InvariantError(path, "spring rest outside joint range");
    if (sp.preload_nmm > 0.0 && sp.rest_deg != js.min_deg && sp.rest_deg != js.max_deg) {
      throw InvariantError(path, "preloaded spring must rest on a joint limit");
    }
  }

  // Actuators.
  std::set<int> ids;
  for (const ActuatorSpec& a : m.actuators) {
    const std::string path = "actuators[" + std::to_string(a.id) + "]";
    if (!ids.insert(a.id).second) throw InvariantError(path, "duplicate actuator id");
    if (a.kind == ActuatorKind::CableSpool) {
      if (!std::holds_alternative<CableId>(a.target)) throw InvariantError(path, "cable spool must target a cable");
      if (m.route(std::get<CableId>(a.target)) == nullptr) throw ReferenceError(path + ": target cable has no route");
      if (!(a.spool_radius_mm > 0.0)) throw InvariantError(path, "spool_radius must be > 0");
    } else {
      if (!std::holds_alternative<JointId>(a.target)) throw InvariantError(path, "direct actuator must target a joint");
      const JointId& j = std::get<JointId>(a.target);
      if (!is_legal(j)) throw ReferenceError(path + ": actuator references nonexistent joint " + joint_name(j));
      if (m.joint(*slot_of(j)).drive != Drive::DirectServo) throw InvariantError(path, "target joint is not DirectServo");
    }
    if (!(a.max_torque_nmm > 0.0)) throw InvariantError(path, "max_torque must be > 0");
  }

  // Linkages.
  for (Finger f : kLinkageFingers) {
    const std::string path = "linkages." + std::string(to_string(f));
    const FourBarDims* d = m.linkage(f);
    if (d == nullptr) throw InvariantError(path, "missing");
    try {
      const JointSpec& pip = m.joint(pip_slot(f));
      coupling_curve(*d, pip.min_deg, pip.max_deg, 91);
    } catch (const Error& e) {
      throw InvariantError(path, std::string("does not assemble over the PIP range: ") + e.what());
    }
  }
  for (const auto& [f, d] : m.linkages) {
    if (std::find(kLinkageFingers.begin(), kLinkageFingers.end(), f) == kLinkageFingers.end()) {
      throw ReferenceError("linkages." + std::string(to_string(f)) + ": finger has no DIP joint");
    }
  }
  if (!(m.palm_coupling_gain >= 0.0)) throw InvariantError("palm_coupling_gain", "must be >= 0");
  if (!(m.chute_slide_mm_per_deg >= 0.0)) throw InvariantError("chute_slide_mm_per_deg", "must be >= 0");

  if (!options.enforce_reference_hand) return;

  for (const ReferenceRange& r : kReferenceRanges) {
    const JointSpec& j = m.joint(r.slot);
    if (j.min_deg != r.min_deg || j.max_deg != r.max_deg) {
      throw InvariantError("joints[" + joint_name(r.slot) + "]",
                           "range [" + fmt(j.min_deg) + ", " + fmt(j.max_deg) + "] violates the reference bound [" +
                               fmt(r.min_deg) + ", " + fmt(r.max_deg) + "]");
    }
  }
  const JointSpec& cmc = m.joint(Slot::ThumbCmcFlex);
  if (cmc.rest_deg != -30.0 || m.joint(Slot::ThumbMcpFlex).rest_deg != 0.0 || m.joint(Slot::ThumbIp).rest_deg != 0.0) {
    throw InvariantError("joints[Thumb]", "thumb rest must be CMC -30, MCP 0, IP 0");
  }
  if (dof_count(m) != kDofCount) throw InvariantError("joints", "hand must have 19 DOF");

  if (m.actuators.size() != 9) throw InvariantError("actuators", "exactly 9 actuators required");
  std::map<Finger, int> per_finger;
  for (const ActuatorSpec& a : m.actuators) {
    if (std::abs(a.max_torque_nmm - kServoTorqueKgcm * kNmmPerKgcm) > 1e-9) {
      throw InvariantError("actuators[" + std::to_string(a.id) + "]", "max_torque must be 40 kg.cm");
    }
    if (std::holds_alternative<JointId>(a.target)) {
      ++per_finger[std::get<JointId>(a.target).finger];
      continue;
    }
    switch (std::get<CableId>(a.target)) {
      case CableId::IndexBL:
      case CableId::IndexOL:
      case CableId::IndexPL:
        ++per_finger[Finger::Index];
        break;
      case CableId::MiddleFlexor:
        ++per_finger[Finger::Middle];
        break;
      case CableId::RingLittleFlexor:
        ++per_finger[Finger::Ring];
        break;
      default:
        ++per_finger[Finger::Thumb];
        break;
    }
  }
  if (per_finger[Finger::Index] != 4 || per_finger[Finger::Thumb] != 3 || per_finger[Finger::Middle] != 1 ||
      per_finger[Finger::Ring] != 1) {
    throw InvariantError("actuators", "allocation must be 4 index, 3 thumb, 1 middle, 1 ring+little");
  }

  const std::vector<std::pair<SpringRole, Slot>> required = {
      {SpringRole::Spring1, Slot::IndexPip},           {SpringRole::Spring2, Slot::IndexChute},
      {SpringRole::ThumbTorsional, Slot::ThumbMcpProSup}, {SpringRole::ThumbCmcReturn, Slot::ThumbCmcFlex},
      {SpringRole::ThumbCmcReturn, Slot::ThumbCmcAbd},   {SpringRole::FingerReturn, Slot::MiddleMcp},
      {SpringRole::FingerReturn, Slot::MiddlePip},       {SpringRole::FingerReturn, Slot::RingMcp},
      {SpringRole::FingerReturn, Slot::RingPip},         {SpringRole::FingerReturn, Slot::LittleMcp},
      {SpringRole::FingerReturn, Slot::LittlePip},
  };
  for (const auto& [role, slot] : required) {
    const auto n = std::count_if(m.springs.begin(), m.springs.end(),
                                 [&](const SpringSpec& s) { return s.role == role && s.joint == joint_id(slot); });
    if (n != 1) {
      throw InvariantError("springs", std::string(to_string(role)) + " must appear exactly once at " + joint_name(slot));
    }
  }
  for (SpringRole role : {SpringRole::Spring1, SpringRole::Spring2, SpringRole::ThumbTorsional}) {
    const auto n = std::count_if(m.springs.begin(), m.springs.end(), [&](const SpringSpec& s) { return s.role == role; });
    if (n != 1) throw InvariantError("springs", std::string(to_string(role)) + " must appear exactly once");
  }
}

}  // namespace catch919
