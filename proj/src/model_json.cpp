#include <fstream>
#include <sstream>

#include "catch919/error.hpp"
#include "catch919/hand_model.hpp"
#include "json_util.hpp"

namespace catch919 {
namespace {

using detail::Json;
using detail::ObjectReader;

template <typename E, std::size_t N>
E parse_enum(const std::string& s, const std::array<E, N>& values, std::string_view (*name)(E),
             const std::string& path) {
  for (E v : values) {
    if (name(v) == s) return v;
  }
  throw SchemaError(path, "unknown value '" + s + "'");
}

constexpr std::array<Drive, 4> kDrives = {Drive::Cable, Drive::DirectServo, Drive::Passive, Drive::LinkageCoupled};
constexpr std::array<PhalanxName, 4> kPhalanxNames = {PhalanxName::Metacarpal, PhalanxName::Proximal,
                                                      PhalanxName::Middle, PhalanxName::Distal};
constexpr std::array<SpringRole, 6> kRoles = {SpringRole::Spring1,        SpringRole::Spring2,
                                              SpringRole::ThumbTorsional, SpringRole::ThumbCmcReturn,
                                              SpringRole::ThumbReturn,    SpringRole::FingerReturn};
constexpr std::array<SpringKind, 2> kSpringKinds = {SpringKind::Torsional, SpringKind::LinearReturn};
constexpr std::array<ActuatorKind, 2> kActuatorKinds = {ActuatorKind::CableSpool, ActuatorKind::DirectJoint};
constexpr std::array<Finger, 6> kFingers = {Finger::Thumb, Finger::Index, Finger::Middle,
                                            Finger::Ring,  Finger::Little, Finger::Palm};
constexpr std::array<Branch, 2> kBranches = {Branch::Open, Branch::Crossed};

std::string_view drive_name(Drive d) { return to_string(d); }
std::string_view phalanx_name(PhalanxName p) { return to_string(p); }
std::string_view role_name(SpringRole r) { return to_string(r); }
std::string_view spring_kind_name(SpringKind k) { return to_string(k); }
std::string_view actuator_kind_name(ActuatorKind k) { return to_string(k); }
std::string_view branch_name(Branch b) { return to_string(b); }

// Joint names must be well formed; legality is checked by validate().
JointId parse_joint_ref(const std::string& name, const std::string& path) {
  auto id = parse_joint_name(name);
  if (!id) throw ReferenceError(path + ": nonexistent joint '" + name + "'");
  return *id;
}

FourBarDims parse_dims(const Json& j, const std::string& path) {
  ObjectReader r(j, path);
  FourBarDims d;
  d.ground_mm = r.number("ground_mm");
  d.input_mm = r.number("input_mm");
  d.coupler_mm = r.number("coupler_mm");
  d.output_mm = r.number("output_mm");
  d.input_mount_deg = r.number("input_mount_deg");
  d.output_mount_deg = r.number("output_mount_deg");
  d.branch = parse_enum(r.string("branch"), kBranches, branch_name, r.child("branch"));
  r.finish();
  return d;
}

HandModel from_json(const Json& doc) {
  ObjectReader top(doc, "$");
  HandModel m;

  std::array<bool, kJointSlots> seen{};
  const Json& joints = top.array("joints");
  for (std::size_t i = 0; i < joints.size(); ++i) {
    ObjectReader r(joints[i], "joints[" + std::to_string(i) + "]");
    const std::string name = r.string("id");
    const JointId id = parse_joint_ref(name, r.child("id"));
    const auto slot = slot_of(id);
    if (!slot) throw ReferenceError(r.child("id") + ": nonexistent joint '" + name + "'");
    if (seen[idx(*slot)]) throw SchemaError(r.child("id"), "duplicate joint " + name);
    seen[idx(*slot)] = true;
    JointSpec& js = m.joints[idx(*slot)];
    js.id = id;
    js.min_deg = r.number("min_deg");
    js.max_deg = r.number("max_deg");
    js.rest_deg = r.number("rest_deg");
    js.drive = parse_enum(r.string("drive"), kDrives, drive_name, r.child("drive"));
    r.finish();
  }
  for (std::size_t i = 0; i < kJointSlots; ++i) {
    if (!seen[i]) throw SchemaError("joints", "missing joint " + joint_name(static_cast<Slot>(i)));
  }

  ObjectReader ph(top.object("phalanges"), "phalanges");
  for (Finger f : kFingers) {
    const std::string key(to_string(f));
    if (!ph.has(key)) continue;
    const Json& list = ph.array(key);
    auto& out = m.phalanges[f];
    for (std::size_t i = 0; i < list.size(); ++i) {
      ObjectReader r(list[i], ph.child(key) + "[" + std::to_string(i) + "]");
      PhalanxSpec p;
      p.name = parse_enum(r.string("name"), kPhalanxNames, phalanx_name, r.child("name"));
      p.length_mm = r.number("length_mm");
      r.finish();
      out.push_back(p);
    }
  }
  ph.finish();

  const Json& cables = top.array("cables");
  for (std::size_t i = 0; i < cables.size(); ++i) {
    ObjectReader r(cables[i], "cables[" + std::to_string(i) + "]");
    CableRoute route;
    const std::string name = r.string("cable");
    auto c = cable_from_string(name);
    if (!c) throw SchemaError(r.child("cable"), "unknown cable '" + name + "'");
    route.cable = *c;
    route.slack_allowed = r.boolean("slack_allowed");
    const Json& segs = r.array("segments");
    for (std::size_t s = 0; s < segs.size(); ++s) {
      ObjectReader sr(segs[s], r.child("segments") + "[" + std::to_string(s) + "]");
      RouteSegment seg;
      seg.joint = parse_joint_ref(sr.string("joint"), sr.child("joint"));
      seg.moment_arm_mm = sr.number("moment_arm_mm");
      seg.sign = static_cast<int>(sr.integer("sign"));
      sr.finish();
      route.segments.push_back(seg);
    }
    r.finish();
    m.routes.push_back(std::move(route));
  }

  const Json& springs = top.array("springs");
  for (std::size_t i = 0; i < springs.size(); ++i) {
    ObjectReader r(springs[i], "springs[" + std::to_string(i) + "]");
    SpringSpec sp;
    sp.role = parse_enum(r.string("role"), kRoles, role_name, r.child("role"));
    sp.joint = parse_joint_ref(r.string("joint"), r.child("joint"));
    sp.stiffness_nmm_per_deg = r.number("stiffness_nmm_per_deg");
    sp.rest_deg = r.number("rest_deg");
    sp.kind = parse_enum(r.string("kind"), kSpringKinds, spring_kind_name, r.child("kind"));
    sp.preload_nmm = r.number("preload_nmm");
    r.finish();
    m.springs.push_back(sp);
  }

  const Json& actuators = top.array("actuators");
  for (std::size_t i = 0; i < actuators.size(); ++i) {
    ObjectReader r(actuators[i], "actuators[" + std::to_string(i) + "]");
    ActuatorSpec a;
    a.id = static_cast<int>(r.integer("id"));
    a.kind = parse_enum(r.string("kind"), kActuatorKinds, actuator_kind_name, r.child("kind"));
    if (a.kind == ActuatorKind::CableSpool) {
      const std::string name = r.string("cable");
      auto c = cable_from_string(name);
      if (!c) throw ReferenceError(r.child("cable") + ": unknown cable '" + name + "'");
      a.target = *c;
    } else {
      a.target = parse_joint_ref(r.string("joint"), r.child("joint"));
    }
    a.max_torque_nmm = r.number("max_torque_nmm");
    a.spool_radius_mm = r.number("spool_radius_mm");
    r.finish();
    m.actuators.push_back(a);
  }

  ObjectReader lk(top.object("linkages"), "linkages");
  for (Finger f : kFingers) {
    const std::string key(to_string(f));
    if (lk.has(key)) m.linkages[f] = parse_dims(lk.object(key), lk.child(key));
  }
  lk.finish();

  m.palm_coupling_gain = top.number("palm_coupling_gain");
  m.reference_pose_offset_deg = top.number("reference_pose_offset_deg");
  m.chute_slide_mm_per_deg = top.number("chute_slide_mm_per_deg");
  top.finish();
  return m;
}

Json dims_json(const FourBarDims& d) {
  Json j;
  j["ground_mm"] = d.ground_mm;
  j["input_mm"] = d.input_mm;
  j["coupler_mm"] = d.coupler_mm;
  j["output_mm"] = d.output_mm;
  j["input_mount_deg"] = d.input_mount_deg;
  j["output_mount_deg"] = d.output_mount_deg;
  j["branch"] = std::string(to_string(d.branch));
  return j;
}

}  // namespace

HandModel load_model(std::string_view document, const LoadOptions& options) {
  HandModel m = from_json(detail::parse_json(document, "$"));
  validate(m, options);
  return m;
}

HandModel load_model_file(const std::string& path, const LoadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError(path, "cannot open model file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_model(ss.str(), options);
}

std::string serialize(const HandModel& m) {
  Json doc;
  Json joints = Json::array();
  for (const JointSpec& j : m.joints) {
    Json o;
    o["id"] = joint_name(j.id);
    o["min_deg"] = j.min_deg;
    o["max_deg"] = j.max_deg;
    o["rest_deg"] = j.rest_deg;
    o["drive"] = std::string(to_string(j.drive));
    joints.push_back(std::move(o));
  }
  doc["joints"] = std::move(joints);

  Json ph = Json::object();
  for (const auto& [finger, list] : m.phalanges) {
    Json arr = Json::array();
    for (const PhalanxSpec& p : list) arr.push_back({{"name", std::string(to_string(p.name))}, {"length_mm", p.length_mm}});
    ph[std::string(to_string(finger))] = std::move(arr);
  }
  doc["phalanges"] = std::move(ph);

  Json cables = Json::array();
  for (const CableRoute& r : m.routes) {
    Json segs = Json::array();
    for (const RouteSegment& s : r.segments) {
      segs.push_back({{"joint", joint_name(s.joint)}, {"moment_arm_mm", s.moment_arm_mm}, {"sign", s.sign}});
    }
    cables.push_back({{"cable", std::string(to_string(r.cable))}, {"slack_allowed", r.slack_allowed}, {"segments", segs}});
  }
  doc["cables"] = std::move(cables);

  Json springs = Json::array();
  for (const SpringSpec& s : m.springs) {
    springs.push_back({{"role", std::string(to_string(s.role))},
                       {"joint", joint_name(s.joint)},
                       {"stiffness_nmm_per_deg", s.stiffness_nmm_per_deg},
                       {"rest_deg", s.rest_deg},
                       {"kind", std::string(to_string(s.kind))},
                       {"preload_nmm", s.preload_nmm}});
  }
  doc["springs"] = std::move(springs);

  Json actuators = Json::array();
  for (const ActuatorSpec& a : m.actuators) {
    Json o;
    o["id"] = a.id;
    o["kind"] = std::string(to_string(a.kind));
    if (a.kind == ActuatorKind::CableSpool) {
      o["cable"] = std::string(to_string(std::get<CableId>(a.target)));
    } else {
      o["joint"] = joint_name(std::get<JointId>(a.target));
    }
    o["max_torque_nmm"] = a.max_torque_nmm;
    o["spool_radius_mm"] = a.spool_radius_mm;
    actuators.push_back(std::move(o));
  }
  doc["actuators"] = std::move(actuators);

  Json links = Json::object();
  for (const auto& [finger, d] : m.linkages) links[std::string(to_string(finger))] = dims_json(d);
  doc["linkages"] = std::move(links);

  doc["palm_coupling_gain"] = m.palm_coupling_gain;
  doc["reference_pose_offset_deg"] = m.reference_pose_offset_deg;
  doc["chute_slide_mm_per_deg"] = m.chute_slide_mm_per_deg;
  return doc.dump(2) + "\n";
}

std::string dims_fragment(const FourBarDims& dims) { return dims_json(dims).dump(2) + "\n"; }

}  // namespace catch919
