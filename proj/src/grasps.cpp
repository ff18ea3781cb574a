#include "catch919/grasps.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "catch919/error.hpp"
#include "catch919/tendon.hpp"
#include "json_util.hpp"

namespace catch919 {
namespace {

using detail::Json;
using detail::ObjectReader;

constexpr std::array<Slot, kDofCount> kDofSlots = {
    Slot::ThumbCmcFlex, Slot::ThumbCmcAbd, Slot::ThumbMcpFlex, Slot::ThumbMcpProSup, Slot::ThumbIp,
    Slot::IndexMcpFlex, Slot::IndexMcpAbd, Slot::IndexPip,     Slot::IndexDip,       Slot::MiddleMcp,
    Slot::MiddlePip,    Slot::MiddleDip,   Slot::RingMcp,      Slot::RingPip,        Slot::RingDip,
    Slot::LittleMcp,    Slot::LittlePip,   Slot::LittleDip,    Slot::PalmArch};

constexpr std::array<std::pair<Finger, Slot>, 4> kDipOf = {{{Finger::Index, Slot::IndexDip},
                                                           {Finger::Middle, Slot::MiddleDip},
                                                           {Finger::Ring, Slot::RingDip},
                                                           {Finger::Little, Slot::LittleDip}}};

Slot family_mcp(CableId cable) {
  switch (cable) {
    case CableId::MiddleFlexor:
      return Slot::MiddleMcp;
    case CableId::RingLittleFlexor:
      return Slot::RingMcp;
    default:
      break;
  }
  throw ControlError("cable " + std::string(to_string(cable)) + " is not a single-flexor finger cable");
}

double max_excursion(const HandModel& m, CableId cable) {
  const CableRoute* r = m.route(cable);
  if (r == nullptr) throw ControlError("cable " + std::string(to_string(cable)) + " is not routed");
  double total = 0.0;
  for (const RouteSegment& s : r->segments) {
    const JointSpec& j = m.joint(*slot_of(s.joint));
    total += deg2rad(j.max_deg - j.min_deg) * s.moment_arm_mm;
  }
  return total;
}

// Stage the pink-line controller sits in once it has produced q's thumb.
ThumbStage stage_for(const HandModel& m, const Pose& q) {
  const bool pronated = q[Slot::ThumbMcpProSup] >= m.joint(Slot::ThumbMcpProSup).max_deg;
  if (q[Slot::ThumbIp] > 0.0 || pronated) return ThumbStage::IpFlexing;
  const bool mcp_full = q[Slot::ThumbMcpFlex] >= m.joint(Slot::ThumbMcpFlex).max_deg;
  if (q[Slot::ThumbMcpProSup] > 0.0 || mcp_full) return ThumbStage::Pronating;
  return ThumbStage::McpFlexing;
}

double pink_arm(const HandModel& m, Slot s) {
  for (const RouteSegment& seg : m.route(CableId::ThumbPink)->segments) {
    if (seg.joint == joint_id(s)) return seg.moment_arm_mm;
  }
  throw ControlError("pink cable does not cross " + joint_name(s));
}

// Pink ramp the stager needs for the preset's thumb, with resistance raised
// as soon as MCP reaches its target.
ThumbTargets run_stager(const HandModel& m, const Pose& t, bool resistance, double& pink_mm, double& mcp_part) {
  ThumbStager stager(m);
  const double mcp_mm = deg2rad(t[Slot::ThumbMcpFlex]) * pink_arm(m, Slot::ThumbMcpFlex);
  const double rest_mm = deg2rad(t[Slot::ThumbMcpProSup]) * pink_arm(m, Slot::ThumbMcpProSup) +
                         deg2rad(t[Slot::ThumbIp]) * pink_arm(m, Slot::ThumbIp);
  constexpr int kSteps = 20;
  for (int i = 1; i <= kSteps; ++i) stager.step(mcp_mm * i / kSteps, false);
  for (int i = 1; i <= kSteps; ++i) stager.step(mcp_mm + rest_mm * i / kSteps, resistance);
  pink_mm = mcp_mm + rest_mm;
  mcp_part = mcp_mm;
  return stager.current();
}

struct Entry {
  int id;
  const char* name;
  GraspDesign d;
  bool pinch;
};

// Reconstructed angles; the reference photographs publish no numbers.
//  index mcp, pip, abd | middle mcp | ring mcp | cmc flex, abd | thumb mcp, prosup, ip
const std::array<Entry, 33> kEntries = {{
    {1, "Large Diameter", {40, 50, 0, 40, 40, -30, -20, 30, 0, 0}, false},
    {2, "Small Diameter", {60, 80, 0, 60, 60, 10, 45, 60, 45, 40}, false},
    {3, "Medium Wrap", {50, 65, 0, 50, 50, -30, 0, 45, 0, 0}, false},
    {4, "Adducted Thumb", {55, 70, 0, 55, 55, -30, 45, 0, 0, 0}, false},
    {5, "Light Tool", {60, 75, 0, 60, 60, -30, 30, 20, 0, 0}, false},
    {6, "Prismatic 4 Finger", {20, 30, 0, 20, 20, -30, -30, 30, 45, 30}, true},
    {7, "Prismatic 3 Finger", {20, 30, 0, 20, 60, -30, -30, 30, 45, 30}, true},
    {8, "Prismatic 2 Finger", {20, 30, 0, 60, 60, -30, -30, 30, 45, 20}, true},
    {9, "Palmar Pinch", {30, 20, 0, 70, 70, -30, -40, 40, 45, 10}, true},
    {10, "Power Disk", {30, 40, 10, 30, 30, -30, -45, 20, 0, 0}, false},
    {11, "Power Sphere", {35, 45, 10, 35, 35, -30, -35, 40, 20, 0}, false},
    {12, "Precision Disk", {20, 25, 10, 20, 20, -30, -45, 25, 45, 15}, true},
    {13, "Precision Sphere", {25, 30, 5, 25, 25, -30, -40, 30, 45, 20}, true},
    {14, "Tripod", {30, 30, 0, 30, 70, -30, -40, 35, 45, 15}, true},
    {15, "Fixed Hook", {10, 80, 0, 40, 40, -30, 45, 0, 0, 0}, false},
    {16, "Lateral", {70, 80, 0, 70, 70, -30, 30, 40, 45, 0}, true},
    {17, "Index Finger Extension", {0, 0, 0, 60, 60, -30, 0, 40, 20, 0}, false},
    {18, "Extension Type", {10, 5, 0, 15, 15, -30, -45, 20, 45, 5}, true},
    {19, "Distal Type", {45, 30, 0, 45, 45, -30, -20, 30, 45, 10}, true},
    {20, "Writing Tripod", {40, 35, 0, 45, 75, -30, -35, 35, 45, 25}, true},
    {21, "Tripod Variation", {35, 40, 0, 35, 70, -30, -30, 30, 45, 20}, true},
    {22, "Parallel Extension", {50, 0, 0, 30, 30, -30, -45, 15, 45, 0}, true},
    {23, "Adduction Grip", {20, 20, -20, 20, 60, -30, 45, 0, 0, 0}, false},
    {24, "Tip Pinch", {45, 50, 0, 70, 70, -30, -35, 40, 45, 30}, true},
    {25, "Lateral Tripod", {55, 70, 0, 45, 60, -30, 30, 35, 45, 0}, true},
    {26, "Sphere 4 Finger", {30, 40, 10, 30, 30, -30, -35, 35, 30, 0}, false},
    {27, "Quadpod", {30, 35, 5, 30, 70, -30, -35, 35, 45, 15}, true},
    {28, "Sphere 3 Finger", {30, 40, 10, 30, 65, -30, -35, 35, 25, 0}, false},
    {29, "Stick", {65, 80, 0, 65, 65, -30, 40, 10, 0, 0}, false},
    {30, "Palmar", {15, 20, 0, 15, 15, -30, -10, 20, 0, 0}, false},
    {31, "Ring", {40, 60, 0, 70, 70, -30, -40, 40, 45, 35}, true},
    {32, "Ventral", {5, 70, 0, 50, 50, -30, 45, 0, 0, 0}, false},
    {33, "Inferior Pincer", {40, 40, 0, 80, 80, -30, -40, 45, 45, 30}, true},
}};

}  // namespace

Pose flexor_family(const HandModel& model, CableId cable, double mcp_deg) {
  const Slot mcp = family_mcp(cable);
  const JointSpec& j = model.joint(mcp);
  if (!(mcp_deg >= j.rest_deg && mcp_deg <= j.max_deg)) {
    throw ControlError(joint_name(mcp) + " family target " + std::to_string(mcp_deg) + " outside [" +
                       std::to_string(j.rest_deg) + ", " + std::to_string(j.max_deg) + "]");
  }
  auto model_ptr = std::make_shared<const HandModel>(model);
  EquilibriumProblem p;
  p.model = model_ptr;
  const Pose rest = model.rest_pose();
  auto solve = [&](double d) {
    p.commands_mm[idx(cable)] = d;
    return solve_equilibrium(p, rest).q_star;
  };
  if (mcp_deg <= j.rest_deg) return solve(0.0);
  // Illinois regula falsi on mcp(d) - target; mcp grows monotonically with d.
  double a = 0.0;
  double fa = j.rest_deg - mcp_deg;
  double z = max_excursion(model, cable) + 1.0;
  Pose qz = solve(z);
  double fz = qz[mcp] - mcp_deg;
  if (fz < -1e-6) throw ControlError(joint_name(mcp) + " cannot reach " + std::to_string(mcp_deg));
  int side = 0;
  for (int it = 0; it < 200 && std::abs(fz) > 1e-9 && z - a > 1e-13; ++it) {
    const double c = (fz - fa) != 0.0 ? z - fz * (z - a) / (fz - fa) : 0.5 * (a + z);
    const Pose qc = solve(std::clamp(c, a, z));
    const double fc = qc[mcp] - mcp_deg;
    if (fc < 0.0) {
      a = c;
      fa = fc;
      if (side == -1) fz *= 0.5;
      side = -1;
    } else {
      z = c;
      fz = fc;
      qz = qc;
      if (side == 1) fa *= 0.5;
      side = 1;
    }
  }
  return qz;
}

GraspPreset build_preset(const HandModel& model, int id, std::string name, const GraspDesign& d,
                         std::optional<std::pair<Finger, Finger>> pair) {
  Pose q = model.rest_pose();
  const Pose middle = flexor_family(model, CableId::MiddleFlexor, d.middle_mcp);
  const Pose ring = flexor_family(model, CableId::RingLittleFlexor, d.ring_mcp);
  for (Slot s : {Slot::MiddleMcp, Slot::MiddlePip}) q[s] = middle[s];
  for (Slot s : {Slot::RingMcp, Slot::RingPip, Slot::LittleMcp, Slot::LittlePip}) q[s] = ring[s];
  q[Slot::IndexMcpFlex] = d.index_mcp;
  q[Slot::IndexPip] = d.index_pip;
  q[Slot::IndexMcpAbd] = d.index_abd;
  q[Slot::ThumbCmcFlex] = d.cmc_flex;
  q[Slot::ThumbCmcAbd] = d.cmc_abd;
  q[Slot::ThumbMcpFlex] = d.thumb_mcp;
  q[Slot::ThumbMcpProSup] = d.thumb_prosup;
  q[Slot::ThumbIp] = d.thumb_ip;

  GraspPreset p;
  p.taxonomy_id = id;
  p.name = std::move(name);
  p.targets = clamp_pose(model, q);
  p.thumb_stage_hint = stage_for(model, p.targets);
  p.force_closure_pair = pair;
  return p;
}

const std::vector<GraspPreset>& load_catalog() {
  static const std::vector<GraspPreset> catalog = [] {
    const HandModel m = default_catch919();
    std::vector<GraspPreset> out;
    for (const Entry& e : kEntries) {
      std::optional<std::pair<Finger, Finger>> pair;
      if (e.pinch) pair = std::pair{Finger::Thumb, Finger::Index};
      out.push_back(build_preset(m, e.id, e.name, e.d, pair));
    }
    return out;
  }();
  return catalog;
}

std::string catalog_json(const std::vector<GraspPreset>& presets) {
  Json arr = Json::array();
  for (const GraspPreset& p : presets) {
    Json o;
    o["taxonomy_id"] = p.taxonomy_id;
    o["name"] = p.name;
    o["thumb_stage_hint"] = std::string(to_string(p.thumb_stage_hint));
    if (p.force_closure_pair) {
      o["force_closure_pair"] = Json::array(
          {std::string(to_string(p.force_closure_pair->first)), std::string(to_string(p.force_closure_pair->second))});
    } else {
      o["force_closure_pair"] = nullptr;
    }
    Json t = Json::object();
    for (std::size_t i = 0; i < kJointSlots; ++i) t[joint_name(static_cast<Slot>(i))] = p.targets.at(i);
    o["targets"] = std::move(t);
    arr.push_back(std::move(o));
  }
  Json doc;
  doc["presets"] = std::move(arr);
  return doc.dump(2) + "\n";
}

std::vector<GraspPreset> parse_catalog(std::string_view text) {
  const Json doc = detail::parse_json(text, "catalog");
  ObjectReader top(doc, "$");
  const Json& list = top.array("presets");
  top.finish();
  std::vector<GraspPreset> out;
  std::set<int> ids;
  for (std::size_t i = 0; i < list.size(); ++i) {
    ObjectReader r(list[i], "presets[" + std::to_string(i) + "]");
    GraspPreset p;
    p.taxonomy_id = static_cast<int>(r.integer("taxonomy_id"));
    if (!ids.insert(p.taxonomy_id).second) throw SchemaError(r.child("taxonomy_id"), "duplicate id");
    p.name = r.string("name");
    const std::string stage = r.string("thumb_stage_hint");
    auto st = thumb_stage_from_string(stage);
    if (!st) throw SchemaError(r.child("thumb_stage_hint"), "unknown stage '" + stage + "'");
    p.thumb_stage_hint = *st;
    const Json& pair = r.get("force_closure_pair");
    if (!pair.is_null()) {
      if (!pair.is_array() || pair.size() != 2 || !pair[0].is_string() || !pair[1].is_string()) {
        throw SchemaError(r.child("force_closure_pair"), "expected two finger names or null");
      }
      auto a = finger_from_string(pair[0].get<std::string>());
      auto b = finger_from_string(pair[1].get<std::string>());
      if (!a || !b) throw ReferenceError(r.child("force_closure_pair") + ": unknown finger");
      p.force_closure_pair = std::pair{*a, *b};
    }
    ObjectReader t(r.object("targets"), r.child("targets"));
    for (std::size_t s = 0; s < kJointSlots; ++s) p.targets.at(s) = t.number(joint_name(static_cast<Slot>(s)));
    t.finish();
    r.finish();
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<GraspPreset> load_catalog_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError(path, "cannot open catalog file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_catalog(ss.str());
}

bool needs_thumb_resistance(const HandModel& model, const Pose& t) {
  return t[Slot::ThumbMcpProSup] > 0.0 && t[Slot::ThumbMcpFlex] < model.joint(Slot::ThumbMcpFlex).max_deg;
}

GraspPlan plan_grasp(const ModelPtr& model, const GraspPreset& preset, const CalibrationMap& map) {
  const HandModel& m = *model;
  const Pose& t = preset.targets;
  GraspPlan plan;
  plan.resistance = needs_thumb_resistance(m, t);
  plan.thumb = run_stager(m, t, plan.resistance, plan.pink_mm, plan.pink_mcp_mm);
  const CmcTargets cmc_target{t[Slot::ThumbCmcFlex], t[Slot::ThumbCmcAbd]};
  std::tie(plan.lightblue_mm, plan.yellow_mm) = cmc_displacements(cmc_target, m);
  plan.cmc = cmc_step(plan.lightblue_mm, plan.yellow_mm, m);

  plan.index_class = classify_posture(t, false);
  const CableVector index_cmd =
      command_for_class(model, plan.index_class, {t[Slot::IndexMcpFlex], t[Slot::IndexPip]}, map);

  EquilibriumProblem& p = plan.problem;
  p.model = model;
  for (CableId c : {CableId::IndexBL, CableId::IndexOL, CableId::IndexPL}) p.commands_mm[idx(c)] = index_cmd[idx(c)];
  p.direct_joints[Slot::IndexMcpAbd] = t[Slot::IndexMcpAbd];
  if (plan.resistance) p.contact_stops[Slot::ThumbMcpFlex] = t[Slot::ThumbMcpFlex];

  std::array<CableUse, kCableCount> use{};
  use.fill(CableUse::Tension);
  for (CableId c : {CableId::IndexBL, CableId::IndexOL, CableId::IndexPL}) use[idx(c)] = CableUse::Keep;
  p.commands_mm = hold_commands(p, t, use, map).commands_mm;
  return plan;
}

PresetCheck check_feasible(const ModelPtr& model, const GraspPreset& preset) {
  return check_feasible(model, preset, exact_map(*model));
}

PresetCheck check_feasible(const ModelPtr& model, const GraspPreset& preset, const CalibrationMap& map) {
  const HandModel& m = *model;
  const Pose& t = preset.targets;
  PresetCheck row;
  row.taxonomy_id = preset.taxonomy_id;
  row.name = preset.name;

  row.limit_ok = true;
  for (std::size_t i = 0; i < kJointSlots; ++i) {
    const JointSpec& j = m.joints[i];
    if (!(t.at(i) >= j.min_deg && t.at(i) <= j.max_deg)) {
      row.limit_ok = false;
      row.note = joint_name(static_cast<Slot>(i)) + " target " + std::to_string(t.at(i)) + " outside [" +
                 std::to_string(j.min_deg) + ", " + std::to_string(j.max_deg) + "]";
      break;
    }
  }
  row.linkage_ok = true;
  for (const auto& [finger, dip] : kDipOf) {
    if (m.linkage(finger) == nullptr) continue;
    double want = 0.0;
    try {
      want = coupled_dip(m, finger, t);
    } catch (const Error& e) {
      row.linkage_ok = false;
      if (row.note.empty()) row.note = e.what();
      continue;
    }
    if (std::abs(want - t[dip]) > kLinkageToleranceDeg) {
      row.linkage_ok = false;
      if (row.note.empty()) {
        row.note = joint_name(dip) + " target " + std::to_string(t[dip]) + " off the linkage curve (" +
                   std::to_string(want) + ")";
      }
    }
  }
  if (!row.limit_ok || !row.linkage_ok) return row;

  try {
    const GraspPlan plan = plan_grasp(model, preset, map);
    const EquilibriumResult r = solve_equilibrium(plan.problem, m.rest_pose());
    double worst = 0.0;
    for (Slot s : kDofSlots) {
      const double e = std::abs(r.q_star[s] - t[s]);
      if (e >= worst) {
        worst = e;
        row.worst_joint = joint_name(s);
      }
    }
    row.residual_deg = worst;
    row.achieved = r.q_star;

    const ThumbTargets& th = plan.thumb;
    const double stager_err = std::max({std::abs(th.mcp_deg - t[Slot::ThumbMcpFlex]),
                                        std::abs(th.prosup_deg - t[Slot::ThumbMcpProSup]),
                                        std::abs(th.ip_deg - t[Slot::ThumbIp])});
    const double cmc_err =
        std::max(std::abs(plan.cmc.flex_deg - t[Slot::ThumbCmcFlex]), std::abs(plan.cmc.abd_deg - t[Slot::ThumbCmcAbd]));
    const bool stage_ok = th.stage == preset.thumb_stage_hint;
    row.realizable = r.converged && worst <= kGraspResidualDeg && stager_err <= kGraspResidualDeg &&
                     cmc_err <= kGraspResidualDeg && stage_ok;
    if (!r.converged) {
      row.note = "solver did not converge";
    } else if (worst > kGraspResidualDeg) {
      row.note = row.worst_joint + " misses its target by " + std::to_string(worst) + " deg";
    } else if (!stage_ok) {
      row.note = "thumb staging ends in " + std::string(to_string(th.stage)) + ", preset expects " +
                 std::string(to_string(preset.thumb_stage_hint));
    } else if (stager_err > kGraspResidualDeg) {
      row.note = "thumb staging misses its targets by " + std::to_string(stager_err) + " deg";
    } else if (cmc_err > kGraspResidualDeg) {
      row.note = "CMC staging misses its targets by " + std::to_string(cmc_err) + " deg";
    }
  } catch (const Error& e) {
    row.realizable = false;
    row.note = e.what();
  }
  return row;
}

std::size_t CatalogReport::realizable_count() const {
  return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [](const auto& r) { return r.realizable; }));
}
std::size_t CatalogReport::limit_ok_count() const {
  return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [](const auto& r) { return r.limit_ok; }));
}
std::size_t CatalogReport::linkage_ok_count() const {
  return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [](const auto& r) { return r.linkage_ok; }));
}

CatalogReport run_catalog(const ModelPtr& model, const std::vector<GraspPreset>& presets) {
  const CalibrationMap map = exact_map(*model);
  CatalogReport report;
  for (const GraspPreset& p : presets) report.rows.push_back(check_feasible(model, p, map));
  return report;
}

std::string report_json(const CatalogReport& report) {
  Json rows = Json::array();
  for (const PresetCheck& r : report.rows) {
    Json o;
    o["taxonomy_id"] = r.taxonomy_id;
    o["name"] = r.name;
    o["limit_ok"] = r.limit_ok;
    o["linkage_ok"] = r.linkage_ok;
    o["realizable"] = r.realizable;
    o["residual_deg"] = r.residual_deg ? Json(*r.residual_deg) : Json(nullptr);
    o["worst_joint"] = r.worst_joint;
    o["note"] = r.note;
    rows.push_back(std::move(o));
  }
  Json doc;
  doc["total"] = report.rows.size();
  doc["realizable"] = report.realizable_count();
  doc["limit_ok"] = report.limit_ok_count();
  doc["linkage_ok"] = report.linkage_ok_count();
  doc["presets"] = std::move(rows);
  return doc.dump(2) + "\n";
}

}  // namespace catch919
