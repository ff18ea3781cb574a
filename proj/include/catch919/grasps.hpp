#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "catch919/control.hpp"
#include "catch919/hand_model.hpp"
#include "catch919/statics.hpp"

namespace catch919 {

struct GraspPreset {
  int taxonomy_id = 0;  // 1..33, standard taxonomy numbering
  std::string name;
  Pose targets;
  ThumbStage thumb_stage_hint = ThumbStage::McpFlexing;
  std::optional<std::pair<Finger, Finger>> force_closure_pair;
};

// Designer inputs of a preset. Everything else is derived: DIPs from the
// linkages, middle/ring/little PIP from their single flexor, palm arch from
// ring and little MCP.
struct GraspDesign {
  double index_mcp = 0.0;
  double index_pip = 0.0;
  double index_abd = 0.0;
  double middle_mcp = 0.0;
  double ring_mcp = 0.0;
  double cmc_flex = -30.0;
  double cmc_abd = 45.0;
  double thumb_mcp = 0.0;
  double thumb_prosup = 0.0;
  double thumb_ip = 0.0;
};

// Equilibrium pose reached with only `cable` reeled in, parametrized by the
// MCP angle of its first finger (middle, or ring for the shared ring/little
// flexor). Other slots stay at rest. Throws ControlError when unreachable.
Pose flexor_family(const HandModel& model, CableId cable, double mcp_deg);

GraspPreset build_preset(const HandModel& model, int id, std::string name, const GraspDesign& design,
                         std::optional<std::pair<Finger, Finger>> pair = std::nullopt);

// The built-in 33 presets for the reference hand.
const std::vector<GraspPreset>& load_catalog();
std::vector<GraspPreset> load_catalog_file(const std::string& path);
std::vector<GraspPreset> parse_catalog(std::string_view json);
std::string catalog_json(const std::vector<GraspPreset>& presets);

// Thumb pronation blocked by the object before MCP reaches its limit.
bool needs_thumb_resistance(const HandModel& model, const Pose& targets);

// Commands that realize a preset, and the controller states they came from.
struct GraspPlan {
  EquilibriumProblem problem;
  PostureClass index_class = PostureClass::A_McpExtIpExt;
  ThumbTargets thumb;
  CmcTargets cmc;
  double pink_mm = 0.0;
  double pink_mcp_mm = 0.0;  // part of the ramp spent before resistance
  double lightblue_mm = 0.0;
  double yellow_mm = 0.0;
  bool resistance = false;
};

GraspPlan plan_grasp(const ModelPtr& model, const GraspPreset& preset, const CalibrationMap& map);

struct PresetCheck {
  int taxonomy_id = 0;
  std::string name;
  bool limit_ok = false;
  bool linkage_ok = false;
  bool realizable = false;
  std::optional<double> residual_deg;  // worst joint; empty when not attempted
  std::string worst_joint;
  std::string note;
  std::optional<Pose> achieved;
};

struct CatalogReport {
  std::vector<PresetCheck> rows;
  std::size_t realizable_count() const;
  std::size_t limit_ok_count() const;
  std::size_t linkage_ok_count() const;
};

inline constexpr double kGraspResidualDeg = 5.0;
inline constexpr double kLinkageToleranceDeg = 2.0;

PresetCheck check_feasible(const ModelPtr& model, const GraspPreset& preset);
PresetCheck check_feasible(const ModelPtr& model, const GraspPreset& preset, const CalibrationMap& map);
CatalogReport run_catalog(const ModelPtr& model, const std::vector<GraspPreset>& presets = load_catalog());

std::string report_json(const CatalogReport& report);

}  // namespace catch919
