#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "catch919/protocol.hpp"
#include "catch919/session.hpp"

namespace catch919 {

// Command script: CSV with header `step,target,value`. A target is a cable
// name (displacement mm), a servo joint name (deg), `force.<Finger>` (N),
// `resistance` (0 or 1), `preset` (taxonomy id) or `reset`. Rows sharing a
// step are applied in file order before that step's state is recorded.
struct ScriptStep {
  long long step = 0;
  std::vector<Command> commands;
};

std::vector<ScriptStep> parse_script(std::string_view csv);

struct RunRow {
  long long step = 0;
  Pose q;
  CableVector tensions_n{};
  double energy = 0.0;
  PostureClass posture_class = PostureClass::A_McpExtIpExt;
  bool converged = true;  // not part of the CSV
};

// Throws ControlError when the session rejects a command.
std::vector<RunRow> simulate(const ModelPtr& model, const std::vector<ScriptStep>& script);

std::string run_csv(const std::vector<RunRow>& rows);
std::vector<RunRow> parse_run_csv(std::string_view csv);
std::vector<std::string> run_csv_header();

// Strip of index-finger silhouettes, one frame per row, with the fingertip
// trace and the posture class of each frame.
std::string plot_svg(const HandModel& model, const std::vector<RunRow>& rows);

// d(excursion)/d(angle) in mm/deg, one row per cable.
std::string jacobian_csv(const HandModel& model, const Pose& q);

// Shortest text that reads back to the same double.
std::string format_double(double v);

}  // namespace catch919
