#pragma once

#include <mutex>
#include <optional>
#include <utility>
#include <vector>

#include "catch919/control.hpp"
#include "catch919/grasps.hpp"
#include "catch919/protocol.hpp"
#include "catch919/statics.hpp"

namespace catch919 {

struct LogEntry {
  std::uint64_t tick = 0;
  CommandMessage message;
  bool operator==(const LogEntry&) const = default;
};

struct ApplyResult {
  Ack ack;
  std::optional<SessionState> state;  // set when accepted
};

// Displacements a cable command may take: paid out by up to one route span
// beyond the fully extended hand, up to fully reeled in plus the stretch its
// spool can load.
std::pair<double, double> cable_command_range(const HandModel& model, CableId cable, double cable_stiffness_n_per_mm);

// The single owner of the simulated hand. Commands are applied one at a time
// under a lock; every accepted command re-solves the equilibrium starting
// from the previous one and bumps the tick.
class SimSession {
 public:
  explicit SimSession(ModelPtr model, std::vector<GraspPreset> catalog = load_catalog());

  ApplyResult apply(const CommandMessage& m);
  // Parses and applies; malformed text yields a rejected ack.
  ApplyResult apply_text(std::string_view text);

  SessionState snapshot() const;
  std::vector<LogEntry> ack_log() const;
  const HandModel& model() const { return *model_; }
  ModelPtr model_ptr() const { return model_; }

 private:
  void validate(const Command& c) const;
  void execute(const Command& c);
  void solve();

  ModelPtr model_;
  std::vector<GraspPreset> catalog_;
  CalibrationMap map_;
  mutable std::mutex mutex_;
  EquilibriumProblem problem_;
  ThumbStager stager_;
  SessionState state_;
  std::vector<LogEntry> log_;
};

// Runs a log through a fresh session; returns the state after every entry.
std::vector<SessionState> replay(const ModelPtr& model, const std::vector<LogEntry>& log);

}  // namespace catch919
