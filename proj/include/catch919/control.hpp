#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "catch919/hand_model.hpp"
#include "catch919/joint.hpp"
#include "catch919/statics.hpp"

namespace catch919 {

// Sagittal-plane posture classes of the index finger. A-D carry no external
// force, E-F have a force on the palmar side of the fingertip.
enum class PostureClass {
  A_McpExtIpExt,
  B_McpExtIpFlex,
  C_McpFlexIpExt,
  D_McpFlexIpFlex,
  E_ForcedPipExt,
  F_ForcedPipFlex,
};

inline constexpr std::array<PostureClass, 6> kAllPostureClasses = {
    PostureClass::A_McpExtIpExt,   PostureClass::B_McpExtIpFlex, PostureClass::C_McpFlexIpExt,
    PostureClass::D_McpFlexIpFlex, PostureClass::E_ForcedPipExt, PostureClass::F_ForcedPipFlex};

std::string_view to_string(PostureClass c);  // "A" .. "F"
std::string_view describe(PostureClass c);
std::optional<PostureClass> posture_from_string(std::string_view s);
bool is_forced(PostureClass c);

// Conditional is the tables' "(+)".
enum class ActivationLevel { Inactive, Active, Conditional };
std::string_view to_string(ActivationLevel a);  // "", "+", "(+)"

struct ActivationSet {
  ActivationLevel bl = ActivationLevel::Inactive;
  ActivationLevel ol = ActivationLevel::Inactive;
  ActivationLevel sp = ActivationLevel::Inactive;
  ActivationLevel pl = ActivationLevel::Inactive;
  bool operator==(const ActivationSet&) const = default;
};

inline constexpr double kDefaultEpsDeg = 5.0;

PostureClass classify_posture(const Pose& q, bool forced, double eps_deg = kDefaultEpsDeg);

// Robot control strategies.
ActivationSet activation_for(PostureClass c);

// Human postures of the muscle table, in the order they appear there.
enum class HumanPosture { McpExtIpExt, McpExtIpFlex, McpFlexIpExt, McpFlexIpFlex, ForcedPipExt, ForcedPipFlex };

struct MuscleSet {
  ActivationLevel fdp = ActivationLevel::Inactive;
  ActivationLevel fds = ActivationLevel::Inactive;
  ActivationLevel pidi = ActivationLevel::Inactive;
  ActivationLevel edc = ActivationLevel::Inactive;
  bool operator==(const MuscleSet&) const = default;
};

MuscleSet human_reference_activation(HumanPosture p);
HumanPosture human_analog(PostureClass c);

// FDS -> BL, FDP -> OL, PI/DI -> SP, EDC -> PL.
ActivationSet robot_equivalent(const MuscleSet& m);

// ---------------------------------------------------------------------------
// Calibration: polynomial fit of cable excursion against the joints each
// cable crosses.

struct CablePolynomial {
  CableId cable = CableId::IndexBL;
  std::vector<Slot> slots;                   // crossed joints, route order
  std::vector<std::vector<int>> exponents;   // one row per monomial
  std::vector<double> coefficients;
  std::vector<double> center_deg;            // per slot normalization
  std::vector<double> half_range_deg;

  double evaluate(const Pose& q) const;
};

struct CalibrationMap {
  std::vector<CablePolynomial> cables;
  int degree = 1;
  double fit_rms_mm = 0.0;  // held-out samples only
  std::size_t sample_count = 0;  // fitted samples
  std::size_t holdout_count = 0;

  const CablePolynomial* find(CableId c) const;
  // Predicted excursion; throws ControlError when the cable is not mapped.
  double predict(CableId c, const Pose& q) const;
};

// Poses with every slot drawn independently and uniformly within its limits.
std::vector<Pose> random_grid(const HandModel& model, std::size_t n, std::uint64_t seed);

// Least-squares fit on a seeded 80/20 split with additive Gaussian noise on
// the observed lengths. Throws RankDeficiency for degenerate grids.
CalibrationMap calibrate(const HandModel& model, const std::vector<Pose>& grid, double noise_sd_mm,
                         std::uint64_t seed, int degree = 1);

// Exact map for a model: a degree-1 fit without noise.
CalibrationMap exact_map(const HandModel& model);

// ---------------------------------------------------------------------------
// Inverse statics.

enum class CableUse { Release, Tension, Keep };

struct HoldOptions {
  double slack_margin_mm = 2.0;
};

struct HoldCommands {
  CableVector commands_mm{};
  CableVector tensions_n{};
  double residual = 0.0;  // torque imbalance left by the least-squares fit, N.mm/deg
};

// Commands that make `target` an equilibrium of `base`: Tension cables are
// reeled to the map-predicted excursion plus the stretch carrying their
// share of the static load, Release cables are paid out by the slack margin
// and Keep cables keep base's command.
HoldCommands hold_commands(const EquilibriumProblem& base, const Pose& target,
                           const std::array<CableUse, kCableCount>& use, const CalibrationMap& map,
                           const HoldOptions& options = {});

struct IndexTargets {
  double mcp_deg = 0.0;
  double pip_deg = 0.0;
};

struct CommandOptions {
  double eps_deg = kDefaultEpsDeg;
  double slack_margin_mm = 2.0;
  // The conditional blue line joins in only above this fingertip force.
  double bl_engage_force_n = 5.0;
  double cable_stiffness_n_per_mm = 50.0;
};

// Index-finger cable commands realizing the targets for the class. Other
// cables are left at zero. The force is required for E/F and rejected for
// A-D. Throws ControlError on target/class inconsistency.
CableVector command_for_class(const ModelPtr& model, PostureClass c, const IndexTargets& targets,
                              const CalibrationMap& map, const std::optional<ExternalForce>& force = std::nullopt,
                              const CommandOptions& options = {});

// Pose the finger takes for given targets: rest elsewhere, linkage DIP.
Pose index_target_pose(const HandModel& model, const IndexTargets& targets);

// ---------------------------------------------------------------------------
// Thumb.

enum class ThumbStage { McpFlexing, Pronating, IpFlexing };
std::string_view to_string(ThumbStage s);
std::optional<ThumbStage> thumb_stage_from_string(std::string_view s);

struct ThumbTargets {
  double mcp_deg = 0.0;
  double prosup_deg = 0.0;
  double ip_deg = 0.0;
  ThumbStage stage = ThumbStage::McpFlexing;
  double progress = 0.0;  // within the current stage, 0..1
};

// Pink-line staging: displacement goes to MCP flexion until the limit or
// resistance, then to pronation, then to IP flexion. The stage never goes
// back along a non-decreasing ramp; a decreasing displacement starts a new
// ramp.
class ThumbStager {
 public:
  explicit ThumbStager(const HandModel& model);

  ThumbTargets step(double pink_displacement_mm, bool resistance);
  const ThumbTargets& current() const { return state_; }
  void reset();

 private:
  std::array<double, 3> arm_mm_{};
  std::array<double, 3> max_deg_{};
  double last_mm_ = 0.0;
  ThumbTargets state_;
};

struct CmcTargets {
  double flex_deg = 0.0;
  double abd_deg = 0.0;
};

CmcTargets cmc_step(double lightblue_mm, double yellow_mm, const HandModel& model);

// Kinematic displacements that cmc_step maps back onto the given targets.
// Throws ControlError for flexion without full adduction, which the staging
// never produces.
std::pair<double, double> cmc_displacements(const CmcTargets& targets, const HandModel& model);

}  // namespace catch919
