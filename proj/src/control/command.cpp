#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "catch919/control.hpp"
#include "catch919/error.hpp"
#include "catch919/tendon.hpp"

namespace catch919 {
namespace {

// Lawson-Hanson active set method for min |Ax - b| subject to x >= 0.
Eigen::VectorXd nnls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
  const Eigen::Index n = a.cols();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  if (n == 0) return x;
  std::vector<bool> passive(static_cast<std::size_t>(n), false);
  const double tol = 1e-12 * std::max(1.0, a.cwiseAbs().maxCoeff()) * std::max(1.0, b.cwiseAbs().maxCoeff()) *
                     static_cast<double>(std::max<Eigen::Index>(n, a.rows()));

  auto solve_passive = [&]() {
    std::vector<Eigen::Index> cols;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (passive[static_cast<std::size_t>(j)]) cols.push_back(j);
    }
    Eigen::MatrixXd sub(a.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) sub.col(static_cast<Eigen::Index>(k)) = a.col(cols[k]);
    const Eigen::VectorXd zs = sub.colPivHouseholderQr().solve(b);
    Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
    for (std::size_t k = 0; k < cols.size(); ++k) z[cols[k]] = zs[static_cast<Eigen::Index>(k)];
    return z;
  };

  for (Eigen::Index outer = 0; outer < 3 * n + 10; ++outer) {
    const Eigen::VectorXd w = a.transpose() * (b - a * x);
    Eigen::Index best = -1;
    double wmax = tol;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!passive[static_cast<std::size_t>(j)] && w[j] > wmax) {
        wmax = w[j];
        best = j;
      }
    }
    if (best < 0) break;
    passive[static_cast<std::size_t>(best)] = true;

    for (int inner = 0; inner < 3 * n + 10; ++inner) {
      const Eigen::VectorXd z = solve_passive();
      double alpha = 1.0;
      bool feasible = true;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (passive[static_cast<std::size_t>(j)] && z[j] <= 0.0) {
          feasible = false;
          const double denom = x[j] - z[j];
          if (denom > 0.0) alpha = std::min(alpha, x[j] / denom);
        }
      }
      if (feasible) {
        x = z;
        break;
      }
      x += alpha * (z - x);
      for (Eigen::Index j = 0; j < n; ++j) {
        if (passive[static_cast<std::size_t>(j)] && x[j] <= tol) {
          passive[static_cast<std::size_t>(j)] = false;
          x[j] = 0.0;
        }
      }
    }
  }
  return x;
}

double predicted_change(const CalibrationMap& map, CableId c, const Pose& q, const Pose& rest) {
  return map.predict(c, q) - map.predict(c, rest);
}

void check_target(const HandModel& m, Slot s, double deg) {
  const JointSpec& j = m.joint(s);
  if (!std::isfinite(deg) || deg < j.min_deg || deg > j.max_deg) {
    throw ControlError(joint_name(s) + " target " + std::to_string(deg) + " outside [" + std::to_string(j.min_deg) +
                       ", " + std::to_string(j.max_deg) + "]");
  }
}

CableUse use_for(ActivationLevel level, bool hold_when_conditional) {
  switch (level) {
    case ActivationLevel::Active:
      return CableUse::Tension;
    case ActivationLevel::Conditional:
      return hold_when_conditional ? CableUse::Tension : CableUse::Release;
    case ActivationLevel::Inactive:
      break;
  }
  return CableUse::Release;
}

}  // namespace

HoldCommands hold_commands(const EquilibriumProblem& base, const Pose& target, const std::array<CableUse, kCableCount>& use,
                           const CalibrationMap& map, const HoldOptions& options) {
  check_problem(base);
  const HandModel& m = *base.model;
  EquilibriumProblem trial = base;
  const Pose q = complete_pose(base, target);
  if (trial.external_force && !trial.external_force->direction) {
    trial.external_force->direction = dorsal_normal(m, trial.external_force->finger, q);
  }
  const Pose rest = m.rest_pose();

  CableVector predicted{};
  for (CableId c : kAllCables) {
    const std::size_t i = idx(c);
    if (use[i] == CableUse::Keep) continue;
    predicted[i] = predicted_change(map, c, q, rest);
    trial.commands_mm[i] = use[i] == CableUse::Release ? predicted[i] - options.slack_margin_mm : predicted[i];
  }

  // Columns: tensions of Tension cables, then one slack per free slot sitting
  // on a bound. Rows: free slots.
  const auto g = energy_gradient(trial, q);
  const ExcursionJacobian jac = reduced_jacobian(m, q);
  const std::vector<Slot>& fs = free_slots();
  std::vector<CableId> pulled;
  for (CableId c : kAllCables) {
    if (use[idx(c)] == CableUse::Tension) pulled.push_back(c);
  }
  std::vector<std::pair<std::size_t, double>> slack;  // (row, sign)
  for (std::size_t r = 0; r < fs.size(); ++r) {
    const Slot s = fs[r];
    const auto [lo, hi] = slot_bounds(base, s);
    if (q[s] <= lo + 1e-9) slack.emplace_back(r, 1.0);
    if (q[s] >= hi - 1e-9) slack.emplace_back(r, -1.0);
  }

  const auto rows = static_cast<Eigen::Index>(fs.size());
  const auto cols = static_cast<Eigen::Index>(pulled.size() + slack.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(rows, cols);
  Eigen::VectorXd b(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Slot s = fs[static_cast<std::size_t>(r)];
    b[r] = g[idx(s)];
    for (std::size_t k = 0; k < pulled.size(); ++k) a(r, static_cast<Eigen::Index>(k)) = jac(pulled[k], s);
  }
  for (std::size_t k = 0; k < slack.size(); ++k) {
    a(static_cast<Eigen::Index>(slack[k].first), static_cast<Eigen::Index>(pulled.size() + k)) = slack[k].second;
  }
  const Eigen::VectorXd x = nnls(a, b);

  HoldCommands out;
  out.commands_mm = trial.commands_mm;
  for (std::size_t k = 0; k < pulled.size(); ++k) {
    const std::size_t i = idx(pulled[k]);
    out.tensions_n[i] = x[static_cast<Eigen::Index>(k)];
    out.commands_mm[i] = predicted[i] + out.tensions_n[i] / base.cable_stiffness_n_per_mm;
  }
  out.residual = (a * x - b).norm();
  return out;
}

Pose index_target_pose(const HandModel& model, const IndexTargets& targets) {
  Pose q = model.rest_pose();
  q[Slot::IndexMcpFlex] = targets.mcp_deg;
  q[Slot::IndexPip] = targets.pip_deg;
  return clamp_pose(model, q);
}

CableVector command_for_class(const ModelPtr& model, PostureClass c, const IndexTargets& targets,
                              const CalibrationMap& map, const std::optional<ExternalForce>& force,
                              const CommandOptions& options) {
  if (!model) throw ControlError("no model");
  const HandModel& m = *model;
  check_target(m, Slot::IndexMcpFlex, targets.mcp_deg);
  check_target(m, Slot::IndexPip, targets.pip_deg);

  const bool forced = is_forced(c);
  if (forced && (!force || force->finger != Finger::Index)) {
    throw ControlError("class " + std::string(to_string(c)) + " needs an external force on the index fingertip");
  }
  if (!forced && force) {
    throw ControlError("class " + std::string(to_string(c)) + " admits no external force");
  }

  const Pose q = index_target_pose(m, targets);
  const PostureClass actual = classify_posture(q, forced, options.eps_deg);
  if (actual != c) {
    throw ControlError("targets MCP " + std::to_string(targets.mcp_deg) + ", PIP " + std::to_string(targets.pip_deg) +
                       " belong to class " + std::string(to_string(actual)) + ", not " + std::string(to_string(c)));
  }

  const ActivationSet act = activation_for(c);
  std::array<CableUse, kCableCount> use{};
  use.fill(CableUse::Keep);
  const bool bl_engaged = force && force->magnitude_n > options.bl_engage_force_n;
  use[idx(CableId::IndexBL)] = use_for(act.bl, bl_engaged);
  use[idx(CableId::IndexOL)] = use_for(act.ol, true);
  use[idx(CableId::IndexPL)] = use_for(act.pl, true);

  EquilibriumProblem base;
  base.model = model;
  base.external_force = force;
  base.cable_stiffness_n_per_mm = options.cable_stiffness_n_per_mm;
  HoldOptions hold;
  hold.slack_margin_mm = options.slack_margin_mm;
  return hold_commands(base, q, use, map, hold).commands_mm;
}

}  // namespace catch919
