#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "catch919/control.hpp"
#include "catch919/hand_model.hpp"
#include "catch919/linkage.hpp"
#include "catch919/statics.hpp"

namespace fixtures {

using namespace catch919;

inline std::string data_path(const std::string& name) { return std::string(CATCH919_DATA_DIR) + "/" + name; }

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Index finger with only the blue and purple lines and Spring 1: MCP and PIP
// are the only joints that can leave rest.
inline ModelPtr toy_finger() {
  HandModel h = default_catch919();
  std::erase_if(h.routes, [](const CableRoute& r) { return r.cable != CableId::IndexBL && r.cable != CableId::IndexPL; });
  std::erase_if(h.springs, [](const SpringSpec& s) { return s.role != SpringRole::Spring1; });
  return std::make_shared<const HandModel>(std::move(h));
}

// Closed-form energy of the toy finger, written out from the routing table.
struct ToyEnergy {
  double bl_mm = 0.0;
  double pl_mm = 0.0;
  double arm_mm = 8.0;
  double spring_nmm_per_deg = 2.0;
  double cable_k = 50.0;

  double operator()(double mcp, double pip) const {
    const double r = std::numbers::pi / 180.0;
    const double bl = std::max(0.0, bl_mm - arm_mm * r * (mcp + pip));
    const double pl = std::max(0.0, pl_mm + arm_mm * r * mcp);
    return r * 0.5 * spring_nmm_per_deg * pip * pip + 0.5 * cable_k * (bl * bl + pl * pl);
  }
};

struct GridMin {
  double mcp = 0.0;
  double pip = 0.0;
  double energy = 0.0;
};

inline GridMin brute_force(const ToyEnergy& e, double mcp_lo, double mcp_hi, double pip_lo, double pip_hi,
                           double step) {
  GridMin best{0, 0, INFINITY};
  const int nm = static_cast<int>(std::floor((mcp_hi - mcp_lo) / step + 1e-9));
  const int np = static_cast<int>(std::floor((pip_hi - pip_lo) / step + 1e-9));
  for (int i = 0; i <= nm; ++i) {
    for (int j = 0; j <= np; ++j) {
      const double m = mcp_lo + step * i;
      const double p = pip_lo + step * j;
      const double v = e(m, p);
      if (v < best.energy) best = {m, p, v};
    }
  }
  return best;
}

// Loop closure by bisection on the output crank angle, independent of the
// library solver.
inline double oracle_dip(const FourBarDims& d, double pip) {
  const double r = std::numbers::pi / 180.0;
  const double th = (d.input_mount_deg + pip) * r;
  const double ax = d.input_mm * std::cos(th), ay = d.input_mm * std::sin(th);
  const double psi = std::atan2(ay, ax - d.ground_mm);
  auto bx = [&](double phi) { return d.ground_mm + d.output_mm * std::cos(phi); };
  auto by = [&](double phi) { return d.output_mm * std::sin(phi); };
  auto f = [&](double phi) { return std::hypot(bx(phi) - ax, by(phi) - ay) - d.coupler_mm; };
  // Distance grows from psi to psi + pi and shrinks from psi - pi to psi.
  auto root = [&](double lo, double hi) {
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      ((f(lo) < 0) == (f(mid) < 0) ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  };
  for (double phi : {root(psi, psi + std::numbers::pi), root(psi, psi - std::numbers::pi)}) {
    const double cross = (d.ground_mm - ax) * (by(phi) - ay) + ay * (bx(phi) - ax);
    if ((cross > 0) == (d.branch == Branch::Open)) {
      return std::remainder(phi / r - d.output_mount_deg, 360.0);
    }
  }
  return NAN;
}

inline bool oracle_assembles(const FourBarDims& d, double pip) {
  const double th = (d.input_mount_deg + pip) * std::numbers::pi / 180.0;
  const double span = std::hypot(d.input_mm * std::cos(th) - d.ground_mm, d.input_mm * std::sin(th));
  return span <= d.coupler_mm + d.output_mm && d.coupler_mm <= span + d.output_mm &&
         d.output_mm <= span + d.coupler_mm;
}

struct RampFrame {
  IndexTargets target;
  PostureClass cls = PostureClass::A_McpExtIpExt;
  CableVector commands{};
  EquilibriumResult result;
};

// Drives the index through a ramp of targets, each frame commanded by the
// control table for the class of its target and solved from the previous
// frame.
inline std::vector<RampFrame> run_ramp(const ModelPtr& model, const std::vector<IndexTargets>& targets,
                                       const CalibrationMap& map) {
  std::vector<RampFrame> out;
  Pose q = model->rest_pose();
  for (const IndexTargets& t : targets) {
    RampFrame f;
    f.target = t;
    f.cls = classify_posture(index_target_pose(*model, t), false);
    f.commands = command_for_class(model, f.cls, t, map);
    EquilibriumProblem p;
    p.model = model;
    p.commands_mm = f.commands;
    f.result = solve_equilibrium(p, q);
    q = f.result.q_star;
    out.push_back(std::move(f));
  }
  return out;
}

// IP joints sweep while the MCP holds.
inline std::vector<IndexTargets> ip_only_ramp(double mcp_hold = 0.0) {
  std::vector<IndexTargets> t;
  for (int pip = 0; pip <= 90; pip += 10) t.push_back({mcp_hold, static_cast<double>(pip)});
  return t;
}

// MCP sweeps while the IP joints hold.
inline std::vector<IndexTargets> mcp_only_ramp(double pip_hold = 0.0) {
  std::vector<IndexTargets> t;
  for (int mcp = -30; mcp <= 90; mcp += 10) t.push_back({static_cast<double>(mcp), pip_hold});
  return t;
}

}  // namespace fixtures
