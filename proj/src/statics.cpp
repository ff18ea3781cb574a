#include "catch919/statics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include <Eigen/Dense>

#include "catch919/error.hpp"

namespace catch919 {
namespace {

constexpr double kRadPerDeg = std::numbers::pi / 180.0;
constexpr double kArmijo = 1e-4;
constexpr double kCurvatureFloor = 1e-4;

struct FingerSlots {
  Slot mcp;
  Slot pip;
  Slot dip;
};

std::optional<FingerSlots> linkage_slots(Finger f) {
  switch (f) {
    case Finger::Index:
      return FingerSlots{Slot::IndexMcpFlex, Slot::IndexPip, Slot::IndexDip};
    case Finger::Middle:
      return FingerSlots{Slot::MiddleMcp, Slot::MiddlePip, Slot::MiddleDip};
    case Finger::Ring:
      return FingerSlots{Slot::RingMcp, Slot::RingPip, Slot::RingDip};
    case Finger::Little:
      return FingerSlots{Slot::LittleMcp, Slot::LittlePip, Slot::LittleDip};
    default:
      return std::nullopt;
  }
}

constexpr std::array<Finger, 4> kLinkageFingers = {Finger::Index, Finger::Middle, Finger::Ring, Finger::Little};

Point2 unit(double deg) { return {std::cos(deg * kRadPerDeg), std::sin(deg * kRadPerDeg)}; }

double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }

struct Bounds {
  std::array<double, kJointSlots> lo{};
  std::array<double, kJointSlots> hi{};
};

// PIP in [a, z] where the coupler curve crosses target, from below.
double invert_coupler(const FourBarDims& d, double target, double a, double z) {
  using Key = std::array<double, 9>;
  thread_local std::map<Key, double> cache;
  const Key key = {d.ground_mm, d.input_mm, d.coupler_mm, d.output_mm, d.input_mount_deg, d.output_mount_deg,
                   target, a, z};
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  double lo = a;
  double hi = z;
  for (int k = 0; k < 60; ++k) {
    const double mid = 0.5 * (lo + hi);
    (solve_coupler(d, mid) < target ? lo : hi) = mid;
  }
  if (cache.size() > 256) cache.clear();
  cache.emplace(key, lo);
  return lo;
}

Bounds bounds_of(const EquilibriumProblem& p) {
  Bounds b;
  for (std::size_t i = 0; i < kJointSlots; ++i) {
    b.lo[i] = p.model->joints[i].min_deg;
    b.hi[i] = p.model->joints[i].max_deg;
  }
  // A linkage locks once its DIP reaches a stop, which caps PIP.
  const HandModel& m = *p.model;
  for (Finger f : kLinkageFingers) {
    const FourBarDims* dims = m.linkage(f);
    if (dims == nullptr) continue;
    const FingerSlots s = *linkage_slots(f);
    const JointSpec& dip = m.joint(s.dip);
    double& lo = b.lo[idx(s.pip)];
    double& hi = b.hi[idx(s.pip)];
    if (solve_coupler(*dims, hi) > dip.max_deg) hi = invert_coupler(*dims, dip.max_deg, lo, hi);
    if (f != Finger::Index && solve_coupler(*dims, lo) < dip.min_deg) lo = invert_coupler(*dims, dip.min_deg, lo, hi);
  }
  for (const auto& [slot, stop] : p.contact_stops) {
    b.hi[idx(slot)] = std::max(b.lo[idx(slot)], std::min(b.hi[idx(slot)], stop));
  }
  return b;
}

// Linkage DIP value and whether the DIP slot actually follows PIP there
// (false when clamped at a DIP limit).
struct DipValue {
  double dip;
  double slope;
  bool follows;
};

DipValue linkage_dip(const HandModel& m, Finger f, const Pose& q) {
  const FingerSlots s = *linkage_slots(f);
  const FourBarDims& dims = *m.linkage(f);
  double raw = solve_coupler(dims, q[s.pip]);
  if (f == Finger::Index) raw -= q[Slot::IndexChute];
  const JointSpec& spec = m.joint(s.dip);
  const double dip = std::clamp(raw, spec.min_deg, spec.max_deg);
  const bool follows = raw >= spec.min_deg && raw <= spec.max_deg;
  return {dip, follows ? coupling_slope(dims, q[s.pip]) : 0.0, follows};
}

Point2 resolved_direction(const EquilibriumProblem& p) {
  const ExternalForce& f = *p.external_force;
  if (f.direction) return *f.direction;
  return dorsal_normal(*p.model, f.finger, p.model->rest_pose());
}

double spring_energy(const SpringSpec& s, const JointSpec& j, double theta) {
  const double d = theta - s.rest_deg;
  double e = 0.5 * s.stiffness_nmm_per_deg * d * d;
  if (s.preload_nmm > 0.0) e += s.preload_nmm * (s.rest_deg == j.min_deg ? d : -d);
  return kRadPerDeg * e;
}

double spring_slope(const SpringSpec& s, const JointSpec& j, double theta) {
  double g = s.stiffness_nmm_per_deg * (theta - s.rest_deg);
  if (s.preload_nmm > 0.0) g += s.rest_deg == j.min_deg ? s.preload_nmm : -s.preload_nmm;
  return kRadPerDeg * g;
}

// Gradient with every slot treated as independent.
std::array<double, kJointSlots> slot_gradient(const EquilibriumProblem& p, const Pose& q, const CableVector& stretch,
                                              const ExcursionJacobian& jac) {
  const HandModel& m = *p.model;
  std::array<double, kJointSlots> g{};
  for (const SpringSpec& s : m.springs) {
    const Slot slot = *slot_of(s.joint);
    g[idx(slot)] += spring_slope(s, m.joint(slot), q[slot]);
  }
  for (std::size_t c = 0; c < kCableCount; ++c) {
    const double t = p.cable_stiffness_n_per_mm * std::max(0.0, stretch[c]);
    if (t == 0.0) continue;
    for (std::size_t j = 0; j < kJointSlots; ++j) g[j] -= t * jac.rows[c][j];
  }
  if (p.external_force && p.external_force->magnitude_n != 0.0) {
    const ExternalForce& f = *p.external_force;
    const Point2 n = resolved_direction(p);
    const std::vector<Point2> chain = finger_chain(m, f.finger, q);
    const Point2 tip = chain.back();
    const FingerSlots s = *linkage_slots(f.finger);
    const std::array<Slot, 3> joints = {s.mcp, s.pip, s.dip};
    for (std::size_t k = 0; k < 3; ++k) {
      const Point2 pin = chain[k + 1];
      // Flexion turns the distal part clockwise about the pin.
      const Point2 d_tip{kRadPerDeg * (tip.y - pin.y), -kRadPerDeg * (tip.x - pin.x)};
      g[idx(joints[k])] -= f.magnitude_n * dot(n, d_tip);
    }
    if (f.finger == Finger::Index) {
      const double phi = -(q[s.mcp] + q[s.pip] + q[s.dip]);
      const Point2 u = unit(phi);
      g[idx(Slot::IndexChute)] -= f.magnitude_n * m.chute_slide_mm_per_deg * dot(n, u);
    }
  }
  return g;
}

// Reduced Jacobian column of cable c for a free slot: the chain rule through
// the linkage DIP.
struct Reduction {
  std::array<double, kJointSlots> dip_gain{};  // d(dip slot)/d(slot) for pip and chute slots
  std::array<Slot, kJointSlots> dip_of{};
  std::array<bool, kJointSlots> feeds_dip{};
};

Reduction reduction(const HandModel& m, const Pose& q) {
  Reduction r;
  for (Finger f : kLinkageFingers) {
    const FingerSlots s = *linkage_slots(f);
    const DipValue dv = linkage_dip(m, f, q);
    r.feeds_dip[idx(s.pip)] = true;
    r.dip_of[idx(s.pip)] = s.dip;
    r.dip_gain[idx(s.pip)] = dv.slope;
    if (f == Finger::Index) {
      r.feeds_dip[idx(Slot::IndexChute)] = true;
      r.dip_of[idx(Slot::IndexChute)] = s.dip;
      r.dip_gain[idx(Slot::IndexChute)] = dv.follows ? -1.0 : 0.0;
    }
  }
  return r;
}

std::array<double, kJointSlots> reduce(const std::array<double, kJointSlots>& g, const Reduction& r) {
  std::array<double, kJointSlots> out{};
  for (Slot s : free_slots()) {
    const std::size_t i = idx(s);
    out[i] = g[i];
    if (r.feeds_dip[i]) out[i] += g[idx(r.dip_of[i])] * r.dip_gain[i];
  }
  return out;
}

double projected_norm(const std::array<double, kJointSlots>& g, const Pose& q, const Bounds& b) {
  double ss = 0.0;
  for (Slot s : free_slots()) {
    const std::size_t i = idx(s);
    double gi = g[i];
    if (q.at(i) <= b.lo[i] && gi > 0.0) gi = 0.0;
    if (q.at(i) >= b.hi[i] && gi < 0.0) gi = 0.0;
    ss += gi * gi;
  }
  return std::sqrt(ss);
}

}  // namespace

std::pair<double, double> slot_bounds(const EquilibriumProblem& p, Slot s) {
  const Bounds b = bounds_of(p);
  return {b.lo[idx(s)], b.hi[idx(s)]};
}

const std::vector<Slot>& free_slots() {
  static const std::vector<Slot> slots = {
      Slot::ThumbCmcFlex, Slot::ThumbCmcAbd, Slot::ThumbMcpFlex, Slot::ThumbMcpProSup, Slot::ThumbIp,
      Slot::IndexMcpFlex, Slot::IndexPip,    Slot::IndexChute,   Slot::MiddleMcp,      Slot::MiddlePip,
      Slot::RingMcp,      Slot::RingPip,     Slot::LittleMcp,    Slot::LittlePip,
  };
  return slots;
}

void check_problem(const EquilibriumProblem& p) {
  if (!p.model) throw InvariantError("problem.model", "missing");
  if (!(p.cable_stiffness_n_per_mm > 0.0) || !std::isfinite(p.cable_stiffness_n_per_mm)) {
    throw InvariantError("problem.cable_stiffness", "must be finite and > 0");
  }
  for (CableId c : kAllCables) {
    if (!std::isfinite(p.commands_mm[idx(c)])) {
      throw InvariantError("problem.commands." + std::string(to_string(c)), "must be finite");
    }
  }
  for (const auto& [slot, deg] : p.direct_joints) {
    const JointSpec& j = p.model->joint(slot);
    const std::string path = "problem.direct_joints." + joint_name(slot);
    if (j.drive != Drive::DirectServo) throw ReferenceError(path + ": joint is not servo driven");
    if (!std::isfinite(deg) || deg < j.min_deg || deg > j.max_deg) {
      throw InvariantError(path, "target outside [" + std::to_string(j.min_deg) + ", " + std::to_string(j.max_deg) + "]");
    }
  }
  if (p.external_force) {
    const ExternalForce& f = *p.external_force;
    if (!linkage_slots(f.finger)) {
      throw ReferenceError("external force on unsupported finger " + std::string(to_string(f.finger)));
    }
    if (!(f.magnitude_n >= 0.0) || !std::isfinite(f.magnitude_n)) {
      throw InvariantError("problem.external_force.magnitude", "must be finite and >= 0");
    }
  }
}

Pose complete_pose(const EquilibriumProblem& p, const Pose& q) {
  const HandModel& m = *p.model;
  const Bounds b = bounds_of(p);
  Pose out = q;
  for (Slot s : free_slots()) out[s] = std::clamp(q[s], b.lo[idx(s)], b.hi[idx(s)]);
  for (std::size_t i = 0; i < kJointSlots; ++i) {
    if (m.joints[i].drive == Drive::DirectServo) out.at(i) = m.joints[i].rest_deg;
  }
  for (const auto& [slot, deg] : p.direct_joints) out[slot] = deg;
  for (Finger f : kLinkageFingers) out[linkage_slots(f)->dip] = linkage_dip(m, f, out).dip;
  out[Slot::PalmArch] = palm_arch(m, out);
  return out;
}

CableVector cable_stretch(const EquilibriumProblem& p, const Pose& q) {
  const CableVector now = excursions(*p.model, q);
  const CableVector rest = excursions(*p.model, p.model->rest_pose());
  CableVector s{};
  for (std::size_t c = 0; c < kCableCount; ++c) s[c] = p.commands_mm[c] - (now[c] - rest[c]);
  return s;
}

double potential_energy(const EquilibriumProblem& p, const Pose& q_in) {
  const HandModel& m = *p.model;
  const Pose q = complete_pose(p, q_in);
  double e = 0.0;
  for (const SpringSpec& s : m.springs) {
    const Slot slot = *slot_of(s.joint);
    e += spring_energy(s, m.joint(slot), q[slot]);
  }
  const CableVector stretch = cable_stretch(p, q);
  for (double s : stretch) {
    const double t = std::max(0.0, s);
    e += 0.5 * p.cable_stiffness_n_per_mm * t * t;
  }
  if (p.external_force && p.external_force->magnitude_n != 0.0) {
    const ExternalForce& f = *p.external_force;
    const Point2 n = resolved_direction(p);
    const Point2 tip = fingertip_position(m, f.finger, q);
    const Point2 ref = fingertip_position(m, f.finger, m.rest_pose());
    e -= f.magnitude_n * (n.x * (tip.x - ref.x) + n.y * (tip.y - ref.y));
  }
  return e;
}

std::array<double, kJointSlots> energy_gradient(const EquilibriumProblem& p, const Pose& q_in) {
  const Pose q = complete_pose(p, q_in);
  const ExcursionJacobian jac = jacobian(*p.model, q);
  const auto g = slot_gradient(p, q, cable_stretch(p, q), jac);
  return reduce(g, reduction(*p.model, q));
}

ExcursionJacobian reduced_jacobian(const HandModel& model, const Pose& q) {
  const ExcursionJacobian jac = jacobian(model, q);
  const Reduction red = reduction(model, q);
  ExcursionJacobian out;
  for (std::size_t c = 0; c < kCableCount; ++c) out.rows[c] = reduce(jac.rows[c], red);
  return out;
}

EquilibriumResult solve_equilibrium(const EquilibriumProblem& p_in, const Pose& q_init) {
  check_problem(p_in);
  EquilibriumProblem p = p_in;
  if (p.external_force && !p.external_force->direction) {
    p.external_force->direction = dorsal_normal(*p.model, p.external_force->finger, complete_pose(p, q_init));
  }
  const HandModel& m = *p.model;
  const Bounds b = bounds_of(p);
  const std::vector<Slot>& fs = free_slots();
  const std::size_t n = fs.size();
  const ExcursionJacobian jac = jacobian(m, q_init);

  Pose q = complete_pose(p, q_init);
  double energy = potential_energy(p, q);
  EquilibriumResult res;

  int it = 0;
  double gnorm = 0.0;
  for (;; ++it) {
    const CableVector stretch = cable_stretch(p, q);
    const Reduction red = reduction(m, q);
    const auto g = reduce(slot_gradient(p, q, stretch, jac), red);
    gnorm = projected_norm(g, q, b);
    if (gnorm < p.options.gradient_tolerance || it >= p.options.max_iterations) break;

    // Gauss-Newton curvature: springs plus taut cables along the reduced
    // Jacobian. The fingertip-force curvature is left out.
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t a = 0; a < n; ++a) {
      const SpringSpec* sp = m.spring_at(fs[a]);
      h(a, a) += sp ? kRadPerDeg * sp->stiffness_nmm_per_deg : 0.0;
    }
    for (std::size_t c = 0; c < kCableCount; ++c) {
      if (stretch[c] <= 0.0) continue;
      Eigen::VectorXd jr(n);
      for (std::size_t a = 0; a < n; ++a) {
        const std::size_t i = idx(fs[a]);
        jr[a] = jac.rows[c][i] + (red.feeds_dip[i] ? jac.rows[c][idx(red.dip_of[i])] * red.dip_gain[i] : 0.0);
      }
      h.noalias() += p.cable_stiffness_n_per_mm * jr * jr.transpose();
    }
    for (std::size_t a = 0; a < n; ++a) h(a, a) = std::max(h(a, a), kCurvatureFloor) + kCurvatureFloor;

    // Bertsekas projected Newton: coordinates pinned at a bound with the
    // gradient pushing outward take a scaled gradient step only.
    const double eps = std::min(1e-3, gnorm);
    std::vector<std::size_t> active, inactive;
    for (std::size_t a = 0; a < n; ++a) {
      const std::size_t i = idx(fs[a]);
      const bool at_lo = q.at(i) <= b.lo[i] + eps && g[i] > 0.0;
      const bool at_hi = q.at(i) >= b.hi[i] - eps && g[i] < 0.0;
      (at_lo || at_hi ? active : inactive).push_back(a);
    }
    Eigen::VectorXd dir = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    for (std::size_t a : active) dir[a] = -g[idx(fs[a])] / h(a, a);
    if (!inactive.empty()) {
      const auto k = static_cast<Eigen::Index>(inactive.size());
      Eigen::MatrixXd hf(k, k);
      Eigen::VectorXd gf(k);
      for (Eigen::Index r = 0; r < k; ++r) {
        gf[r] = g[idx(fs[inactive[r]])];
        for (Eigen::Index c = 0; c < k; ++c) hf(r, c) = h(inactive[r], inactive[c]);
      }
      const Eigen::VectorXd df = -hf.ldlt().solve(gf);
      for (Eigen::Index r = 0; r < k; ++r) dir[inactive[r]] = df[r];
    }

    auto trial = [&](double t, const Eigen::VectorXd& d) {
      Pose x = q;
      for (std::size_t a = 0; a < n; ++a) x[fs[a]] = q[fs[a]] + t * d[a];
      return complete_pose(p, x);
    };
    auto armijo = [&](const Eigen::VectorXd& d, Pose& out, double& e_out) {
      double t = 1.0;
      for (int k = 0; k < 60; ++k, t *= 0.5) {
        const Pose x = trial(t, d);
        double decrease = 0.0;
        for (Slot s : fs) decrease += g[idx(s)] * (x[s] - q[s]);
        if (decrease >= 0.0) continue;
        const double e = potential_energy(p, x);
        if (e <= energy + kArmijo * decrease) {
          out = x;
          e_out = e;
          return true;
        }
      }
      return false;
    };

    Pose next;
    double e_next = 0.0;
    bool ok = armijo(dir, next, e_next);
    if (!ok) {
      Eigen::VectorXd sd(static_cast<Eigen::Index>(n));
      for (std::size_t a = 0; a < n; ++a) sd[a] = -g[idx(fs[a])] / h(a, a);
      ok = armijo(sd, next, e_next);
    }
    if (!ok) break;  // no representable descent left
    q = next;
    energy = e_next;
  }

  res.q_star = q;
  res.energy = energy;
  res.iterations = it;
  res.residual_norm = gnorm;
  res.converged = gnorm < p.options.gradient_tolerance;
  const CableVector stretch = cable_stretch(p, q);
  for (std::size_t c = 0; c < kCableCount; ++c) {
    res.cable_tensions[c] = p.cable_stiffness_n_per_mm * std::max(0.0, stretch[c]);
  }
  for (std::size_t i = 0; i < kJointSlots; ++i) {
    const Slot s = static_cast<Slot>(i);
    const bool is_free = std::find(fs.begin(), fs.end(), s) != fs.end();
    const bool is_dip = m.joints[i].drive == Drive::LinkageCoupled;
    if (!is_free && !is_dip) continue;
    if (q.at(i) <= b.lo[i] || q.at(i) >= b.hi[i]) res.active_limits.push_back(joint_id(s));
  }
  res.chute_extension_deg = q[Slot::IndexChute];
  return res;
}

EquilibriumResult apply_fingertip_force(const EquilibriumProblem& p, const Pose& q_init) {
  if (!p.external_force) throw InvariantError("problem.external_force", "missing");
  check_problem(p);
  EquilibriumProblem resolved = p;
  resolved.external_force->direction =
      dorsal_normal(*p.model, p.external_force->finger, complete_pose(p, q_init));
  return solve_equilibrium(resolved, q_init);
}

std::vector<Point2> finger_chain(const HandModel& m, Finger finger, const Pose& q) {
  std::vector<double> lengths;
  std::vector<double> angles;
  if (finger == Finger::Thumb) {
    lengths = {m.phalanx_length(finger, PhalanxName::Metacarpal), m.phalanx_length(finger, PhalanxName::Proximal),
               m.phalanx_length(finger, PhalanxName::Distal)};
    angles = {q[Slot::ThumbCmcFlex], q[Slot::ThumbMcpFlex], q[Slot::ThumbIp]};
  } else if (auto s = linkage_slots(finger)) {
    lengths = {m.phalanx_length(finger, PhalanxName::Metacarpal), m.phalanx_length(finger, PhalanxName::Proximal),
               m.phalanx_length(finger, PhalanxName::Middle), m.phalanx_length(finger, PhalanxName::Distal)};
    angles = {0.0, q[s->mcp], q[s->pip], q[s->dip]};
  } else {
    throw ReferenceError("finger " + std::string(to_string(finger)) + " has no fingertip");
  }
  std::vector<Point2> pts{{0.0, 0.0}};
  double phi = 0.0;
  for (std::size_t k = 0; k < lengths.size(); ++k) {
    phi -= angles[k];
    double len = lengths[k];
    if (finger == Finger::Index && k + 1 == lengths.size()) len += m.chute_slide_mm_per_deg * q[Slot::IndexChute];
    const Point2 u = unit(phi);
    pts.push_back({pts.back().x + len * u.x, pts.back().y + len * u.y});
  }
  return pts;
}

Point2 fingertip_position(const HandModel& model, Finger finger, const Pose& q) {
  return finger_chain(model, finger, q).back();
}

Point2 dorsal_normal(const HandModel& m, Finger finger, const Pose& q) {
  double phi = 0.0;
  if (finger == Finger::Thumb) {
    phi = -(q[Slot::ThumbCmcFlex] + q[Slot::ThumbMcpFlex] + q[Slot::ThumbIp]);
  } else if (auto s = linkage_slots(finger)) {
    phi = -(q[s->mcp] + q[s->pip] + q[s->dip]);
  } else {
    throw ReferenceError("finger " + std::string(to_string(finger)) + " has no fingertip");
  }
  (void)m;
  return unit(phi + 90.0);
}

double chute_threshold_n(const HandModel& model) {
  const SpringSpec* s = model.spring_at(Slot::IndexChute);
  const double preload = s ? s->preload_nmm : 0.0;
  return preload / model.phalanx_length(Finger::Index, PhalanxName::Distal);
}

}  // namespace catch919
