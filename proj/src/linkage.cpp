#include "catch919/linkage.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "catch919/error.hpp"
#include "catch919/joint.hpp"
#include "catch919/kernels.hpp"

namespace catch919 {
namespace {

// |cos| within this of 1 means the two assembly branches coincide.
constexpr double kCoincidenceTol = 1e-12;
constexpr double kProbeRad = 1e-6;

struct Closure {
  double phi = 0.0;  // direction of (DIP pin - input tip)
  double arg = 0.0;  // cos(beta - phi)
};

Closure closure(const FourBarDims& d, double alpha) {
  const double vx = d.ground_mm - d.input_mm * std::cos(alpha);
  const double vy = -d.input_mm * std::sin(alpha);
  const double v2 = vx * vx + vy * vy;
  const double vn = std::sqrt(v2);
  const double k = (d.coupler_mm * d.coupler_mm - v2 - d.output_mm * d.output_mm) / (2.0 * d.output_mm);
  return {std::atan2(vy, vx), vn > 0.0 ? k / vn : std::numeric_limits<double>::infinity()};
}

bool assembles(const FourBarDims& d, double alpha) {
  return std::abs(closure(d, alpha).arg) <= 1.0 + kCoincidenceTol;
}

double wrap_deg(double deg) {
  double w = std::fmod(deg + 180.0, 360.0);
  if (w < 0.0) w += 360.0;
  return w - 180.0;
}

void check_lengths(const FourBarDims& d) {
  if (!(d.ground_mm > 0.0 && d.input_mm > 0.0 && d.coupler_mm > 0.0 && d.output_mm > 0.0)) {
    throw AssemblyFailure("four-bar link lengths must be positive");
  }
}

}  // namespace

std::string_view to_string(Branch b) { return b == Branch::Open ? "Open" : "Crossed"; }

std::optional<Branch> branch_from_string(std::string_view s) {
  if (s == "Open") return Branch::Open;
  if (s == "Crossed") return Branch::Crossed;
  return std::nullopt;
}

std::string_view to_string(GrashofClass g) {
  switch (g) {
    case GrashofClass::CrankRocker:
      return "Crank-rocker";
    case GrashofClass::DoubleCrank:
      return "Double-crank";
    case GrashofClass::DoubleRocker:
      return "Double-rocker";
    case GrashofClass::ChangePoint:
      return "Change-point";
  }
  return "unknown";
}

double output_angle_deg(const FourBarDims& dims, double input_deg) {
  check_lengths(dims);
  const double alpha = deg2rad(input_deg);
  const Closure c = closure(dims, alpha);
  if (!(std::abs(c.arg) <= 1.0 + kCoincidenceTol)) {
    throw AssemblyFailure("loop closure has no real solution at input " + std::to_string(input_deg) + " deg");
  }
  if (std::abs(c.arg) >= 1.0 - kCoincidenceTol) {
    // Branches coincide. A change point can be passed through; a dead point cannot.
    if (!assembles(dims, alpha - kProbeRad) || !assembles(dims, alpha + kProbeRad)) {
      throw BranchSingularity("toggle position at input " + std::to_string(input_deg) + " deg");
    }
  }
  const double spread = std::acos(std::clamp(c.arg, -1.0, 1.0));
  const double beta = dims.branch == Branch::Open ? c.phi + spread : c.phi - spread;
  return rad2deg(beta);
}

double solve_coupler(const FourBarDims& dims, double pip_deg) {
  const double beta = output_angle_deg(dims, dims.input_mount_deg + pip_deg);
  return wrap_deg(beta - dims.output_mount_deg);
}

double coupling_slope(const FourBarDims& d, double pip_deg) {
  const double alpha = deg2rad(d.input_mount_deg + pip_deg);
  const double beta = deg2rad(output_angle_deg(d, d.input_mount_deg + pip_deg));
  // v = D - A(alpha), u = (cos b, sin b); closure: v.u = K(alpha) with
  // K = (c^2 - |v|^2 - b^2) / (2 b).
  const double vx = d.ground_mm - d.input_mm * std::cos(alpha);
  const double vy = -d.input_mm * std::sin(alpha);
  const double dvx = d.input_mm * std::sin(alpha);
  const double dvy = -d.input_mm * std::cos(alpha);
  const double ux = std::cos(beta), uy = std::sin(beta);
  const double v_dot_dv = vx * dvx + vy * dvy;
  const double dk = -v_dot_dv / d.output_mm;
  const double dv_dot_u = dvx * ux + dvy * uy;
  const double v_dot_uperp = -vx * uy + vy * ux;
  if (std::abs(v_dot_uperp) < 1e-300) throw BranchSingularity("coupling slope undefined at toggle");
  return (dk - dv_dot_u) / v_dot_uperp;
}

FourBarDims calibrate_output_mount(FourBarDims dims) {
  dims.output_mount_deg = output_angle_deg(dims, dims.input_mount_deg);
  return dims;
}

CouplingCurve coupling_curve(const FourBarDims& dims, double lo_deg, double hi_deg, std::size_t n) {
  if (!(lo_deg < hi_deg) || n < 2) throw AssemblyFailure("coupling_curve needs lo < hi and n >= 2");
  CouplingCurve curve;
  curve.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double pip = lo_deg + (hi_deg - lo_deg) * static_cast<double>(i) / static_cast<double>(n - 1);
    try {
      curve.push_back({pip, solve_coupler(dims, pip)});
    } catch (const AssemblyFailure& e) {
      throw AssemblyFailure("sample " + std::to_string(i) + ": " + e.what());
    } catch (const BranchSingularity& e) {
      throw BranchSingularity("sample " + std::to_string(i) + ": " + e.what());
    }
  }
  return curve;
}

GrashofClass grashof_class(const FourBarDims& d) {
  std::array<double, 4> links = {d.ground_mm, d.input_mm, d.coupler_mm, d.output_mm};
  const auto [smin, smax] = std::minmax_element(links.begin(), links.end());
  const double s = *smin;
  const double l = *smax;
  const double total = links[0] + links[1] + links[2] + links[3];
  const double s_plus_l = s + l;
  const double p_plus_q = total - s_plus_l;
  if (std::abs(s_plus_l - p_plus_q) <= 1e-12 * total) return GrashofClass::ChangePoint;
  if (s_plus_l > p_plus_q) return GrashofClass::DoubleRocker;
  if (d.ground_mm == s) return GrashofClass::DoubleCrank;
  if (d.input_mm == s || d.output_mm == s) return GrashofClass::CrankRocker;
  return GrashofClass::DoubleRocker;
}

FourBarDims scaled(const FourBarDims& dims, double factor) {
  FourBarDims out = dims;
  out.ground_mm *= factor;
  out.input_mm *= factor;
  out.coupler_mm *= factor;
  out.output_mm *= factor;
  return out;
}

double coupling_rms(const FourBarDims& dims, const CouplingCurve& target) {
  if (target.empty()) return 0.0;
  std::vector<double> predicted(target.size());
  std::vector<double> wanted(target.size());
  try {
    for (std::size_t i = 0; i < target.size(); ++i) {
      predicted[i] = solve_coupler(dims, target[i].pip_deg);
      wanted[i] = target[i].dip_deg;
    }
  } catch (const Error&) {
    return std::numeric_limits<double>::infinity();
  }
  const double ss = kernels::active().sum_sq_diff(predicted.data(), wanted.data(), target.size());
  return std::sqrt(ss / static_cast<double>(target.size()));
}

namespace {

constexpr std::size_t kSearchDims = 5;

std::array<double, kSearchDims> pack(const FourBarDims& d) {
  return {d.ground_mm, d.input_mm, d.coupler_mm, d.output_mm, d.input_mount_deg};
}

FourBarDims unpack(const std::array<double, kSearchDims>& x, Branch branch) {
  FourBarDims d;
  d.ground_mm = x[0];
  d.input_mm = x[1];
  d.coupler_mm = x[2];
  d.output_mm = x[3];
  d.input_mount_deg = x[4];
  d.branch = branch;
  return d;
}

double objective(const std::array<double, kSearchDims>& x, Branch branch, const CouplingCurve& target) {
  try {
    return coupling_rms(calibrate_output_mount(unpack(x, branch)), target);
  } catch (const Error&) {
    return std::numeric_limits<double>::infinity();
  }
}

}  // namespace

SynthesisResult synthesize(const CouplingCurve& target, const FourBarDims& initial,
                           const SynthesisBounds& bounds, const SynthesisOptions& options) {
  if (target.size() < 2) throw SynthesisError("target curve needs at least two samples");
  for (std::size_t i = 1; i < target.size(); ++i) {
    if (!(target[i].pip_deg > target[i - 1].pip_deg)) {
      throw SynthesisError("target pip samples must be strictly increasing (sample " + std::to_string(i) + ")");
    }
    if (target[i].dip_deg < target[i - 1].dip_deg) {
      throw SynthesisError("target dip samples must be non-decreasing (sample " + std::to_string(i) + ")");
    }
  }
  const std::array<Interval, kSearchDims> box = {bounds.ground, bounds.input, bounds.coupler, bounds.output,
                                                 bounds.input_mount};
  for (std::size_t i = 0; i < kSearchDims; ++i) {
    if (!(box[i].lo <= box[i].hi)) throw SynthesisError("infeasible bounds: lo > hi for field " + std::to_string(i));
    if (i < 4 && !(box[i].lo > 0.0)) throw SynthesisError("infeasible bounds: link lengths must stay positive");
  }

  std::array<double, kSearchDims> x = pack(initial);
  for (std::size_t i = 0; i < kSearchDims; ++i) x[i] = std::clamp(x[i], box[i].lo, box[i].hi);
  double fx = objective(x, initial.branch, target);
  if (!std::isfinite(fx)) throw SynthesisError("initial dims do not assemble over the target range");

  std::array<double, kSearchDims> step{};
  for (std::size_t i = 0; i < kSearchDims; ++i) step[i] = 0.25 * (box[i].hi - box[i].lo);

  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  SynthesisResult result;
  int sweep = 0;
  for (; sweep < options.max_sweeps && fx > options.rms_tolerance_deg; ++sweep) {
    const double f_start = fx;
    for (std::size_t i = 0; i < kSearchDims; ++i) {
      if (step[i] <= 0.0) continue;
      double a = std::max(box[i].lo, x[i] - step[i]);
      double b = std::min(box[i].hi, x[i] + step[i]);
      auto eval = [&](double v) {
        auto y = x;
        y[i] = v;
        return objective(y, initial.branch, target);
      };
      double c = b - inv_phi * (b - a);
      double d = a + inv_phi * (b - a);
      double fc = eval(c);
      double fd = eval(d);
      for (int it = 0; it < 80 && (b - a) > 1e-12 * (1.0 + std::abs(a)); ++it) {
        if (fc < fd) {
          b = d;
          d = c;
          fd = fc;
          c = b - inv_phi * (b - a);
          fc = eval(c);
        } else {
          a = c;
          c = d;
          fc = fd;
          d = a + inv_phi * (b - a);
          fd = eval(d);
        }
      }
      const double v = fc < fd ? c : d;
      const double fv = std::min(fc, fd);
      if (fv < fx) {
        x[i] = v;
        fx = fv;
      }
    }
    if (fx > f_start * (1.0 - 1e-3)) {
      bool any = false;
      for (auto& s : step) {
        s *= 0.5;
        any = any || s > 1e-9;
      }
      if (!any) break;
    }
  }
  result.dims = calibrate_output_mount(unpack(x, initial.branch));
  result.rms_deg = fx;
  result.sweeps = sweep;
  result.converged = fx <= options.rms_tolerance_deg;
  return result;
}

}  // namespace catch919
