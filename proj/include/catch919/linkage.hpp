#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

namespace catch919 {

enum class Branch { Open, Crossed };

// Planar four-bar coupling the DIP joint to the PIP joint.
//
// Frame: the ground link is the middle phalanx, from the PIP pin (origin) to
// the DIP pin at (ground, 0). The input crank is rigid with the proximal
// phalanx and sits at input_mount + pip about the PIP pin; the output crank is
// rigid with the distal phalanx and sits at output_mount + dip about the DIP
// pin. The coupler closes the loop between the two crank tips.
//
// Branch Open keeps the triangle (input tip, DIP pin, output tip)
// counter-clockwise; Crossed is its mirror image.
struct FourBarDims {
  double ground_mm = 0.0;
  double input_mm = 0.0;
  double coupler_mm = 0.0;
  double output_mm = 0.0;
  double input_mount_deg = 0.0;
  double output_mount_deg = 0.0;
  Branch branch = Branch::Open;

  bool operator==(const FourBarDims&) const = default;
};

struct CouplingSample {
  double pip_deg = 0.0;
  double dip_deg = 0.0;
  bool operator==(const CouplingSample&) const = default;
};

using CouplingCurve = std::vector<CouplingSample>;

enum class GrashofClass { CrankRocker, DoubleCrank, DoubleRocker, ChangePoint };

std::string_view to_string(Branch b);
std::optional<Branch> branch_from_string(std::string_view s);
std::string_view to_string(GrashofClass g);

// Absolute output-crank angle (deg, frame above) for an input-crank angle.
// Throws AssemblyFailure / BranchSingularity.
double output_angle_deg(const FourBarDims& dims, double input_deg);

// DIP angle for a PIP angle; pip = 0 maps to dip = 0 when output_mount is
// calibrated with calibrate_output_mount().
double solve_coupler(const FourBarDims& dims, double pip_deg);

// d(dip)/d(pip) from implicit differentiation of the loop closure.
double coupling_slope(const FourBarDims& dims, double pip_deg);

// Sets output_mount so that pip = 0 gives dip = 0.
FourBarDims calibrate_output_mount(FourBarDims dims);

// n uniformly spaced samples on [lo, hi]. Errors carry the failing sample index.
CouplingCurve coupling_curve(const FourBarDims& dims, double lo_deg, double hi_deg, std::size_t n);

GrashofClass grashof_class(const FourBarDims& dims);

FourBarDims scaled(const FourBarDims& dims, double factor);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

// Search box for synthesize(); output_mount is not searched, it is always
// recalibrated so that pip = 0 maps to dip = 0.
struct SynthesisBounds {
  Interval ground{5.0, 50.0};
  Interval input{5.0, 50.0};
  Interval coupler{5.0, 50.0};
  Interval output{5.0, 50.0};
  Interval input_mount{0.0, 180.0};
};

struct SynthesisOptions {
  double rms_tolerance_deg = 1e-4;
  int max_sweeps = 400;
};

struct SynthesisResult {
  FourBarDims dims;
  double rms_deg = 0.0;
  int sweeps = 0;
  // False when the search stalled above rms_tolerance_deg; dims is then the
  // best point seen.
  bool converged = false;
};

// Least-squares fit of link dimensions to a target DIP(PIP) curve by
// coordinate descent with golden-section line searches. Deterministic.
SynthesisResult synthesize(const CouplingCurve& target, const FourBarDims& initial,
                           const SynthesisBounds& bounds, const SynthesisOptions& options = {});

// RMS of dip residuals over the target, +inf if any sample fails to assemble.
double coupling_rms(const FourBarDims& dims, const CouplingCurve& target);

}  // namespace catch919
