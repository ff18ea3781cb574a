#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <Eigen/Dense>

#include "catch919/control.hpp"
#include "catch919/error.hpp"
#include "catch919/kernels.hpp"
#include "catch919/tendon.hpp"

namespace catch919 {
namespace {

// Every exponent vector over n variables with total degree <= degree,
// constant term first.
std::vector<std::vector<int>> monomials(std::size_t n, int degree) {
  std::vector<std::vector<int>> out;
  if (n == 0) return {{}};
  std::vector<int> e(n, 0);
  auto rec = [&](auto&& self, std::size_t i, int left) -> void {
    if (i + 1 == n) {
      e[i] = left;
      out.push_back(e);
      return;
    }
    for (int k = left; k >= 0; --k) {
      e[i] = k;
      self(self, i + 1, left - k);
    }
  };
  for (int total = 0; total <= degree; ++total) rec(rec, 0, total);
  return out;
}

std::vector<double> features(const CablePolynomial& p, const Pose& q) {
  std::vector<double> x(p.slots.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = (q[p.slots[i]] - p.center_deg[i]) / p.half_range_deg[i];
  std::vector<double> f(p.exponents.size(), 1.0);
  for (std::size_t m = 0; m < f.size(); ++m) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      for (int k = 0; k < p.exponents[m][i]; ++k) f[m] *= x[i];
    }
  }
  return f;
}

CablePolynomial layout(const HandModel& model, const CableRoute& route, int degree) {
  CablePolynomial p;
  p.cable = route.cable;
  for (const RouteSegment& seg : route.segments) {
    const auto slot = slot_of(seg.joint);
    if (!slot) throw ReferenceError("cable " + std::string(to_string(route.cable)) + " crosses an unknown joint");
    if (std::find(p.slots.begin(), p.slots.end(), *slot) != p.slots.end()) continue;
    const JointSpec& j = model.joint(*slot);
    // A joint pinned by its limits only shifts the constant term.
    if (j.max_deg <= j.min_deg) continue;
    p.slots.push_back(*slot);
    p.center_deg.push_back(0.5 * (j.max_deg + j.min_deg));
    p.half_range_deg.push_back(0.5 * (j.max_deg - j.min_deg));
  }
  p.exponents = monomials(p.slots.size(), degree);
  return p;
}

}  // namespace

double CablePolynomial::evaluate(const Pose& q) const {
  const auto f = features(*this, q);
  return kernels::active().dot(f.data(), coefficients.data(), f.size());
}

const CablePolynomial* CalibrationMap::find(CableId c) const {
  for (const CablePolynomial& p : cables) {
    if (p.cable == c) return &p;
  }
  return nullptr;
}

double CalibrationMap::predict(CableId c, const Pose& q) const {
  const CablePolynomial* p = find(c);
  if (p == nullptr) throw ControlError("calibration map has no entry for cable " + std::string(to_string(c)));
  return p->evaluate(q);
}

std::vector<Pose> random_grid(const HandModel& model, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Pose> out(n);
  for (Pose& q : out) {
    for (std::size_t s = 0; s < kJointSlots; ++s) {
      const JointSpec& j = model.joints[s];
      q.at(s) = std::uniform_real_distribution<double>(j.min_deg, j.max_deg)(rng);
    }
  }
  return out;
}

CalibrationMap calibrate(const HandModel& model, const std::vector<Pose>& grid, double noise_sd_mm,
                         std::uint64_t seed, int degree) {
  if (degree < 1) throw ControlError("calibration degree must be >= 1");
  if (noise_sd_mm < 0.0 || !std::isfinite(noise_sd_mm)) throw ControlError("noise_sd must be a finite value >= 0");

  std::mt19937_64 rng(seed);
  std::vector<std::size_t> order(grid.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  const std::size_t n_train = grid.size() * 4 / 5;
  const std::size_t n_hold = grid.size() - n_train;

  // Observed lengths: forward model plus noise, drawn in sample-major order.
  const std::vector<double> exact = batch_excursions(model, grid);
  std::vector<double> observed(exact);
  if (noise_sd_mm > 0.0) {
    std::normal_distribution<double> noise(0.0, noise_sd_mm);
    for (double& v : observed) v += noise(rng);
  }

  CalibrationMap map;
  map.degree = degree;
  map.sample_count = n_train;
  map.holdout_count = n_hold;
  double sq = 0.0;
  std::size_t count = 0;
  const auto& k = kernels::active();

  for (const CableRoute& route : model.routes) {
    CablePolynomial p = layout(model, route, degree);
    const std::size_t nf = p.exponents.size();
    if (n_train < nf) {
      throw RankDeficiency("cable " + std::string(to_string(route.cable)) + ": " + std::to_string(n_train) +
                           " training samples for " + std::to_string(nf) + " coefficients");
    }
    std::vector<double> a(n_train * nf);
    std::vector<double> y(n_train);
    for (std::size_t r = 0; r < n_train; ++r) {
      const std::size_t i = order[r];
      const auto f = features(p, grid[i]);
      std::copy(f.begin(), f.end(), a.begin() + static_cast<std::ptrdiff_t>(r * nf));
      y[r] = observed[i * kCableCount + idx(route.cable)];
    }
    std::vector<double> ata(nf * nf, 0.0);
    std::vector<double> aty(nf, 0.0);
    k.gram(a.data(), n_train, nf, y.data(), ata.data(), aty.data());

    const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> g(
        ata.data(), static_cast<Eigen::Index>(nf), static_cast<Eigen::Index>(nf));
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(g);
    qr.setThreshold(1e-10);
    if (static_cast<std::size_t>(qr.rank()) < nf) {
      throw RankDeficiency("cable " + std::string(to_string(route.cable)) + ": sample grid has rank " +
                           std::to_string(qr.rank()) + " < " + std::to_string(nf));
    }
    const Eigen::VectorXd c = qr.solve(Eigen::Map<const Eigen::VectorXd>(aty.data(), static_cast<Eigen::Index>(nf)));
    p.coefficients.assign(c.data(), c.data() + nf);

    for (std::size_t r = n_train; r < grid.size(); ++r) {
      const std::size_t i = order[r];
      const double e = p.evaluate(grid[i]) - observed[i * kCableCount + idx(route.cable)];
      sq += e * e;
      ++count;
    }
    map.cables.push_back(std::move(p));
  }
  map.fit_rms_mm = count > 0 ? std::sqrt(sq / static_cast<double>(count)) : 0.0;
  return map;
}

CalibrationMap exact_map(const HandModel& model) { return calibrate(model, random_grid(model, 400, 919), 0.0, 919, 1); }

}  // namespace catch919
