#include <doctest.h>

#include <cmath>
#include <random>

#include "catch919/error.hpp"
#include "catch919/linkage.hpp"
#include "fixtures.hpp"

using namespace catch919;

TEST_SUITE("linkage") {
  TEST_CASE("solve_coupler matches the bisection oracle on random linkages") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> pip(0, 90), len(6, 40), mount(20, 160);
    int solved = 0;
    while (solved < 1000) {
      FourBarDims d{len(rng), len(rng), len(rng), len(rng), mount(rng), 0.0, rng() % 2 ? Branch::Open : Branch::Crossed};
      const double a = pip(rng);
      double got = 0;
      try {
        got = solve_coupler(d, a);
      } catch (const AssemblyFailure&) {
        CHECK_FALSE(fixtures::oracle_assembles(d, a + 1e-9));
        continue;
      } catch (const BranchSingularity&) {
        continue;
      }
      ++solved;
      const double want = fixtures::oracle_dip(d, a);
      REQUIRE(std::abs(std::remainder(got - want, 360.0)) < 1e-6);
    }
  }

  TEST_CASE("canonical linkage: endpoints and monotone curve") {
    const FourBarDims d = canonical_index_linkage();
    CHECK(solve_coupler(d, 0) == doctest::Approx(0).epsilon(1e-9));
    CHECK(std::abs(solve_coupler(d, 90) - 90) <= 2.0);
    const CouplingCurve c = coupling_curve(d, 0, 90, 181);
    REQUIRE(c.size() == 181);
    for (std::size_t i = 1; i < c.size(); ++i) CHECK(c[i].dip_deg > c[i - 1].dip_deg);
    CHECK(c.front().pip_deg == 0);
    CHECK(c.back().pip_deg == 90);
  }

  TEST_CASE("slope agrees with a central difference") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> pip(1, 89), jitter(0.95, 1.05);
    for (int k = 0; k < 200; ++k) {
      FourBarDims d = canonical_index_linkage();
      d.coupler_mm *= jitter(rng);
      d.output_mm *= jitter(rng);
      const double a = pip(rng);
      double fd = 0;
      try {
        d = calibrate_output_mount(d);
        fd = (solve_coupler(d, a + 1e-5) - solve_coupler(d, a - 1e-5)) / 2e-5;
      } catch (const Error&) {
        continue;
      }
      CHECK(coupling_slope(d, a) == doctest::Approx(fd).epsilon(1e-5));
    }
  }

  TEST_CASE("calibrated mount maps zero to zero") {
    FourBarDims d{25, 9, 24.5, 9.5, 70, 0, Branch::Open};
    d = calibrate_output_mount(d);
    CHECK(std::abs(solve_coupler(d, 0)) < 1e-9);
  }

  TEST_CASE("assembly failure and curve errors carry the sample") {
    const FourBarDims broken{25, 9, 60, 9, 60, 0, Branch::Open};
    CHECK_THROWS_AS(solve_coupler(broken, 10), AssemblyFailure);
    try {
      coupling_curve(broken, 0, 90, 10);
      FAIL("assembled");
    } catch (const AssemblyFailure& e) {
      CHECK(std::string(e.what()).find("sample 0") != std::string::npos);
    }
    CHECK_THROWS_AS(coupling_curve(canonical_index_linkage(), 10, 0, 10), AssemblyFailure);
  }

  TEST_CASE("Grashof classes") {
    CHECK(grashof_class({30, 10, 35, 25, 0, 0}) == GrashofClass::CrankRocker);
    CHECK(grashof_class({10, 30, 35, 25, 0, 0}) == GrashofClass::DoubleCrank);
    CHECK(grashof_class({30, 20, 10, 45, 0, 0}) == GrashofClass::DoubleRocker);
    CHECK(grashof_class({25, 9, 25, 9, 0, 0}) == GrashofClass::ChangePoint);
  }

  TEST_CASE("scaling preserves the curve") {
    const FourBarDims d = canonical_index_linkage();
    const FourBarDims s = scaled(d, 1.3);
    for (double a : {0.0, 30.0, 60.0, 89.0}) CHECK(solve_coupler(s, a) == doctest::Approx(solve_coupler(d, a)));
  }

  TEST_CASE("synthesis recovers a curve from perturbed dims") {
    const FourBarDims truth = canonical_index_linkage();
    const CouplingCurve target = coupling_curve(truth, 0, 90, 31);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> noise(0.9, 1.1);
    auto assembles = [](const FourBarDims& d) {
      for (int a = 0; a <= 90; ++a)
        if (!fixtures::oracle_assembles(d, a)) return false;
      return true;
    };
    FourBarDims start = truth;
    do {
      start = truth;
      start.input_mm *= noise(rng);
      start.coupler_mm *= noise(rng);
      start.output_mm *= noise(rng);
      start.input_mount_deg *= noise(rng);
    } while (!assembles(start));
    start = calibrate_output_mount(start);
    SynthesisBounds b;
    b.ground = {25, 25};
    const SynthesisResult r = synthesize(target, start, b);
    CHECK(r.rms_deg < 0.5);
    CHECK(r.rms_deg == doctest::Approx(coupling_rms(r.dims, target)));
    CHECK(synthesize(target, start, b).dims == r.dims);
  }

  TEST_CASE("synthesis input errors") {
    const FourBarDims d = canonical_index_linkage();
    CHECK_THROWS_AS(synthesize({{0, 0}}, d, {}), SynthesisError);
    CHECK_THROWS_AS(synthesize({{10, 0}, {0, 5}}, d, {}), SynthesisError);
    SynthesisBounds bad;
    bad.coupler = {30, 20};
    CHECK_THROWS_AS(synthesize(coupling_curve(d, 0, 90, 5), d, bad), SynthesisError);
  }
}
