#include <doctest.h>

#include <cmath>

#include "blimp/wind_field.hpp"

using namespace blimp;
using Eigen::Vector3d;

TEST_CASE("preset jets reach the reference speed two metres downstream") {
  const struct {
    const char* name;
    double speed;
  } cases[] = {{"headwind_light", 0.5}, {"headwind_strong", 1.0},
               {"crosswind_light", 0.5}, {"crosswind_strong", 1.0}};
  for (const auto& c : cases) {
    const WindField w = windPreset(c.name);
    REQUIRE(w.fan);
    const Vector3d at = w.fan->position + 2.0 * w.fan->axis;
    CHECK(w.mean(at).norm() == doctest::Approx(c.speed).epsilon(1e-12));
    CHECK(w.mean(w.fan->position).norm() == doctest::Approx(kFanCoreSpeed));
    CHECK((w.mean(at).normalized() - w.fan->axis).norm() < 1e-14);
  }
  CHECK(windPreset("none").mean(Vector3d(1.0, 2.0, 1.5)).norm() == 0.0);
  CHECK(windPreset("headwind_strong").fan->axis.x() == -1.0);
  CHECK(windPreset("crosswind_strong").fan->axis.y() == 1.0);
  CHECK_THROWS_AS(windPreset("gale"), std::invalid_argument);
  CHECK(windPresetNames().size() == 5);
}

TEST_CASE("jet profile: exponential along the axis, Gaussian across, nothing upstream") {
  FanConfig fan;
  fan.core_speed = 2.0;
  fan.decay_length = 1.5;
  fan.half_width = 0.4;
  const double on_axis = meanWind(fan, Vector3d(1.0, 0.0, 0.0)).norm();
  CHECK(on_axis == doctest::Approx(2.0 * std::exp(-1.0 / 1.5)));
  const double off_axis = meanWind(fan, Vector3d(1.0, 0.4, 0.0)).norm();
  CHECK(off_axis / on_axis == doctest::Approx(std::exp(-0.5)));
  const double oblique = meanWind(fan, Vector3d(1.0, 0.3, -0.4)).norm();
  CHECK(oblique / on_axis == doctest::Approx(std::exp(-0.25 / (2.0 * 0.16))));
  CHECK(meanWind(fan, Vector3d(-0.1, 0.0, 0.0)).norm() == 0.0);
}

TEST_CASE("decay length calibration") {
  const double l = calibrateDecayLength(1.5, 1.0, 2.0);
  CHECK(1.5 * std::exp(-2.0 / l) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(calibrateDecayLength(1.0, 1.5, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(calibrateDecayLength(1.5, 0.0, 2.0), std::invalid_argument);
}

TEST_CASE("fan validation") {
  FanConfig fan;
  fan.core_speed = 1.0;
  CHECK_NOTHROW(fan.validate());
  fan.half_width = 0.0;
  CHECK_THROWS_AS(fan.validate(), std::invalid_argument);
  fan.half_width = 0.3;
  fan.decay_length = -1.0;
  CHECK_THROWS_AS(fan.validate(), std::invalid_argument);
}

TEST_CASE("turbulence is a unit-variance process with exponential correlation") {
  TurbulenceState s(42);
  const double tau = 0.5, dt = 0.05;
  const int n = 200000;
  double sum = 0.0, sq = 0.0, lag = 0.0;
  double previous = s.advance(0.0, tau).x();
  for (int k = 1; k <= n; ++k) {
    const double v = s.advance(k * dt, tau).x();
    sum += v;
    sq += v * v;
    lag += v * previous;
    previous = v;
  }
  CHECK(std::abs(sum / n) < 0.05);
  CHECK(sq / n == doctest::Approx(1.0).epsilon(0.05));
  CHECK(lag / sq == doctest::Approx(std::exp(-dt / tau)).epsilon(0.02));
}

TEST_CASE("turbulence: deterministic per seed, repeated time is a no-op, time cannot go back") {
  TurbulenceState a(7), b(7), c(8);
  for (int k = 0; k < 10; ++k) {
    const Vector3d va = a.advance(0.1 * k, 0.5);
    CHECK(va == b.advance(0.1 * k, 0.5));
    CHECK(va != c.advance(0.1 * k, 0.5));
  }
  const Vector3d held = a.advance(0.9, 0.5);
  CHECK(held == a.advance(0.9, 0.5));
  CHECK_THROWS_AS(a.advance(0.5, 0.5), std::invalid_argument);
}

TEST_CASE("turbulence amplitude ramps with downstream distance") {
  FanConfig fan;
  fan.core_speed = 1.5;
  fan.decay_length = 5.0;
  fan.turbulence_intensity = 0.2;
  fan.turbulence_ramp = 2.0;
  auto spread = [&](double axial) {
    TurbulenceState s(3);
    const Vector3d at(axial, 0.0, 0.0);
    const Vector3d mean = meanWind(fan, at);
    double sq = 0.0;
    const int n = 20000;
    for (int k = 0; k < n; ++k) sq += (sampleWind(fan, at, k * 2.0, s) - mean).squaredNorm();
    return std::sqrt(sq / (3.0 * n)) / mean.norm();
  };
  CHECK(spread(0.0) == 0.0);
  CHECK(spread(1.0) == doctest::Approx(0.1).epsilon(0.05));
  CHECK(spread(3.0) == doctest::Approx(0.2).epsilon(0.05));

  fan.turbulence_intensity = 0.0;
  TurbulenceState s(1);
  CHECK(sampleWind(fan, Vector3d(1.0, 0.0, 0.0), 0.0, s) == meanWind(fan, Vector3d(1.0, 0.0, 0.0)));
}

TEST_CASE("uniform component adds to the jet") {
  WindField w = windPreset("headwind_strong");
  w.uniform = Vector3d(0.0, 0.2, 0.0);
  const Vector3d p(4.0, 0.0, 1.5);
  CHECK((w.mean(p) - meanWind(*w.fan, p) - w.uniform).norm() < 1e-15);
}
