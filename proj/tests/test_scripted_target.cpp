#include <cmath>

#include "doctest.h"
#include "itrack/scripted_target.hpp"

using namespace itrack;

namespace {

TargetScriptConfig straightConfig() {
  TargetScriptConfig cfg;
  cfg.path = {Vec2(0.0, 0.0), Vec2(20.0, 0.0)};
  cfg.speed = 2.0;
  cfg.accel = 3.0;
  cfg.turn_rate = 1.5;
  return cfg;
}

}  // namespace

TEST_CASE("torso landmarks sit symmetrically about the body axis") {
  const Vec2 pos(1.5, -2.0);
  const double heading = deg2rad(40.0);
  const LandmarkSet lm = makeLandmarks(pos, heading, 0.4, 0.3);
  const Vec2 left = rotate(Vec2(0.0, 1.0), heading);

  CHECK((lm.left_shoulder.head<2>() - (pos + 0.2 * left)).norm() < 1e-12);
  CHECK((lm.right_shoulder.head<2>() - (pos - 0.2 * left)).norm() < 1e-12);
  CHECK((lm.left_hip.head<2>() - (pos + 0.15 * left)).norm() < 1e-12);
  CHECK((lm.right_hip.head<2>() - (pos - 0.15 * left)).norm() < 1e-12);
  CHECK(lm.left_shoulder.z() == kShoulderHeight);
  CHECK(lm.right_shoulder.z() == kShoulderHeight);
  CHECK(lm.left_hip.z() == kHipHeight);
  CHECK(lm.right_hip.z() == kHipHeight);
  // Midpoints recover the planar position exactly.
  CHECK((0.5 * (lm.left_shoulder + lm.right_shoulder).head<2>() - pos).norm() <
        1e-12);
}

TEST_CASE("straight run ramps up, cruises, and halts at the path end") {
  const TargetScriptConfig cfg = straightConfig();
  const ScriptedTarget tgt(cfg, 12.0, 30);
  const double dt = 1.0 / 30.0;

  CHECK(tgt.ticks() == 12 * 30 + 1);
  CHECK(tgt.tickTime(0) == 0.0);
  CHECK(tgt.tickTime(30) == doctest::Approx(1.0));
  CHECK(tgt.pathLength() == doctest::Approx(20.0));
  CHECK((tgt.position(0) - Vec2(0.0, 0.0)).norm() == 0.0);
  CHECK(tgt.velocity(0).norm() == 0.0);

  double prev_speed = 0.0;
  for (int i = 0; i < tgt.ticks(); ++i) {
    const double speed = tgt.velocity(i).norm();
    CHECK(speed <= cfg.speed + 1e-9);
    CHECK(std::abs(speed - prev_speed) <= cfg.accel * dt + 1e-9);
    CHECK(tgt.position(i).y() == 0.0);
    if (speed > 1e-9) CHECK(tgt.velocity(i).x() > 0.0);
    CHECK(tgt.heading(i) == 0.0);
    if (i > 0) CHECK(tgt.position(i).x() >= tgt.position(i - 1).x());
    prev_speed = speed;
  }
  // Cruise is reached after the accel-limited ramp (speed/accel = 2/3 s).
  CHECK(tgt.velocity(30).norm() == doctest::Approx(cfg.speed));
  CHECK_FALSE(tgt.maneuvering(30));
  CHECK(tgt.maneuvering(2));  // still ramping

  // The run ends parked on the final vertex.
  CHECK((tgt.position(tgt.ticks() - 1) - Vec2(20.0, 0.0)).norm() < 1e-9);
  CHECK(tgt.velocity(tgt.ticks() - 1).norm() == 0.0);

  // Trapezoidal arclength advance is exact on a straight segment.
  for (int i = 0; i + 1 < 100; ++i) {
    const double step = tgt.position(i + 1).x() - tgt.position(i).x();
    const double mean_v =
        0.5 * (tgt.velocity(i).norm() + tgt.velocity(i + 1).norm());
    CHECK(step == doctest::Approx(mean_v * dt).epsilon(1e-9));
  }
}

TEST_CASE("corner fillet bounds the heading rate and cuts the vertex") {
  TargetScriptConfig cfg;
  cfg.path = {Vec2(0.0, 0.0), Vec2(6.0, 0.0), Vec2(6.0, 6.0)};
  cfg.speed = 1.5;
  cfg.accel = 3.0;
  cfg.turn_rate = 1.5;
  cfg.body_lead = 0.3;
  const ScriptedTarget tgt(cfg, 10.0, 30);
  const double dt = 1.0 / 30.0;

  // Fillet radius = corner speed / turn rate = 1; a right angle trims one
  // radius off each leg and replaces the vertex with a quarter arc.
  CHECK(tgt.pathLength() == doctest::Approx(10.0 + M_PI / 2.0).epsilon(1e-9));

  int first_body_turn = -1, first_vel_turn = -1;
  double min_vertex_dist = kInf;
  for (int i = 0; i < tgt.ticks(); ++i) {
    min_vertex_dist =
        std::min(min_vertex_dist, (tgt.position(i) - Vec2(6.0, 0.0)).norm());
    if (first_body_turn < 0 && std::abs(tgt.bodyHeading(i)) > 0.02) {
      first_body_turn = i;
    }
    if (first_vel_turn < 0 && std::abs(tgt.heading(i)) > 0.02) {
      first_vel_turn = i;
    }
    if (i > 0) {
      const double rate =
          std::abs(wrapPi(tgt.heading(i) - tgt.heading(i - 1))) / dt;
      CHECK(rate <= cfg.turn_rate * 1.05 + 1e-9);
      if (rate > 1e-6) CHECK(tgt.maneuvering(i));
    }
  }
  // Torso turns before the velocity does.
  REQUIRE(first_body_turn >= 0);
  REQUIRE(first_vel_turn >= 0);
  CHECK(first_body_turn < first_vel_turn);
  // The fillet stays radius*(sec(45 deg) - 1) away from the corner vertex.
  CHECK(min_vertex_dist > 0.4);
  // After the corner the target travels due north.
  CHECK(tgt.heading(6 * 30) == doctest::Approx(M_PI / 2.0));
  CHECK(tgt.velocity(6 * 30).x() == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("scripted stops brake to rest, hold, and resume") {
  TargetScriptConfig cfg = straightConfig();
  cfg.stops = {{2.0, 1.0}};
  const ScriptedTarget tgt(cfg, 10.0, 30);

  CHECK(tgt.velocity(59).norm() == doctest::Approx(2.0));  // just before brake
  // Braking starts at t = 2 and reaches rest within speed/accel = 2/3 s.
  bool stopped = false;
  for (int i = 60; i <= 60 + 25; ++i) {
    if (tgt.velocity(i).norm() == 0.0) {
      stopped = true;
      break;
    }
  }
  CHECK(stopped);
  // Holding through t in [2.7, 3.0): stationary, flagged, pose frozen.
  const Vec2 hold_pos = tgt.position(85);
  for (int i = 85; i < 90; ++i) {
    CHECK(tgt.velocity(i).norm() == 0.0);
    CHECK((tgt.position(i) - hold_pos).norm() == 0.0);
    CHECK(tgt.maneuvering(i));
    CHECK(tgt.heading(i) == 0.0);  // heading persists through the hold
  }
  // Released at t = 3: back at cruise within the ramp time.
  CHECK(tgt.velocity(115).norm() == doctest::Approx(2.0));
  CHECK(tgt.position(150).x() > tgt.position(90).x() + 1.0);
}

TEST_CASE("per-segment speed overrides cap each leg") {
  TargetScriptConfig cfg;
  cfg.path = {Vec2(0.0, 0.0), Vec2(8.0, 0.0), Vec2(8.0, 8.0)};
  cfg.speed = 2.0;
  cfg.segment_speeds = {2.0, 1.0};
  cfg.accel = 3.0;
  cfg.turn_rate = 1.5;
  const ScriptedTarget tgt(cfg, 14.0, 30);

  double max_first = 0.0, max_second = 0.0;
  for (int i = 0; i < tgt.ticks(); ++i) {
    const Vec2 p = tgt.position(i);
    if (p.y() < 0.1 && p.x() < 6.0) {
      max_first = std::max(max_first, tgt.velocity(i).norm());
    }
    if (p.y() > 2.0) {
      max_second = std::max(max_second, tgt.velocity(i).norm());
    }
  }
  CHECK(max_first == doctest::Approx(2.0));
  CHECK(max_second <= 1.0 + 1e-9);

  TargetScriptConfig bad = cfg;
  bad.segment_speeds = {2.0};
  CHECK_THROWS_AS(ScriptedTarget(bad, 5.0, 30), std::invalid_argument);
}

TEST_CASE("script construction rejects degenerate inputs") {
  TargetScriptConfig cfg = straightConfig();
  cfg.path = {Vec2(0.0, 0.0)};
  CHECK_THROWS_AS(ScriptedTarget(cfg, 5.0, 30), std::invalid_argument);

  cfg = straightConfig();
  cfg.speed = 0.0;
  CHECK_THROWS_AS(ScriptedTarget(cfg, 5.0, 30), std::invalid_argument);

  cfg = straightConfig();
  cfg.accel = -1.0;
  CHECK_THROWS_AS(ScriptedTarget(cfg, 5.0, 30), std::invalid_argument);

  cfg = straightConfig();
  cfg.turn_rate = 0.0;
  CHECK_THROWS_AS(ScriptedTarget(cfg, 5.0, 30), std::invalid_argument);

  cfg = straightConfig();
  CHECK_THROWS_AS(ScriptedTarget(cfg, 0.0, 30), std::invalid_argument);
  CHECK_THROWS_AS(ScriptedTarget(cfg, 5.0, 0), std::invalid_argument);
}
