#ifndef ITRACK_SCRIPTED_TARGET_HPP
#define ITRACK_SCRIPTED_TARGET_HPP

#include <utility>
#include <vector>

#include "itrack/target_state.hpp"

namespace itrack {

struct TargetScriptConfig {
  std::vector<Vec2> path;              // polyline vertices, >= 2
  double speed = 2.0;                  // cruise speed, m/s
  std::vector<double> segment_speeds;  // optional per-segment override
  double accel = 3.0;                  // accel/decel cap, m/s^2
  double turn_rate = 1.5;              // heading rate through corner arcs, rad/s
  double body_lead = 0.3;              // s the torso heading leads the path tangent
  std::vector<std::pair<double, double>> stops;  // (start time, hold duration)
};

constexpr double kShoulderHeight = 1.4;
constexpr double kHipHeight = 0.9;

// Noiseless torso landmarks for a target at pos facing body_heading.
LandmarkSet makeLandmarks(const Vec2 &pos, double body_heading,
                          double shoulder_width, double hip_width);

// Target truth precomputed at a fixed tick rate: polyline with circular
// corner fillets (radius = corner speed / turn_rate), trapezoidal speed
// with anticipatory braking for corners and the path end, and scripted
// hard stops. The body heading leads the path tangent by body_lead
// seconds of travel, so the torso turns before the velocity does.
class ScriptedTarget {
 public:
  ScriptedTarget(const TargetScriptConfig &cfg, double duration, int tick_hz);

  int ticks() const { return static_cast<int>(pos_.size()); }
  double tickTime(int i) const { return static_cast<double>(i) / tick_hz_; }
  const Vec2 &position(int i) const { return pos_[i]; }
  const Vec2 &velocity(int i) const { return vel_[i]; }
  double heading(int i) const { return heading_[i]; }
  double bodyHeading(int i) const { return body_heading_[i]; }
  // True while turning, braking, holding, or otherwise off cruise speed.
  bool maneuvering(int i) const { return maneuvering_[i]; }
  double pathLength() const { return total_length_; }

 private:
  int tick_hz_;
  double total_length_ = 0.0;
  std::vector<Vec2> pos_, vel_;
  std::vector<double> heading_, body_heading_;
  std::vector<char> maneuvering_;
};

}  // namespace itrack

#endif
