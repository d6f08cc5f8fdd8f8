#ifndef ITRACK_TARGET_STATE_HPP
#define ITRACK_TARGET_STATE_HPP

#include "itrack/common.hpp"

namespace itrack {

// Torso landmarks in the world frame, as fed by the simulator.
struct LandmarkSet {
  Vec3 left_shoulder = Vec3::Zero();
  Vec3 right_shoulder = Vec3::Zero();
  Vec3 left_hip = Vec3::Zero();
  Vec3 right_hip = Vec3::Zero();

  bool finite() const;
};

struct TargetFilterParams {
  double sigma_accel = 1.0;  // white-acceleration process noise, m/s^2
  double sigma_meas = 0.05;  // position measurement noise, m
  double eps_speed = 0.1;    // below this the velocity direction is held
  double eps_landmark = 1e-6;
};

struct BodyRotation {
  Vec3 axis = Vec3::Zero();  // chest-forward vector, zero third component
  double r_b = 0.0;          // body rotation angle, [-pi, pi]
  double r_v = 0.0;          // velocity angle, [-pi, pi]
  double r_bv = 0.0;         // wrapped difference, [-pi, pi]
  bool heading_valid = false;  // false when the speed is below eps_speed
};

struct TargetEstimate {
  Vec3 position = Vec3::Zero();
  Vec2 velocity = Vec2::Zero();
  BodyRotation rotation;
  Vec2 travel_dir = Vec2(1.0, 0.0);  // last valid velocity direction
  bool travel_dir_valid = false;
  Mat4 cov = Mat4::Identity();  // planar state [px py vx vy]
  double stamp = 0.0;
};

// Mean of the four torso landmarks. Throws on non-finite input.
Vec3 localize(const LandmarkSet &lm);

// Chest-forward vector from the shoulder line plus the wrapped angle between
// body rotation and velocity. r_bv > 0 when the body axis points left of the
// velocity. With the speed below eps_speed only r_b is meaningful.
BodyRotation bodyRotation(const LandmarkSet &lm, const Vec2 &velocity,
                          const TargetFilterParams &params = {},
                          double forward_sign = 1.0);

// One predict+update cycle of the planar constant-velocity Kalman filter.
// Throws when dt <= 0.
void kalmanStep(Vec4 &state, Mat4 &cov, const Vec2 &measurement, double dt,
                const TargetFilterParams &params);

// Owns the filter state and the direction/sign latches across a run.
class TargetTracker {
 public:
  explicit TargetTracker(const TargetFilterParams &params = {});

  TargetEstimate update(const LandmarkSet &lm, double stamp);
  const TargetEstimate &latest() const { return estimate_; }
  bool initialized() const { return initialized_; }

 private:
  TargetFilterParams params_;
  Vec4 state_ = Vec4::Zero();
  Mat4 cov_ = Mat4::Identity();
  bool initialized_ = false;
  double last_stamp_ = 0.0;
  double altitude_ = 0.0;
  Vec2 last_dir_ = Vec2(1.0, 0.0);
  bool dir_valid_ = false;
  double forward_sign_ = 1.0;
  bool sign_latched_ = false;
  int sign_agree_ = 0;
  int sign_disagree_ = 0;
  TargetEstimate estimate_;
};

}  // namespace itrack

#endif
