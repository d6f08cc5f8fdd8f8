#include "itrack/target_state.hpp"

#include <stdexcept>

namespace itrack {
namespace {

// Consecutive agreeing frames needed to latch the chest-forward sign, and
// consecutive disagreeing frames needed to flip a latched sign.
constexpr int kSignConfirmFrames = 5;
constexpr int kSignHealFrames = 10;

}  // namespace

bool LandmarkSet::finite() const {
  return left_shoulder.allFinite() && right_shoulder.allFinite() &&
         left_hip.allFinite() && right_hip.allFinite();
}

Vec3 localize(const LandmarkSet &lm) {
  if (!lm.finite()) throw std::invalid_argument("non-finite landmark");
  return (lm.left_shoulder + lm.right_shoulder + lm.left_hip + lm.right_hip) /
         4.0;
}

BodyRotation bodyRotation(const LandmarkSet &lm, const Vec2 &velocity,
                          const TargetFilterParams &params,
                          double forward_sign) {
  if (!lm.finite()) throw std::invalid_argument("non-finite landmark");
  const Vec2 shoulder =
      (lm.left_shoulder - lm.right_shoulder).head<2>();
  if (shoulder.norm() <= params.eps_landmark)
    throw std::invalid_argument("coincident shoulders");

  BodyRotation out;
  // chest-forward: shoulder line (right->left) rotated -90 deg
  const Vec2 fwd = forward_sign * Vec2(shoulder.y(), -shoulder.x());
  out.axis = Vec3(fwd.x(), fwd.y(), 0.0);
  out.r_b = angleOf(fwd);
  if (velocity.norm() > params.eps_speed) {
    out.r_v = angleOf(velocity);
    out.r_bv = wrapPi(out.r_b - out.r_v);
    out.heading_valid = true;
  }
  return out;
}

void kalmanStep(Vec4 &state, Mat4 &cov, const Vec2 &measurement, double dt,
                const TargetFilterParams &params) {
  if (dt <= 0.0) throw std::invalid_argument("kalmanStep: dt must be > 0");

  Mat4 F = Mat4::Identity();
  F(0, 2) = F(1, 3) = dt;

  const double q = params.sigma_accel * params.sigma_accel;
  const double dt2 = dt * dt, dt3 = dt2 * dt, dt4 = dt3 * dt;
  Mat4 Q = Mat4::Zero();
  Q(0, 0) = Q(1, 1) = q * dt4 / 4.0;
  Q(0, 2) = Q(2, 0) = Q(1, 3) = Q(3, 1) = q * dt3 / 2.0;
  Q(2, 2) = Q(3, 3) = q * dt2;

  state = F * state;
  cov = F * cov * F.transpose() + Q;

  Eigen::Matrix<double, 2, 4> H = Eigen::Matrix<double, 2, 4>::Zero();
  H(0, 0) = H(1, 1) = 1.0;
  const Mat2 R = params.sigma_meas * params.sigma_meas * Mat2::Identity();

  const Vec2 innov = measurement - H * state;
  const Mat2 S = H * cov * H.transpose() + R;
  const Eigen::Matrix<double, 4, 2> K = cov * H.transpose() * S.inverse();
  state += K * innov;
  cov = (Mat4::Identity() - K * H) * cov;
  cov = 0.5 * (cov + cov.transpose()).eval();  // keep symmetric
}

TargetTracker::TargetTracker(const TargetFilterParams &params)
    : params_(params) {}

TargetEstimate TargetTracker::update(const LandmarkSet &lm, double stamp) {
  const Vec3 pos = localize(lm);
  const Vec2 z = pos.head<2>();
  altitude_ = pos.z();

  if (!initialized_) {
    state_ << z.x(), z.y(), 0.0, 0.0;
    cov_ = Mat4::Identity();
    cov_(2, 2) = cov_(3, 3) = 4.0;
    initialized_ = true;
  } else {
    const double dt = stamp - last_stamp_;
    if (dt > 0.0) kalmanStep(state_, cov_, z, dt, params_);
  }
  last_stamp_ = stamp;

  const Vec2 vel(state_(2), state_(3));
  if (vel.norm() > params_.eps_speed) {
    last_dir_ = vel.normalized();
    dir_valid_ = true;
    const BodyRotation probe = bodyRotation(lm, vel, params_, 1.0);
    const double align = probe.axis.head<2>().dot(last_dir_);
    if (!sign_latched_) {
      // Resolve the forward ambiguity toward the half-plane of travel, but
      // only after several consistent frames: right after initialization the
      // velocity estimate can point anywhere, and latching on one bad sample
      // would flip every body angle for the rest of the run.
      sign_agree_ = align > 0.0 ? sign_agree_ + 1 : 0;
      sign_disagree_ = align < 0.0 ? sign_disagree_ + 1 : 0;
      if (sign_agree_ >= kSignConfirmFrames) {
        forward_sign_ = 1.0;
        sign_latched_ = true;
        sign_disagree_ = 0;
      } else if (sign_disagree_ >= kSignConfirmFrames) {
        forward_sign_ = -1.0;
        sign_latched_ = true;
        sign_disagree_ = 0;
      }
    } else {
      // Walking backwards is transient; a sustained mismatch means the latch
      // picked the wrong half-plane, so flip it.
      sign_disagree_ = align * forward_sign_ < 0.0 ? sign_disagree_ + 1 : 0;
      if (sign_disagree_ >= kSignHealFrames) {
        forward_sign_ = -forward_sign_;
        sign_disagree_ = 0;
      }
    }
  }

  estimate_.position = Vec3(state_(0), state_(1), altitude_);
  estimate_.velocity = vel;
  estimate_.rotation = bodyRotation(lm, vel, params_, forward_sign_);
  estimate_.travel_dir = last_dir_;
  estimate_.travel_dir_valid = dir_valid_;
  estimate_.cov = cov_;
  estimate_.stamp = stamp;
  return estimate_;
}

}  // namespace itrack
