#include "itrack/intention.hpp"

#include <algorithm>
#include <cmath>

namespace itrack {

const char *intentionName(Intention i) {
  switch (i) {
    case Intention::Cv:
      return "cv";
    case Intention::Tl:
      return "tl";
    case Intention::Tr:
      return "tr";
    case Intention::Dec:
      return "dec";
  }
  return "?";
}

Sector ReachableRegion::leftSector() const {
  Sector s;
  s.apex = apex;
  s.axis = rotate(travel_dir, 0.5 * theta_l);
  s.half_angle = 0.5 * theta_l;
  s.radius = range;
  return s;
}

Sector ReachableRegion::rightSector() const {
  Sector s;
  s.apex = apex;
  s.axis = rotate(travel_dir, -0.5 * theta_r);
  s.half_angle = 0.5 * theta_r;
  s.radius = range;
  return s;
}

ReachableRegion reachableRegion(const OccupancyGrid &map, const Vec2 &p,
                                const Vec2 &travel_dir, bool dir_valid,
                                double speed, const IntentionParams &params) {
  ReachableRegion region;
  region.apex = p;
  region.dir_valid = dir_valid;
  region.range = std::max(speed * params.t0, params.r_min);
  if (!dir_valid) return region;
  region.travel_dir = travel_dir.normalized();
  region.theta_l = map.clearanceFan(p, region.travel_dir, FanSide::Left,
                                    params.theta_max, region.range);
  region.theta_r = map.clearanceFan(p, region.travel_dir, FanSide::Right,
                                    params.theta_max, region.range);
  return region;
}

std::array<double, kNumIntentions> riskScores(const ReachableRegion &now,
                                              const ReachableRegion &ahead,
                                              double speed, double d_o,
                                              const IntentionParams &params) {
  std::array<double, kNumIntentions> risk{};
  const double grow_l = ahead.theta_l - now.theta_l;
  const double grow_r = ahead.theta_r - now.theta_r;
  risk[static_cast<int>(Intention::Tl)] = std::max(params.k1 * grow_l, 0.0);
  risk[static_cast<int>(Intention::Tr)] = std::max(params.k1 * grow_r, 0.0);
  risk[static_cast<int>(Intention::Dec)] =
      params.k3 * speed * speed / std::max(d_o, 1e-6);
  const double peak = std::max(
      {risk[static_cast<int>(Intention::Tl)],
       risk[static_cast<int>(Intention::Tr)],
       risk[static_cast<int>(Intention::Dec)]});
  risk[static_cast<int>(Intention::Cv)] =
      -params.cv_risk_gain * peak + params.b1;
  return risk;
}

std::array<double, kNumIntentions> observationScores(
    double r_bv, bool heading_valid, double speed_now, double speed_prev,
    const IntentionParams &params) {
  std::array<double, kNumIntentions> obs{};
  if (heading_valid) {
    obs[static_cast<int>(Intention::Tl)] = std::max(params.k2 * r_bv, 0.0);
    obs[static_cast<int>(Intention::Tr)] = std::max(-params.k2 * r_bv, 0.0);
  }
  obs[static_cast<int>(Intention::Dec)] =
      std::max(params.k4 * (speed_prev - speed_now), 0.0);
  const double peak = std::max(
      {obs[static_cast<int>(Intention::Tl)],
       obs[static_cast<int>(Intention::Tr)],
       obs[static_cast<int>(Intention::Dec)]});
  obs[static_cast<int>(Intention::Cv)] = -params.k5 * peak + params.b2;
  return obs;
}

double activate(double risk, double obs, double b0) {
  return 0.5 * (std::tanh(risk + obs - b0) + 1.0);
}

IntentionDistribution combine(
    const std::array<double, kNumIntentions> &risk,
    const std::array<double, kNumIntentions> &obs, double b0) {
  IntentionDistribution dist;
  dist.risk = risk;
  dist.obs = obs;
  int best = 0;
  for (int i = 0; i < kNumIntentions; ++i) {
    dist.prob[i] = activate(risk[i], obs[i], b0);
    if (dist.prob[i] > dist.prob[best]) best = i;  // ties keep the earlier one
  }
  dist.argmax = static_cast<Intention>(best);
  return dist;
}

IntentionEstimator::IntentionEstimator(const IntentionParams &params)
    : params_(params) {
  dist_ = cvFixedPoint(params_);
}

IntentionDistribution IntentionEstimator::update(const OccupancyGrid &map,
                                                 const TargetEstimate &est) {
  const Vec2 p = est.position.head<2>();
  const double speed = est.velocity.norm();

  speed_history_.emplace_back(est.stamp, speed);
  while (speed_history_.size() > 1 &&
         est.stamp - speed_history_[1].first >= params_.dt_obs) {
    speed_history_.pop_front();
  }
  const double speed_prev = speed_history_.front().second;

  region_now_ = reachableRegion(map, p, est.travel_dir, est.travel_dir_valid,
                                speed, params_);

  ReachableRegion ahead = region_now_;
  double d_o = params_.d_o_max;
  if (est.travel_dir_valid) {
    d_o = map.raycast(p, est.travel_dir, params_.d_o_max);
    const Vec2 p_ahead = p + est.velocity * params_.t0;
    if (map.inBounds(p_ahead) && map.free(p_ahead)) {
      ahead = reachableRegion(map, p_ahead, est.travel_dir, true, speed,
                              params_);
    }
  }

  const auto risk = riskScores(region_now_, ahead, speed, d_o, params_);
  const auto obs =
      observationScores(est.rotation.r_bv, est.rotation.heading_valid &&
                                               est.travel_dir_valid,
                        speed, speed_prev, params_);
  dist_ = combine(risk, obs, params_.b0);
  return dist_;
}

IntentionDistribution IntentionEstimator::cvFixedPoint(
    const IntentionParams &params) {
  std::array<double, kNumIntentions> risk{};
  risk[static_cast<int>(Intention::Cv)] = params.b1;
  std::array<double, kNumIntentions> obs{};
  obs[static_cast<int>(Intention::Cv)] = params.b2;
  return combine(risk, obs, params.b0);
}

}  // namespace itrack
