#ifndef ITRACK_INTENTION_HPP
#define ITRACK_INTENTION_HPP

#include <array>
#include <deque>

#include "itrack/occ_grid.hpp"
#include "itrack/target_state.hpp"

namespace itrack {

// Fixed intention set; the enum order is also the tie-break order.
enum class Intention : int { Cv = 0, Tl = 1, Tr = 2, Dec = 3 };
constexpr int kNumIntentions = 4;
const char *intentionName(Intention i);

struct IntentionParams {
  double k1 = 2.0;  // turn-risk gain on fan growth
  double k2 = 1.5;  // turn-observation gain on r_bv
  double k3 = 0.5;  // deceleration-risk gain
  double k4 = 1.0;  // deceleration-observation gain
  double k5 = 1.0;  // cv-observation suppression gain
  double cv_risk_gain = 1.0;  // cv-risk suppression gain (defaults to k4)
  double b0 = 0.5;
  double b1 = 0.5;
  double b2 = 0.5;
  double t0 = 1.0;       // look-ahead for the extrapolated region, s
  double dt_obs = 0.3;   // speed-history interval, s
  double theta_max = M_PI / 2.0;
  double r_min = 0.5;    // floor of the reachable-region radius, m
  double d_o_max = 10.0;  // raycast cap when probing the front obstacle, m
};

// Sector fan angles on each side of the travel direction.
struct ReachableRegion {
  Vec2 apex = Vec2::Zero();
  Vec2 travel_dir = Vec2(1.0, 0.0);
  double theta_l = 0.0;
  double theta_r = 0.0;
  double range = 0.0;
  bool dir_valid = false;

  Sector leftSector() const;
  Sector rightSector() const;
};

struct IntentionDistribution {
  std::array<double, kNumIntentions> risk{};
  std::array<double, kNumIntentions> obs{};
  std::array<double, kNumIntentions> prob{};
  Intention argmax = Intention::Cv;

  double p(Intention i) const { return prob[static_cast<int>(i)]; }
};

ReachableRegion reachableRegion(const OccupancyGrid &map, const Vec2 &p,
                                const Vec2 &travel_dir, bool dir_valid,
                                double speed, const IntentionParams &params);

// Risk scores from the fan growth between now and the extrapolated region,
// plus the approach term speed^2 / d_o. Order: cv, tl, tr, dec.
std::array<double, kNumIntentions> riskScores(const ReachableRegion &now,
                                              const ReachableRegion &ahead,
                                              double speed, double d_o,
                                              const IntentionParams &params);

// Observation scores from the body-velocity angle and the speed drop over
// the dt_obs interval. Order: cv, tl, tr, dec.
std::array<double, kNumIntentions> observationScores(
    double r_bv, bool heading_valid, double speed_now, double speed_prev,
    const IntentionParams &params);

// (tanh(risk + obs - b0) + 1) / 2, strictly increasing onto (0, 1).
double activate(double risk, double obs, double b0);

IntentionDistribution combine(
    const std::array<double, kNumIntentions> &risk,
    const std::array<double, kNumIntentions> &obs, double b0);

// Recomputes the full distribution every perception tick; keeps the speed
// history needed for the deceleration observation.
class IntentionEstimator {
 public:
  explicit IntentionEstimator(const IntentionParams &params = {});

  IntentionDistribution update(const OccupancyGrid &map,
                               const TargetEstimate &est);
  const IntentionDistribution &latest() const { return dist_; }
  const ReachableRegion &regionNow() const { return region_now_; }

  // The cv-dominant distribution used by the intention-blind ablation.
  static IntentionDistribution cvFixedPoint(const IntentionParams &params);

 private:
  IntentionParams params_;
  std::deque<std::pair<double, double>> speed_history_;  // (stamp, speed)
  IntentionDistribution dist_;
  ReachableRegion region_now_;
};

}  // namespace itrack

#endif
