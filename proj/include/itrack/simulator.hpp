#ifndef ITRACK_SIMULATOR_HPP
#define ITRACK_SIMULATOR_HPP

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "itrack/scenario.hpp"

namespace itrack {

// One planning cycle: predict the target, build waypoints + corridor +
// visibility sectors, optimize the tracking trajectory. Throws when any
// stage fails or the optimized trajectory leaves free space; the caller
// keeps the previous plan in that case.
class Planner {
 public:
  Planner(const ScenarioConfig &cfg, const OccupancyGrid &map);

  struct Plan {
    PolyTrajectory trajectory;
    double t0 = 0.0;  // wall time at which the trajectory starts
    // Verified-free prefix of the trajectory; evaluation clamps here. A plan
    // whose tail strays out of free space is still flyable up to this point,
    // and replanning normally replaces it long before the clamp is reached.
    double valid_horizon = 0.0;
    PredictedTrack track;
    double cost = 0.0;
    int iterations = 0;
    bool converged = false;
  };

  Plan plan(const Mat23 &tracker_state, const TargetEstimate &est,
            const IntentionDistribution &dist, double now) const;

 private:
  const ScenarioConfig &cfg_;
  const OccupancyGrid &map_;
  LbfgsParams solver_;
};

struct TraceRow {
  double time = 0.0;
  Vec2 target_p = Vec2::Zero();
  Vec2 target_v = Vec2::Zero();
  double target_heading = 0.0;
  Vec2 tracker_p = Vec2::Zero();
  Vec2 tracker_v = Vec2::Zero();
  double tracker_yaw = 0.0;
  Vec4 intent_prob = Vec4::Zero();       // cv, tl, tr, dec
  std::vector<Vec2> pred;                // n_samples points, zero before a plan
  bool occluded = false;
  double dist_xy = 0.0;
  bool replanned = false;
  bool plan_failed = false;
  bool maneuver = false;
  // Measured but never serialized: trace bytes stay seed-deterministic.
  double latency_ms = 0.0;
};

struct RunSummary {
  std::string name;
  std::uint64_t seed = 0;
  bool intention_blind = false;
  double duration = 0.0;
  int rows = 0;
  double occlusion_fraction = 0.0;
  double dist_min = 0.0, dist_mean = 0.0, dist_max = 0.0;
  int replans = 0;
  int failed_replans = 0;
  double latency_mean_ms = 0.0, latency_max_ms = 0.0;
};

struct RunResult {
  std::vector<TraceRow> rows;
  RunSummary summary;
};

// Occlusion test for one control tick: bearing strictly outside the
// horizontal FOV cone, no line of sight, or range beyond the sensing cap.
bool occlusionMetric(const OccupancyGrid &map, const Vec2 &tracker_p,
                     double tracker_yaw, const Vec2 &target_p,
                     const CameraConfig &camera);

// Closed-loop run at the configured rates (single base clock). Optional
// stream receives one line per replan. Throws when the target or tracker
// ends up inside an obstacle.
RunResult runScenario(const Scenario &scenario, std::ostream *verbose = nullptr);

// Row-derived portion of the summary (everything except latency, which is
// not recoverable from a serialized trace).
RunSummary summarizeRows(const std::vector<TraceRow> &rows);

void writeTrace(const std::string &path, const std::vector<TraceRow> &rows);
std::vector<TraceRow> readTrace(const std::string &path);
void writeSummary(const std::string &path, const RunSummary &summary);
void printSummary(std::ostream &out, const RunSummary &summary);

}  // namespace itrack

#endif
