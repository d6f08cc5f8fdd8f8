#ifndef ITRACK_SCENARIO_HPP
#define ITRACK_SCENARIO_HPP

#include <cstdint>
#include <string>

#include "itrack/corridor.hpp"
#include "itrack/intention.hpp"
#include "itrack/lbfgs.hpp"
#include "itrack/prediction.hpp"
#include "itrack/scripted_target.hpp"
#include "itrack/target_state.hpp"
#include "itrack/traj_opt.hpp"

namespace itrack {

struct RatesConfig {
  int perception_hz = 30;
  int replan_hz = 10;
  int control_hz = 100;
};

struct CameraConfig {
  double fov_h = deg2rad(90.0);
  double fov_v = deg2rad(75.0);
  double range = 8.0;          // sensing cap, m
  double yaw_rate_max = 3.0;   // rad/s
};

struct MapConfig {
  std::string file;       // explicit raster file; exclusive with generate
  std::string generate;   // corridor_turn | corridor_straight | open_random_turns
  double resolution = 0.1;
  double inflation = 0.3;
  // generator geometry
  double corridor_width = 2.6;
  double leg_length = 6.0;
  std::string turn_dir = "random";  // left | right | random
  double stop_time = 5.0;           // corridor_straight: scripted stop, s
  double extent = 30.0;             // open_random_turns: square side, m
  int n_turns = 50;
  double leg_min = 3.0, leg_max = 5.0;
  double angle_min_deg = 60.0, angle_max_deg = 120.0;
};

struct TrajOptConfig {
  double d_tau = 0.4;
  double v_max = 3.0;
  double a_max = 5.0;
  int kappa = 16;
  TrajOptWeights weights;
  int max_iterations = 100;
  double grad_tolerance = 1e-5;
  double budget_ms = 0.0;  // 0 disables the wall-clock cutoff (deterministic)
};

struct ScenarioConfig {
  std::string name = "scenario";
  double duration = 10.0;
  std::uint64_t seed = 1;
  bool intention_blind = false;

  MapConfig map;
  TargetScriptConfig target;
  TargetFilterParams filter;
  double sigma_lm = 0.02;
  double shoulder_width = 0.4;
  double hip_width = 0.3;

  bool tracker_auto = true;  // place at distance d0 behind the path start
  Vec2 tracker_start = Vec2::Zero();
  double tracker_yaw = 0.0;

  CameraConfig camera;
  RatesConfig rates;
  IntentionParams intention;
  IntentionModelParams prediction;
  PenaltyMatrix penalty;
  CorridorParams corridor;
  TrajOptConfig trajopt;

  void validate() const;
  LbfgsParams solverParams() const;
};

// Strict section/key parser; unknown sections or keys raise with the
// offending line. See the shipped scenario files for the format.
ScenarioConfig loadScenarioConfig(const std::string &path);

// Fully built scenario: config with the target path resolved, plus the
// finalized occupancy grid.
struct Scenario {
  ScenarioConfig config;
  OccupancyGrid map;
};

// Applies the map generator (if any), resolves the tracker start, and
// derives dependent parameters (sector radius from d0 + d_tau).
Scenario buildScenario(ScenarioConfig cfg);

}  // namespace itrack

#endif
