#ifndef ITRACK_PREDICTION_HPP
#define ITRACK_PREDICTION_HPP

#include <cstdint>
#include <vector>

#include "itrack/intention.hpp"
#include "itrack/occ_grid.hpp"

namespace itrack {

struct MotionState {
  Vec2 p = Vec2::Zero();
  Vec2 v = Vec2::Zero();
};

struct IntentionModelParams {
  std::vector<double> turn_rates = {0.6, 1.2, 1.8};     // rad/s, magnitudes
  std::vector<double> decel_values = {-1.0, -2.0, -3.0};  // m/s^2, along -v
  double dt_exp = 0.25;   // expansion step, s
  double horizon = 2.0;   // T_p, s
  int n_samples = 8;      // output stamps over the horizon
  double w_h = 0.4;       // heuristic weight per meter
  double speed_cap = 3.0;
  int expansion_cap = 4000;
  bool cv_only = false;   // intention-blind ablation: straight-line primitives

  int m0() const { return static_cast<int>(turn_rates.size()); }
  int depth() const;  // horizon / dt_exp, validated integral
  void validate() const;
};

// Intention-transition penalties; zero diagonal, positive off-diagonal.
struct PenaltyMatrix {
  Mat4 m = defaultMatrix();

  static Mat4 defaultMatrix();
  void validate() const;
  double cost(Intention from, Intention to) const {
    return m(static_cast<int>(from), static_cast<int>(to));
  }
};

// Closed-form motion primitive step: straight line for Cv, constant turn
// rate for Tl/Tr (param = rate magnitude), constant along-track
// deceleration for Dec (param < 0, speed clamped at zero).
MotionState stepModel(const MotionState &s, Intention intention, double dt,
                      double param);

// Bilinear transition cost between one-hot intention vectors.
double transitionCost(const Vec4 &onehot_prev, const Vec4 &onehot_next,
                      const PenaltyMatrix &pen);

double heuristic(const Vec2 &p, const Vec2 &goal, double w_h);

struct PredictedTrack {
  std::vector<Vec2> z;           // future positions
  std::vector<double> stamps;    // strictly increasing, last == horizon
  std::vector<Intention> intents;
};

// Per-step record of the winning primitive chain (diagnostics and tests).
struct PredictionStep {
  MotionState state;  // state after the step
  Intention intention = Intention::Cv;
  double param = 0.0;
};

struct PredictionResult {
  PredictedTrack track;
  std::vector<PredictionStep> steps;  // length = reached depth
  MotionState start;
  double cost = kInf;       // total transition cost + terminal heuristic
  std::uint64_t seq_code = 0;  // base-(1+3*m0) digits, one per step
  bool complete = false;    // reached the full horizon depth
};

// Best-first search over intention primitives. The search keeps the best
// complete chain found and prunes branches that provably cannot beat it;
// duplicate states are folded by a coarse (cell, heading, intention, depth)
// closed set, first expansion wins.
PredictionResult predictMotionDetailed(const MotionState &x0, Intention i0,
                                       const OccupancyGrid &map,
                                       const IntentionModelParams &params,
                                       const PenaltyMatrix &pen);

PredictedTrack predictMotion(const MotionState &x0, Intention i0,
                             const OccupancyGrid &map,
                             const IntentionModelParams &params,
                             const PenaltyMatrix &pen);

// Exhaustive minimum over all intention sequences of the full depth,
// applying the same stepping, pruning, and tie rules as the search.
// Intended for small depths only (cost grows as (1+3*m0)^depth).
PredictionResult enumerateMotionOracle(const MotionState &x0, Intention i0,
                                       const OccupancyGrid &map,
                                       const IntentionModelParams &params,
                                       const PenaltyMatrix &pen);

}  // namespace itrack

#endif
