#ifndef ITRACK_SCENARIO_GEN_HPP
#define ITRACK_SCENARIO_GEN_HPP

#include <cstdint>

#include "itrack/scenario.hpp"

namespace itrack {

// Benchmark map generators. Each builds a finalized grid and writes the
// matching scripted-target path (and stop events where relevant) into
// `target`. Geometry is jittered deterministically from `seed`.

// L-shaped corridor with one 90-degree turn.
OccupancyGrid generateCorridorTurnMap(const MapConfig &mc, std::uint64_t seed,
                                      TargetScriptConfig &target);

// Straight dead-end corridor; the target brakes to a stop partway in and
// holds for the rest of the run.
OccupancyGrid generateCorridorStraightMap(const MapConfig &mc,
                                          std::uint64_t seed,
                                          TargetScriptConfig &target);

// Open bordered square with a random multi-leg polyline (turn angles drawn
// uniformly from [angle_min, angle_max], random direction).
OccupancyGrid generateOpenTurnsMap(const MapConfig &mc, std::uint64_t seed,
                                   TargetScriptConfig &target,
                                   double min_path_length);

}  // namespace itrack

#endif
