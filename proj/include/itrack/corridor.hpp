#ifndef ITRACK_CORRIDOR_HPP
#define ITRACK_CORRIDOR_HPP

#include <vector>

#include "itrack/occ_grid.hpp"
#include "itrack/prediction.hpp"

namespace itrack {

// Convex region {x : A x <= b} with unit outward row normals.
struct Polytope {
  Eigen::MatrixX2d normals;
  Eigen::VectorXd offsets;
  bool bounded = true;

  static Polytope box(const Vec2 &lo, const Vec2 &hi);
  int rows() const { return static_cast<int>(offsets.size()); }
  // Smallest slack b_k - a_k.x over rows; positive strictly inside.
  double margin(const Vec2 &x) const;
  bool contains(const Vec2 &x, double tol = 0.0) const {
    return margin(x) >= -tol;
  }
};

struct CorridorParams {
  double d0 = 2.0;            // desired tracking distance, m
  int circle_samples = 72;    // candidate points on the distance circle
  double theta_cap = deg2rad(75.0);
  double theta_alpha = 0.2;   // base margin, rad
  double theta_beta = 0.6;    // intention-scaled margin, rad
  double sector_radius = 2.4;  // d0 + d_u, m
  int pieces_per_polytope = 2;  // K
};

struct WaypointResult {
  std::vector<Vec2> s;          // one per track sample
  std::vector<bool> degraded;   // true where the circle had no usable point
};

// For each predicted position z_k, picks the point at distance d0 from z_k
// with line of sight to z_k that minimizes grid path length from the
// previous waypoint (s_0 = tracker_pos). Degraded entries reuse the
// previous waypoint.
WaypointResult occlusionFreeWaypoints(const OccupancyGrid &map,
                                      const PredictedTrack &track,
                                      const Vec2 &tracker_pos,
                                      const CorridorParams &params);

// Drops interior vertices wherever the merged run keeps line of sight
// between its endpoints, preserving the first and last vertex. Keeps dense
// waypoint chains from inflating the corridor segment count downstream.
std::vector<Vec2> simplifyRoute(const OccupancyGrid &map,
                                const std::vector<Vec2> &path);

struct CorridorResult {
  std::vector<Polytope> polytopes;  // one per spine segment
  std::vector<Vec2> spine;          // polyline, size = polytopes.size() + 1
};

// One axis-aligned free box per path segment, greedily rerouting segments
// whose bounding box touches an obstacle through a 4-connected grid path.
// Throws when a segment cannot be connected through free space.
CorridorResult generateCorridor(const OccupancyGrid &map,
                                const std::vector<Vec2> &path);

// Widest clear sector around z: axis = the full-circle ray of maximum
// clearance (ties resolved toward hint_dir), half-angle capped at
// theta_cap. Zero-width (degraded) when no ray clears the radius.
Sector visibleRegion(const OccupancyGrid &map, const Vec2 &z,
                     const Vec2 &hint_dir, const CorridorParams &params,
                     bool *degraded = nullptr);

// Shrinks the sector by margin angles theta_alpha + theta_beta * p on each
// side (p_tl on the left boundary, p_tr on the right); the axis rotates by
// half the margin difference and the half-angle is floored at zero.
Sector desiredVisibleRegion(const Sector &v, double p_tl, double p_tr,
                            const CorridorParams &params);

}  // namespace itrack

#endif
