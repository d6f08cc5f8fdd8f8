#ifndef ITRACK_OCC_GRID_HPP
#define ITRACK_OCC_GRID_HPP

#include <functional>
#include <string>
#include <vector>

#include "itrack/common.hpp"

namespace itrack {

// Sector region: x inside iff angle(x - apex, axis) <= half_angle and
// ||x - apex|| <= radius. Axis must be unit-norm.
struct Sector {
  Vec2 apex = Vec2::Zero();
  Vec2 axis = Vec2(1.0, 0.0);
  double half_angle = 0.0;  // [0, pi]
  double radius = kInf;

  bool contains(const Vec2 &x) const;
};

enum class FanSide { Left, Right };

// 2D occupancy grid at fixed planning altitude. Raw occupancy is set during
// construction; finalize() computes the inflated layer used by all queries.
// Immutable (and safe for concurrent reads) once finalized.
class OccupancyGrid {
 public:
  static constexpr double kFanStep = M_PI / 180.0;  // 1 deg angular sampling

  OccupancyGrid(double resolution, int width, int height, const Vec2 &origin,
                double inflation_radius = 0.3);

  static OccupancyGrid load(const std::string &path,
                            double inflation_radius = 0.3);
  void save(const std::string &path) const;

  // --- construction (invalid after finalize) ---
  void setOccupied(int ix, int iy, bool occ = true);
  void fillRect(const Vec2 &lo, const Vec2 &hi);  // world coords, inclusive
  void fillBorder();
  void finalize();

  // --- geometry ---
  double resolution() const { return resolution_; }
  int width() const { return width_; }
  int height() const { return height_; }
  const Vec2 &origin() const { return origin_; }
  double inflationRadius() const { return inflation_radius_; }
  Vec2 minCorner() const { return origin_; }
  Vec2 maxCorner() const {
    return origin_ + resolution_ * Vec2(width_, height_);
  }

  bool cellInBounds(int ix, int iy) const {
    return ix >= 0 && ix < width_ && iy >= 0 && iy < height_;
  }
  bool inBounds(const Vec2 &p) const;
  Eigen::Vector2i worldToCell(const Vec2 &p) const;
  Vec2 cellCenter(int ix, int iy) const;

  bool rawOccupied(int ix, int iy) const;       // out of bounds -> false
  bool inflatedOccupied(int ix, int iy) const;  // out of bounds -> false
  bool occupied(const Vec2 &p) const;           // inflated layer
  bool free(const Vec2 &p) const { return inBounds(p) && !occupied(p); }

  // --- queries (all on the inflated layer; grid must be finalized) ---

  // Distance to the first occupied cell along dir, capped at max_range.
  // Returns 0 when the origin cell is occupied. Throws when origin is
  // outside the map.
  double raycast(const Vec2 &origin, const Vec2 &dir, double max_range) const;

  // True iff the segment a->b crosses no occupied cell (supercover
  // traversal, so corner contacts count as crossings). Throws when an
  // endpoint is out of bounds.
  bool lineOfSight(const Vec2 &a, const Vec2 &b) const;

  // Largest sampled angle theta <= max_angle such that every ray from apex
  // at alpha in [0, theta] off start_dir (toward side, step kFanStep) clears
  // at least `range`. Returns 0 when the alpha=0 ray is blocked.
  double clearanceFan(const Vec2 &apex, const Vec2 &start_dir, FanSide side,
                      double max_angle, double range) const;

  // Visits every cell whose closed rectangle the segment a->b touches, in
  // traversal order, with the entry parameter along the segment (meters).
  // Visitor returns false to stop.
  void traverseSupercover(
      const Vec2 &a, const Vec2 &b,
      const std::function<bool(int ix, int iy, double t_entry)> &visit) const;

 private:
  int index(int ix, int iy) const { return iy * width_ + ix; }
  void requireFinalized() const;

  double resolution_;
  int width_, height_;
  Vec2 origin_;
  double inflation_radius_;
  std::vector<uint8_t> raw_;
  std::vector<uint8_t> inflated_;
  bool finalized_ = false;
};

}  // namespace itrack

#endif
