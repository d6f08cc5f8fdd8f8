#include "itrack/scenario_gen.hpp"

#include <cmath>
#include <optional>
#include <random>
#include <stdexcept>

namespace itrack {
namespace {

// Clears every cell whose center lies in [lo, hi].
void carveRect(OccupancyGrid &grid, const Vec2 &lo, const Vec2 &hi) {
  for (int iy = 0; iy < grid.height(); ++iy) {
    for (int ix = 0; ix < grid.width(); ++ix) {
      const Vec2 c = grid.cellCenter(ix, iy);
      if (c.x() >= lo.x() && c.x() <= hi.x() && c.y() >= lo.y() &&
          c.y() <= hi.y()) {
        grid.setOccupied(ix, iy, false);
      }
    }
  }
}

OccupancyGrid solidGrid(const MapConfig &mc, double width_m, double height_m) {
  const int wc = static_cast<int>(std::ceil(width_m / mc.resolution));
  const int hc = static_cast<int>(std::ceil(height_m / mc.resolution));
  OccupancyGrid grid(mc.resolution, wc, hc, Vec2::Zero(), mc.inflation);
  grid.fillRect(grid.minCorner(), grid.maxCorner());
  return grid;
}

}  // namespace

OccupancyGrid generateCorridorTurnMap(const MapConfig &mc, std::uint64_t seed,
                                      TargetScriptConfig &target) {
  std::mt19937_64 rng(seed);
  auto uniform = [&rng](double a, double b) {
    return std::uniform_real_distribution<double>(a, b)(rng);
  };
  const double w = mc.corridor_width + uniform(-0.15, 0.15);
  const double leg1 = mc.leg_length + uniform(-0.5, 0.5);
  const double leg2 = w + 0.5 + uniform(0.0, 0.5);  // between the two corners
  const double leg3 = 3.2 + uniform(0.0, 0.8);      // after the second corner
  const double stub1 = 2.8 + uniform(0.0, 0.8);     // dead end past corner 1
  const double stub2 = 1.8 + uniform(0.0, 0.6);     // dead end past corner 2
  bool left;
  if (mc.turn_dir == "left") left = true;
  else if (mc.turn_dir == "right") left = false;
  else if (mc.turn_dir == "random") left = (rng() & 1u) != 0;
  else throw std::invalid_argument("turn_dir must be left|right|random");

  // Hairpin corridor: entry leg, short cross leg, exit leg doubling back
  // parallel to the entry. Each junction keeps a dead-end continuation, so a
  // straight extrapolation of the target keeps pointing down the stub while
  // the real path turns, and no point of the entry leg has line of sight into
  // the exit leg.
  const double x0 = 4.2;              // target start
  const double x_open = 0.6;          // corridor mouth (room for the tracker)
  const double cx = x0 + leg1;        // corner 1
  const double s = left ? 1.0 : -1.0;
  const double y0 = left ? 1.0 + 0.5 * w : 1.0 + leg2 + stub2;
  const double y1 = y0 + s * leg2;    // corner 2 centerline
  const double width_m = cx + 0.5 * w + stub1 + 1.0;
  const double height_m =
      (left ? y1 + stub2 : y0 + 0.5 * w) + 1.0;

  OccupancyGrid grid = solidGrid(mc, width_m, height_m);
  carveRect(grid, Vec2(x_open, y0 - 0.5 * w),
            Vec2(cx + 0.5 * w + stub1, y0 + 0.5 * w));
  carveRect(grid,
            Vec2(cx - 0.5 * w, std::min(y0 - 0.5 * w, y1 + s * stub2)),
            Vec2(cx + 0.5 * w, std::max(y0 + 0.5 * w, y1 + s * stub2)));
  carveRect(grid, Vec2(cx - leg3, y1 - 0.5 * w),
            Vec2(cx + 0.5 * w, y1 + 0.5 * w));
  grid.finalize();

  target.path = {Vec2(x0, y0), Vec2(cx, y0), Vec2(cx, y1),
                 Vec2(cx - leg3 + 0.5, y1)};
  return grid;
}

OccupancyGrid generateCorridorStraightMap(const MapConfig &mc,
                                          std::uint64_t seed,
                                          TargetScriptConfig &target) {
  std::mt19937_64 rng(seed);
  auto uniform = [&rng](double a, double b) {
    return std::uniform_real_distribution<double>(a, b)(rng);
  };
  const double w = mc.corridor_width + uniform(-0.2, 0.4);
  const double len = 2.0 * mc.leg_length + uniform(-0.5, 0.5);
  const double t_stop = mc.stop_time + uniform(-0.3, 0.3);

  const double x0 = 3.0;
  const double x_open = 0.6;
  const double x_end = x0 + len;
  const double y0 = 1.0 + 0.5 * w;
  const double width_m = x_end + 2.5;   // dead end 1.5 m past the path end
  const double height_m = y0 + 0.5 * w + 1.0;

  OccupancyGrid grid = solidGrid(mc, width_m, height_m);
  carveRect(grid, Vec2(x_open, y0 - 0.5 * w), Vec2(x_end + 1.5, y0 + 0.5 * w));
  grid.finalize();

  target.path = {Vec2(x0, y0), Vec2(x_end, y0)};
  target.stops = {{t_stop, 1e9}};  // brake and hold for the rest of the run
  return grid;
}

OccupancyGrid generateOpenTurnsMap(const MapConfig &mc, std::uint64_t seed,
                                   TargetScriptConfig &target,
                                   double min_path_length) {
  std::mt19937_64 rng(seed);
  auto uniform = [&rng](double a, double b) {
    return std::uniform_real_distribution<double>(a, b)(rng);
  };
  const double e = mc.extent;
  const Vec2 center(0.5 * e, 0.5 * e);
  const double margin = 3.0;  // polyline stays this far from the border

  std::vector<Vec2> path;
  Vec2 p(0.25 * e, 0.5 * e);
  double heading = 0.0;
  path.push_back(p);
  double total = 0.0;
  for (int k = 0; k < mc.n_turns && total < min_path_length; ++k) {
    if (k > 0) {
      const double turn = deg2rad(uniform(mc.angle_min_deg, mc.angle_max_deg));
      heading = wrapPi(heading + ((rng() & 1u) != 0 ? turn : -turn));
    }
    double leg = uniform(mc.leg_min, mc.leg_max);
    Vec2 q = p + leg * unitFromAngle(heading);
    if (q.x() < margin || q.x() > e - margin || q.y() < margin ||
        q.y() > e - margin) {
      heading = wrapPi(angleOf(center - p) + uniform(-0.3, 0.3));
      q = p + leg * unitFromAngle(heading);
    }
    path.push_back(q);
    total += leg;
    p = q;
  }
  if (path.size() < 2) path.push_back(p + Vec2(mc.leg_min, 0.0));

  const int cells = static_cast<int>(std::ceil(e / mc.resolution));
  OccupancyGrid grid(mc.resolution, cells, cells, Vec2::Zero(), mc.inflation);
  grid.fillBorder();
  grid.finalize();

  target.path = std::move(path);
  return grid;
}

Scenario buildScenario(ScenarioConfig cfg) {
  std::optional<OccupancyGrid> grid;
  if (!cfg.map.generate.empty()) {
    if (cfg.map.generate == "corridor_turn") {
      grid = generateCorridorTurnMap(cfg.map, cfg.seed, cfg.target);
    } else if (cfg.map.generate == "corridor_straight") {
      grid = generateCorridorStraightMap(cfg.map, cfg.seed, cfg.target);
    } else if (cfg.map.generate == "open_random_turns") {
      const double need = cfg.duration * cfg.target.speed + 5.0;
      grid = generateOpenTurnsMap(cfg.map, cfg.seed, cfg.target, need);
    } else {
      throw std::invalid_argument("unknown map generator: " + cfg.map.generate);
    }
  } else {
    if (cfg.map.file.empty())
      throw std::invalid_argument("scenario needs map file or map generate");
    if (cfg.target.path.size() < 2)
      throw std::invalid_argument(
          "scenario needs an explicit target path when the map is loaded "
          "from a file");
    grid = OccupancyGrid::load(cfg.map.file, cfg.map.inflation);
  }

  // Sector range must cover the far edge of the distance band.
  cfg.corridor.sector_radius = cfg.corridor.d0 + cfg.trajopt.d_tau;
  cfg.validate();

  for (const Vec2 &v : cfg.target.path) {
    if (!grid->free(v))
      throw std::runtime_error("target path vertex inside an obstacle");
  }
  if (cfg.tracker_auto) {
    const Vec2 dir = (cfg.target.path[1] - cfg.target.path[0]).normalized();
    cfg.tracker_start = cfg.target.path[0] - cfg.corridor.d0 * dir;
    cfg.tracker_yaw = angleOf(dir);
  }
  if (!grid->free(cfg.tracker_start))
    throw std::runtime_error("tracker start inside an obstacle");

  return Scenario{std::move(cfg), std::move(*grid)};
}

}  // namespace itrack
