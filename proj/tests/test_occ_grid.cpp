#include <cstdio>
#include <random>
#include <vector>

#include "doctest.h"
#include "itrack/occ_grid.hpp"

using namespace itrack;

namespace {

// 10 m x 10 m bordered grid at 0.1 m with no interior obstacles.
OccupancyGrid borderedGrid(double inflation = 0.0) {
  OccupancyGrid g(0.1, 100, 100, Vec2(0.0, 0.0), inflation);
  g.fillBorder();
  g.finalize();
  return g;
}

}  // namespace

TEST_CASE("grid construction and mutation guards") {
  CHECK_THROWS_AS(OccupancyGrid(0.0, 10, 10, Vec2(0, 0)), std::invalid_argument);
  CHECK_THROWS_AS(OccupancyGrid(0.1, 0, 10, Vec2(0, 0)), std::invalid_argument);

  OccupancyGrid g(0.5, 10, 10, Vec2(0.0, 0.0), 0.0);
  CHECK_THROWS_AS(g.setOccupied(10, 0), std::out_of_range);
  CHECK_THROWS_AS(g.raycast(Vec2(1, 1), Vec2(1, 0), 1.0), std::logic_error);
  g.finalize();
  CHECK_THROWS_AS(g.setOccupied(1, 1), std::logic_error);
  g.finalize();  // second finalize is a no-op
}

TEST_CASE("worldToCell and cellCenter invert each other") {
  OccupancyGrid g(0.25, 40, 30, Vec2(-3.0, 2.0), 0.0);
  g.finalize();
  std::mt19937_64 rng(201);
  std::uniform_int_distribution<int> xs(0, 39), ys(0, 29);
  for (int i = 0; i < 1000; ++i) {
    const int ix = xs(rng), iy = ys(rng);
    const Eigen::Vector2i c = g.worldToCell(g.cellCenter(ix, iy));
    REQUIRE(c.x() == ix);
    REQUIRE(c.y() == iy);
  }
  CHECK(g.inBounds(Vec2(-3.0, 2.0)));
  CHECK_FALSE(g.inBounds(Vec2(-3.0 + 40 * 0.25, 3.0)));  // max corner exclusive
}

TEST_CASE("fillRect covers the inclusive world-coordinate cell range") {
  OccupancyGrid g(0.5, 20, 20, Vec2(0.0, 0.0), 0.0);
  g.fillRect(Vec2(1.0, 1.0), Vec2(2.0, 2.0));
  g.finalize();
  for (int iy = 0; iy < 20; ++iy) {
    for (int ix = 0; ix < 20; ++ix) {
      const bool expect = ix >= 2 && ix <= 4 && iy >= 2 && iy <= 4;
      REQUIRE(g.rawOccupied(ix, iy) == expect);
    }
  }
}

TEST_CASE("inflation marks the center-to-center disc around raw cells") {
  OccupancyGrid g(0.1, 30, 30, Vec2(0.0, 0.0), 0.3);
  g.setOccupied(15, 15);
  g.finalize();
  for (int dy = -5; dy <= 5; ++dy) {
    for (int dx = -5; dx <= 5; ++dx) {
      const bool expect = std::hypot(dx * 0.1, dy * 0.1) <= 0.3 + 1e-9;
      REQUIRE(g.inflatedOccupied(15 + dx, 15 + dy) == expect);
    }
  }
  CHECK(g.rawOccupied(15, 15));
  CHECK_FALSE(g.rawOccupied(15, 16));
  // Point queries use the inflated layer; out-of-bounds is never free.
  CHECK(g.occupied(g.cellCenter(15, 18)));
  CHECK_FALSE(g.occupied(g.cellCenter(15, 19)));
  CHECK(g.free(g.cellCenter(1, 1)));
  CHECK_FALSE(g.free(Vec2(-1.0, -1.0)));
  // Out-of-bounds cell queries report unoccupied rather than throwing.
  CHECK_FALSE(g.rawOccupied(-1, 0));
  CHECK_FALSE(g.inflatedOccupied(300, 300));
}

TEST_CASE("raycast distances on simple geometry") {
  OccupancyGrid g = borderedGrid();
  const Vec2 c(5.05, 5.05);
  // Border cells span [9.9, 10.0); the ray enters that column at x = 9.9.
  CHECK(g.raycast(c, Vec2(1.0, 0.0), 8.0) == doctest::Approx(4.85).epsilon(1e-9));
  CHECK(g.raycast(c, Vec2(-1.0, 0.0), 8.0) == doctest::Approx(4.95).epsilon(1e-9));
  CHECK(g.raycast(c, Vec2(0.0, 1.0), 2.0) == 2.0);  // capped before the wall
  CHECK(g.raycast(c, Vec2(3.0, 0.0), 8.0) ==
        doctest::Approx(4.85).epsilon(1e-9));  // direction normalized

  CHECK(g.raycast(g.cellCenter(0, 50), Vec2(1.0, 0.0), 5.0) == 0.0);
  CHECK_THROWS_AS(g.raycast(Vec2(-5.0, 5.0), Vec2(1.0, 0.0), 1.0),
                  std::out_of_range);
  CHECK_THROWS_AS(g.raycast(c, Vec2(0.0, 0.0), 1.0), std::invalid_argument);
}

TEST_CASE("raycast agrees with dense point sampling on random maps") {
  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int trial = 0; trial < 60; ++trial) {
    OccupancyGrid g(0.2, 50, 50, Vec2(0.0, 0.0), 0.0);
    for (int k = 0; k < 5; ++k) {
      const double x = uni(rng) * 8.0, y = uni(rng) * 8.0;
      g.fillRect(Vec2(x, y), Vec2(x + uni(rng) * 1.5, y + uni(rng) * 1.5));
    }
    g.fillBorder();
    g.finalize();

    for (int ray = 0; ray < 40; ++ray) {
      const Vec2 o(0.5 + uni(rng) * 9.0, 0.5 + uni(rng) * 9.0);
      if (!g.free(o)) continue;
      const Vec2 dir = unitFromAngle(uni(rng) * 2.0 * M_PI);
      const double range = 1.0 + uni(rng) * 6.0;
      const double d = g.raycast(o, dir, range);

      // Fine sampling can only find a hit at or after the supercover hit
      // (corner contacts block the traversal but have no interior point).
      double d_fine = range;
      for (double t = 0.0; t < range; t += 0.02) {
        const Vec2 p = o + dir * t;
        if (g.inBounds(p) && g.occupied(p)) {
          d_fine = t;
          break;
        }
      }
      REQUIRE(d <= d_fine + 1e-9);
      for (double t = 0.0; t < d - 1e-9; t += 0.02) {
        const Vec2 p = o + dir * t;
        REQUIRE((!g.inBounds(p) || !g.occupied(p)));
      }
    }
  }
}

TEST_CASE("line of sight blocking, symmetry, and raycast consistency") {
  OccupancyGrid g = borderedGrid();
  CHECK(g.lineOfSight(Vec2(1.0, 5.0), Vec2(9.0, 5.0)));
  CHECK_THROWS_AS(g.lineOfSight(Vec2(1.0, 5.0), Vec2(11.0, 5.0)),
                  std::out_of_range);

  OccupancyGrid walled(0.1, 100, 100, Vec2(0.0, 0.0), 0.0);
  walled.fillRect(Vec2(5.0, 2.0), Vec2(5.2, 8.0));
  walled.fillBorder();
  walled.finalize();
  CHECK_FALSE(walled.lineOfSight(Vec2(2.0, 5.0), Vec2(8.0, 5.0)));
  CHECK(walled.lineOfSight(Vec2(2.0, 5.0), Vec2(2.0, 9.0)));
  CHECK(walled.lineOfSight(Vec2(2.0, 1.0), Vec2(8.0, 1.0)));  // around the wall

  std::mt19937_64 rng(203);
  std::uniform_real_distribution<double> uni(0.5, 9.5);
  for (int i = 0; i < 2000; ++i) {
    const Vec2 a(uni(rng), uni(rng)), b(uni(rng), uni(rng));
    const bool ab = walled.lineOfSight(a, b);
    REQUIRE(walled.lineOfSight(b, a) == ab);
    const double len = (b - a).norm();
    if (len > 1e-9) {
      const double d = walled.raycast(a, b - a, len);
      REQUIRE((ab ? d == len : d < len));
    }
  }
}

TEST_CASE("diagonal corner contact counts as a crossing") {
  OccupancyGrid g(1.0, 12, 12, Vec2(0.0, 0.0), 0.0);
  g.setOccupied(5, 6);
  g.setOccupied(6, 5);
  g.finalize();
  // The diagonal from cell (5,5) to cell (6,6) passes exactly through the
  // corner shared with the two occupied cells.
  CHECK_FALSE(g.lineOfSight(g.cellCenter(5, 5), g.cellCenter(6, 6)));
  // Pulling the segment off the corner restores visibility.
  CHECK(g.lineOfSight(g.cellCenter(5, 5) + Vec2(0.0, 0.2),
                      g.cellCenter(6, 6) + Vec2(0.0, 0.2)));
}

TEST_CASE("supercover traversal order, entry parameters, and early stop") {
  OccupancyGrid g(1.0, 10, 10, Vec2(0.0, 0.0), 0.0);
  g.finalize();

  std::vector<std::tuple<int, int, double>> visits;
  g.traverseSupercover(Vec2(0.5, 0.5), Vec2(3.5, 0.5),
                       [&](int ix, int iy, double t) {
                         visits.emplace_back(ix, iy, t);
                         return true;
                       });
  REQUIRE(visits.size() == 4);
  for (int i = 0; i < 4; ++i) {
    CHECK(std::get<0>(visits[i]) == i);
    CHECK(std::get<1>(visits[i]) == 0);
    CHECK(std::get<2>(visits[i]) == doctest::Approx(std::max(0.0, i - 0.5)));
  }

  // Exact corner crossing visits both side cells and the diagonal cell.
  visits.clear();
  g.traverseSupercover(Vec2(1.0, 1.0), Vec2(2.0, 2.0),
                       [&](int ix, int iy, double t) {
                         visits.emplace_back(ix, iy, t);
                         return true;
                       });
  REQUIRE(visits.size() == 4);
  CHECK(std::get<0>(visits[0]) == 1);
  CHECK(std::get<1>(visits[0]) == 1);

  int count = 0;
  g.traverseSupercover(Vec2(0.5, 0.5), Vec2(8.5, 0.5),
                       [&](int, int, double) { return ++count < 3; });
  CHECK(count == 3);

  visits.clear();
  g.traverseSupercover(Vec2(4.4, 4.4), Vec2(4.4, 4.4),
                       [&](int ix, int iy, double t) {
                         visits.emplace_back(ix, iy, t);
                         return true;
                       });
  CHECK(visits.size() == 1);
}

TEST_CASE("clearance fan angles on a wall at known bearing") {
  OccupancyGrid g(0.5, 40, 40, Vec2(-10.0, -10.0), 0.0);
  g.fillRect(Vec2(-9.0, 1.0), Vec2(9.0, 1.4));   // wall above the apex
  g.fillRect(Vec2(-9.0, -1.4), Vec2(9.0, -1.0)); // mirrored wall below
  g.fillBorder();
  g.finalize();
  const Vec2 apex(0.0, 0.0);

  // A ray at angle a hits the wall plane y = 1 at distance 1/sin(a); with
  // range 1.6 the first blocked sample is 39 deg (1/sin(39) = 1.589), so the
  // fan reports the last clear sample, 38 deg.
  const double left =
      g.clearanceFan(apex, Vec2(1.0, 0.0), FanSide::Left, M_PI / 2.0, 1.6);
  CHECK(left == doctest::Approx(deg2rad(38.0)).epsilon(1e-12));
  const double right =
      g.clearanceFan(apex, Vec2(1.0, 0.0), FanSide::Right, M_PI / 2.0, 1.6);
  CHECK(right == left);  // mirrored geometry, mirrored fan

  // Unobstructed within range: the cap angle itself is reported.
  CHECK(g.clearanceFan(apex, Vec2(1.0, 0.0), FanSide::Left, deg2rad(10.0),
                       0.8) == deg2rad(10.0));
  // First ray blocked: zero aperture.
  CHECK(g.clearanceFan(Vec2(0.0, 0.6), Vec2(0.0, 1.0), FanSide::Left,
                       M_PI / 2.0, 1.6) == 0.0);
  // Nonpositive range clears trivially.
  CHECK(g.clearanceFan(apex, Vec2(1.0, 0.0), FanSide::Left, deg2rad(45.0),
                       0.0) == deg2rad(45.0));

  CHECK_THROWS_AS(g.clearanceFan(Vec2(30.0, 0.0), Vec2(1.0, 0.0),
                                 FanSide::Left, 1.0, 1.0),
                  std::out_of_range);
  CHECK_THROWS_AS(g.clearanceFan(apex, Vec2(0.0, 0.0), FanSide::Left, 1.0, 1.0),
                  std::invalid_argument);
}

TEST_CASE("save/load round-trips geometry and occupancy") {
  OccupancyGrid g(0.25, 23, 17, Vec2(-2.0, 3.5), 0.3);
  std::mt19937_64 rng(204);
  std::uniform_int_distribution<int> xs(0, 22), ys(0, 16);
  for (int i = 0; i < 60; ++i) g.setOccupied(xs(rng), ys(rng));
  g.finalize();

  const std::string path = "tmp_roundtrip.grid";
  g.save(path);
  const OccupancyGrid h = OccupancyGrid::load(path, 0.3);
  std::remove(path.c_str());

  REQUIRE(h.width() == g.width());
  REQUIRE(h.height() == g.height());
  REQUIRE(h.resolution() == doctest::Approx(g.resolution()).epsilon(1e-12));
  REQUIRE((h.origin() - g.origin()).norm() < 1e-9);
  for (int iy = 0; iy < g.height(); ++iy) {
    for (int ix = 0; ix < g.width(); ++ix) {
      REQUIRE(h.rawOccupied(ix, iy) == g.rawOccupied(ix, iy));
      REQUIRE(h.inflatedOccupied(ix, iy) == g.inflatedOccupied(ix, iy));
    }
  }
  CHECK_THROWS_AS(OccupancyGrid::load("no_such_file.grid"), std::runtime_error);
}
