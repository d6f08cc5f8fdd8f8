#include "itrack/corridor.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>

namespace itrack {

namespace {

constexpr double kUnreached = -1.0;

// Shortest 8-connected path length (meters) from `source` to every free
// cell; kUnreached where unreachable.
std::vector<double> gridFlood(const OccupancyGrid &map, const Vec2 &source) {
  const int w = map.width(), h = map.height();
  std::vector<double> dist(static_cast<size_t>(w) * h, kUnreached);
  const Eigen::Vector2i s = map.worldToCell(source);
  if (!map.cellInBounds(s.x(), s.y()) || map.inflatedOccupied(s.x(), s.y())) {
    return dist;
  }

  struct Entry {
    double d;
    int ix, iy;
    bool operator>(const Entry &o) const {
      if (d != o.d) return d > o.d;
      if (iy != o.iy) return iy > o.iy;
      return ix > o.ix;
    }
  };
  std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> open;
  auto at = [&](int ix, int iy) -> double & {
    return dist[static_cast<size_t>(iy) * w + ix];
  };
  at(s.x(), s.y()) = 0.0;
  open.push({0.0, s.x(), s.y()});

  static const int dx[8] = {1, -1, 0, 0, 1, 1, -1, -1};
  static const int dy[8] = {0, 0, 1, -1, 1, -1, 1, -1};
  const double res = map.resolution();
  const double diag = res * std::sqrt(2.0);
  while (!open.empty()) {
    const Entry e = open.top();
    open.pop();
    if (e.d > at(e.ix, e.iy)) continue;
    for (int k = 0; k < 8; ++k) {
      const int nx = e.ix + dx[k], ny = e.iy + dy[k];
      if (!map.cellInBounds(nx, ny) || map.inflatedOccupied(nx, ny)) continue;
      const double nd = e.d + (k < 4 ? res : diag);
      if (at(nx, ny) < 0.0 || nd < at(nx, ny)) {
        at(nx, ny) = nd;
        open.push({nd, nx, ny});
      }
    }
  }
  return dist;
}

// 4-connected A* cell path; empty when disconnected.
std::vector<Eigen::Vector2i> gridPath4(const OccupancyGrid &map,
                                       const Eigen::Vector2i &from,
                                       const Eigen::Vector2i &to) {
  const int w = map.width(), h = map.height();
  auto idx = [&](int ix, int iy) { return static_cast<size_t>(iy) * w + ix; };
  auto blocked = [&](int ix, int iy) {
    return !map.cellInBounds(ix, iy) || map.inflatedOccupied(ix, iy);
  };
  if (blocked(from.x(), from.y()) || blocked(to.x(), to.y())) return {};

  std::vector<double> g(static_cast<size_t>(w) * h, kUnreached);
  std::vector<int> parent(static_cast<size_t>(w) * h, -1);
  auto heur = [&](int ix, int iy) {
    return (std::abs(ix - to.x()) + std::abs(iy - to.y())) * map.resolution();
  };

  struct Entry {
    double f;
    int ix, iy;
    bool operator>(const Entry &o) const {
      if (f != o.f) return f > o.f;
      if (iy != o.iy) return iy > o.iy;
      return ix > o.ix;
    }
  };
  std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> open;
  g[idx(from.x(), from.y())] = 0.0;
  open.push({heur(from.x(), from.y()), from.x(), from.y()});

  static const int dx[4] = {1, -1, 0, 0};
  static const int dy[4] = {0, 0, 1, -1};
  while (!open.empty()) {
    const Entry e = open.top();
    open.pop();
    if (e.ix == to.x() && e.iy == to.y()) break;
    const double g_here = g[idx(e.ix, e.iy)];
    if (e.f > g_here + heur(e.ix, e.iy) + 1e-12) continue;  // stale entry
    for (int k = 0; k < 4; ++k) {
      const int nx = e.ix + dx[k], ny = e.iy + dy[k];
      if (blocked(nx, ny)) continue;
      const double ng = g_here + map.resolution();
      if (g[idx(nx, ny)] < 0.0 || ng < g[idx(nx, ny)]) {
        g[idx(nx, ny)] = ng;
        parent[idx(nx, ny)] = static_cast<int>(idx(e.ix, e.iy));
        open.push({ng + heur(nx, ny), nx, ny});
      }
    }
  }
  if (g[idx(to.x(), to.y())] < 0.0) return {};

  std::vector<Eigen::Vector2i> path;
  for (int cur = static_cast<int>(idx(to.x(), to.y())); cur >= 0;
       cur = parent[cur]) {
    path.emplace_back(cur % w, cur / w);
    if (path.back() == from) break;
  }
  std::reverse(path.begin(), path.end());
  return path;
}

struct CellBox {
  int x0, y0, x1, y1;  // inclusive cell range
};

bool boxFree(const OccupancyGrid &map, const CellBox &b) {
  if (b.x0 < 0 || b.y0 < 0 || b.x1 >= map.width() || b.y1 >= map.height()) {
    return false;
  }
  for (int iy = b.y0; iy <= b.y1; ++iy) {
    for (int ix = b.x0; ix <= b.x1; ++ix) {
      if (map.inflatedOccupied(ix, iy)) return false;
    }
  }
  return true;
}

CellBox seedBox(const OccupancyGrid &map, const Vec2 &a, const Vec2 &b) {
  const Eigen::Vector2i ca = map.worldToCell(a), cb = map.worldToCell(b);
  return {std::min(ca.x(), cb.x()), std::min(ca.y(), cb.y()),
          std::max(ca.x(), cb.x()), std::max(ca.y(), cb.y())};
}

// Grows each face one cell line at a time, round-robin, until obstacle or
// map bound.
Polytope grownBox(const OccupancyGrid &map, CellBox box) {
  auto lineFree = [&](int x0, int y0, int x1, int y1) {
    return boxFree(map, {x0, y0, x1, y1});
  };
  bool stuck[4] = {false, false, false, false};
  while (!(stuck[0] && stuck[1] && stuck[2] && stuck[3])) {
    if (!stuck[0]) {  // +x
      if (lineFree(box.x1 + 1, box.y0, box.x1 + 1, box.y1)) ++box.x1;
      else stuck[0] = true;
    }
    if (!stuck[1]) {  // -x
      if (lineFree(box.x0 - 1, box.y0, box.x0 - 1, box.y1)) --box.x0;
      else stuck[1] = true;
    }
    if (!stuck[2]) {  // +y
      if (lineFree(box.x0, box.y1 + 1, box.x1, box.y1 + 1)) ++box.y1;
      else stuck[2] = true;
    }
    if (!stuck[3]) {  // -y
      if (lineFree(box.x0, box.y0 - 1, box.x1, box.y0 - 1)) --box.y0;
      else stuck[3] = true;
    }
  }
  const Vec2 lo = map.origin() + map.resolution() * Vec2(box.x0, box.y0);
  const Vec2 hi = map.origin() + map.resolution() * Vec2(box.x1 + 1, box.y1 + 1);
  return Polytope::box(lo, hi);
}

}  // namespace

Polytope Polytope::box(const Vec2 &lo, const Vec2 &hi) {
  Polytope p;
  p.normals.resize(4, 2);
  p.offsets.resize(4);
  p.normals << 1.0, 0.0, -1.0, 0.0, 0.0, 1.0, 0.0, -1.0;
  p.offsets << hi.x(), -lo.x(), hi.y(), -lo.y();
  return p;
}

double Polytope::margin(const Vec2 &x) const {
  double m = kInf;
  for (int i = 0; i < rows(); ++i) {
    m = std::min(m, offsets[i] - normals.row(i).dot(x));
  }
  return m;
}

WaypointResult occlusionFreeWaypoints(const OccupancyGrid &map,
                                      const PredictedTrack &track,
                                      const Vec2 &tracker_pos,
                                      const CorridorParams &params) {
  if (!map.free(tracker_pos)) {
    throw std::invalid_argument("tracker position is not in free space");
  }
  WaypointResult out;
  Vec2 prev = tracker_pos;
  for (const Vec2 &z : track.z) {
    bool degraded = true;
    Vec2 best = prev;
    if (map.free(z)) {
      const std::vector<double> dist = gridFlood(map, prev);
      auto gridDist = [&](const Vec2 &p) {
        const Eigen::Vector2i c = map.worldToCell(p);
        return dist[static_cast<size_t>(c.y()) * map.width() + c.x()];
      };
      double best_key[3] = {kInf, kInf, kInf};
      auto consider = [&](const Vec2 &cand, int angle_index) {
        if (!map.free(cand) || !map.lineOfSight(cand, z)) return;
        const double d = gridDist(cand);
        if (d < 0.0) return;
        const double key[3] = {d, (cand - prev).norm(),
                               static_cast<double>(angle_index)};
        if (std::lexicographical_compare(key, key + 3, best_key,
                                         best_key + 3)) {
          std::copy(key, key + 3, best_key);
          best = cand;
          degraded = false;
        }
      };
      // The previous waypoint itself counts when it already sits on the
      // circle (zero-length path is minimal).
      if (std::abs((prev - z).norm() - params.d0) < 1e-9) consider(prev, -1);
      for (int j = 0; j < params.circle_samples; ++j) {
        const double ang = 2.0 * M_PI * j / params.circle_samples;
        consider(z + params.d0 * unitFromAngle(ang), j);
      }
    }
    out.s.push_back(best);
    out.degraded.push_back(degraded);
    prev = best;
  }
  return out;
}

std::vector<Vec2> simplifyRoute(const OccupancyGrid &map,
                                const std::vector<Vec2> &path) {
  if (path.size() < 3) return path;
  std::vector<Vec2> out;
  out.push_back(path.front());
  size_t cur = 0;
  while (cur + 1 < path.size()) {
    size_t far = cur + 1;
    while (far + 1 < path.size() &&
           map.lineOfSight(path[cur], path[far + 1])) {
      ++far;
    }
    out.push_back(path[far]);
    cur = far;
  }
  return out;
}

CorridorResult generateCorridor(const OccupancyGrid &map,
                                const std::vector<Vec2> &path) {
  if (path.size() < 2) throw std::invalid_argument("path needs >= 2 vertices");
  for (const Vec2 &p : path) {
    if (!map.free(p)) {
      throw std::invalid_argument("corridor path vertex not in free space");
    }
  }

  CorridorResult out;
  out.spine.push_back(path.front());
  for (size_t i = 0; i + 1 < path.size(); ++i) {
    const Vec2 &a = path[i], &b = path[i + 1];
    if (boxFree(map, seedBox(map, a, b))) {
      out.spine.push_back(b);
      continue;
    }
    // Reroute through the grid, then greedily merge runs whose joint
    // bounding box stays free.
    const auto cells = gridPath4(map, map.worldToCell(a), map.worldToCell(b));
    if (cells.empty()) {
      throw std::runtime_error("corridor segment blocked: no free route");
    }
    std::vector<Vec2> verts;
    verts.push_back(a);
    for (size_t j = 1; j + 1 < cells.size(); ++j) {
      verts.push_back(map.cellCenter(cells[j].x(), cells[j].y()));
    }
    verts.push_back(b);
    size_t cur = 0;
    while (cur + 1 < verts.size()) {
      size_t far = cur + 1;
      while (far + 1 < verts.size() &&
             boxFree(map, seedBox(map, verts[cur], verts[far + 1]))) {
        ++far;
      }
      out.spine.push_back(verts[far]);
      cur = far;
    }
  }

  for (size_t i = 0; i + 1 < out.spine.size(); ++i) {
    out.polytopes.push_back(
        grownBox(map, seedBox(map, out.spine[i], out.spine[i + 1])));
  }
  return out;
}

Sector visibleRegion(const OccupancyGrid &map, const Vec2 &z,
                     const Vec2 &hint_dir, const CorridorParams &params,
                     bool *degraded) {
  if (!map.free(z)) throw std::invalid_argument("sector apex not in free space");
  const double radius = params.sector_radius;
  Vec2 hint = hint_dir;
  if (hint.norm() < 1e-12) hint = Vec2(1.0, 0.0);
  hint.normalize();

  // One full-circle fan; offsets ordered by rotation magnitude so that on
  // ties the first (nearest the hint direction) candidate wins.
  const int n = 360;
  std::vector<char> clear_at(n);
  std::vector<double> range_at(n);
  std::vector<double> offset_at(n);
  std::vector<int> ring(n);  // candidate order index -> ring position
  for (int k = 0; k < n; ++k) {
    const int half = (k + 1) / 2;
    const int signed_deg = (k % 2 == 0 ? 1 : -1) * half;
    offset_at[k] = signed_deg * OccupancyGrid::kFanStep;
    ring[k] = ((signed_deg % n) + n) % n;
  }
  std::vector<double> ring_range(n, 0.0);
  for (int k = 0; k < n; ++k) {
    const double r = map.raycast(z, rotate(hint, offset_at[k]), radius);
    range_at[k] = r;
    ring_range[ring[k]] = r;
  }
  for (int k = 0; k < n; ++k) clear_at[k] = range_at[k] >= radius - 1e-9;

  const int cap_steps =
      static_cast<int>(std::floor(params.theta_cap / OccupancyGrid::kFanStep + 1e-9));
  auto runLength = [&](int start, int step) {
    int len = 0;
    while (len < cap_steps) {
      const int j = ((start + step * (len + 1)) % n + n) % n;
      if (ring_range[j] < radius - 1e-9) break;
      ++len;
    }
    return len;
  };

  Sector sector;
  sector.apex = z;
  sector.radius = radius;

  // Among full-clearance rays, maximize the symmetric clear fan; the
  // candidate order keeps ties nearest the hint. Rays within a quarter
  // turn of the hint are preferred outright so a marginally wider fan on
  // the far side of the target cannot steal the axis.
  int best_half_steps = -1;
  int best_k = -1;
  for (const bool hint_side : {true, false}) {
    for (int k = 0; k < n; ++k) {
      if (!clear_at[k]) continue;
      if ((std::abs(offset_at[k]) <= 0.5 * M_PI + 1e-9) != hint_side) continue;
      const int half_steps =
          std::min(runLength(ring[k], +1), runLength(ring[k], -1));
      if (half_steps > best_half_steps) {
        best_half_steps = half_steps;
        best_k = k;
      }
    }
    if (best_k >= 0) break;
  }
  if (best_k < 0) {
    // No ray clears the full radius: degenerate sector along the ray of
    // maximum clearance.
    double best_range = -1.0;
    Vec2 axis = hint;
    for (int k = 0; k < n; ++k) {
      if (range_at[k] > best_range + 1e-12) {
        best_range = range_at[k];
        axis = rotate(hint, offset_at[k]);
      }
    }
    sector.axis = axis;
    sector.half_angle = 0.0;
    if (degraded) *degraded = true;
    return sector;
  }
  sector.axis = best_k == 0 ? hint : rotate(hint, offset_at[best_k]);
  sector.half_angle = std::min(best_half_steps * OccupancyGrid::kFanStep,
                               params.theta_cap);
  if (degraded) *degraded = false;
  return sector;
}

Sector desiredVisibleRegion(const Sector &v, double p_tl, double p_tr,
                            const CorridorParams &params) {
  // Margins subtract from the fan's two edges. Narrow fans cannot absorb the
  // full margins, so both scale down proportionally until the desired window
  // keeps at least half the fan, instead of collapsing to a knife-edge ray.
  const double eps_l = params.theta_alpha + params.theta_beta * p_tl;
  const double eps_r = params.theta_alpha + params.theta_beta * p_tr;
  const double total = eps_l + eps_r;
  const double scale =
      total > v.half_angle && total > 0.0 ? v.half_angle / total : 1.0;
  Sector out = v;
  out.half_angle = v.half_angle - 0.5 * scale * total;
  out.axis = rotate(v.axis, 0.5 * scale * (eps_r - eps_l));
  return out;
}

}  // namespace itrack
