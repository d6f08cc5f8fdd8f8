#include "itrack/occ_grid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace itrack {

bool Sector::contains(const Vec2 &x) const {
  const Vec2 d = x - apex;
  const double r = d.norm();
  if (r > radius) return false;
  if (r < 1e-12) return true;
  const double cos_ang = d.dot(axis) / r;
  return std::acos(std::clamp(cos_ang, -1.0, 1.0)) <= half_angle;
}

OccupancyGrid::OccupancyGrid(double resolution, int width, int height,
                             const Vec2 &origin, double inflation_radius)
    : resolution_(resolution),
      width_(width),
      height_(height),
      origin_(origin),
      inflation_radius_(inflation_radius) {
  if (resolution <= 0.0) throw std::invalid_argument("resolution must be > 0");
  if (width < 1 || height < 1)
    throw std::invalid_argument("grid dimensions must be >= 1");
  raw_.assign(static_cast<size_t>(width) * height, 0);
}

void OccupancyGrid::setOccupied(int ix, int iy, bool occ) {
  if (finalized_) throw std::logic_error("grid already finalized");
  if (!cellInBounds(ix, iy)) throw std::out_of_range("cell out of bounds");
  raw_[index(ix, iy)] = occ ? 1 : 0;
}

void OccupancyGrid::fillRect(const Vec2 &lo, const Vec2 &hi) {
  const Eigen::Vector2i c0 = worldToCell(lo), c1 = worldToCell(hi);
  for (int iy = std::max(0, c0.y()); iy <= std::min(height_ - 1, c1.y()); ++iy)
    for (int ix = std::max(0, c0.x()); ix <= std::min(width_ - 1, c1.x()); ++ix)
      setOccupied(ix, iy);
}

void OccupancyGrid::fillBorder() {
  for (int ix = 0; ix < width_; ++ix) {
    setOccupied(ix, 0);
    setOccupied(ix, height_ - 1);
  }
  for (int iy = 0; iy < height_; ++iy) {
    setOccupied(0, iy);
    setOccupied(width_ - 1, iy);
  }
}

void OccupancyGrid::finalize() {
  if (finalized_) return;
  inflated_ = raw_;
  const int r_cells =
      static_cast<int>(std::floor(inflation_radius_ / resolution_ + 1e-9));
  if (r_cells > 0) {
    // center-to-center disc mask
    std::vector<Eigen::Vector2i> mask;
    for (int dy = -r_cells; dy <= r_cells; ++dy)
      for (int dx = -r_cells; dx <= r_cells; ++dx)
        if (std::hypot(dx * resolution_, dy * resolution_) <=
            inflation_radius_ + 1e-9)
          mask.emplace_back(dx, dy);
    for (int iy = 0; iy < height_; ++iy)
      for (int ix = 0; ix < width_; ++ix) {
        if (!raw_[index(ix, iy)]) continue;
        for (const auto &d : mask) {
          const int jx = ix + d.x(), jy = iy + d.y();
          if (cellInBounds(jx, jy)) inflated_[index(jx, jy)] = 1;
        }
      }
  }
  finalized_ = true;
}

void OccupancyGrid::requireFinalized() const {
  if (!finalized_) throw std::logic_error("grid not finalized");
}

bool OccupancyGrid::inBounds(const Vec2 &p) const {
  const Vec2 rel = p - origin_;
  return rel.x() >= 0.0 && rel.y() >= 0.0 &&
         rel.x() < width_ * resolution_ && rel.y() < height_ * resolution_;
}

Eigen::Vector2i OccupancyGrid::worldToCell(const Vec2 &p) const {
  const Vec2 rel = (p - origin_) / resolution_;
  return Eigen::Vector2i(static_cast<int>(std::floor(rel.x())),
                         static_cast<int>(std::floor(rel.y())));
}

Vec2 OccupancyGrid::cellCenter(int ix, int iy) const {
  return origin_ + resolution_ * Vec2(ix + 0.5, iy + 0.5);
}

bool OccupancyGrid::rawOccupied(int ix, int iy) const {
  return cellInBounds(ix, iy) && raw_[index(ix, iy)] != 0;
}

bool OccupancyGrid::inflatedOccupied(int ix, int iy) const {
  requireFinalized();
  return cellInBounds(ix, iy) && inflated_[index(ix, iy)] != 0;
}

bool OccupancyGrid::occupied(const Vec2 &p) const {
  const Eigen::Vector2i c = worldToCell(p);
  return inflatedOccupied(c.x(), c.y());
}

void OccupancyGrid::traverseSupercover(
    const Vec2 &a, const Vec2 &b,
    const std::function<bool(int, int, double)> &visit) const {
  const Vec2 d = b - a;
  const double len = d.norm();
  Eigen::Vector2i cell = worldToCell(a);
  if (!visit(cell.x(), cell.y(), 0.0)) return;
  if (len < 1e-12) return;

  const Vec2 dir = d / len;
  const int step_x = dir.x() > 0 ? 1 : (dir.x() < 0 ? -1 : 0);
  const int step_y = dir.y() > 0 ? 1 : (dir.y() < 0 ? -1 : 0);

  double t_max_x = kInf, t_max_y = kInf;
  const double t_delta_x =
      step_x != 0 ? resolution_ / std::abs(dir.x()) : kInf;
  const double t_delta_y =
      step_y != 0 ? resolution_ / std::abs(dir.y()) : kInf;
  if (step_x != 0) {
    const double next_bx =
        origin_.x() + (cell.x() + (step_x > 0 ? 1 : 0)) * resolution_;
    t_max_x = (next_bx - a.x()) / dir.x();
  }
  if (step_y != 0) {
    const double next_by =
        origin_.y() + (cell.y() + (step_y > 0 ? 1 : 0)) * resolution_;
    t_max_y = (next_by - a.y()) / dir.y();
  }

  const double corner_eps = 1e-12 * std::max(1.0, len);
  while (std::min(t_max_x, t_max_y) <= len + 1e-12) {
    if (std::abs(t_max_x - t_max_y) <= corner_eps) {
      // exact corner crossing: both side cells are touched
      const double t = t_max_x;
      if (!visit(cell.x() + step_x, cell.y(), t)) return;
      if (!visit(cell.x(), cell.y() + step_y, t)) return;
      cell.x() += step_x;
      cell.y() += step_y;
      t_max_x += t_delta_x;
      t_max_y += t_delta_y;
      if (!visit(cell.x(), cell.y(), t)) return;
    } else if (t_max_x < t_max_y) {
      const double t = t_max_x;
      cell.x() += step_x;
      t_max_x += t_delta_x;
      if (!visit(cell.x(), cell.y(), t)) return;
    } else {
      const double t = t_max_y;
      cell.y() += step_y;
      t_max_y += t_delta_y;
      if (!visit(cell.x(), cell.y(), t)) return;
    }
  }
}

double OccupancyGrid::raycast(const Vec2 &origin, const Vec2 &dir,
                              double max_range) const {
  requireFinalized();
  if (!inBounds(origin)) throw std::out_of_range("raycast origin out of bounds");
  const double n = dir.norm();
  if (n < 1e-12) throw std::invalid_argument("raycast direction is zero");
  const Vec2 u = dir / n;

  double hit = max_range;
  traverseSupercover(origin, origin + u * max_range,
                     [&](int ix, int iy, double t) {
                       if (!cellInBounds(ix, iy)) return true;
                       if (inflated_[index(ix, iy)]) {
                         hit = std::min(t, max_range);
                         return false;
                       }
                       return true;
                     });
  return std::clamp(hit, 0.0, max_range);
}

bool OccupancyGrid::lineOfSight(const Vec2 &a, const Vec2 &b) const {
  requireFinalized();
  if (!inBounds(a) || !inBounds(b))
    throw std::out_of_range("lineOfSight endpoint out of bounds");
  bool clear = true;
  traverseSupercover(a, b, [&](int ix, int iy, double) {
    if (inflatedOccupied(ix, iy)) {
      clear = false;
      return false;
    }
    return true;
  });
  return clear;
}

double OccupancyGrid::clearanceFan(const Vec2 &apex, const Vec2 &start_dir,
                                   FanSide side, double max_angle,
                                   double range) const {
  requireFinalized();
  if (!inBounds(apex)) throw std::out_of_range("fan apex out of bounds");
  if (range <= 0.0) return max_angle;
  const double n = start_dir.norm();
  if (n < 1e-12) throw std::invalid_argument("fan direction is zero");
  const Vec2 u = start_dir / n;
  const double sign = side == FanSide::Left ? 1.0 : -1.0;

  double theta_ok = -1.0;
  for (double alpha = 0.0;; alpha += kFanStep) {
    const bool last = alpha >= max_angle;
    const double a = last ? max_angle : alpha;
    if (raycast(apex, rotate(u, sign * a), range) < range - 1e-9)
      return std::max(theta_ok, 0.0);
    theta_ok = a;
    if (last) break;
  }
  return theta_ok;
}

OccupancyGrid OccupancyGrid::load(const std::string &path,
                                  double inflation_radius) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open map file: " + path);
  double resolution = 0.0;
  int width = 0, height = 0;
  Vec2 origin = Vec2::Zero();
  std::string key;
  for (int i = 0; i < 4; ++i) {
    if (!(in >> key)) throw std::runtime_error("truncated map header: " + path);
    if (key == "resolution") {
      in >> resolution;
    } else if (key == "width") {
      in >> width;
    } else if (key == "height") {
      in >> height;
    } else if (key == "origin") {
      in >> origin.x() >> origin.y();
    } else {
      throw std::runtime_error("unknown map header key '" + key + "' in " +
                               path);
    }
  }
  if (!in) throw std::runtime_error("malformed map header: " + path);
  OccupancyGrid grid(resolution, width, height, origin, inflation_radius);
  std::string line;
  std::getline(in, line);  // consume header newline
  for (int iy = 0; iy < height; ++iy) {
    if (!std::getline(in, line))
      throw std::runtime_error("truncated map raster: " + path);
    if (static_cast<int>(line.size()) < width)
      throw std::runtime_error("short raster row in " + path);
    for (int ix = 0; ix < width; ++ix) {
      const char c = line[ix];
      if (c == '1')
        grid.setOccupied(ix, iy);
      else if (c != '0')
        throw std::runtime_error("invalid raster character in " + path);
    }
  }
  grid.finalize();
  return grid;
}

void OccupancyGrid::save(const std::string &path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write map file: " + path);
  out << "resolution " << resolution_ << "\n";
  out << "width " << width_ << "\n";
  out << "height " << height_ << "\n";
  out << "origin " << origin_.x() << " " << origin_.y() << "\n";
  for (int iy = 0; iy < height_; ++iy) {
    for (int ix = 0; ix < width_; ++ix)
      out << (raw_[index(ix, iy)] ? '1' : '0');
    out << "\n";
  }
}

}  // namespace itrack
