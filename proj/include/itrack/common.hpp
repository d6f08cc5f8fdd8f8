#ifndef ITRACK_COMMON_HPP
#define ITRACK_COMMON_HPP

#include <Eigen/Dense>
#include <cmath>
#include <limits>

namespace itrack {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat2 = Eigen::Matrix2d;
using Mat4 = Eigen::Matrix4d;

constexpr double kInf = std::numeric_limits<double>::infinity();

inline double deg2rad(double d) { return d * M_PI / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / M_PI; }

// Wraps an angle into [-pi, pi]. Idempotent on the closed interval.
inline double wrapPi(double a) {
  while (a > M_PI) a -= 2.0 * M_PI;
  while (a < -M_PI) a += 2.0 * M_PI;
  return a;
}

inline Vec2 rotate(const Vec2 &v, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return Vec2(c * v.x() - s * v.y(), s * v.x() + c * v.y());
}

inline double angleOf(const Vec2 &v) { return std::atan2(v.y(), v.x()); }

inline Vec2 unitFromAngle(double a) { return Vec2(std::cos(a), std::sin(a)); }

}  // namespace itrack

#endif
