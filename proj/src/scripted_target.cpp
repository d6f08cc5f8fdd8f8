#include "itrack/scripted_target.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace itrack {

namespace {

struct Primitive {
  bool is_arc = false;
  double s0 = 0.0;     // cumulative arclength at entry
  double length = 0.0;
  double limit = 0.0;  // speed limit while on this primitive
  // line
  Vec2 start = Vec2::Zero();
  Vec2 dir = Vec2(1.0, 0.0);
  // arc
  Vec2 center = Vec2::Zero();
  double radius = 0.0;
  double ang0 = 0.0;  // angle of entry point around the center
  double turn_sign = 1.0;

  Vec2 point(double s) const {
    const double u = s - s0;
    if (!is_arc) return start + dir * u;
    return center + radius * unitFromAngle(ang0 + turn_sign * u / radius);
  }
  double tangent(double s) const {
    if (!is_arc) return angleOf(dir);
    const double ang = ang0 + turn_sign * (s - s0) / radius;
    return wrapPi(ang + turn_sign * M_PI / 2.0);
  }
};

}  // namespace

LandmarkSet makeLandmarks(const Vec2 &pos, double body_heading,
                          double shoulder_width, double hip_width) {
  const Vec2 left = rotate(Vec2(0.0, 1.0), body_heading);  // body-left axis
  LandmarkSet lm;
  const Vec2 sh = pos + 0.5 * shoulder_width * left;
  const Vec2 sh2 = pos - 0.5 * shoulder_width * left;
  const Vec2 hp = pos + 0.5 * hip_width * left;
  const Vec2 hp2 = pos - 0.5 * hip_width * left;
  lm.left_shoulder = Vec3(sh.x(), sh.y(), kShoulderHeight);
  lm.right_shoulder = Vec3(sh2.x(), sh2.y(), kShoulderHeight);
  lm.left_hip = Vec3(hp.x(), hp.y(), kHipHeight);
  lm.right_hip = Vec3(hp2.x(), hp2.y(), kHipHeight);
  return lm;
}

ScriptedTarget::ScriptedTarget(const TargetScriptConfig &cfg, double duration,
                               int tick_hz)
    : tick_hz_(tick_hz) {
  if (cfg.path.size() < 2) throw std::invalid_argument("path needs >= 2 points");
  if (cfg.speed <= 0.0 || cfg.accel <= 0.0 || cfg.turn_rate <= 0.0) {
    throw std::invalid_argument("speed, accel, and turn_rate must be positive");
  }
  if (duration <= 0.0 || tick_hz < 1) {
    throw std::invalid_argument("duration and tick rate must be positive");
  }
  const int n_seg = static_cast<int>(cfg.path.size()) - 1;
  auto segSpeed = [&](int j) {
    if (!cfg.segment_speeds.empty()) {
      if (static_cast<int>(cfg.segment_speeds.size()) != n_seg) {
        throw std::invalid_argument("segment_speeds size must match segments");
      }
      return cfg.segment_speeds[j];
    }
    return cfg.speed;
  };

  // Corner fillets eat into the adjacent segments; track how much of each
  // segment remains as a straight run.
  std::vector<double> cut_head(n_seg, 0.0), cut_tail(n_seg, 0.0);
  struct Corner {
    bool present = false;
    double radius = 0.0, half = 0.0, speed = 0.0;
  };
  std::vector<Corner> corners(std::max(n_seg - 1, 0));
  for (int j = 0; j + 1 < n_seg; ++j) {
    const Vec2 u = (cfg.path[j + 1] - cfg.path[j]).normalized();
    const Vec2 w = (cfg.path[j + 2] - cfg.path[j + 1]).normalized();
    const double phi = wrapPi(angleOf(w) - angleOf(u));
    if (std::abs(phi) < 1e-6) continue;
    const double v_corner = std::min(segSpeed(j), segSpeed(j + 1));
    double radius = v_corner / cfg.turn_rate;
    double offset = radius * std::tan(std::abs(phi) / 2.0);
    const double room =
        0.45 * std::min((cfg.path[j + 1] - cfg.path[j]).norm(),
                        (cfg.path[j + 2] - cfg.path[j + 1]).norm());
    if (offset > room) {
      offset = room;
      radius = offset / std::tan(std::abs(phi) / 2.0);
    }
    corners[j] = {true, radius, std::abs(phi) / 2.0, v_corner};
    cut_tail[j] = offset;
    cut_head[j + 1] = offset;
  }

  std::vector<Primitive> prims;
  double s_acc = 0.0;
  for (int j = 0; j < n_seg; ++j) {
    const Vec2 a = cfg.path[j], b = cfg.path[j + 1];
    const Vec2 dir = (b - a).normalized();
    const double len = (b - a).norm() - cut_head[j] - cut_tail[j];
    if (len > 1e-9) {
      Primitive p;
      p.s0 = s_acc;
      p.length = len;
      p.limit = segSpeed(j);
      p.start = a + dir * cut_head[j];
      p.dir = dir;
      prims.push_back(p);
      s_acc += len;
    }
    if (j + 1 < n_seg && corners[j].present) {
      const Vec2 w = (cfg.path[j + 2] - b).normalized();
      const double phi = wrapPi(angleOf(w) - angleOf(dir));
      const double sign = phi > 0.0 ? 1.0 : -1.0;
      Primitive p;
      p.is_arc = true;
      p.s0 = s_acc;
      p.radius = corners[j].radius;
      p.length = p.radius * 2.0 * corners[j].half;
      p.limit = corners[j].speed;
      const Vec2 entry = b - dir * cut_tail[j];
      p.center = entry + corners[j].radius * rotate(dir, sign * M_PI / 2.0);
      p.ang0 = angleOf(entry - p.center);
      p.turn_sign = sign;
      prims.push_back(p);
      s_acc += p.length;
    }
  }
  if (prims.empty()) throw std::invalid_argument("degenerate path");
  total_length_ = s_acc;

  // Highest speed each primitive may END at so that all later limits and
  // the final stop stay reachable under the accel cap.
  const int np = static_cast<int>(prims.size());
  std::vector<double> exit_cap(np, 0.0);
  for (int i = np - 2; i >= 0; --i) {
    const double next = std::min(
        prims[i + 1].limit,
        std::sqrt(exit_cap[i + 1] * exit_cap[i + 1] +
                  2.0 * cfg.accel * prims[i + 1].length));
    exit_cap[i] = next;
  }

  const double dt = 1.0 / tick_hz_;
  const int n_ticks = static_cast<int>(std::lround(duration * tick_hz_)) + 1;
  pos_.reserve(n_ticks);

  double s = 0.0, v = 0.0;
  double last_heading = prims.front().tangent(0.0);
  enum class Mode { Normal, Braking, Holding };
  Mode mode = Mode::Normal;
  size_t stop_idx = 0;
  int prim_idx = 0;

  for (int i = 0; i < n_ticks; ++i) {
    while (prim_idx + 1 < np && s >= prims[prim_idx].s0 + prims[prim_idx].length) {
      ++prim_idx;
    }
    const Primitive &pr = prims[prim_idx];
    const double t = tickTime(i);

    if (mode == Mode::Normal && stop_idx < cfg.stops.size() &&
        t >= cfg.stops[stop_idx].first) {
      mode = Mode::Braking;
    }
    if (mode == Mode::Braking && v <= 1e-9) {
      v = 0.0;
      mode = Mode::Holding;
    }
    if (mode == Mode::Holding &&
        t >= cfg.stops[stop_idx].first + cfg.stops[stop_idx].second) {
      mode = Mode::Normal;
      ++stop_idx;
    }

    const double tangent = pr.tangent(std::min(s, total_length_));
    if (v > 1e-9) last_heading = tangent;
    pos_.push_back(pr.point(std::min(s, total_length_)));
    vel_.push_back(v * unitFromAngle(tangent));
    heading_.push_back(last_heading);
    const double lead_s = std::min(s + cfg.body_lead * v, total_length_);
    int lead_idx = prim_idx;
    while (lead_idx + 1 < np &&
           lead_s >= prims[lead_idx].s0 + prims[lead_idx].length) {
      ++lead_idx;
    }
    body_heading_.push_back(prims[lead_idx].tangent(lead_s));
    maneuvering_.push_back(pr.is_arc || mode != Mode::Normal ||
                           std::abs(v - pr.limit) > 0.02 * pr.limit);

    // advance
    double v_des;
    if (mode == Mode::Braking || mode == Mode::Holding) {
      v_des = 0.0;
    } else {
      const double remain = pr.s0 + pr.length - s;
      v_des = std::min(pr.limit,
                       std::sqrt(exit_cap[prim_idx] * exit_cap[prim_idx] +
                                 2.0 * cfg.accel * std::max(remain, 0.0)));
    }
    const double dv = std::clamp(v_des - v, -cfg.accel * dt, cfg.accel * dt);
    const double v_new = std::max(v + dv, 0.0);
    s += 0.5 * (v + v_new) * dt;
    v = v_new;
    if (s >= total_length_) {
      s = total_length_;
      v = 0.0;
    }
  }
}

}  // namespace itrack
