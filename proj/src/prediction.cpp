#include "itrack/prediction.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>
#include <unordered_map>

namespace itrack {

namespace {

struct Slot {
  Intention intention;
  double param;
};

// Expansion order doubles as the lexicographic tie-break on paths.
std::vector<Slot> buildSlots(const IntentionModelParams &params) {
  std::vector<Slot> slots;
  slots.push_back({Intention::Cv, 0.0});
  if (params.cv_only) return slots;
  for (double w : params.turn_rates) slots.push_back({Intention::Tl, w});
  for (double w : params.turn_rates) slots.push_back({Intention::Tr, w});
  for (double a : params.decel_values) slots.push_back({Intention::Dec, a});
  return slots;
}

bool childValid(const OccupancyGrid &map, const Vec2 &from, const Vec2 &to) {
  if (!map.free(to)) return false;
  return map.lineOfSight(from, to);
}

std::int64_t headingBucket(const Vec2 &v) {
  const double heading = v.squaredNorm() > 0.0 ? angleOf(v) : 0.0;
  constexpr double kBucket = M_PI / 6.0;  // 30 deg
  auto b = static_cast<std::int64_t>(std::floor((heading + M_PI) / kBucket));
  return std::min<std::int64_t>(b, 11);
}

std::uint64_t closedKey(const OccupancyGrid &map, const MotionState &s,
                        Intention intention, int depth) {
  const Eigen::Vector2i c = map.worldToCell(s.p);
  std::uint64_t key = static_cast<std::uint64_t>(c.x() & 0xffff);
  key = (key << 16) | static_cast<std::uint64_t>(c.y() & 0xffff);
  key = (key << 4) | static_cast<std::uint64_t>(headingBucket(s.v));
  key = (key << 2) | static_cast<std::uint64_t>(intention);
  key = (key << 5) | static_cast<std::uint64_t>(depth & 0x1f);
  return key;
}

struct Chain {
  std::vector<PredictionStep> steps;
  double g = 0.0;
  double cost = kInf;
  std::uint64_t seq_code = 0;
};

// Exact resampling of the winning chain at n_samples uniform stamps.
PredictionResult finishResult(const MotionState &x0, Chain chain,
                              bool complete,
                              const IntentionModelParams &params) {
  PredictionResult res;
  res.start = x0;
  res.steps = std::move(chain.steps);
  res.cost = chain.cost;
  res.seq_code = chain.seq_code;
  res.complete = complete;

  const int reached = static_cast<int>(res.steps.size());
  for (int k = 1; k <= params.n_samples; ++k) {
    const double t = params.horizon * k / params.n_samples;
    int j = static_cast<int>(std::ceil(t / params.dt_exp - 1e-9));
    j = std::max(j, 1);
    if (j > reached) {
      // Truncated search: hold the last reached state.
      const MotionState &last =
          reached > 0 ? res.steps.back().state : x0;
      res.track.z.push_back(last.p);
      res.track.intents.push_back(
          reached > 0 ? res.steps.back().intention : Intention::Dec);
    } else {
      const MotionState &base = j > 1 ? res.steps[j - 2].state : x0;
      const PredictionStep &step = res.steps[j - 1];
      const double local = t - (j - 1) * params.dt_exp;
      res.track.z.push_back(
          stepModel(base, step.intention, local, step.param).p);
      res.track.intents.push_back(step.intention);
    }
    res.track.stamps.push_back(t);
  }
  res.track.stamps.back() = params.horizon;
  return res;
}

}  // namespace

int IntentionModelParams::depth() const {
  const double steps = horizon / dt_exp;
  return static_cast<int>(std::lround(steps));
}

void IntentionModelParams::validate() const {
  if (dt_exp <= 0.0) throw std::invalid_argument("dt_exp must be positive");
  if (horizon <= 0.0) throw std::invalid_argument("horizon must be positive");
  const double steps = horizon / dt_exp;
  if (std::abs(steps - std::lround(steps)) > 1e-9) {
    throw std::invalid_argument("horizon must be a multiple of dt_exp");
  }
  if (depth() < 1 || depth() > 31) {
    throw std::invalid_argument("prediction depth out of range");
  }
  if (n_samples < 1) throw std::invalid_argument("n_samples must be >= 1");
  if (turn_rates.empty() || decel_values.empty()) {
    throw std::invalid_argument("primitive parameter sets must be nonempty");
  }
  if (turn_rates.size() != decel_values.size()) {
    throw std::invalid_argument("turn and deceleration sets must match in size");
  }
  for (double w : turn_rates) {
    if (w <= 0.0) throw std::invalid_argument("turn rates must be positive");
  }
  for (double a : decel_values) {
    if (a >= 0.0) {
      throw std::invalid_argument("deceleration values must be negative");
    }
  }
  if (w_h < 0.0) throw std::invalid_argument("w_h must be nonnegative");
  if (speed_cap <= 0.0) throw std::invalid_argument("speed cap must be positive");
}

Mat4 PenaltyMatrix::defaultMatrix() {
  Mat4 m = Mat4::Ones() - Mat4::Identity();
  m(static_cast<int>(Intention::Tl), static_cast<int>(Intention::Tr)) = 2.0;
  m(static_cast<int>(Intention::Tr), static_cast<int>(Intention::Tl)) = 2.0;
  return m;
}

void PenaltyMatrix::validate() const {
  for (int i = 0; i < kNumIntentions; ++i) {
    for (int j = 0; j < kNumIntentions; ++j) {
      if (i == j && m(i, j) != 0.0) {
        throw std::invalid_argument("penalty diagonal must be zero");
      }
      if (i != j && m(i, j) <= 0.0) {
        throw std::invalid_argument("off-diagonal penalties must be positive");
      }
    }
  }
}

MotionState stepModel(const MotionState &s, Intention intention, double dt,
                      double param) {
  if (dt <= 0.0) throw std::invalid_argument("step dt must be positive");
  MotionState out = s;
  switch (intention) {
    case Intention::Cv:
      out.p += s.v * dt;
      break;
    case Intention::Tl:
    case Intention::Tr: {
      if (param == 0.0) throw std::invalid_argument("turn rate must be nonzero");
      const double w = intention == Intention::Tl ? param : -param;
      const double c = std::cos(w * dt), sn = std::sin(w * dt);
      out.p.x() += (s.v.x() * sn + s.v.y() * (c - 1.0)) / w;
      out.p.y() += (s.v.x() * (1.0 - c) + s.v.y() * sn) / w;
      out.v = rotate(s.v, w * dt);
      break;
    }
    case Intention::Dec: {
      if (param >= 0.0) {
        throw std::invalid_argument("deceleration must oppose velocity");
      }
      const double speed = s.v.norm();
      if (speed <= 0.0) break;  // already stopped
      const Vec2 dir = s.v / speed;
      const double t_stop = speed / -param;
      if (t_stop <= dt) {
        out.p += dir * (0.5 * speed * t_stop);
        out.v.setZero();
      } else {
        out.p += dir * (speed * dt + 0.5 * param * dt * dt);
        out.v = dir * (speed + param * dt);
      }
      break;
    }
  }
  return out;
}

double transitionCost(const Vec4 &onehot_prev, const Vec4 &onehot_next,
                      const PenaltyMatrix &pen) {
  auto decode = [](const Vec4 &q) {
    int hot = -1;
    for (int i = 0; i < kNumIntentions; ++i) {
      if (q[i] == 1.0) {
        if (hot >= 0) throw std::invalid_argument("vector is not one-hot");
        hot = i;
      } else if (q[i] != 0.0) {
        throw std::invalid_argument("vector is not one-hot");
      }
    }
    if (hot < 0) throw std::invalid_argument("vector is not one-hot");
    return hot;
  };
  return pen.m(decode(onehot_prev), decode(onehot_next));
}

double heuristic(const Vec2 &p, const Vec2 &goal, double w_h) {
  return w_h * (p - goal).norm();
}

PredictionResult predictMotionDetailed(const MotionState &x0, Intention i0,
                                       const OccupancyGrid &map,
                                       const IntentionModelParams &params,
                                       const PenaltyMatrix &pen) {
  params.validate();
  pen.validate();
  if (!map.free(x0.p)) {
    throw std::runtime_error("prediction start is not in free space");
  }

  MotionState start = x0;
  const double speed0 = start.v.norm();
  if (speed0 > params.speed_cap) {
    start.v *= params.speed_cap / speed0;
  }

  const std::vector<Slot> slots = buildSlots(params);
  const auto base = static_cast<std::uint64_t>(slots.size());
  const int max_depth = params.depth();
  const Vec2 goal = start.p + start.v * params.horizon;
  // Per-step displacement never exceeds the (non-increasing) speed times
  // dt, so the heuristic can fall by at most this much per step.
  const double slack_per_step = params.w_h * start.v.norm() * params.dt_exp;

  struct Node {
    MotionState state;
    Intention intention;
    double param;
    double g, f;
    int depth;
    int parent;
    std::uint64_t seq;
  };
  std::vector<Node> arena;
  arena.push_back({start, i0, 0.0, 0.0,
                   heuristic(start.p, goal, params.w_h), 0, -1, 0});

  struct QueueEntry {
    double f;
    std::uint64_t seq;
    int index;
    bool operator>(const QueueEntry &o) const {
      if (f != o.f) return f > o.f;
      if (seq != o.seq) return seq > o.seq;
      return index > o.index;
    }
  };
  std::priority_queue<QueueEntry, std::vector<QueueEntry>,
                      std::greater<QueueEntry>>
      open;
  open.push({arena[0].f, 0, 0});

  std::unordered_map<std::uint64_t, bool> closed;
  int best_complete = -1;
  int best_partial = 0;
  int expansions = 0;

  auto betterComplete = [&](int cand) {
    if (best_complete < 0) return true;
    const Node &a = arena[cand], &b = arena[best_complete];
    if (a.f != b.f) return a.f < b.f;
    return a.seq < b.seq;
  };

  while (!open.empty()) {
    const QueueEntry top = open.top();
    open.pop();
    const Node node = arena[top.index];  // by value: arena may reallocate
    if (node.depth == max_depth) {
      if (betterComplete(top.index)) best_complete = top.index;
      continue;
    }
    if (best_complete >= 0) {
      const double bound =
          node.f - slack_per_step * (max_depth - node.depth);
      if (bound > arena[best_complete].f) continue;
    }
    const std::uint64_t key =
        closedKey(map, node.state, node.intention, node.depth);
    auto [it, inserted] = closed.emplace(key, true);
    if (!inserted) continue;

    {
      const Node &pb = arena[best_partial];
      if (node.depth > pb.depth ||
          (node.depth == pb.depth &&
           (node.f < pb.f || (node.f == pb.f && node.seq < pb.seq)))) {
        best_partial = top.index;
      }
    }

    if (++expansions > params.expansion_cap) break;

    for (std::size_t slot = 0; slot < slots.size(); ++slot) {
      const MotionState next =
          stepModel(node.state, slots[slot].intention, params.dt_exp,
                    slots[slot].param);
      if (!childValid(map, node.state.p, next.p)) continue;
      Node child;
      child.state = next;
      child.intention = slots[slot].intention;
      child.param = slots[slot].param;
      child.g = node.g + pen.cost(node.intention, child.intention);
      child.f = child.g + heuristic(next.p, goal, params.w_h);
      child.depth = node.depth + 1;
      child.parent = top.index;
      child.seq = node.seq * base + slot;
      if (child.depth < max_depth &&
          closed.count(closedKey(map, next, child.intention, child.depth))) {
        continue;
      }
      if (best_complete >= 0) {
        const double bound =
            child.f - slack_per_step * (max_depth - child.depth);
        if (bound > arena[best_complete].f) continue;
      }
      arena.push_back(child);
      open.push({child.f, child.seq, static_cast<int>(arena.size()) - 1});
    }
  }

  const bool complete = best_complete >= 0;
  const int leaf = complete ? best_complete : best_partial;
  Chain chain;
  chain.g = arena[leaf].g;
  chain.cost = arena[leaf].f;
  chain.seq_code = arena[leaf].seq;
  for (int i = leaf; arena[i].parent >= 0; i = arena[i].parent) {
    chain.steps.push_back({arena[i].state, arena[i].intention, arena[i].param});
  }
  std::reverse(chain.steps.begin(), chain.steps.end());
  return finishResult(start, std::move(chain), complete, params);
}

PredictedTrack predictMotion(const MotionState &x0, Intention i0,
                             const OccupancyGrid &map,
                             const IntentionModelParams &params,
                             const PenaltyMatrix &pen) {
  return predictMotionDetailed(x0, i0, map, params, pen).track;
}

PredictionResult enumerateMotionOracle(const MotionState &x0, Intention i0,
                                       const OccupancyGrid &map,
                                       const IntentionModelParams &params,
                                       const PenaltyMatrix &pen) {
  params.validate();
  pen.validate();
  if (!map.free(x0.p)) {
    throw std::runtime_error("prediction start is not in free space");
  }
  MotionState start = x0;
  const double speed0 = start.v.norm();
  if (speed0 > params.speed_cap) start.v *= params.speed_cap / speed0;

  const std::vector<Slot> slots = buildSlots(params);
  const auto base = static_cast<std::uint64_t>(slots.size());
  const int max_depth = params.depth();
  const Vec2 goal = start.p + start.v * params.horizon;

  Chain best;
  std::vector<PredictionStep> stack;
  std::function<void(const MotionState &, Intention, double, std::uint64_t)>
      recurse = [&](const MotionState &state, Intention intent, double g,
                    std::uint64_t seq) {
        if (static_cast<int>(stack.size()) == max_depth) {
          const double total = g + heuristic(state.p, goal, params.w_h);
          if (total < best.cost ||
              (total == best.cost && seq < best.seq_code)) {
            best.steps = stack;
            best.g = g;
            best.cost = total;
            best.seq_code = seq;
          }
          return;
        }
        for (std::size_t slot = 0; slot < slots.size(); ++slot) {
          const MotionState next = stepModel(state, slots[slot].intention,
                                             params.dt_exp, slots[slot].param);
          if (!childValid(map, state.p, next.p)) continue;
          stack.push_back({next, slots[slot].intention, slots[slot].param});
          recurse(next, slots[slot].intention,
                  g + pen.cost(intent, slots[slot].intention),
                  seq * base + slot);
          stack.pop_back();
        }
      };
  recurse(start, i0, 0.0, 0);

  if (best.steps.empty() && max_depth > 0 && !std::isfinite(best.cost)) {
    // No collision-free full-depth sequence exists; mirror the search's
    // truncated-track fallback by holding the start state.
    Chain held;
    held.cost = heuristic(start.p, goal, params.w_h);
    return finishResult(start, std::move(held), false, params);
  }
  return finishResult(start, std::move(best), true, params);
}

}  // namespace itrack
