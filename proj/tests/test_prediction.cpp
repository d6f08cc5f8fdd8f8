#include <cmath>
#include <random>

#include "doctest.h"
#include "itrack/prediction.hpp"

using namespace itrack;

namespace {

// Quadrature oracle for one primitive step: integrates the velocity law
// numerically instead of reusing the closed-form displacement.
Vec2 integratedDisplacement(const MotionState &s, Intention intention,
                            double dt, double param) {
  const int n = 4000;
  const double h = dt / n;
  Vec2 disp = Vec2::Zero();
  for (int i = 0; i < n; ++i) {
    const double t = (i + 0.5) * h;  // midpoint rule
    Vec2 v;
    switch (intention) {
      case Intention::Cv:
        v = s.v;
        break;
      case Intention::Tl:
        v = rotate(s.v, param * t);
        break;
      case Intention::Tr:
        v = rotate(s.v, -param * t);
        break;
      case Intention::Dec: {
        const double speed = s.v.norm();
        const double sp = std::max(0.0, speed + param * t);
        v = speed > 0.0 ? Vec2(s.v / speed * sp) : Vec2::Zero();
        break;
      }
    }
    disp += v * h;
  }
  return disp;
}

OccupancyGrid emptyMap() {
  OccupancyGrid g(0.5, 40, 40, Vec2(-10.0, -10.0), 0.0);
  g.fillBorder();
  g.finalize();
  return g;
}

}  // namespace

TEST_CASE("primitive steps match numerical integration of their velocity laws") {
  std::mt19937_64 rng(501);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    MotionState s;
    s.p = Vec2(uni(rng) * 4.0 - 2.0, uni(rng) * 4.0 - 2.0);
    const double speed = uni(rng) * 3.0;
    s.v = speed * unitFromAngle((uni(rng) * 2.0 - 1.0) * M_PI);
    const double dt = 0.05 + uni(rng) * 0.45;

    const auto kind = static_cast<Intention>(i % 4);
    double param = 0.0;
    if (kind == Intention::Tl || kind == Intention::Tr) {
      param = 0.3 + uni(rng) * 2.0;
    } else if (kind == Intention::Dec) {
      param = -(0.5 + uni(rng) * 3.0);
    }

    const MotionState out = stepModel(s, kind, dt, param);
    const Vec2 oracle = s.p + integratedDisplacement(s, kind, dt, param);
    REQUIRE((out.p - oracle).norm() < 1e-6);

    switch (kind) {
      case Intention::Cv:
        REQUIRE((out.v - s.v).norm() == 0.0);
        break;
      case Intention::Tl:
        REQUIRE(out.v.norm() == doctest::Approx(speed).epsilon(1e-12));
        if (speed > 1e-9) {
          REQUIRE(std::abs(wrapPi(angleOf(out.v) - angleOf(s.v) -
                                  param * dt)) < 1e-9);
        }
        break;
      case Intention::Tr:
        if (speed > 1e-9) {
          REQUIRE(std::abs(wrapPi(angleOf(out.v) - angleOf(s.v) +
                                  param * dt)) < 1e-9);
        }
        break;
      case Intention::Dec:
        REQUIRE(out.v.norm() ==
                doctest::Approx(std::max(0.0, speed + param * dt))
                    .epsilon(1e-9));
        break;
    }
  }
}

TEST_CASE("primitive step argument guards") {
  MotionState s;
  s.v = Vec2(1.0, 0.0);
  CHECK_THROWS_AS(stepModel(s, Intention::Cv, 0.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(stepModel(s, Intention::Tl, 0.25, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(stepModel(s, Intention::Dec, 0.25, 0.5), std::invalid_argument);

  // Deceleration from rest holds position.
  MotionState stopped;
  stopped.p = Vec2(1.0, 2.0);
  const MotionState held = stepModel(stopped, Intention::Dec, 0.25, -2.0);
  CHECK((held.p - stopped.p).norm() == 0.0);
  CHECK(held.v.norm() == 0.0);

  // Stop happening mid-step: the remaining time adds no displacement.
  MotionState slow;
  slow.v = Vec2(0.4, 0.0);
  const MotionState s2 = stepModel(slow, Intention::Dec, 0.5, -2.0);
  CHECK(s2.v.norm() == 0.0);
  CHECK(s2.p.x() == doctest::Approx(0.5 * 0.4 * 0.2).epsilon(1e-12));
}

TEST_CASE("transition cost reads the penalty matrix through one-hot vectors") {
  PenaltyMatrix pen;
  for (int i = 0; i < kNumIntentions; ++i) {
    for (int j = 0; j < kNumIntentions; ++j) {
      Vec4 a = Vec4::Zero(), b = Vec4::Zero();
      a[i] = 1.0;
      b[j] = 1.0;
      REQUIRE(transitionCost(a, b, pen) == pen.m(i, j));
    }
  }
  Vec4 bad = Vec4::Zero();
  CHECK_THROWS_AS(transitionCost(bad, bad, pen), std::invalid_argument);
  bad[0] = 0.5;
  bad[1] = 0.5;
  Vec4 hot = Vec4::Zero();
  hot[0] = 1.0;
  CHECK_THROWS_AS(transitionCost(bad, hot, pen), std::invalid_argument);
}

TEST_CASE("default penalty matrix structure and validation") {
  PenaltyMatrix pen;
  pen.validate();
  for (int i = 0; i < kNumIntentions; ++i) {
    CHECK(pen.m(i, i) == 0.0);
    for (int j = 0; j < kNumIntentions; ++j) {
      if (i != j) CHECK(pen.m(i, j) > 0.0);
    }
  }
  // Direct turn reversals are the most expensive switch.
  CHECK(pen.cost(Intention::Tl, Intention::Tr) == 2.0);
  CHECK(pen.cost(Intention::Tr, Intention::Tl) == 2.0);
  CHECK(pen.cost(Intention::Cv, Intention::Dec) == 1.0);

  PenaltyMatrix bad = pen;
  bad.m(1, 1) = 0.5;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = pen;
  bad.m(0, 1) = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("model parameter validation") {
  IntentionModelParams p;
  CHECK(p.depth() == 8);
  p.validate();

  IntentionModelParams bad = p;
  bad.horizon = 1.9;  // not a multiple of dt_exp
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = p;
  bad.turn_rates = {1.0, 2.0};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);  // size mismatch
  bad = p;
  bad.turn_rates = {-1.0, 1.0, 2.0};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = p;
  bad.decel_values = {1.0, -2.0, -3.0};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = p;
  bad.n_samples = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("constant-velocity-only mode yields straight-line samples") {
  const OccupancyGrid map = emptyMap();
  IntentionModelParams params;
  params.cv_only = true;
  MotionState x0;
  x0.p = Vec2(0.0, 0.0);
  x0.v = Vec2(1.2, 0.4);
  const PredictionResult res =
      predictMotionDetailed(x0, Intention::Cv, map, params, PenaltyMatrix{});
  REQUIRE(res.complete);
  REQUIRE(static_cast<int>(res.track.z.size()) == params.n_samples);
  for (int k = 0; k < params.n_samples; ++k) {
    const double t = params.horizon * (k + 1) / params.n_samples;
    REQUIRE((res.track.z[k] - (x0.p + x0.v * t)).norm() < 1e-9);
    REQUIRE(res.track.intents[k] == Intention::Cv);
  }
  CHECK(res.cost == doctest::Approx(0.0));  // no switches, endpoint on the ray
  CHECK(res.seq_code == 0);
  for (const PredictionStep &s : res.steps) CHECK(s.intention == Intention::Cv);
}

TEST_CASE("track sampling covers the horizon with increasing stamps") {
  const OccupancyGrid map = emptyMap();
  IntentionModelParams params;
  MotionState x0;
  x0.p = Vec2(-2.0, 1.0);
  x0.v = Vec2(0.8, -0.3);
  const PredictedTrack track =
      predictMotion(x0, Intention::Cv, map, params, PenaltyMatrix{});
  REQUIRE(static_cast<int>(track.stamps.size()) == params.n_samples);
  REQUIRE(track.z.size() == track.stamps.size());
  REQUIRE(track.intents.size() == track.stamps.size());
  for (size_t i = 1; i < track.stamps.size(); ++i) {
    REQUIRE(track.stamps[i] > track.stamps[i - 1]);
  }
  CHECK(track.stamps.back() == params.horizon);
}

TEST_CASE("start speed is clamped to the model cap") {
  const OccupancyGrid map = emptyMap();
  IntentionModelParams params;
  MotionState x0;
  x0.v = Vec2(30.0, 0.0);  // far beyond speed_cap
  const PredictionResult res =
      predictMotionDetailed(x0, Intention::Cv, map, params, PenaltyMatrix{});
  CHECK(res.start.v.norm() == doctest::Approx(params.speed_cap).epsilon(1e-12));
  CHECK(res.track.z.back().x() <=
        x0.p.x() + params.speed_cap * params.horizon + 1e-9);
}

TEST_CASE("search from a blocked start throws; a sealed pocket truncates") {
  OccupancyGrid g(0.1, 60, 60, Vec2(0.0, 0.0), 0.0);
  g.fillRect(Vec2(2.0, 2.0), Vec2(4.0, 4.0));
  g.fillBorder();
  g.finalize();
  IntentionModelParams params;
  MotionState inside;
  inside.p = Vec2(3.0, 3.0);
  inside.v = Vec2(1.0, 0.0);
  CHECK_THROWS_AS(
      predictMotionDetailed(inside, Intention::Cv, g, params, PenaltyMatrix{}),
      std::runtime_error);

  // A free cell ringed by walls: every primitive child lands in an obstacle,
  // so the search cannot reach the horizon and holds the start state.
  OccupancyGrid ring(0.1, 60, 60, Vec2(0.0, 0.0), 0.0);
  for (int ix = 0; ix < 60; ++ix) {
    for (int iy = 0; iy < 60; ++iy) {
      const Vec2 c = ring.cellCenter(ix, iy);
      const double d = (c - Vec2(3.0, 3.0)).norm();
      if (d > 0.12 && d < 0.8) ring.setOccupied(ix, iy);
    }
  }
  ring.fillBorder();
  ring.finalize();
  MotionState pinned;
  pinned.p = Vec2(3.05, 3.05);
  pinned.v = Vec2(2.0, 0.0);
  REQUIRE(ring.free(pinned.p));
  const PredictionResult res = predictMotionDetailed(pinned, Intention::Cv,
                                                     ring, params,
                                                     PenaltyMatrix{});
  CHECK_FALSE(res.complete);
  for (const Vec2 &z : res.track.z) {
    CHECK((z - pinned.p).norm() < 0.6);  // held at/near the pocket
  }
}

TEST_CASE("best-first search equals exhaustive enumeration on random maps") {
  std::mt19937_64 rng(502);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  int compared = 0;
  int trial = 0;
  while (compared < 40) {
    ++trial;
    OccupancyGrid g(0.5, 20, 20, Vec2(0.0, 0.0), 0.3);
    const int n_rects = 2 + static_cast<int>(uni(rng) * 4.0);
    for (int r = 0; r < n_rects; ++r) {
      const double x = uni(rng) * 8.0, y = uni(rng) * 8.0;
      g.fillRect(Vec2(x, y),
                 Vec2(std::min(x + 0.5 + uni(rng) * 2.0, 9.9),
                      std::min(y + 0.5 + uni(rng) * 2.0, 9.9)));
    }
    g.fillBorder();
    g.finalize();

    MotionState x0;
    bool found = false;
    for (int tries = 0; tries < 50 && !found; ++tries) {
      x0.p = Vec2(1.0 + uni(rng) * 8.0, 1.0 + uni(rng) * 8.0);
      found = g.free(x0.p);
    }
    if (!found) continue;
    x0.v = (0.5 + uni(rng) * 2.5) * unitFromAngle(uni(rng) * 2.0 * M_PI);
    const auto i0 = static_cast<Intention>(trial % kNumIntentions);

    IntentionModelParams params;
    params.turn_rates = {1.2};
    params.decel_values = {-2.0};
    params.dt_exp = 0.5;
    const int depth = 2 + trial % 3;
    params.horizon = 0.5 * depth;
    params.n_samples = depth;

    const PredictionResult a =
        predictMotionDetailed(x0, i0, g, params, PenaltyMatrix{});
    const PredictionResult b =
        enumerateMotionOracle(x0, i0, g, params, PenaltyMatrix{});
    if (!a.complete || !b.complete) continue;  // no full-depth chain exists

    REQUIRE(a.cost == b.cost);
    REQUIRE(a.seq_code == b.seq_code);
    REQUIRE(a.track.z.size() == b.track.z.size());
    for (size_t i = 0; i < a.track.z.size(); ++i) {
      REQUIRE(a.track.z[i] == b.track.z[i]);
    }
    REQUIRE(a.steps.size() == b.steps.size());
    for (size_t i = 0; i < a.steps.size(); ++i) {
      REQUIRE(a.steps[i].intention == b.steps[i].intention);
      REQUIRE(a.steps[i].param == b.steps[i].param);
    }
    ++compared;
  }
}

TEST_CASE("equal-cost sequences resolve to the lower expansion code") {
  // Empty map, start moving +x: the mirrored chains turn-left-then-right and
  // turn-right-then-left have identical transition cost and endpoints at the
  // same distance from the anchor. The winner must be the one whose slot
  // sequence is lexicographically smaller, i.e. the left-first chain.
  const OccupancyGrid map = emptyMap();
  IntentionModelParams params;
  params.turn_rates = {1.0};
  params.decel_values = {-1.0};
  params.dt_exp = 0.5;
  params.horizon = 1.0;
  params.n_samples = 2;
  MotionState x0;
  x0.v = Vec2(1.5, 0.0);

  const PredictionResult search =
      predictMotionDetailed(x0, Intention::Cv, map, params, PenaltyMatrix{});
  const PredictionResult oracle =
      enumerateMotionOracle(x0, Intention::Cv, map, params, PenaltyMatrix{});
  REQUIRE(search.cost == oracle.cost);
  REQUIRE(search.seq_code == oracle.seq_code);
  // Both must prefer the pure constant-velocity chain here (zero switch
  // cost, endpoint exactly on the anchor), which is the all-zeros code.
  CHECK(search.seq_code == 0);

  // Now force a genuine tie. A wall dead ahead (symmetric about the travel
  // axis at cell level) blocks the straight and braking chains, leaving the
  // two one-step turn chains: equal switch cost, endpoints mirrored about
  // the anchor ray, so their costs agree bit-for-bit. The winner must be
  // the left turn, whose expansion slot comes first.
  OccupancyGrid walled(0.1, 100, 100, Vec2(0.0, 0.0), 0.0);
  for (int ix = 59; ix <= 66; ++ix) {
    for (int iy = 48; iy <= 51; ++iy) walled.setOccupied(ix, iy);
  }
  walled.fillBorder();
  walled.finalize();
  IntentionModelParams one;
  one.turn_rates = {1.0};
  one.decel_values = {-1.0};
  one.dt_exp = 1.0;
  one.horizon = 1.0;
  one.n_samples = 1;
  MotionState mid;
  mid.p = Vec2(5.0, 5.0);  // on the wall's row-symmetry boundary
  mid.v = Vec2(1.5, 0.0);
  const PredictionResult ts =
      predictMotionDetailed(mid, Intention::Cv, walled, one, PenaltyMatrix{});
  const PredictionResult to =
      enumerateMotionOracle(mid, Intention::Cv, walled, one, PenaltyMatrix{});
  REQUIRE(ts.cost == to.cost);
  REQUIRE(ts.seq_code == to.seq_code);
  REQUIRE(ts.steps.size() == 1);
  CHECK(ts.steps[0].intention == Intention::Tl);
  CHECK(ts.seq_code == 1);  // slot order: cv, tl, tr, dec
}
