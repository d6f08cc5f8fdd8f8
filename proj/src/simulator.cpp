#include "itrack/simulator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace itrack {
namespace {

double clampAbs(double x, double cap) { return std::clamp(x, -cap, cap); }

}  // namespace

Planner::Planner(const ScenarioConfig &cfg, const OccupancyGrid &map)
    : cfg_(cfg), map_(map), solver_(cfg.solverParams()) {}

Planner::Plan Planner::plan(const Mat23 &tracker_state,
                            const TargetEstimate &est,
                            const IntentionDistribution &dist,
                            double now) const {
  const bool blind = cfg_.intention_blind;

  MotionState x0;
  x0.p = est.position.head<2>();
  x0.v = est.velocity;
  IntentionModelParams pp = cfg_.prediction;
  pp.cv_only = blind;
  const PredictionResult pred =
      predictMotionDetailed(x0, dist.argmax, map_, pp, cfg_.penalty);
  const PredictedTrack &track = pred.track;
  const int np = static_cast<int>(track.z.size());

  const Vec2 tracker_p = tracker_state.col(0);
  const WaypointResult wp =
      occlusionFreeWaypoints(map_, track, tracker_p, cfg_.corridor);

  std::vector<Vec2> pts;
  pts.push_back(tracker_p);
  for (const Vec2 &s : wp.s) {
    if ((s - pts.back()).norm() > 1e-9) pts.push_back(s);
  }
  if (pts.size() < 2) pts.push_back(pts.front());  // hover in place
  pts = simplifyRoute(map_, pts);
  const CorridorResult cor = generateCorridor(map_, pts);

  // The ablation freezes the margin scaling, not the sectors themselves.
  CorridorParams sector_params = cfg_.corridor;
  if (blind) sector_params.theta_beta = 0.0;
  std::vector<Sector> visible(np);
  for (int k = 0; k < np; ++k) {
    const Vec2 hint = wp.s[k] - track.z[k];
    visible[k] = visibleRegion(map_, track.z[k], hint, sector_params);
  }

  OptProblem prob;
  prob.head = tracker_state;
  prob.corridors = cor.polytopes;
  prob.pieces_per_polytope = cfg_.corridor.pieces_per_polytope;
  prob.horizon = pp.horizon;
  prob.v_max = cfg_.trajopt.v_max;
  prob.a_max = cfg_.trajopt.a_max;
  prob.d0 = cfg_.corridor.d0;
  prob.d_u = cfg_.trajopt.d_tau;
  prob.d_l = blind ? cfg_.trajopt.d_tau
                   : decLowerTolerance(cfg_.trajopt.d_tau, dist.p(Intention::Dec));
  prob.corridor_margin = map_.resolution();
  prob.kappa = cfg_.trajopt.kappa;
  prob.weights = cfg_.trajopt.weights;
  prob.points.resize(np);
  for (int k = 0; k < np; ++k) {
    AbsolutePoint &ap = prob.points[k];
    ap.stamp = track.stamps[k];
    ap.v_hat = desiredVisibleRegion(visible[k], dist.p(Intention::Tl),
                                    dist.p(Intention::Tr), sector_params);
    ap.has_next = k + 1 < np;
    if (ap.has_next) ap.v_next = visible[k + 1];
  }

  Vec2 end_v = pred.steps.empty() ? est.velocity : pred.steps.back().state.v;
  const double end_speed = end_v.norm();
  if (end_speed > prob.v_max) end_v *= prob.v_max / end_speed;
  prob.tail.col(0) = cor.spine.back();
  prob.tail.col(1) = end_v;
  prob.tail.col(2) = Vec2::Zero();

  const int segs = static_cast<int>(cor.spine.size()) - 1;
  const int K = prob.pieces_per_polytope;
  const int pieces = segs * K;
  Eigen::Matrix2Xd q(2, pieces - 1);
  Eigen::VectorXd T(pieces);
  int col = 0;
  for (int i = 0; i < segs; ++i) {
    const Vec2 a = cor.spine[i];
    const Vec2 b = cor.spine[i + 1];
    const double len = (b - a).norm();
    for (int j = 0; j < K; ++j) T(i * K + j) = std::max(len / K, 1e-3);
    for (int j = 1; j <= K; ++j) {
      if (i == segs - 1 && j == K) break;  // tail boundary, not interior
      q.col(col++) = a + (static_cast<double>(j) / K) * (b - a);
    }
  }

  const OptimizeResult opt = optimizeTrajectory(q, T, prob, solver_);

  // Never hand the tracker a trajectory segment that exits known free space:
  // the flyable horizon ends one sample before the first violation. A plan
  // that violates almost immediately is useless and rejected outright.
  const double total = opt.trajectory.totalTime();
  double valid = total;
  for (double t = 0.0;; t += 0.01) {
    const bool last = t >= total;
    const Vec2 p = opt.trajectory.pos(last ? total : t);
    if (!map_.free(p)) {
      valid = std::max(t - 0.02, 0.0);
      break;
    }
    if (last) break;
  }
  if (valid < 0.25) {
    char buf[96];
    std::snprintf(buf, sizeof(buf),
                  "planned trajectory leaves free space within %.2f s", valid);
    throw std::runtime_error(buf);
  }

  Plan out;
  out.trajectory = opt.trajectory;
  out.t0 = now;
  out.valid_horizon = valid;
  out.track = track;
  out.cost = opt.cost;
  out.iterations = opt.iterations;
  out.converged = opt.converged;
  return out;
}

bool occlusionMetric(const OccupancyGrid &map, const Vec2 &tracker_p,
                     double tracker_yaw, const Vec2 &target_p,
                     const CameraConfig &camera) {
  const Vec2 d = target_p - tracker_p;
  const double range = d.norm();
  if (range > camera.range) return true;
  if (range > 1e-12) {
    const double bearing = wrapPi(angleOf(d) - tracker_yaw);
    if (std::abs(bearing) > 0.5 * camera.fov_h) return true;
  }
  return !map.lineOfSight(tracker_p, target_p);
}

RunResult runScenario(const Scenario &scenario, std::ostream *verbose) {
  const ScenarioConfig &cfg = scenario.config;
  const OccupancyGrid &map = scenario.map;

  const int base_hz = std::lcm(
      std::lcm(cfg.rates.perception_hz, cfg.rates.replan_hz),
      cfg.rates.control_hz);
  const int perc_div = base_hz / cfg.rates.perception_hz;
  const int replan_div = base_hz / cfg.rates.replan_hz;
  const int control_div = base_hz / cfg.rates.control_hz;
  const double control_dt = 1.0 / cfg.rates.control_hz;

  const ScriptedTarget truth(cfg.target, cfg.duration, base_hz);
  std::mt19937_64 noise_rng(cfg.seed ^ 0xA5A5A5A5DEADBEEFull);
  std::normal_distribution<double> gauss(0.0, 1.0);
  TargetTracker filter(cfg.filter);
  IntentionEstimator intent_est(cfg.intention);
  const Planner planner(cfg, map);
  const IntentionDistribution fixed =
      IntentionEstimator::cvFixedPoint(cfg.intention);

  Vec2 tracker_p = cfg.tracker_start;
  Vec2 tracker_v = Vec2::Zero();
  double yaw = cfg.tracker_yaw;
  std::optional<Planner::Plan> plan;
  std::optional<TargetEstimate> est;
  IntentionDistribution dist = fixed;
  bool last_plan_failed = false;
  bool just_replanned = false;

  RunResult result;
  std::vector<double> latencies;

  for (int i = 0; i < truth.ticks(); ++i) {
    const double t = truth.tickTime(i);

    if (i % perc_div == 0) {
      LandmarkSet lm = makeLandmarks(truth.position(i), truth.bodyHeading(i),
                                     cfg.shoulder_width, cfg.hip_width);
      for (Vec3 *p : {&lm.left_shoulder, &lm.right_shoulder, &lm.left_hip,
                      &lm.right_hip}) {
        for (int c = 0; c < 3; ++c) (*p)(c) += cfg.sigma_lm * gauss(noise_rng);
      }
      est = filter.update(lm, t);
      dist = intent_est.update(map, *est);
    }

    just_replanned = false;
    if (i % replan_div == 0 && est) {
      Mat23 state = Mat23::Zero();
      if (plan) {
        const double end = plan->valid_horizon;
        const double tau = std::clamp(t - plan->t0, 0.0, end);
        state.col(0) = plan->trajectory.pos(tau);
        if (tau < end) {
          state.col(1) = plan->trajectory.vel(tau);
          state.col(2) = plan->trajectory.acc(tau);
        }
      } else {
        state.col(0) = tracker_p;
      }
      const IntentionDistribution &use = cfg.intention_blind ? fixed : dist;
      const auto wall0 = std::chrono::steady_clock::now();
      try {
        plan = planner.plan(state, *est, use, t);
        last_plan_failed = false;
        just_replanned = true;
      } catch (const std::exception &e) {
        last_plan_failed = true;
        if (verbose)
          *verbose << "t=" << t << " replan failed: " << e.what() << "\n";
      }
      const double ms =
          std::chrono::duration<double, std::milli>(
              std::chrono::steady_clock::now() - wall0)
              .count();
      latencies.push_back(ms);
      if (verbose && just_replanned) {
        *verbose << "t=" << t << " plan cost=" << plan->cost
                 << " iters=" << plan->iterations << " (" << ms << " ms)\n";
      }
    }

    if (i % control_div == 0) {
      if (plan) {
        const double end = plan->valid_horizon;
        const double tau = std::clamp(t - plan->t0, 0.0, end);
        tracker_p = plan->trajectory.pos(tau);
        tracker_v = tau < end ? Vec2(plan->trajectory.vel(tau)) : Vec2::Zero();
      }
      Vec2 aim = est ? Vec2(est->position.head<2>()) : tracker_p;
      if (plan && !plan->track.z.empty()) aim = plan->track.z.front();
      if ((aim - tracker_p).norm() > 1e-9) {
        const double desired = angleOf(aim - tracker_p);
        yaw = wrapPi(yaw + clampAbs(wrapPi(desired - yaw),
                                    cfg.camera.yaw_rate_max * control_dt));
      }

      const Vec2 tgt = truth.position(i);
      const auto tgt_cell = map.worldToCell(tgt);
      if (map.rawOccupied(tgt_cell.x(), tgt_cell.y()))
        throw std::runtime_error("target entered an obstacle");
      const auto trk_cell = map.worldToCell(tracker_p);
      if (map.inflatedOccupied(trk_cell.x(), trk_cell.y()))
        throw std::runtime_error("tracker entered an inflated obstacle cell");

      TraceRow row;
      row.time = t;
      row.target_p = tgt;
      row.target_v = truth.velocity(i);
      row.target_heading = truth.heading(i);
      row.tracker_p = tracker_p;
      row.tracker_v = tracker_v;
      row.tracker_yaw = yaw;
      const IntentionDistribution &rec = cfg.intention_blind ? fixed : dist;
      for (int k = 0; k < kNumIntentions; ++k) row.intent_prob(k) = rec.prob[k];
      row.pred.assign(cfg.prediction.n_samples, Vec2::Zero());
      if (plan) {
        for (std::size_t k = 0; k < plan->track.z.size(); ++k)
          row.pred[k] = plan->track.z[k];
      }
      row.occluded = occlusionMetric(map, tracker_p, yaw, tgt, cfg.camera);
      row.dist_xy = (tgt - tracker_p).norm();
      row.replanned = just_replanned;
      row.plan_failed = last_plan_failed;
      row.maneuver = truth.maneuvering(i);
      row.latency_ms = latencies.empty() ? 0.0 : latencies.back();
      result.rows.push_back(std::move(row));
    }
  }

  result.summary = summarizeRows(result.rows);
  result.summary.name = cfg.name;
  result.summary.seed = cfg.seed;
  result.summary.intention_blind = cfg.intention_blind;
  result.summary.duration = cfg.duration;
  if (!latencies.empty()) {
    result.summary.latency_mean_ms =
        std::accumulate(latencies.begin(), latencies.end(), 0.0) /
        static_cast<double>(latencies.size());
    result.summary.latency_max_ms =
        *std::max_element(latencies.begin(), latencies.end());
  }
  return result;
}

RunSummary summarizeRows(const std::vector<TraceRow> &rows) {
  RunSummary s;
  s.rows = static_cast<int>(rows.size());
  if (rows.empty()) return s;
  s.duration = rows.back().time - rows.front().time;
  double occ = 0.0, dsum = 0.0;
  s.dist_min = kInf;
  s.dist_max = -kInf;
  for (const TraceRow &r : rows) {
    occ += r.occluded ? 1.0 : 0.0;
    dsum += r.dist_xy;
    s.dist_min = std::min(s.dist_min, r.dist_xy);
    s.dist_max = std::max(s.dist_max, r.dist_xy);
    s.replans += r.replanned ? 1 : 0;
  }
  // Count failure episodes, not rows spent in one.
  bool prev_failed = false;
  for (const TraceRow &r : rows) {
    if (r.plan_failed && !prev_failed) ++s.failed_replans;
    prev_failed = r.plan_failed;
  }
  s.occlusion_fraction = occ / static_cast<double>(rows.size());
  s.dist_mean = dsum / static_cast<double>(rows.size());
  return s;
}

void writeTrace(const std::string &path, const std::vector<TraceRow> &rows) {
  std::FILE *f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("cannot write trace: " + path);
  const int np = rows.empty() ? 0 : static_cast<int>(rows.front().pred.size());
  std::fputs(
      "time,tgt_px,tgt_py,tgt_vx,tgt_vy,tgt_heading,"
      "trk_px,trk_py,trk_vx,trk_vy,trk_yaw,p_cv,p_tl,p_tr,p_dec",
      f);
  for (int k = 1; k <= np; ++k) std::fprintf(f, ",pred%d_x,pred%d_y", k, k);
  std::fputs(",occluded,dist_xy,replanned,plan_failed,maneuver\n", f);
  for (const TraceRow &r : rows) {
    std::fprintf(f, "%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f",
                 r.time, r.target_p.x(), r.target_p.y(), r.target_v.x(),
                 r.target_v.y(), r.target_heading, r.tracker_p.x(),
                 r.tracker_p.y(), r.tracker_v.x(), r.tracker_v.y(),
                 r.tracker_yaw);
    std::fprintf(f, ",%.6f,%.6f,%.6f,%.6f", r.intent_prob(0), r.intent_prob(1),
                 r.intent_prob(2), r.intent_prob(3));
    for (const Vec2 &z : r.pred)
      std::fprintf(f, ",%.6f,%.6f", z.x(), z.y());
    std::fprintf(f, ",%d,%.6f,%d,%d,%d\n", r.occluded ? 1 : 0, r.dist_xy,
                 r.replanned ? 1 : 0, r.plan_failed ? 1 : 0,
                 r.maneuver ? 1 : 0);
  }
  std::fclose(f);
}

std::vector<TraceRow> readTrace(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read trace: " + path);
  std::string header;
  if (!std::getline(in, header))
    throw std::runtime_error("empty trace: " + path);
  int columns = 1;
  for (char c : header) columns += c == ',' ? 1 : 0;
  const int np = (columns - 20) / 2;
  if (np < 0 || columns != 20 + 2 * np)
    throw std::runtime_error("unrecognized trace header: " + path);

  std::vector<TraceRow> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> v;
    v.reserve(columns);
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) v.push_back(std::stod(item));
    if (static_cast<int>(v.size()) != columns)
      throw std::runtime_error("short trace row in " + path);
    TraceRow r;
    int c = 0;
    r.time = v[c++];
    r.target_p = Vec2(v[c], v[c + 1]); c += 2;
    r.target_v = Vec2(v[c], v[c + 1]); c += 2;
    r.target_heading = v[c++];
    r.tracker_p = Vec2(v[c], v[c + 1]); c += 2;
    r.tracker_v = Vec2(v[c], v[c + 1]); c += 2;
    r.tracker_yaw = v[c++];
    for (int k = 0; k < 4; ++k) r.intent_prob(k) = v[c++];
    r.pred.resize(np);
    for (int k = 0; k < np; ++k) {
      r.pred[k] = Vec2(v[c], v[c + 1]);
      c += 2;
    }
    r.occluded = v[c++] != 0.0;
    r.dist_xy = v[c++];
    r.replanned = v[c++] != 0.0;
    r.plan_failed = v[c++] != 0.0;
    r.maneuver = v[c++] != 0.0;
    rows.push_back(std::move(r));
  }
  return rows;
}

void printSummary(std::ostream &out, const RunSummary &s) {
  char buf[128];
  auto line = [&](const char *key, const std::string &val) {
    out << key << ": " << val << "\n";
  };
  auto num = [&](const char *key, double v) {
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    line(key, buf);
  };
  line("scenario", s.name);
  line("seed", std::to_string(s.seed));
  line("ablation", s.intention_blind ? "intention-blind" : "intention-aware");
  line("rows", std::to_string(s.rows));
  num("duration", s.duration);
  num("occlusion_fraction", s.occlusion_fraction);
  num("dist_min", s.dist_min);
  num("dist_mean", s.dist_mean);
  num("dist_max", s.dist_max);
  line("replans", std::to_string(s.replans));
  line("failed_replans", std::to_string(s.failed_replans));
  num("latency_mean_ms", s.latency_mean_ms);
  num("latency_max_ms", s.latency_max_ms);
}

void writeSummary(const std::string &path, const RunSummary &summary) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write summary: " + path);
  printSummary(out, summary);
}

}  // namespace itrack
