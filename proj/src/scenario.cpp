#include "itrack/scenario.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace itrack {
namespace {

constexpr int kTl = static_cast<int>(Intention::Tl);
constexpr int kTr = static_cast<int>(Intention::Tr);

std::string trim(const std::string &s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

[[noreturn]] void fail(int line, const std::string &msg) {
  throw std::runtime_error("config line " + std::to_string(line) + ": " + msg);
}

double parseDouble(const std::string &v, int line) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) fail(line, "trailing characters in number '" + v + "'");
    return x;
  } catch (const std::invalid_argument &) {
    fail(line, "expected a number, got '" + v + "'");
  } catch (const std::out_of_range &) {
    fail(line, "number out of range '" + v + "'");
  }
}

int parseInt(const std::string &v, int line) {
  const double x = parseDouble(v, line);
  const int i = static_cast<int>(std::llround(x));
  if (std::abs(x - i) > 1e-9) fail(line, "expected an integer, got '" + v + "'");
  return i;
}

std::uint64_t parseSeed(const std::string &v, int line) {
  try {
    std::size_t used = 0;
    const std::uint64_t x = std::stoull(v, &used);
    if (used != v.size()) fail(line, "trailing characters in seed '" + v + "'");
    return x;
  } catch (const std::exception &) {
    fail(line, "expected an unsigned integer, got '" + v + "'");
  }
}

std::vector<double> parseList(const std::string &v, int line) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) fail(line, "empty element in list '" + v + "'");
    out.push_back(parseDouble(item, line));
  }
  if (out.empty()) fail(line, "empty list");
  return out;
}

Vec2 parseVec2(const std::string &v, int line) {
  const auto xs = parseList(v, line);
  if (xs.size() != 2) fail(line, "expected 'x, y'");
  return Vec2(xs[0], xs[1]);
}

// "x,y; x,y; ..." with at least two vertices.
std::vector<Vec2> parsePath(const std::string &v, int line) {
  std::vector<Vec2> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ';')) {
    item = trim(item);
    if (item.empty()) continue;
    out.push_back(parseVec2(item, line));
  }
  if (out.size() < 2) fail(line, "path needs at least two vertices");
  return out;
}

// "start:hold; start:hold; ..."
std::vector<std::pair<double, double>> parseStops(const std::string &v,
                                                  int line) {
  std::vector<std::pair<double, double>> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ';')) {
    item = trim(item);
    if (item.empty()) continue;
    const auto colon = item.find(':');
    if (colon == std::string::npos) fail(line, "stop entry needs 'start:hold'");
    out.emplace_back(parseDouble(trim(item.substr(0, colon)), line),
                     parseDouble(trim(item.substr(colon + 1)), line));
  }
  return out;
}

bool parseOnOff(const std::string &v, int line) {
  if (v == "intention-aware" || v == "off" || v == "false") return false;
  if (v == "intention-blind" || v == "on" || v == "true") return true;
  fail(line, "expected intention-aware|intention-blind (or off|on), got '" + v + "'");
}

}  // namespace

void ScenarioConfig::validate() const {
  auto need = [](bool ok, const std::string &msg) {
    if (!ok) throw std::invalid_argument("scenario config: " + msg);
  };
  need(duration > 0.0, "duration must be positive");
  need(map.resolution > 0.0, "map resolution must be positive");
  need(map.inflation >= 0.0, "map inflation must be non-negative");
  need(map.file.empty() || map.generate.empty(),
       "map file and map generate are mutually exclusive");
  need(!map.file.empty() || !map.generate.empty(),
       "one of map file or map generate is required");
  need(target.speed > 0.0, "target speed must be positive");
  for (const double s : target.segment_speeds)
    need(s > 0.0, "segment speeds must be positive");
  need(target.accel > 0.0, "target accel must be positive");
  need(target.turn_rate > 0.0, "target turn_rate must be positive");
  need(target.body_lead >= 0.0, "target body_lead must be non-negative");
  for (const auto &ev : target.stops)
    need(ev.first >= 0.0 && ev.second > 0.0,
         "stop events need start >= 0, hold > 0");
  need(sigma_lm >= 0.0, "sigma_lm must be non-negative");
  need(filter.sigma_accel > 0.0 && filter.sigma_meas > 0.0,
       "filter noise parameters must be positive");
  need(shoulder_width > 0.0 && hip_width > 0.0, "body widths must be positive");
  need(camera.fov_h > 0.0 && camera.fov_h < 2.0 * M_PI, "camera fov_h out of range");
  need(camera.range > 0.0, "camera range must be positive");
  need(camera.yaw_rate_max > 0.0, "camera yaw_rate_max must be positive");
  need(rates.perception_hz > 0 && rates.replan_hz > 0 && rates.control_hz > 0,
       "rates must be positive");
  prediction.validate();
  penalty.validate();
  need(corridor.d0 > 0.0, "corridor d0 must be positive");
  need(corridor.pieces_per_polytope >= 1, "pieces_per_polytope must be >= 1");
  need(trajopt.d_tau > 0.0 && trajopt.d_tau < corridor.d0,
       "d_tau must lie in (0, d0)");
  need(trajopt.v_max > 0.0 && trajopt.a_max > 0.0, "motion limits must be positive");
  need(trajopt.kappa >= 2, "kappa must be >= 2");
  need(trajopt.max_iterations > 0, "max_iterations must be positive");
}

LbfgsParams ScenarioConfig::solverParams() const {
  LbfgsParams p;
  p.max_iterations = trajopt.max_iterations;
  p.grad_tolerance = trajopt.grad_tolerance;
  p.time_budget_ms = trajopt.budget_ms;
  return p;
}

ScenarioConfig loadScenarioConfig(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);

  ScenarioConfig cfg;
  std::string section;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(line_no, "malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      static const char *known[] = {"scenario", "map",        "target",
                                    "tracker",  "camera",     "rates",
                                    "filter",   "intention",  "prediction",
                                    "corridor", "trajopt"};
      bool ok = false;
      for (const char *k : known) ok = ok || section == k;
      if (!ok) fail(line_no, "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(line_no, "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty()) fail(line_no, "empty key");
    if (val.empty()) fail(line_no, "empty value for '" + key + "'");
    if (section.empty()) fail(line_no, "key '" + key + "' outside any section");

    if (section == "scenario") {
      if (key == "name") cfg.name = val;
      else if (key == "duration") cfg.duration = parseDouble(val, line_no);
      else if (key == "seed") cfg.seed = parseSeed(val, line_no);
      else if (key == "ablation") cfg.intention_blind = parseOnOff(val, line_no);
      else fail(line_no, "unknown key '" + key + "' in [scenario]");
    } else if (section == "map") {
      if (key == "file") cfg.map.file = val;
      else if (key == "generate") cfg.map.generate = val;
      else if (key == "resolution") cfg.map.resolution = parseDouble(val, line_no);
      else if (key == "inflation") cfg.map.inflation = parseDouble(val, line_no);
      else if (key == "corridor_width") cfg.map.corridor_width = parseDouble(val, line_no);
      else if (key == "leg_length") cfg.map.leg_length = parseDouble(val, line_no);
      else if (key == "turn_dir") cfg.map.turn_dir = val;
      else if (key == "stop_time") cfg.map.stop_time = parseDouble(val, line_no);
      else if (key == "extent") cfg.map.extent = parseDouble(val, line_no);
      else if (key == "n_turns") cfg.map.n_turns = parseInt(val, line_no);
      else if (key == "leg_min") cfg.map.leg_min = parseDouble(val, line_no);
      else if (key == "leg_max") cfg.map.leg_max = parseDouble(val, line_no);
      else if (key == "angle_min_deg") cfg.map.angle_min_deg = parseDouble(val, line_no);
      else if (key == "angle_max_deg") cfg.map.angle_max_deg = parseDouble(val, line_no);
      else fail(line_no, "unknown key '" + key + "' in [map]");
    } else if (section == "target") {
      if (key == "path") cfg.target.path = parsePath(val, line_no);
      else if (key == "speed") cfg.target.speed = parseDouble(val, line_no);
      else if (key == "speeds") cfg.target.segment_speeds = parseList(val, line_no);
      else if (key == "accel") cfg.target.accel = parseDouble(val, line_no);
      else if (key == "turn_rate") cfg.target.turn_rate = parseDouble(val, line_no);
      else if (key == "body_lead") cfg.target.body_lead = parseDouble(val, line_no);
      else if (key == "stops") cfg.target.stops = parseStops(val, line_no);
      else if (key == "sigma_lm") cfg.sigma_lm = parseDouble(val, line_no);
      else if (key == "shoulder_width") cfg.shoulder_width = parseDouble(val, line_no);
      else if (key == "hip_width") cfg.hip_width = parseDouble(val, line_no);
      else fail(line_no, "unknown key '" + key + "' in [target]");
    } else if (section == "tracker") {
      if (key == "start") {
        if (val == "auto") {
          cfg.tracker_auto = true;
        } else {
          cfg.tracker_auto = false;
          cfg.tracker_start = parseVec2(val, line_no);
        }
      } else if (key == "yaw") {
        cfg.tracker_yaw = parseDouble(val, line_no);
      } else {
        fail(line_no, "unknown key '" + key + "' in [tracker]");
      }
    } else if (section == "camera") {
      if (key == "fov_h_deg") cfg.camera.fov_h = deg2rad(parseDouble(val, line_no));
      else if (key == "fov_v_deg") cfg.camera.fov_v = deg2rad(parseDouble(val, line_no));
      else if (key == "range") cfg.camera.range = parseDouble(val, line_no);
      else if (key == "yaw_rate_max") cfg.camera.yaw_rate_max = parseDouble(val, line_no);
      else fail(line_no, "unknown key '" + key + "' in [camera]");
    } else if (section == "rates") {
      if (key == "perception") cfg.rates.perception_hz = parseInt(val, line_no);
      else if (key == "replan") cfg.rates.replan_hz = parseInt(val, line_no);
      else if (key == "control") cfg.rates.control_hz = parseInt(val, line_no);
      else fail(line_no, "unknown key '" + key + "' in [rates]");
    } else if (section == "intention") {
      auto &ip = cfg.intention;
      if (key == "k1") ip.k1 = parseDouble(val, line_no);
      else if (key == "k2") ip.k2 = parseDouble(val, line_no);
      else if (key == "k3") ip.k3 = parseDouble(val, line_no);
      else if (key == "k4") ip.k4 = parseDouble(val, line_no);
      else if (key == "k5") ip.k5 = parseDouble(val, line_no);
      else if (key == "cv_risk_gain") ip.cv_risk_gain = parseDouble(val, line_no);
      else if (key == "b0") ip.b0 = parseDouble(val, line_no);
      else if (key == "b1") ip.b1 = parseDouble(val, line_no);
      else if (key == "b2") ip.b2 = parseDouble(val, line_no);
      else if (key == "t0") ip.t0 = parseDouble(val, line_no);
      else if (key == "dt_obs") ip.dt_obs = parseDouble(val, line_no);
      else if (key == "theta_max_deg") ip.theta_max = deg2rad(parseDouble(val, line_no));
      else if (key == "r_min") ip.r_min = parseDouble(val, line_no);
      else if (key == "d_o_max") ip.d_o_max = parseDouble(val, line_no);
      else fail(line_no, "unknown key '" + key + "' in [intention]");
    } else if (section == "filter") {
      if (key == "sigma_accel") cfg.filter.sigma_accel = parseDouble(val, line_no);
      else if (key == "sigma_meas") cfg.filter.sigma_meas = parseDouble(val, line_no);
      else if (key == "eps_speed") cfg.filter.eps_speed = parseDouble(val, line_no);
      else fail(line_no, "unknown key '" + key + "' in [filter]");
    } else if (section == "prediction") {
      auto &pp = cfg.prediction;
      if (key == "turn_rates") pp.turn_rates = parseList(val, line_no);
      else if (key == "decel_values") pp.decel_values = parseList(val, line_no);
      else if (key == "dt_exp") pp.dt_exp = parseDouble(val, line_no);
      else if (key == "horizon") pp.horizon = parseDouble(val, line_no);
      else if (key == "n_samples") pp.n_samples = parseInt(val, line_no);
      else if (key == "w_h") pp.w_h = parseDouble(val, line_no);
      else if (key == "speed_cap") pp.speed_cap = parseDouble(val, line_no);
      else if (key == "expansion_cap") pp.expansion_cap = parseInt(val, line_no);
      else if (key == "penalty_default") {
        const double c = parseDouble(val, line_no);
        for (int i = 0; i < kNumIntentions; ++i)
          for (int j = 0; j < kNumIntentions; ++j)
            if (i != j) cfg.penalty.m(i, j) = c;
        cfg.penalty.m(kTl, kTr) = cfg.penalty.m(kTr, kTl) =
            std::max(c, cfg.penalty.m(kTl, kTr));
      } else if (key == "penalty_turn_reverse") {
        const double c = parseDouble(val, line_no);
        cfg.penalty.m(kTl, kTr) = cfg.penalty.m(kTr, kTl) = c;
      } else {
        fail(line_no, "unknown key '" + key + "' in [prediction]");
      }
    } else if (section == "corridor") {
      auto &cp = cfg.corridor;
      if (key == "d0") cp.d0 = parseDouble(val, line_no);
      else if (key == "circle_samples") cp.circle_samples = parseInt(val, line_no);
      else if (key == "theta_cap_deg") cp.theta_cap = deg2rad(parseDouble(val, line_no));
      else if (key == "theta_alpha") cp.theta_alpha = parseDouble(val, line_no);
      else if (key == "theta_beta") cp.theta_beta = parseDouble(val, line_no);
      else if (key == "pieces_per_polytope") cp.pieces_per_polytope = parseInt(val, line_no);
      else fail(line_no, "unknown key '" + key + "' in [corridor]");
    } else if (section == "trajopt") {
      auto &to = cfg.trajopt;
      if (key == "d_tau") to.d_tau = parseDouble(val, line_no);
      else if (key == "v_max") to.v_max = parseDouble(val, line_no);
      else if (key == "a_max") to.a_max = parseDouble(val, line_no);
      else if (key == "kappa") to.kappa = parseInt(val, line_no);
      else if (key == "w_smooth") to.weights.smooth = parseDouble(val, line_no);
      else if (key == "w_corridor") to.weights.corridor = parseDouble(val, line_no);
      else if (key == "w_vel") to.weights.vel = parseDouble(val, line_no);
      else if (key == "w_acc") to.weights.acc = parseDouble(val, line_no);
      else if (key == "w_dist_lower") to.weights.dist_lower = parseDouble(val, line_no);
      else if (key == "w_dist_upper") to.weights.dist_upper = parseDouble(val, line_no);
      else if (key == "w_vis_desired") to.weights.vis_desired = parseDouble(val, line_no);
      else if (key == "w_vis_next") to.weights.vis_next = parseDouble(val, line_no);
      else if (key == "max_iterations") to.max_iterations = parseInt(val, line_no);
      else if (key == "grad_tolerance") to.grad_tolerance = parseDouble(val, line_no);
      else if (key == "budget_ms") to.budget_ms = parseDouble(val, line_no);
      else fail(line_no, "unknown key '" + key + "' in [trajopt]");
    }
  }
  return cfg;
}

}  // namespace itrack
