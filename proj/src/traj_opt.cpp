#include "itrack/traj_opt.hpp"

#include <cmath>
#include <stdexcept>

namespace itrack {

namespace {

constexpr double kRangeGuard = 1e-6;

struct SectorTerm {
  double cost = 0.0;
  Vec2 grad_pos = Vec2::Zero();
  bool guarded = false;
};

// max{cos(theta) - cos_angle(pos - apex, axis), 0}^3 weighted by w, with
// the gradient with respect to pos.
SectorTerm sectorPenalty(const Vec2 &pos, const Sector &sector, double w) {
  SectorTerm out;
  const Vec2 u = pos - sector.apex;
  const double r = u.norm();
  const double r_safe = std::max(r, kRangeGuard);
  out.guarded = r < kRangeGuard;
  const double cos_ang = u.dot(sector.axis) / r_safe;
  const double g = std::cos(sector.half_angle) - cos_ang;
  if (g <= 0.0) return out;
  out.cost = w * g * g * g;
  const Vec2 dcos = sector.axis / r_safe - u.dot(sector.axis) * u /
                                               (r_safe * r_safe * r_safe);
  out.grad_pos = w * 3.0 * g * g * (-dcos);
  return out;
}

}  // namespace

std::pair<int, double> locatePieceAbsolute(const Eigen::VectorXd &durations,
                                           double t) {
  const int m = static_cast<int>(durations.size());
  if (m < 1) throw std::invalid_argument("no pieces");
  if (t <= 0.0) throw std::out_of_range("stamp must be positive");
  double prefix = 0.0;
  for (int i = 0; i < m; ++i) {
    if (t <= prefix + durations[i]) return {i, t - prefix};
    prefix += durations[i];
  }
  if (t <= prefix + 1e-9) return {m - 1, durations[m - 1]};
  throw std::out_of_range("stamp beyond trajectory end");
}

double relativePenalty(const Eigen::MatrixX2d &coeffs,
                       const Eigen::VectorXd &durations, int piece,
                       const Polytope &poly, const OptProblem &prob,
                       Eigen::MatrixX2d &grad_coeffs,
                       Eigen::VectorXd &grad_times) {
  if (prob.kappa < 2) throw std::invalid_argument("kappa must be >= 2");
  const double T = durations[piece];
  const auto c = coeffs.block<6, 2>(6 * piece, 0);
  auto gc = grad_coeffs.block<6, 2>(6 * piece, 0);
  const double step = T / prob.kappa;
  const TrajOptWeights &w = prob.weights;

  double cost = 0.0;
  for (int j = 0; j <= prob.kappa; ++j) {
    const double frac = static_cast<double>(j) / prob.kappa;
    const double tau = T * frac;
    const double wbar = (j == 0 || j == prob.kappa) ? 0.5 : 1.0;
    const Vec6 b0 = basis0(tau), b1 = basis1(tau), b2 = basis2(tau),
               b3 = basis3(tau);
    const Vec2 pos = c.transpose() * b0;
    const Vec2 vel = c.transpose() * b1;
    const Vec2 acc = c.transpose() * b2;
    const Vec2 jer = c.transpose() * b3;

    for (int r = 0; r < poly.rows(); ++r) {
      const Vec2 n = poly.normals.row(r).transpose();
      const double g = n.dot(pos) - poly.offsets[r] + prob.corridor_margin;
      if (g <= 0.0) continue;
      cost += step * wbar * w.corridor * g * g * g;
      const double dpen = step * wbar * w.corridor * 3.0 * g * g;
      gc += dpen * b0 * n.transpose();
      grad_times[piece] += wbar * w.corridor * g * g * g / prob.kappa +
                           dpen * n.dot(vel) * frac;
    }
    {
      const double g = vel.squaredNorm() - prob.v_max * prob.v_max;
      if (g > 0.0) {
        cost += step * wbar * w.vel * g * g * g;
        const double dpen = step * wbar * w.vel * 3.0 * g * g;
        gc += dpen * b1 * (2.0 * vel).transpose();
        grad_times[piece] += wbar * w.vel * g * g * g / prob.kappa +
                             dpen * 2.0 * vel.dot(acc) * frac;
      }
    }
    {
      const double g = acc.squaredNorm() - prob.a_max * prob.a_max;
      if (g > 0.0) {
        cost += step * wbar * w.acc * g * g * g;
        const double dpen = step * wbar * w.acc * 3.0 * g * g;
        gc += dpen * b2 * (2.0 * acc).transpose();
        grad_times[piece] += wbar * w.acc * g * g * g / prob.kappa +
                             dpen * 2.0 * acc.dot(jer) * frac;
      }
    }
  }
  return cost;
}

double absolutePenalty(const Eigen::MatrixX2d &coeffs,
                       const Eigen::VectorXd &durations,
                       const OptProblem &prob, Eigen::MatrixX2d &grad_coeffs,
                       Eigen::VectorXd &grad_times, int *guard_count) {
  const TrajOptWeights &w = prob.weights;
  double cost = 0.0;
  const double inner = prob.d0 - prob.d_l;
  const double outer = prob.d0 + prob.d_u;

  for (const AbsolutePoint &pt : prob.points) {
    const auto [piece, tau] = locatePieceAbsolute(durations, pt.stamp);
    const auto c = coeffs.block<6, 2>(6 * piece, 0);
    const Vec6 b0 = basis0(tau), b1 = basis1(tau);
    const Vec2 pos = c.transpose() * b0;
    const Vec2 vel = c.transpose() * b1;

    Vec2 grad_pos = Vec2::Zero();
    const Vec2 u = pos - pt.v_hat.apex;
    const double d2 = u.squaredNorm();
    {
      // Inner band: squared form keeps the gradient bounded at coincidence.
      const double g = inner * inner - d2;
      if (g > 0.0) {
        cost += w.dist_lower * g * g * g;
        grad_pos += w.dist_lower * 3.0 * g * g * (-2.0 * u);
      }
    }
    {
      const double g = d2 - outer * outer;
      if (g > 0.0) {
        cost += w.dist_upper * g * g * g;
        grad_pos += w.dist_upper * 3.0 * g * g * (2.0 * u);
      }
    }
    {
      const SectorTerm term = sectorPenalty(pos, pt.v_hat, w.vis_desired);
      cost += term.cost;
      grad_pos += term.grad_pos;
      if (term.guarded && guard_count) ++(*guard_count);
    }
    if (pt.has_next) {
      const SectorTerm term = sectorPenalty(pos, pt.v_next, w.vis_next);
      cost += term.cost;
      grad_pos += term.grad_pos;
    }

    grad_coeffs.block<6, 2>(6 * piece, 0) += b0 * grad_pos.transpose();
    for (int i = 0; i < piece; ++i) {
      grad_times[i] -= grad_pos.dot(vel);
    }
  }
  return cost;
}

double evaluateProblem(const MincoSpline &spline, const OptProblem &prob,
                       Eigen::MatrixX2d &grad_coeffs,
                       Eigen::VectorXd &grad_times, int *guard_count) {
  const int m = spline.pieces();
  if (m != prob.pieceCount()) {
    throw std::invalid_argument("piece count does not match corridor layout");
  }
  grad_coeffs = Eigen::MatrixX2d::Zero(6 * m, 2);
  grad_times = Eigen::VectorXd::Zero(m);

  double cost = prob.weights.smooth * spline.energy();
  if (prob.weights.smooth != 0.0) {
    Eigen::MatrixX2d gc = Eigen::MatrixX2d::Zero(6 * m, 2);
    Eigen::VectorXd gt = Eigen::VectorXd::Zero(m);
    spline.energyGradients(gc, gt);
    grad_coeffs += prob.weights.smooth * gc;
    grad_times += prob.weights.smooth * gt;
  }
  for (int i = 0; i < m; ++i) {
    cost += relativePenalty(spline.coeffs(), spline.durations(), i,
                            prob.corridors[prob.polytopeOf(i)], prob,
                            grad_coeffs, grad_times);
  }
  cost += absolutePenalty(spline.coeffs(), spline.durations(), prob,
                          grad_coeffs, grad_times, guard_count);
  return cost;
}

OptimizeResult optimizeTrajectory(const Eigen::Matrix2Xd &seed_waypoints,
                                  const Eigen::VectorXd &seed_durations,
                                  const OptProblem &prob,
                                  const LbfgsParams &solver,
                                  bool keep_eval_log) {
  const int m = prob.pieceCount();
  if (m < 1) throw std::invalid_argument("problem has no pieces");
  if (seed_waypoints.cols() != m - 1 || seed_durations.size() != m) {
    throw std::invalid_argument("seed sizes do not match piece count");
  }
  if ((seed_durations.array() <= 0.0).any()) {
    throw std::invalid_argument("seed durations must be positive");
  }
  for (const AbsolutePoint &pt : prob.points) {
    if (pt.stamp <= 0.0 || pt.stamp > prob.horizon + 1e-9) {
      throw std::invalid_argument("stamp outside horizon");
    }
  }

  MincoSpline spline;
  spline.reset(prob.head, prob.tail, m);

  const int nq = 2 * (m - 1);
  Eigen::VectorXd x(nq + m);
  for (int i = 0; i < m - 1; ++i) {
    x.segment<2>(2 * i) = seed_waypoints.col(i);
  }
  const Eigen::VectorXd t_norm =
      seed_durations * (prob.horizon / seed_durations.sum());
  for (int i = 0; i < m; ++i) {
    x[nq + i] = std::log(t_norm[i] / prob.horizon);
  }

  Eigen::MatrixX2d grad_c;
  Eigen::VectorXd grad_t;
  OptimizeResult result;

  auto unpack = [&](const Eigen::VectorXd &v, Eigen::Matrix2Xd &q,
                    Eigen::VectorXd &T, Eigen::VectorXd &sigma) {
    q.resize(2, m - 1);
    for (int i = 0; i < m - 1; ++i) q.col(i) = v.segment<2>(2 * i);
    const Eigen::VectorXd logits = v.tail(m);
    const Eigen::VectorXd e = (logits.array() - logits.maxCoeff()).exp();
    sigma = e / e.sum();
    T = prob.horizon * sigma;
  };

  auto fn = [&](const Eigen::VectorXd &v, Eigen::VectorXd &grad) -> double {
    Eigen::Matrix2Xd q;
    Eigen::VectorXd T, sigma;
    unpack(v, q, T, sigma);
    spline.update(q, T);
    const double cost = evaluateProblem(spline, prob, grad_c, grad_t);

    Eigen::Matrix2Xd gq;
    Eigen::VectorXd gT;
    spline.propagateGradients(grad_c, grad_t, gq, gT);

    grad.resize(v.size());
    for (int i = 0; i < m - 1; ++i) grad.segment<2>(2 * i) = gq.col(i);
    const double mix = sigma.dot(gT);
    for (int i = 0; i < m; ++i) {
      grad[nq + i] = prob.horizon * sigma[i] * (gT[i] - mix);
    }
    if (keep_eval_log) {
      result.eval_log.emplace_back(cost, grad.lpNorm<Eigen::Infinity>());
    }
    return cost;
  };

  {
    Eigen::VectorXd g0(x.size());
    result.seed_cost = fn(x, g0);
    if (!std::isfinite(result.seed_cost)) {
      throw std::runtime_error("objective not finite at seed");
    }
  }

  const LbfgsResult lr = lbfgsMinimize(x, fn, solver);
  result.cost = lr.cost;
  result.iterations = lr.iterations;
  result.evaluations = lr.evaluations;
  result.converged = lr.converged;
  result.budget_exhausted = lr.hit_time_budget;

  Eigen::VectorXd sigma;
  unpack(x, result.waypoints, result.durations, sigma);
  spline.update(result.waypoints, result.durations);
  result.trajectory = spline.trajectory();
  return result;
}

}  // namespace itrack
