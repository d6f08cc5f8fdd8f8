#include "itrack/lbfgs.hpp"

#include <chrono>
#include <deque>
#include <stdexcept>

namespace itrack {

LbfgsResult lbfgsMinimize(Eigen::VectorXd &x, const CostGradFn &fn,
                          const LbfgsParams &params) {
  if (params.memory < 1) throw std::invalid_argument("memory must be >= 1");
  const auto t_start = std::chrono::steady_clock::now();
  auto overBudget = [&]() {
    if (params.time_budget_ms <= 0.0) return false;
    const auto dt = std::chrono::steady_clock::now() - t_start;
    return std::chrono::duration<double, std::milli>(dt).count() >
           params.time_budget_ms;
  };

  LbfgsResult res;
  const auto n = x.size();
  Eigen::VectorXd grad(n);
  double cost = fn(x, grad);
  ++res.evaluations;

  struct Pair {
    Eigen::VectorXd s, y;
    double rho;
  };
  std::deque<Pair> history;

  Eigen::VectorXd dir(n), x_new(n), grad_new(n), alpha_cache;
  for (int iter = 0; iter < params.max_iterations; ++iter) {
    if (grad.lpNorm<Eigen::Infinity>() <= params.grad_tolerance) {
      res.converged = true;
      break;
    }
    if (overBudget()) {
      res.hit_time_budget = true;
      break;
    }

    // Two-loop recursion for the quasi-Newton direction.
    dir = -grad;
    const auto m = static_cast<Eigen::Index>(history.size());
    alpha_cache.resize(m);
    for (Eigen::Index i = m - 1; i >= 0; --i) {
      alpha_cache[i] = history[i].rho * history[i].s.dot(dir);
      dir -= alpha_cache[i] * history[i].y;
    }
    if (m > 0) {
      const Pair &last = history.back();
      dir *= last.s.dot(last.y) / last.y.squaredNorm();
    }
    for (Eigen::Index i = 0; i < m; ++i) {
      const double beta = history[i].rho * history[i].y.dot(dir);
      dir += (alpha_cache[i] - beta) * history[i].s;
    }

    double slope = grad.dot(dir);
    if (slope >= 0.0) {
      history.clear();
      dir = -grad;
      slope = grad.dot(dir);
    }

    double step = iter == 0 ? 1.0 / std::max(grad.norm(), 1.0) : 1.0;
    bool accepted = false;
    double cost_new = cost;
    for (int ls = 0; ls < params.max_line_iterations; ++ls) {
      x_new = x + step * dir;
      cost_new = fn(x_new, grad_new);
      ++res.evaluations;
      if (std::isfinite(cost_new) &&
          cost_new <= cost + params.armijo_c * step * slope) {
        accepted = true;
        break;
      }
      step *= params.step_shrink;
    }
    if (!accepted) {
      if (!history.empty()) {
        // Retry once along steepest descent with fresh curvature memory.
        history.clear();
        continue;
      }
      break;
    }

    Pair pair;
    pair.s = x_new - x;
    pair.y = grad_new - grad;
    const double ys = pair.y.dot(pair.s);
    if (ys > 1e-10 * pair.s.norm() * pair.y.norm()) {
      pair.rho = 1.0 / ys;
      history.push_back(std::move(pair));
      if (static_cast<int>(history.size()) > params.memory) {
        history.pop_front();
      }
    }

    x = x_new;
    grad = grad_new;
    cost = cost_new;
    res.iterations = iter + 1;
  }

  res.cost = cost;
  return res;
}

}  // namespace itrack
