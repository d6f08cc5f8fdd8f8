#ifndef ITRACK_LBFGS_HPP
#define ITRACK_LBFGS_HPP

#include <functional>

#include "itrack/common.hpp"

namespace itrack {

struct LbfgsParams {
  int memory = 8;
  int max_iterations = 100;
  double grad_tolerance = 1e-5;  // infinity norm of the gradient
  double armijo_c = 1e-4;
  double step_shrink = 0.5;
  int max_line_iterations = 30;
  double time_budget_ms = 0.0;  // <= 0 disables the wall-clock cutoff
};

struct LbfgsResult {
  double cost = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  bool hit_time_budget = false;
};

// Returns the cost at x and fills grad (same size as x).
using CostGradFn =
    std::function<double(const Eigen::VectorXd &x, Eigen::VectorXd &grad)>;

// Limited-memory BFGS with Armijo backtracking; monotone in cost. x is
// updated in place to the best iterate. When time_budget_ms <= 0 the
// clock is never read, so identical inputs give identical iterates.
LbfgsResult lbfgsMinimize(Eigen::VectorXd &x, const CostGradFn &fn,
                          const LbfgsParams &params);

}  // namespace itrack

#endif
