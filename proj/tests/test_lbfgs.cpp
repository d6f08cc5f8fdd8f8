#include <cmath>
#include <random>

#include "doctest.h"
#include "itrack/lbfgs.hpp"

using namespace itrack;

namespace {

CostGradFn quadratic(const Eigen::MatrixXd &A, const Eigen::VectorXd &target) {
  return [A, target](const Eigen::VectorXd &x, Eigen::VectorXd &grad) {
    const Eigen::VectorXd d = x - target;
    grad = A * d;
    return 0.5 * d.dot(grad);
  };
}

double rosenbrock(const Eigen::VectorXd &x, Eigen::VectorXd &grad) {
  const double a = 1.0 - x[0];
  const double b = x[1] - x[0] * x[0];
  grad.resize(2);
  grad[0] = -2.0 * a - 400.0 * x[0] * b;
  grad[1] = 200.0 * b;
  return a * a + 100.0 * b * b;
}

}  // namespace

TEST_CASE("quadratic bowls are minimized to the gradient tolerance") {
  std::mt19937_64 rng(701);
  std::uniform_real_distribution<double> uni(-2.0, 2.0);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 3 + trial % 6;
    Eigen::MatrixXd M = Eigen::MatrixXd::NullaryExpr(
        n, n, [&]() { return uni(rng); });
    const Eigen::MatrixXd A =
        M * M.transpose() + 0.5 * Eigen::MatrixXd::Identity(n, n);
    const Eigen::VectorXd target =
        Eigen::VectorXd::NullaryExpr(n, [&]() { return uni(rng); });

    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    LbfgsParams params;
    params.max_iterations = 200;
    const LbfgsResult res = lbfgsMinimize(x, quadratic(A, target), params);
    REQUIRE(res.converged);
    REQUIRE((x - target).norm() < 1e-4);
    REQUIRE(res.cost < 1e-8);
    REQUIRE(res.iterations <= 200);
    REQUIRE(res.evaluations >= res.iterations);

    // The convergence flag is backed by the actual gradient at the result.
    Eigen::VectorXd grad(n);
    quadratic(A, target)(x, grad);
    REQUIRE(grad.cwiseAbs().maxCoeff() <= params.grad_tolerance * 10.0);
  }
}

TEST_CASE("rosenbrock valley from the classic start") {
  Eigen::VectorXd x(2);
  x << -1.2, 1.0;
  LbfgsParams params;
  params.max_iterations = 2000;
  params.grad_tolerance = 1e-7;
  const LbfgsResult res = lbfgsMinimize(x, rosenbrock, params);
  CHECK(res.converged);
  CHECK(std::abs(x[0] - 1.0) < 1e-4);
  CHECK(std::abs(x[1] - 1.0) < 1e-4);
  CHECK(res.cost < 1e-8);
}

TEST_CASE("descent is monotone: the result never exceeds the start cost") {
  std::mt19937_64 rng(702);
  std::uniform_real_distribution<double> uni(-1.5, 1.5);
  for (int trial = 0; trial < 40; ++trial) {
    // Random smooth nonconvex objective built from cosines.
    const double a = uni(rng), b = uni(rng), c = uni(rng);
    auto fn = [a, b, c](const Eigen::VectorXd &x, Eigen::VectorXd &grad) {
      grad.resize(2);
      grad[0] = 2.0 * x[0] + a * std::sin(x[0] + b * x[1]);
      grad[1] = 2.0 * x[1] + a * b * std::sin(x[0] + b * x[1]) + c;
      return x.squaredNorm() - a * std::cos(x[0] + b * x[1]) + c * x[1];
    };
    Eigen::VectorXd x(2);
    x << uni(rng), uni(rng);
    Eigen::VectorXd g(2);
    const double start_cost = fn(x, g);
    LbfgsParams params;
    params.max_iterations = 60;
    const LbfgsResult res = lbfgsMinimize(x, fn, params);
    REQUIRE(res.cost <= start_cost + 1e-12);
    // Reported cost is the cost of the reported iterate.
    REQUIRE(res.cost == doctest::Approx(fn(x, g)).epsilon(1e-12));
  }
}

TEST_CASE("identical inputs give identical iterates") {
  auto run = [] {
    Eigen::VectorXd x(2);
    x << -1.2, 1.0;
    LbfgsParams params;
    params.max_iterations = 137;
    params.grad_tolerance = 1e-9;
    const LbfgsResult res = lbfgsMinimize(x, rosenbrock, params);
    return std::make_pair(x, res);
  };
  const auto [x1, r1] = run();
  const auto [x2, r2] = run();
  CHECK(x1[0] == x2[0]);
  CHECK(x1[1] == x2[1]);
  CHECK(r1.iterations == r2.iterations);
  CHECK(r1.evaluations == r2.evaluations);
  CHECK(r1.cost == r2.cost);
  CHECK_FALSE(r1.hit_time_budget);  // no budget configured
}

TEST_CASE("a tiny wall-clock budget stops early but still improves") {
  Eigen::VectorXd x(2);
  x << -1.2, 1.0;
  Eigen::VectorXd g(2);
  const double start_cost = rosenbrock(x, g);
  LbfgsParams params;
  params.max_iterations = 100000;
  params.grad_tolerance = 0.0;  // would never converge by gradient
  params.time_budget_ms = 1e-6;
  const LbfgsResult res = lbfgsMinimize(x, rosenbrock, params);
  CHECK(res.hit_time_budget);
  CHECK(res.iterations < 100000);
  CHECK(res.cost <= start_cost);
}
