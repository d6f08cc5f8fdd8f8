#ifndef ITRACK_TRAJ_OPT_HPP
#define ITRACK_TRAJ_OPT_HPP

#include <utility>
#include <vector>

#include "itrack/corridor.hpp"
#include "itrack/lbfgs.hpp"
#include "itrack/minco.hpp"

namespace itrack {

// Absolute-time anchor: the tracker position at `stamp` is pulled into the
// distance band around the desired sector's apex, into that sector, and --
// when present -- into the following step's (wider) sector.
struct AbsolutePoint {
  double stamp = 0.0;
  Sector v_hat;               // desired region; apex is the target sample
  bool has_next = false;
  Sector v_next;              // next step's visible region, apex = next sample
};

struct TrajOptWeights {
  double smooth = 1.0;
  double corridor = 1e5;
  double vel = 1e3;
  double acc = 1e3;
  double dist_lower = 64.0;
  double dist_upper = 64.0;
  double vis_desired = 32.0;
  double vis_next = 32.0;
};

struct OptProblem {
  Mat23 head = Mat23::Zero();   // start position/velocity/acceleration
  Mat23 tail = Mat23::Zero();   // end position/velocity/acceleration
  std::vector<Polytope> corridors;
  int pieces_per_polytope = 2;  // K; piece i lives in corridors[i / K]
  double horizon = 2.0;         // fixed total duration
  double v_max = 3.0;
  double a_max = 5.0;
  double d0 = 2.0;
  double d_l = 0.4;  // inner band slack (shrinks as deceleration likelihood rises)
  double d_u = 0.4;  // outer band slack
  // Corridor hinge activates this far inside the polytope boundary, so the
  // soft penalty converges to trajectories strictly inside free space.
  double corridor_margin = 0.05;
  int kappa = 16;    // quadrature segments per piece
  TrajOptWeights weights;
  std::vector<AbsolutePoint> points;

  int pieceCount() const {
    return pieces_per_polytope * static_cast<int>(corridors.size());
  }
  int polytopeOf(int piece) const { return piece / pieces_per_polytope; }
};

// Inner distance-band slack shrinks linearly with deceleration likelihood.
inline double decLowerTolerance(double d_tau, double p_dec) {
  return (1.0 - p_dec) * d_tau;
}

// Piece index (0-based) and local time for an absolute stamp; stamps on a
// junction resolve to the earlier piece. Throws unless 0 < t <= sum(T).
std::pair<int, double> locatePieceAbsolute(const Eigen::VectorXd &durations,
                                           double t);

// Corridor-containment, speed, and acceleration penalties for one piece,
// integrated by the trapezoidal rule in relative time. Accumulates
// gradients into (grad_coeffs rows of that piece, grad_times[piece]).
double relativePenalty(const Eigen::MatrixX2d &coeffs,
                       const Eigen::VectorXd &durations, int piece,
                       const Polytope &poly, const OptProblem &prob,
                       Eigen::MatrixX2d &grad_coeffs,
                       Eigen::VectorXd &grad_times);

// Distance-band and sector-membership penalties at the absolute stamps.
// guard_count (optional) counts stamps where the tracker coincided with
// the target sample and the angle direction had to be guarded.
double absolutePenalty(const Eigen::MatrixX2d &coeffs,
                       const Eigen::VectorXd &durations,
                       const OptProblem &prob, Eigen::MatrixX2d &grad_coeffs,
                       Eigen::VectorXd &grad_times,
                       int *guard_count = nullptr);

// Full objective (smoothness + relative + absolute) and its gradients in
// coefficient/duration space. Gradient outputs are overwritten.
double evaluateProblem(const MincoSpline &spline, const OptProblem &prob,
                       Eigen::MatrixX2d &grad_coeffs,
                       Eigen::VectorXd &grad_times,
                       int *guard_count = nullptr);

struct OptimizeResult {
  PolyTrajectory trajectory;
  Eigen::Matrix2Xd waypoints;
  Eigen::VectorXd durations;
  double seed_cost = 0.0;
  double cost = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  bool budget_exhausted = false;
  std::vector<std::pair<double, double>> eval_log;  // (cost, grad inf-norm)
};

// Minimizes the objective over interior waypoints and durations; durations
// stay positive with a fixed total via a softmax reparameterization. The
// returned cost never exceeds the seed's (monotone line search).
OptimizeResult optimizeTrajectory(const Eigen::Matrix2Xd &seed_waypoints,
                                  const Eigen::VectorXd &seed_durations,
                                  const OptProblem &prob,
                                  const LbfgsParams &solver,
                                  bool keep_eval_log = false);

}  // namespace itrack

#endif
