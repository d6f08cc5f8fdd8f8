#ifndef ITRACK_MINCO_HPP
#define ITRACK_MINCO_HPP

#include <vector>

#include "itrack/common.hpp"

namespace itrack {

using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat23 = Eigen::Matrix<double, 2, 3>;  // columns: position, velocity, acceleration

// Quintic monomial basis and its first four derivatives at local time t.
Vec6 basis0(double t);
Vec6 basis1(double t);
Vec6 basis2(double t);
Vec6 basis3(double t);
Vec6 basis4(double t);

// Square banded matrix with LU factorization in place (no pivoting; the
// spline constraint ordering keeps pivots nonzero).
class BandedSystem {
 public:
  void create(int n, int lower_bw, int upper_bw);
  void reset();
  double &operator()(int i, int j) {
    return data_[static_cast<size_t>(i - j + upper_) * n_ + j];
  }
  double operator()(int i, int j) const {
    return data_[static_cast<size_t>(i - j + upper_) * n_ + j];
  }
  void factorizeLU();
  void solve(Eigen::MatrixX2d &b) const;     // A x = b, overwrites b
  void solveAdj(Eigen::MatrixX2d &b) const;  // A^T x = b, overwrites b

 private:
  int n_ = 0, lower_ = 0, upper_ = 0;
  std::vector<double> data_;
};

// Piecewise quintic planar polynomial with value semantics; piece i covers
// local time [0, durations[i]] with rows 6i..6i+5 of coeffs as its
// monomial coefficients.
struct PolyTrajectory {
  Eigen::MatrixX2d coeffs;
  Eigen::VectorXd durations;

  int pieces() const { return static_cast<int>(durations.size()); }
  double totalTime() const { return durations.sum(); }
  bool empty() const { return durations.size() == 0; }

  // Piece index for absolute time t (clamped to [0, total]); *local
  // receives the time within the piece.
  int locatePiece(double t, double *local) const;
  Vec2 pos(double t) const;
  Vec2 vel(double t) const;
  Vec2 acc(double t) const;
  Vec2 jerk(double t) const;
  // Checked evaluation of the order-th derivative (0..5, higher orders are
  // zero); throws when t is outside [0, totalTime].
  Vec2 deriv(double t, int order) const;
};

// Minimum-jerk piecewise quintic through interior waypoints with full
// start/end state pinning and C4 junction continuity. The coefficient
// vector is a banded-linear function of (waypoints, durations); gradients
// with respect to both are propagated through the factorization adjoint.
class MincoSpline {
 public:
  void reset(const Mat23 &head_pva, const Mat23 &tail_pva, int pieces);
  void update(const Eigen::Matrix2Xd &inner, const Eigen::VectorXd &durations);

  int pieces() const { return pieces_; }
  const Eigen::MatrixX2d &coeffs() const { return coeffs_; }
  const Eigen::VectorXd &durations() const { return durations_; }
  PolyTrajectory trajectory() const { return {coeffs_, durations_}; }

  // Integral of squared jerk over the whole spline.
  double energy() const;
  // Accumulates d(energy)/d(coeffs) and d(energy)/d(durations).
  void energyGradients(Eigen::MatrixX2d &grad_coeffs,
                       Eigen::VectorXd &grad_times) const;

  // Pulls a gradient in coefficient space back to waypoint/duration space:
  // grad_inner, grad_times <- chain of (dJ/dc, direct dJ/dT).
  void propagateGradients(const Eigen::MatrixX2d &partial_by_coeffs,
                          const Eigen::VectorXd &partial_by_times,
                          Eigen::Matrix2Xd &grad_inner,
                          Eigen::VectorXd &grad_times) const;

 private:
  int pieces_ = 0;
  Mat23 head_ = Mat23::Zero(), tail_ = Mat23::Zero();
  BandedSystem A_;
  Eigen::MatrixX2d coeffs_;
  Eigen::VectorXd durations_;
};

}  // namespace itrack

#endif
