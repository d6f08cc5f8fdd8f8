#include "itrack/minco.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace itrack {

Vec6 basis0(double t) {
  Vec6 b;
  b << 1.0, t, t * t, t * t * t, t * t * t * t, t * t * t * t * t;
  return b;
}

Vec6 basis1(double t) {
  Vec6 b;
  b << 0.0, 1.0, 2.0 * t, 3.0 * t * t, 4.0 * t * t * t, 5.0 * t * t * t * t;
  return b;
}

Vec6 basis2(double t) {
  Vec6 b;
  b << 0.0, 0.0, 2.0, 6.0 * t, 12.0 * t * t, 20.0 * t * t * t;
  return b;
}

Vec6 basis3(double t) {
  Vec6 b;
  b << 0.0, 0.0, 0.0, 6.0, 24.0 * t, 60.0 * t * t;
  return b;
}

Vec6 basis4(double t) {
  Vec6 b;
  b << 0.0, 0.0, 0.0, 0.0, 24.0, 120.0 * t;
  return b;
}

void BandedSystem::create(int n, int lower_bw, int upper_bw) {
  n_ = n;
  lower_ = lower_bw;
  upper_ = upper_bw;
  data_.assign(static_cast<size_t>(lower_ + upper_ + 1) * n_, 0.0);
}

void BandedSystem::reset() { std::fill(data_.begin(), data_.end(), 0.0); }

void BandedSystem::factorizeLU() {
  for (int k = 0; k <= n_ - 2; ++k) {
    const int i_max = std::min(k + lower_, n_ - 1);
    const double pivot = (*this)(k, k);
    for (int i = k + 1; i <= i_max; ++i) {
      if ((*this)(i, k) != 0.0) (*this)(i, k) /= pivot;
    }
    const int j_max = std::min(k + upper_, n_ - 1);
    for (int j = k + 1; j <= j_max; ++j) {
      const double v = (*this)(k, j);
      if (v == 0.0) continue;
      for (int i = k + 1; i <= i_max; ++i) {
        if ((*this)(i, k) != 0.0) (*this)(i, j) -= (*this)(i, k) * v;
      }
    }
  }
}

void BandedSystem::solve(Eigen::MatrixX2d &b) const {
  for (int j = 0; j <= n_ - 1; ++j) {
    const int i_max = std::min(j + lower_, n_ - 1);
    for (int i = j + 1; i <= i_max; ++i) {
      if ((*this)(i, j) != 0.0) b.row(i) -= (*this)(i, j) * b.row(j);
    }
  }
  for (int j = n_ - 1; j >= 0; --j) {
    b.row(j) /= (*this)(j, j);
    const int i_min = std::max(0, j - upper_);
    for (int i = i_min; i <= j - 1; ++i) {
      if ((*this)(i, j) != 0.0) b.row(i) -= (*this)(i, j) * b.row(j);
    }
  }
}

void BandedSystem::solveAdj(Eigen::MatrixX2d &b) const {
  for (int j = 0; j <= n_ - 1; ++j) {
    b.row(j) /= (*this)(j, j);
    const int i_max = std::min(j + upper_, n_ - 1);
    for (int i = j + 1; i <= i_max; ++i) {
      if ((*this)(j, i) != 0.0) b.row(i) -= (*this)(j, i) * b.row(j);
    }
  }
  for (int j = n_ - 1; j >= 0; --j) {
    const int i_min = std::max(0, j - lower_);
    for (int i = i_min; i <= j - 1; ++i) {
      if ((*this)(j, i) != 0.0) b.row(i) -= (*this)(j, i) * b.row(j);
    }
  }
}

int PolyTrajectory::locatePiece(double t, double *local) const {
  if (empty()) throw std::logic_error("empty trajectory");
  const int m = pieces();
  if (t <= 0.0) {
    *local = 0.0;
    return 0;
  }
  // Junction stamps resolve to the earlier piece.
  double prefix = 0.0;
  for (int i = 0; i < m - 1; ++i) {
    if (t <= prefix + durations[i]) {
      *local = t - prefix;
      return i;
    }
    prefix += durations[i];
  }
  *local = std::min(t - prefix, durations[m - 1]);
  return m - 1;
}

Vec2 PolyTrajectory::pos(double t) const {
  double local;
  const int i = locatePiece(t, &local);
  return coeffs.block<6, 2>(6 * i, 0).transpose() * basis0(local);
}

Vec2 PolyTrajectory::vel(double t) const {
  double local;
  const int i = locatePiece(t, &local);
  return coeffs.block<6, 2>(6 * i, 0).transpose() * basis1(local);
}

Vec2 PolyTrajectory::acc(double t) const {
  double local;
  const int i = locatePiece(t, &local);
  return coeffs.block<6, 2>(6 * i, 0).transpose() * basis2(local);
}

Vec2 PolyTrajectory::jerk(double t) const {
  double local;
  const int i = locatePiece(t, &local);
  return coeffs.block<6, 2>(6 * i, 0).transpose() * basis3(local);
}

Vec2 PolyTrajectory::deriv(double t, int order) const {
  if (order < 0) throw std::invalid_argument("derivative order must be >= 0");
  if (t < -1e-9 || t > totalTime() + 1e-9) {
    throw std::out_of_range("evaluation time outside trajectory span");
  }
  if (order > 5) return Vec2::Zero();
  double local;
  const int i = locatePiece(t, &local);
  Vec6 b = Vec6::Zero();
  double fact = 1.0;
  for (int k = 1; k <= order; ++k) fact *= k;
  double power = 1.0;
  for (int k = order; k < 6; ++k) {
    b[k] = fact * power;
    power *= local;
    fact *= static_cast<double>(k + 1) / (k + 1 - order);
  }
  return coeffs.block<6, 2>(6 * i, 0).transpose() * b;
}

void MincoSpline::reset(const Mat23 &head_pva, const Mat23 &tail_pva,
                        int pieces) {
  if (pieces < 1) throw std::invalid_argument("spline needs >= 1 piece");
  pieces_ = pieces;
  head_ = head_pva;
  tail_ = tail_pva;
  A_.create(6 * pieces_, 6, 6);
  coeffs_.resize(6 * pieces_, 2);
  durations_.resize(pieces_);
}

void MincoSpline::update(const Eigen::Matrix2Xd &inner,
                         const Eigen::VectorXd &durations) {
  if (pieces_ == 0) throw std::logic_error("reset() must be called first");
  if (inner.cols() != pieces_ - 1 || durations.size() != pieces_) {
    throw std::invalid_argument("waypoint/duration sizes do not match pieces");
  }
  if ((durations.array() <= 0.0).any()) {
    throw std::invalid_argument("durations must be positive");
  }
  durations_ = durations;

  A_.reset();
  Eigen::MatrixX2d b = Eigen::MatrixX2d::Zero(6 * pieces_, 2);

  A_(0, 0) = 1.0;
  A_(1, 1) = 1.0;
  A_(2, 2) = 2.0;
  b.row(0) = head_.col(0).transpose();
  b.row(1) = head_.col(1).transpose();
  b.row(2) = head_.col(2).transpose();

  for (int i = 0; i < pieces_ - 1; ++i) {
    const double t1 = durations_[i];
    const double t2 = t1 * t1, t3 = t2 * t1, t4 = t3 * t1, t5 = t4 * t1;
    const int r = 6 * i;
    // jerk and snap continuity
    A_(r + 3, r + 3) = 6.0;
    A_(r + 3, r + 4) = 24.0 * t1;
    A_(r + 3, r + 5) = 60.0 * t2;
    A_(r + 3, r + 9) = -6.0;
    A_(r + 4, r + 4) = 24.0;
    A_(r + 4, r + 5) = 120.0 * t1;
    A_(r + 4, r + 10) = -24.0;
    // waypoint pin
    A_(r + 5, r + 0) = 1.0;
    A_(r + 5, r + 1) = t1;
    A_(r + 5, r + 2) = t2;
    A_(r + 5, r + 3) = t3;
    A_(r + 5, r + 4) = t4;
    A_(r + 5, r + 5) = t5;
    b.row(r + 5) = inner.col(i).transpose();
    // position, velocity, acceleration continuity
    A_(r + 6, r + 0) = 1.0;
    A_(r + 6, r + 1) = t1;
    A_(r + 6, r + 2) = t2;
    A_(r + 6, r + 3) = t3;
    A_(r + 6, r + 4) = t4;
    A_(r + 6, r + 5) = t5;
    A_(r + 6, r + 6) = -1.0;
    A_(r + 7, r + 1) = 1.0;
    A_(r + 7, r + 2) = 2.0 * t1;
    A_(r + 7, r + 3) = 3.0 * t2;
    A_(r + 7, r + 4) = 4.0 * t3;
    A_(r + 7, r + 5) = 5.0 * t4;
    A_(r + 7, r + 7) = -1.0;
    A_(r + 8, r + 2) = 2.0;
    A_(r + 8, r + 3) = 6.0 * t1;
    A_(r + 8, r + 4) = 12.0 * t2;
    A_(r + 8, r + 5) = 20.0 * t3;
    A_(r + 8, r + 8) = -2.0;
  }

  const int e = 6 * pieces_ - 6;
  const double t1 = durations_[pieces_ - 1];
  const double t2 = t1 * t1, t3 = t2 * t1, t4 = t3 * t1, t5 = t4 * t1;
  A_(e + 3, e + 0) = 1.0;
  A_(e + 3, e + 1) = t1;
  A_(e + 3, e + 2) = t2;
  A_(e + 3, e + 3) = t3;
  A_(e + 3, e + 4) = t4;
  A_(e + 3, e + 5) = t5;
  A_(e + 4, e + 1) = 1.0;
  A_(e + 4, e + 2) = 2.0 * t1;
  A_(e + 4, e + 3) = 3.0 * t2;
  A_(e + 4, e + 4) = 4.0 * t3;
  A_(e + 4, e + 5) = 5.0 * t4;
  A_(e + 5, e + 2) = 2.0;
  A_(e + 5, e + 3) = 6.0 * t1;
  A_(e + 5, e + 4) = 12.0 * t2;
  A_(e + 5, e + 5) = 20.0 * t3;
  b.row(e + 3) = tail_.col(0).transpose();
  b.row(e + 4) = tail_.col(1).transpose();
  b.row(e + 5) = tail_.col(2).transpose();

  A_.factorizeLU();
  A_.solve(b);
  coeffs_ = b;
}

double MincoSpline::energy() const {
  double energy = 0.0;
  for (int i = 0; i < pieces_; ++i) {
    const auto c3 = coeffs_.row(6 * i + 3);
    const auto c4 = coeffs_.row(6 * i + 4);
    const auto c5 = coeffs_.row(6 * i + 5);
    const double t1 = durations_[i];
    const double t2 = t1 * t1, t3 = t2 * t1, t4 = t3 * t1, t5 = t4 * t1;
    energy += 36.0 * c3.squaredNorm() * t1 + 144.0 * c4.dot(c3) * t2 +
              192.0 * c4.squaredNorm() * t3 + 240.0 * c5.dot(c3) * t3 +
              720.0 * c5.dot(c4) * t4 + 720.0 * c5.squaredNorm() * t5;
  }
  return energy;
}

void MincoSpline::energyGradients(Eigen::MatrixX2d &grad_coeffs,
                                  Eigen::VectorXd &grad_times) const {
  for (int i = 0; i < pieces_; ++i) {
    const auto c3 = coeffs_.row(6 * i + 3);
    const auto c4 = coeffs_.row(6 * i + 4);
    const auto c5 = coeffs_.row(6 * i + 5);
    const double t1 = durations_[i];
    const double t2 = t1 * t1, t3 = t2 * t1, t4 = t3 * t1, t5 = t4 * t1;
    grad_coeffs.row(6 * i + 3) += 72.0 * c3 * t1 + 144.0 * c4 * t2 + 240.0 * c5 * t3;
    grad_coeffs.row(6 * i + 4) += 144.0 * c3 * t2 + 384.0 * c4 * t3 + 720.0 * c5 * t4;
    grad_coeffs.row(6 * i + 5) += 240.0 * c3 * t3 + 720.0 * c4 * t4 + 1440.0 * c5 * t5;
    grad_times[i] += 36.0 * c3.squaredNorm() + 288.0 * c4.dot(c3) * t1 +
                     576.0 * c4.squaredNorm() * t2 + 720.0 * c5.dot(c3) * t2 +
                     2880.0 * c5.dot(c4) * t3 + 3600.0 * c5.squaredNorm() * t4;
  }
}

void MincoSpline::propagateGradients(const Eigen::MatrixX2d &partial_by_coeffs,
                                     const Eigen::VectorXd &partial_by_times,
                                     Eigen::Matrix2Xd &grad_inner,
                                     Eigen::VectorXd &grad_times) const {
  Eigen::MatrixX2d adj = partial_by_coeffs;
  A_.solveAdj(adj);

  grad_inner.resize(2, pieces_ - 1);
  for (int i = 0; i < pieces_ - 1; ++i) {
    grad_inner.col(i) = adj.row(6 * i + 5).transpose();
  }

  grad_times = partial_by_times;
  Eigen::Matrix<double, 6, 2> B1;
  for (int i = 0; i < pieces_ - 1; ++i) {
    const double t1 = durations_[i];
    const double t2 = t1 * t1, t3 = t2 * t1, t4 = t3 * t1;
    const int r = 6 * i;
    // Each constraint row depends on T_i through the end-of-piece basis;
    // the adjoint picks up minus its time derivative.
    const Eigen::RowVector2d vel =
        coeffs_.row(r + 1) + 2.0 * t1 * coeffs_.row(r + 2) +
        3.0 * t2 * coeffs_.row(r + 3) + 4.0 * t3 * coeffs_.row(r + 4) +
        5.0 * t4 * coeffs_.row(r + 5);
    const Eigen::RowVector2d acc =
        2.0 * coeffs_.row(r + 2) + 6.0 * t1 * coeffs_.row(r + 3) +
        12.0 * t2 * coeffs_.row(r + 4) + 20.0 * t3 * coeffs_.row(r + 5);
    const Eigen::RowVector2d jerk =
        6.0 * coeffs_.row(r + 3) + 24.0 * t1 * coeffs_.row(r + 4) +
        60.0 * t2 * coeffs_.row(r + 5);
    const Eigen::RowVector2d snap =
        24.0 * coeffs_.row(r + 4) + 120.0 * t1 * coeffs_.row(r + 5);
    const Eigen::RowVector2d crackle = 120.0 * coeffs_.row(r + 5);
    B1.row(0) = -snap;     // jerk-continuity row
    B1.row(1) = -crackle;  // snap-continuity row
    B1.row(2) = -vel;      // waypoint row
    B1.row(3) = -vel;      // position-continuity row
    B1.row(4) = -acc;      // velocity-continuity row
    B1.row(5) = -jerk;     // acceleration-continuity row
    grad_times[i] += B1.cwiseProduct(adj.block<6, 2>(r + 3, 0)).sum();
  }

  const int e = 6 * pieces_ - 6;
  const double t1 = durations_[pieces_ - 1];
  const double t2 = t1 * t1, t3 = t2 * t1, t4 = t3 * t1;
  const Eigen::RowVector2d vel =
      coeffs_.row(e + 1) + 2.0 * t1 * coeffs_.row(e + 2) +
      3.0 * t2 * coeffs_.row(e + 3) + 4.0 * t3 * coeffs_.row(e + 4) +
      5.0 * t4 * coeffs_.row(e + 5);
  const Eigen::RowVector2d acc =
      2.0 * coeffs_.row(e + 2) + 6.0 * t1 * coeffs_.row(e + 3) +
      12.0 * t2 * coeffs_.row(e + 4) + 20.0 * t3 * coeffs_.row(e + 5);
  const Eigen::RowVector2d jerk =
      6.0 * coeffs_.row(e + 3) + 24.0 * t1 * coeffs_.row(e + 4) +
      60.0 * t2 * coeffs_.row(e + 5);
  Eigen::Matrix<double, 3, 2> B2;
  B2.row(0) = -vel;
  B2.row(1) = -acc;
  B2.row(2) = -jerk;
  grad_times[pieces_ - 1] += B2.cwiseProduct(adj.block<3, 2>(e + 3, 0)).sum();
}

}  // namespace itrack
