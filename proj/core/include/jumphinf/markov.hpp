#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "jumphinf/errors.hpp"

namespace jumphinf {

struct TransitionRateMatrix {
  Eigen::MatrixXd Q;

  TransitionRateMatrix() = default;
  explicit TransitionRateMatrix(Eigen::MatrixXd q);

  int mode_count() const { return static_cast<int>(Q.rows()); }
  double rate(int mu, int nu) const { return Q(mu - 1, nu - 1); }
};

// Off-diagonal nonnegativity and zero row sums; empty result means valid.
std::vector<std::string> rate_matrix_issues(const Eigen::MatrixXd& Q);

// q_inf = e (Q + E)^{-1} with E the all-ones matrix.  Throws NotErgodic when
// Q + E is singular or any stationary probability fails to be positive.
Eigen::RowVectorXd steady_state(const TransitionRateMatrix& Q);

struct ModePath {
  std::vector<double> jump_times;  // starts at 0; entry k opens interval k
  std::vector<int> modes;          // mode during [jump_times[k], next time)
  double horizon = 0.0;
  bool absorbed = false;  // a state with zero exit rate was entered

  int mode_at(double t) const;
  int jump_count() const { return static_cast<int>(jump_times.size()) - 1; }
};

ModePath sample_path(const TransitionRateMatrix& Q, int eta0, double T,
                     std::uint64_t seed, std::uint64_t stream_id = 0);

// Fraction of [0, T] spent in each mode.
Eigen::VectorXd occupancy(const ModePath& path);

}  // namespace jumphinf
