#include "jumphinf/markov.hpp"

#include <cmath>
#include <sstream>

#include "jumphinf/rng.hpp"

namespace jumphinf {

TransitionRateMatrix::TransitionRateMatrix(Eigen::MatrixXd q) : Q(std::move(q)) {
  auto issues = rate_matrix_issues(Q);
  if (!issues.empty()) {
    std::ostringstream os;
    os << "invalid transition rate matrix:";
    for (const auto& s : issues) os << " " << s << ";";
    throw ConfigError(os.str());
  }
}

std::vector<std::string> rate_matrix_issues(const Eigen::MatrixXd& Q) {
  std::vector<std::string> issues;
  if (Q.rows() != Q.cols()) {
    issues.push_back("matrix is not square");
    return issues;
  }
  for (int r = 0; r < Q.rows(); ++r) {
    for (int c = 0; c < Q.cols(); ++c) {
      if (r != c && Q(r, c) < 0) {
        std::ostringstream os;
        os << "negative off-diagonal rate q(" << r + 1 << "," << c + 1
           << ") = " << Q(r, c);
        issues.push_back(os.str());
      }
    }
    const double rowsum = Q.row(r).sum();
    if (std::abs(rowsum) > 1e-12) {
      std::ostringstream os;
      os << "row " << r + 1 << " sums to " << rowsum;
      issues.push_back(os.str());
    }
  }
  return issues;
}

Eigen::RowVectorXd steady_state(const TransitionRateMatrix& Q) {
  const int M = Q.mode_count();
  const Eigen::MatrixXd shifted = Q.Q + Eigen::MatrixXd::Ones(M, M);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(shifted);
  if (!lu.isInvertible()) throw NotErgodic("Q + E is singular");
  // q = e (Q+E)^{-1}  <=>  (Q+E)' q' = e'
  const Eigen::VectorXd q = lu.transpose().solve(Eigen::VectorXd::Ones(M));
  if ((q.array() <= 0).any())
    throw NotErgodic("stationary distribution has a nonpositive entry");
  return q.transpose();
}

int ModePath::mode_at(double t) const {
  int k = static_cast<int>(jump_times.size()) - 1;
  while (k > 0 && jump_times[k] > t) --k;
  return modes[k];
}

ModePath sample_path(const TransitionRateMatrix& Q, int eta0, double T,
                     std::uint64_t seed, std::uint64_t stream_id) {
  const int M = Q.mode_count();
  if (eta0 < 1 || eta0 > M) throw OutOfRange("initial mode out of range");
  if (T <= 0) throw ConfigError("horizon must be positive");

  SplitMix64 rng(seed, stream_id);
  ModePath path;
  path.horizon = T;
  double t = 0.0;
  int mode = eta0;
  path.jump_times.push_back(0.0);
  path.modes.push_back(mode);

  while (true) {
    const double exit_rate = -Q.Q(mode - 1, mode - 1);
    if (exit_rate <= 0) {
      path.absorbed = true;
      return path;
    }
    t += rng.exponential(exit_rate);
    if (t >= T) return path;
    double u = rng.uniform() * exit_rate;
    int next = -1;
    for (int nu = 1; nu <= M; ++nu) {
      if (nu == mode) continue;
      u -= Q.Q(mode - 1, nu - 1);
      if (u <= 0) {
        next = nu;
        break;
      }
    }
    if (next < 0) {
      for (int nu = M; nu >= 1; --nu) {
        if (nu != mode && Q.Q(mode - 1, nu - 1) > 0) {
          next = nu;
          break;
        }
      }
    }
    mode = next;
    path.jump_times.push_back(t);
    path.modes.push_back(mode);
  }
}

Eigen::VectorXd occupancy(const ModePath& path) {
  int M = 0;
  for (int m : path.modes) M = std::max(M, m);
  Eigen::VectorXd frac = Eigen::VectorXd::Zero(M);
  for (std::size_t k = 0; k < path.modes.size(); ++k) {
    const double t0 = path.jump_times[k];
    const double t1 = (k + 1 < path.jump_times.size()) ? path.jump_times[k + 1]
                                                       : path.horizon;
    frac[path.modes[k] - 1] += t1 - t0;
  }
  return frac / path.horizon;
}

}  // namespace jumphinf
