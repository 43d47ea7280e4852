#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "jumphinf/lmi.hpp"

namespace jumphinf {

enum class Accel {
  None,       // plain alternating projections
  Reflected,  // Douglas-Rachford splitting of the same two projections
};

struct SolverOptions {
  int max_iters = 5000;
  double residual_tol = 1e-7;
  int stall_window = 200;
  int restarts = 5;
  std::uint64_t seed = 0;
  double epsilon = 1e-6;
  Accel accel = Accel::None;
  int threads = 1;
  std::ostream* iter_log = nullptr;  // CSV: iter, max_margin, dist2, family norms
};

enum class SolveStatus { Feasible, Infeasible, Stalled };

const char* status_name(SolveStatus s);

struct FeasibilityOutcome {
  SolveStatus status = SolveStatus::Stalled;
  Eigen::VectorXd point;
  std::vector<double> history;  // max margin per iteration
  ResidualReport certificate;
  int iterations = 0;
  int restarts_used = 0;

  bool feasible() const { return status == SolveStatus::Feasible; }
};

// Nearest PSD matrix in Frobenius norm.
Eigen::MatrixXd project_psd(const Eigen::MatrixXd& S);

// Nearest PSD matrix of rank at most r in Frobenius norm.
Eigen::MatrixXd project_rank(const Eigen::MatrixXd& S, int r);

FeasibilityOutcome solve_feasibility(
    const ConstraintSet& set, const VariableLayout& layout,
    const SolverOptions& opts,
    const std::optional<Eigen::VectorXd>& warm_start = std::nullopt);

// Substitutes Xbar := X^{-1} and beta_bar := 1 / beta_tilde, then
// re-certifies.  Throws RefinementFailed when some X is numerically singular.
FeasibilityOutcome refine_and_certify(const ConstraintSet& set,
                                      const VariableLayout& layout,
                                      const Eigen::VectorXd& point, double tol);

}  // namespace jumphinf
