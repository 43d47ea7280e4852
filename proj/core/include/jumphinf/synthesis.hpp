#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "jumphinf/lmi.hpp"
#include "jumphinf/model.hpp"
#include "jumphinf/solver.hpp"

namespace jumphinf {

// Gain tables index as gains[i-1][mode-1]; each entry is m_i x n_i.
using GainTable = std::vector<std::vector<Eigen::MatrixXd>>;

struct GainGapEntry {
  int i = 0;
  int mu = 0;
  Eigen::MatrixXd delta;
  double norm = 0.0;     // spectral norm of delta
  double beta_u = 0.0;   // phi_i * beta_tilde_i(mu)
  bool pass = false;     // norm^2 <= beta_u (+ slack)
};

struct GainGapReport {
  std::vector<GainGapEntry> entries;
  bool all_pass() const;
  double worst_excess() const;  // max over entries of norm^2 - beta_u
};

struct SynthesisResult {
  SolveStatus status = SolveStatus::Stalled;
  std::string stage;  // last pipeline stage reached
  double gamma = 0.0;

  GainTable global_gains;  // K~_i(mu)
  GainTable local_gains;   // K_i(nu)
  GainGapReport gaps;
  std::vector<std::vector<double>> beta_u;  // [i-1][mu-1]

  Eigen::VectorXd point;
  ResidualReport margins;
  int solver_iterations = 0;
  int restarts_used = 0;

  bool feasible() const { return status == SolveStatus::Feasible; }
};

// K~_i(mu) = -R~_i(mu)^{-1} B~_i'(mu) Xbar_i(mu) from a refined point.
GainTable extract_global_gains(const AuxiliarySystem& aux,
                               const VariableLayout& layout,
                               const Eigen::VectorXd& point);

// K_i(nu) = q_inf-weighted average of K~_i(mu) over the class of nu.
GainTable localize_gains(const GainTable& global_gains,
                         const ModePatternMap& map,
                         const Eigen::RowVectorXd& q_inf);

GainGapReport gain_gap_check(const GainTable& global_gains,
                             const GainTable& local_gains,
                             const ModePatternMap& map,
                             const std::vector<std::vector<double>>& beta_u,
                             double slack = 1e-9);

SynthesisResult synthesize(const LargeScaleModel& model, double gamma,
                           const SolverOptions& opts);

// Bisection on gamma over [lo, hi]; returns the best feasible result found.
SynthesisResult synthesize_min_gamma(const LargeScaleModel& model, double lo,
                                     double hi, double tol,
                                     const SolverOptions& opts);

// Per global mode, the nominal closed loop stacked block-diagonally over
// subsystems: state matrix A~ + B~ K~, input G~, output C~ + D~ K~, zero
// feedthrough.
std::vector<ModeLTI> nominal_closed_loop(const AuxiliarySystem& aux,
                                         const GainTable& global_gains);

FeasibilityOutcome verify_nominal_brl(const LargeScaleModel& model,
                                      const GainTable& global_gains,
                                      double gamma, const SolverOptions& opts);

std::string to_json(const SynthesisResult& result);

}  // namespace jumphinf
