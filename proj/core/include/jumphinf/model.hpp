#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "jumphinf/errors.hpp"
#include "jumphinf/markov.hpp"

namespace jumphinf {

// Subsystem and mode indices are 1-based throughout the public API, matching
// the usual control-theory convention.  Containers are still 0-based, so
// patterns[mu - 1] is the local-mode tuple of global mode mu.

class ModePatternMap {
 public:
  explicit ModePatternMap(std::vector<std::vector<int>> patterns);

  int subsystem_count() const { return static_cast<int>(counts_.size()); }
  int global_mode_count() const { return static_cast<int>(patterns_.size()); }
  int local_mode_count(int i) const;

  const std::vector<std::vector<int>>& patterns() const { return patterns_; }

  // Global mode index of a local-mode tuple and its inverse.
  int psi(const std::vector<int>& tuple) const;
  const std::vector<int>& psi_inv(int mu) const;

  // Local mode of subsystem i under global mode mu.
  int local_mode(int i, int mu) const;

  // All global modes whose i-th component equals nu, in increasing order.
  const std::vector<int>& class_of(int i, int nu) const;

 private:
  std::vector<std::vector<int>> patterns_;
  std::vector<int> counts_;
  std::map<std::vector<int>, int> index_;
  std::vector<std::vector<std::vector<int>>> classes_;
};

struct SubsystemModel {
  int n = 0;
  int m = 0;
  // Indexed by local mode - 1.
  std::vector<Eigen::MatrixXd> A, B, C, D, E, F, G, H;

  int mode_count() const { return static_cast<int>(A.size()); }
  int pz() const { return static_cast<int>(C.empty() ? 0 : C.front().rows()); }
  int pr() const { return static_cast<int>(E.empty() ? 0 : E.front().cols()); }
  int pxi() const { return static_cast<int>(F.empty() ? 0 : F.front().cols()); }
  int pw() const { return static_cast<int>(G.empty() ? 0 : G.front().cols()); }
  int pzeta() const { return static_cast<int>(H.empty() ? 0 : H.front().rows()); }

  Eigen::MatrixXd R(int nu) const;
};

struct UncertaintyBudget {
  Eigen::MatrixXd S_bar;
  Eigen::MatrixXd S_tilde;
};

struct LargeScaleModel {
  std::vector<SubsystemModel> subsystems;
  ModePatternMap pattern_map;
  TransitionRateMatrix Q;
  double gamma = 1.0;
  std::vector<UncertaintyBudget> budgets;
  std::vector<Eigen::VectorXd> x0;
  int eta0 = 1;

  int subsystem_count() const { return static_cast<int>(subsystems.size()); }
  int global_mode_count() const { return pattern_map.global_mode_count(); }

  // Throws ConfigError when dimensions or mode counts disagree.
  void check_consistency() const;
};

// Per-mode lookup view on a model: matrix families of the auxiliary
// global-mode system.  Holds references into the model, never copies.
class AuxiliarySystem {
 public:
  explicit AuxiliarySystem(const LargeScaleModel& model);

  const LargeScaleModel& model() const { return *model_; }
  int subsystem_count() const { return model_->subsystem_count(); }
  int global_mode_count() const { return model_->global_mode_count(); }

  const Eigen::MatrixXd& A(int i, int mu) const { return pick(i, mu, &SubsystemModel::A); }
  const Eigen::MatrixXd& B(int i, int mu) const { return pick(i, mu, &SubsystemModel::B); }
  const Eigen::MatrixXd& C(int i, int mu) const { return pick(i, mu, &SubsystemModel::C); }
  const Eigen::MatrixXd& D(int i, int mu) const { return pick(i, mu, &SubsystemModel::D); }
  const Eigen::MatrixXd& E(int i, int mu) const { return pick(i, mu, &SubsystemModel::E); }
  const Eigen::MatrixXd& F(int i, int mu) const { return pick(i, mu, &SubsystemModel::F); }
  const Eigen::MatrixXd& G(int i, int mu) const { return pick(i, mu, &SubsystemModel::G); }
  const Eigen::MatrixXd& H(int i, int mu) const { return pick(i, mu, &SubsystemModel::H); }

  // R tilde = D~' D~, cached per (i, mu).
  const Eigen::MatrixXd& R(int i, int mu) const;

 private:
  const Eigen::MatrixXd& pick(int i, int mu,
                              std::vector<Eigen::MatrixXd> SubsystemModel::*family) const;

  const LargeScaleModel* model_;
  std::vector<std::vector<Eigen::MatrixXd>> r_cache_;
};

struct AssumptionCheck {
  int subsystem = 0;
  int local_mode = 0;
  std::string name;
  bool pass = true;
  std::string detail;
};

struct AssumptionReport {
  std::vector<AssumptionCheck> checks;
  std::vector<std::string> notes;
  bool all_pass() const;
};

AssumptionReport validate_assumptions(const LargeScaleModel& model, double tol = 1e-9);

}  // namespace jumphinf
