#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "jumphinf/markov.hpp"
#include "jumphinf/model.hpp"
#include "jumphinf/synthesis.hpp"

namespace jumphinf {

struct Controller {
  enum class Kind { None, Local, Global };
  Kind kind = Kind::None;
  GainTable gains;  // [i-1][local or global mode - 1] per kind

  static Controller none() { return {}; }
  static Controller local(GainTable g) { return {Kind::Local, std::move(g)}; }
  static Controller global(GainTable g) { return {Kind::Global, std::move(g)}; }
};

struct UncertaintyOperator {
  enum class Kind { Local, Interconnection };
  Kind kind = Kind::Local;
  Eigen::MatrixXd A, B, C, D;
  Eigen::VectorXd x0;  // zero-initialized when empty

  int state_dim() const { return static_cast<int>(A.rows()); }
};

// Per-subsystem operator slots; either may be absent.
struct SubsystemUncertainty {
  std::optional<UncertaintyOperator> local;
  std::optional<UncertaintyOperator> inter;
};

using UncertaintySet = std::vector<SubsystemUncertainty>;

struct DisturbanceSignal {
  enum class Family { Zero, ExpDecay, Sampled };
  Family family = Family::Zero;
  double amplitude = 0.0;
  double rate = 0.0;
  std::vector<double> times;   // Sampled: increasing grid
  std::vector<double> values;  // Sampled: linear interpolation, 0 outside

  static DisturbanceSignal zero() { return {}; }
  static DisturbanceSignal exp_decay(double amplitude, double rate);
  static DisturbanceSignal sampled(std::vector<double> times,
                                   std::vector<double> values);

  double value(double t) const;
};

struct TrajectoryRecord {
  std::vector<double> times;
  std::vector<int> global_modes;               // mode governing [t_k, t_{k+1})
  std::vector<std::vector<int>> local_modes;   // [i-1][k]
  std::vector<Eigen::MatrixXd> states;         // [i-1]: n_i x grid
  std::vector<Eigen::MatrixXd> controls;       // m_i x grid
  std::vector<Eigen::MatrixXd> outputs;        // p_z x grid
  std::vector<Eigen::MatrixXd> zetas;          // p_zeta x grid
  std::vector<Eigen::MatrixXd> xis;            // p_xi x grid
  std::vector<Eigen::MatrixXd> rs;             // p_r x grid

  // Cumulative trapezoidal integrals on the grid.
  Eigen::VectorXd z_energy;                    // int sum_i |z_i|^2
  Eigen::VectorXd w_energy;                    // int sum_i |w_i|^2
  std::vector<Eigen::VectorXd> iqc_local;      // [i-1]: int (|zeta_i|^2 - |xi_i|^2)
  std::vector<Eigen::VectorXd> iqc_inter;      // [i-1]: int (sum_{j!=i} |zeta_j|^2 - |r_i|^2)

  ModePath path;
  double x0_sqnorm = 0.0;

  double xsq_at(int k) const;       // sum_i |x_i(t_k)|^2
  int grid_index(double t) const;   // largest k with times[k] <= t + 1e-12

  std::string to_csv() const;
};

TrajectoryRecord simulate(const LargeScaleModel& model,
                          const Controller& controller,
                          const UncertaintySet& uncertainties,
                          const std::vector<DisturbanceSignal>& disturbance,
                          double T, double dt, std::uint64_t seed,
                          std::uint64_t trajectory_id = 0);

enum class MssVerdict { Decayed, Diverged, Indeterminate };

struct MssEstimate {
  std::vector<double> times;       // uniform grid
  Eigen::VectorXd mean_xsq;        // sample mean of |x(t)|^2
  double x0_sqnorm = 0.0;
  MssVerdict verdict = MssVerdict::Indeterminate;
  double final_ratio = 0.0;        // mean |x(T)|^2 / |x0|^2
};

struct MssOptions {
  double decay_fraction = 0.01;
  double growth_factor = 10.0;
  int threads = 1;
};

// Mean over trajectories of the squared state norm on the uniform grid.
// Disturbance defaults to zero; pass signals to reproduce a forced run.
MssEstimate estimate_mss(const LargeScaleModel& model,
                         const Controller& controller,
                         const UncertaintySet& uncertainties, int n_traj,
                         double T, double dt, std::uint64_t seed,
                         const MssOptions& mss_opts = {},
                         const std::vector<DisturbanceSignal>* disturbance = nullptr);

// Empirical witness for the performance level: max over disturbance sets of
// sqrt(mean output energy / input energy), with x0 forced to zero.
double estimate_hinf_lower(const LargeScaleModel& model,
                           const Controller& controller,
                           const UncertaintySet& uncertainties,
                           const std::vector<std::vector<DisturbanceSignal>>& disturbance_sets,
                           int n_traj, double T, double dt, std::uint64_t seed,
                           int threads = 1);

struct IqcCheck {
  int i = 0;
  double t = 0.0;
  double lhs_local = 0.0;   // ledger (1) + x0' S_bar x0
  double lhs_inter = 0.0;   // ledger (2) + x0' S_tilde x0
  bool pass_local = false;
  bool pass_inter = false;
};

struct IqcReport {
  std::vector<IqcCheck> checks;
  bool all_pass() const;
  double worst_local() const;  // most negative lhs_local
  double worst_inter() const;
};

IqcReport iqc_audit(const TrajectoryRecord& record,
                    const std::vector<UncertaintyBudget>& budgets,
                    const std::vector<double>& checkpoints);

// Same inequalities on sample means of the ledgers across records.
IqcReport iqc_audit_mean(const std::vector<TrajectoryRecord>& records,
                         const std::vector<UncertaintyBudget>& budgets,
                         const std::vector<double>& checkpoints);

}  // namespace jumphinf
