// Acceptance gate: every check prints exactly one line
//   criterion N: PASS|FAIL - detail (runtime)
// and the process exit code is the number of failures.  Pass criterion
// numbers as arguments to run a subset.

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fixture.hpp"
#include "jumphinf/lmi.hpp"
#include "jumphinf/markov.hpp"
#include "jumphinf/model.hpp"
#include "jumphinf/rng.hpp"
#include "jumphinf/sim.hpp"
#include "jumphinf/solver.hpp"
#include "jumphinf/synthesis.hpp"

using namespace jumphinf;

namespace {

constexpr double kLocalGainTol = 1e-3;   // criterion 1, per entry
constexpr double kStationaryResidual = 1e-10;
constexpr double kStationarySum = 1e-12;
constexpr double kCertMargin = 1e-7;     // criteria 4 and 5
constexpr double kDecayFraction = 0.01;  // criterion 6, closed loop
constexpr double kGrowthFactor = 10.0;   // criterion 6, open loop
constexpr double kScalarWitnessTol = 1e-3;
constexpr double kLedgerSlack = -1e-9;   // criterion 8
constexpr double kProjOptimalitySlack = 1e-6;
constexpr double kOccupancyTol = 0.02;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

const tools::RunConfig& example_config() {
  static const tools::RunConfig cfg = testfix::example_config();
  return cfg;
}

std::vector<DisturbanceSignal> example_disturbance() {
  return {example_config().simulation.disturbance};
}

// Criteria 4, 5, 7 and 8 share one synthesis of the bundled example; the
// ladder relaxes the performance level only if the nominal one stalls.
struct SynthesisCache {
  SynthesisResult result;
  double target = 0.0;
  bool ran = false;
};

SynthesisCache& synthesis_cache() {
  static SynthesisCache cache;
  if (!cache.ran) {
    const tools::RunConfig& cfg = example_config();
    cache.target = cfg.model.gamma;
    for (double gamma : {cfg.model.gamma, 1.40, 1.45, 1.50}) {
      cache.result = synthesize(cfg.model, gamma, cfg.solver);
      if (cache.result.feasible()) break;
    }
    cache.ran = true;
  }
  return cache;
}

Outcome criterion_localization() {
  const tools::RunConfig& cfg = example_config();
  const Eigen::RowVectorXd q = steady_state(cfg.model.Q);
  const GainTable local =
      localize_gains(cfg.reference.global_gains, cfg.model.pattern_map, q);

  double worst = 0.0;
  int wi = 0, wnu = 0;
  for (std::size_t i = 0; i < local.size(); ++i)
    for (std::size_t nu = 0; nu < local[i].size(); ++nu) {
      const double err = (local[i][nu] - cfg.reference.local_gains[i][nu])
                             .cwiseAbs()
                             .maxCoeff();
      if (err > worst) {
        worst = err;
        wi = static_cast<int>(i) + 1;
        wnu = static_cast<int>(nu) + 1;
      }
    }

  Outcome out;
  out.pass = worst <= kLocalGainTol;
  std::ostringstream os;
  os << "worst entry error " << fmt(worst) << " at (i=" << wi << ", nu=" << wnu
     << "), tolerance " << fmt(kLocalGainTol);
  out.detail = os.str();
  return out;
}

Outcome criterion_steady_state() {
  const Eigen::MatrixXd& Q = example_config().model.Q.Q;
  const Eigen::RowVectorXd q = steady_state(example_config().model.Q);

  // Independent oracle: null space of Q' by full-pivot LU, normalized.
  Eigen::FullPivLU<Eigen::MatrixXd> lu(Q.transpose());
  lu.setThreshold(1e-12);
  const Eigen::MatrixXd kernel = lu.kernel();
  Outcome out;
  if (kernel.cols() != 1) {
    out.detail = "kernel of Q' is not one-dimensional";
    return out;
  }
  Eigen::RowVectorXd oracle = kernel.col(0).transpose();
  oracle /= oracle.sum();

  const double residual = (q * Q).cwiseAbs().maxCoeff();
  const double sum_err = std::abs(q.sum() - 1.0);
  const double oracle_err = (q - oracle).cwiseAbs().maxCoeff();
  out.pass = residual <= kStationaryResidual && sum_err <= kStationarySum &&
             oracle_err <= kStationaryResidual;
  out.detail = "|qQ|=" + fmt(residual) + ", |sum-1|=" + fmt(sum_err) +
               ", oracle gap=" + fmt(oracle_err);
  return out;
}

Outcome criterion_brl_sanity() {
  ModeLTI md;
  md.A = (Eigen::MatrixXd(1, 1) << -1.0).finished();
  md.B = Eigen::MatrixXd::Identity(1, 1);
  md.C = Eigen::MatrixXd::Identity(1, 1);
  md.D = Eigen::MatrixXd::Zero(1, 1);
  const TransitionRateMatrix Q(Eigen::MatrixXd::Zero(1, 1));

  SolverOptions opts;
  opts.accel = Accel::Reflected;
  opts.max_iters = 2000;

  const BuiltProblem above = build_brl({md}, Q, 1.05);
  const FeasibilityOutcome yes = solve_feasibility(above.set, above.layout, opts);

  SolverOptions tight = opts;
  tight.max_iters = 500;
  tight.stall_window = 80;
  tight.restarts = 1;
  const BuiltProblem below = build_brl({md}, Q, 0.95);
  const FeasibilityOutcome no = solve_feasibility(below.set, below.layout, tight);

  Outcome out;
  out.pass = yes.feasible() && !no.feasible();
  out.detail = std::string("gamma=1.05 ") + status_name(yes.status) +
               ", gamma=0.95 " + status_name(no.status) +
               " (transfer norm is 1)";
  return out;
}

Outcome criterion_feasibility() {
  const SynthesisCache& cache = synthesis_cache();
  const SynthesisResult& r = cache.result;

  Outcome out;
  if (!r.feasible()) {
    out.detail = "stalled up to gamma=1.50, last stage " + r.stage +
                 ", best margin " + fmt(r.margins.max_margin);
    return out;
  }
  const bool margins_ok = r.margins.max_margin <= kCertMargin;
  const bool gaps_ok = r.gaps.all_pass();
  out.pass = margins_ok && gaps_ok;
  std::ostringstream os;
  os << "gamma=" << r.gamma;
  if (r.gamma > cache.target) os << " (relaxed from " << cache.target << ")";
  os << ", max margin " << fmt(r.margins.max_margin) << " (tol "
     << fmt(kCertMargin) << "), gain gap "
     << (gaps_ok ? "holds" : "violated") << " (worst excess "
     << fmt(r.gaps.worst_excess()) << ")";
  out.detail = os.str();
  return out;
}

Outcome criterion_nominal_brl() {
  const SynthesisResult& r = synthesis_cache().result;
  Outcome out;
  if (!r.feasible()) {
    out.detail = "no synthesized gains to verify";
    return out;
  }
  const tools::RunConfig& cfg = example_config();
  const FeasibilityOutcome brl =
      verify_nominal_brl(cfg.model, r.global_gains, r.gamma, cfg.solver);
  out.pass = brl.feasible();
  out.detail = std::string("closed loop at gamma=") + fmt(r.gamma) + ": " +
               status_name(brl.status) + ", margin " +
               fmt(brl.certificate.max_margin);
  return out;
}

Outcome criterion_stability_reproduction() {
  const tools::RunConfig& cfg = example_config();
  const auto signals = example_disturbance();
  MssOptions mss;
  mss.decay_fraction = kDecayFraction;
  mss.growth_factor = kGrowthFactor;

  const MssEstimate closed = estimate_mss(
      cfg.model, Controller::local(cfg.reference.local_gains),
      cfg.simulation.uncertainty, cfg.simulation.n_traj, 10.0, 1e-3,
      cfg.simulation.seed, mss, &signals);
  const MssEstimate open = estimate_mss(
      cfg.model, Controller::none(), cfg.simulation.uncertainty,
      cfg.simulation.n_traj, 5.0, 1e-3, cfg.simulation.seed, mss, &signals);

  const bool closed_ok = closed.verdict == MssVerdict::Decayed;
  const bool open_ok = std::isfinite(open.final_ratio)
                           ? open.final_ratio >= kGrowthFactor
                           : true;
  Outcome out;
  out.pass = closed_ok && open_ok;
  out.detail = "reference gains: mean|x(10)|^2/|x0|^2 = " +
               fmt(closed.final_ratio) + " (need <= " + fmt(kDecayFraction) +
               "); open loop: mean|x(5)|^2/|x0|^2 = " + fmt(open.final_ratio) +
               " (need >= " + fmt(kGrowthFactor) + ")";
  return out;
}

Outcome criterion_hinf_witness() {
  Outcome out;

  // Scalar oracle: x' = -x + w, z = (x, u), u = 0, w = e^{-t/2}.
  const LargeScaleModel scalar = testfix::scalar_model();
  const double scalar_witness = estimate_hinf_lower(
      scalar, Controller::none(), {}, {{DisturbanceSignal::exp_decay(1.0, 0.5)}},
      1, 20.0, 1e-3, 0);
  const double scalar_err = std::abs(scalar_witness - std::sqrt(2.0 / 3.0));

  const SynthesisResult& r = synthesis_cache().result;
  if (!r.feasible()) {
    out.detail = "no synthesized gains; scalar witness " + fmt(scalar_witness);
    return out;
  }
  const tools::RunConfig& cfg = example_config();
  const double witness = estimate_hinf_lower(
      cfg.model, Controller::local(r.local_gains), cfg.simulation.uncertainty,
      {example_disturbance()}, cfg.simulation.n_traj, 10.0, 1e-3,
      cfg.simulation.seed);

  out.pass = witness < r.gamma && scalar_err <= kScalarWitnessTol;
  out.detail = "witness " + fmt(witness) + " < gamma " + fmt(r.gamma) +
               "; scalar witness " + fmt(scalar_witness) + " vs sqrt(2/3), err " +
               fmt(scalar_err);
  return out;
}

Outcome criterion_iqc_audit() {
  const SynthesisResult& r = synthesis_cache().result;
  Outcome out;
  if (!r.feasible()) {
    out.detail = "no synthesized gains to close the loop";
    return out;
  }
  const tools::RunConfig& cfg = example_config();
  const auto signals = example_disturbance();
  const std::vector<double> checkpoints = cfg.simulation.checkpoints;

  bool all_pass = true;
  double worst_local = std::numeric_limits<double>::infinity();
  double worst_inter = std::numeric_limits<double>::infinity();
  for (int k = 0; k < cfg.simulation.n_traj; ++k) {
    const TrajectoryRecord rec = simulate(
        cfg.model, Controller::local(r.local_gains), cfg.simulation.uncertainty,
        signals, 10.0, 1e-3, cfg.simulation.seed, static_cast<std::uint64_t>(k));
    const IqcReport audit = iqc_audit(rec, cfg.model.budgets, checkpoints);
    all_pass = all_pass && audit.all_pass();
    worst_local = std::min(worst_local, audit.worst_local());
    worst_inter = std::min(worst_inter, audit.worst_inter());
  }

  out.pass = all_pass && worst_local >= kLedgerSlack && worst_inter >= kLedgerSlack;
  out.detail = "over " + std::to_string(cfg.simulation.n_traj) +
               " paths at t=1..10: worst local lhs " + fmt(worst_local) +
               ", worst inter lhs " + fmt(worst_inter);
  return out;
}

Outcome criterion_projection_oracles() {
  SplitMix64 rng(90210);
  double worst_idem = 0.0;
  double worst_excess = -std::numeric_limits<double>::infinity();
  int checked = 0;

  for (int n : {2, 3}) {
    for (int trial = 0; trial < 1000; ++trial) {
      Eigen::MatrixXd S(n, n);
      for (int rr = 0; rr < n; ++rr)
        for (int cc = 0; cc < n; ++cc) S(rr, cc) = 3.0 * rng.normal();
      S = 0.5 * (S + S.transpose()).eval();

      const Eigen::MatrixXd P = project_psd(S);
      worst_idem = std::max(
          worst_idem, (project_psd(P) - P).cwiseAbs().maxCoeff());
      const double dp = (S - P).norm();
      for (int t = 0; t < 40; ++t) {
        Eigen::MatrixXd R(n, n);
        for (int rr = 0; rr < n; ++rr)
          for (int cc = 0; cc < n; ++cc) R(rr, cc) = rng.normal();
        Eigen::MatrixXd cand = R * R.transpose();
        // Candidates near the projection probe local optimality too.
        if (t % 2 == 1) cand = project_psd(P + 0.05 * (cand - P));
        worst_excess = std::max(worst_excess, dp - (S - cand).norm());
      }

      for (int r = 1; r < n; ++r) {
        const Eigen::MatrixXd L = project_rank(S, r);
        worst_idem = std::max(
            worst_idem, (project_rank(L, r) - L).cwiseAbs().maxCoeff());
        const double dl = (S - L).norm();
        for (int t = 0; t < 40; ++t) {
          Eigen::MatrixXd V(n, r);
          for (int rr = 0; rr < n; ++rr)
            for (int cc = 0; cc < r; ++cc) V(rr, cc) = rng.normal();
          Eigen::MatrixXd cand = V * V.transpose();
          if (t % 2 == 1) cand = project_rank(L + 0.05 * (cand - L), r);
          worst_excess = std::max(worst_excess, dl - (S - cand).norm());
        }
      }
      ++checked;
    }
  }

  // Occupancy of the example chain against its stationary distribution.
  const TransitionRateMatrix& Q = example_config().model.Q;
  const Eigen::RowVectorXd q = steady_state(Q);
  const ModePath path = sample_path(Q, 1, 1e4, 2718, 0);
  Eigen::VectorXd occupancy = Eigen::VectorXd::Zero(q.size());
  for (std::size_t k = 0; k < path.jump_times.size(); ++k) {
    const double t0 = path.jump_times[k];
    const double t1 =
        k + 1 < path.jump_times.size() ? path.jump_times[k + 1] : 1e4;
    occupancy[path.modes[k] - 1] += t1 - t0;
  }
  occupancy /= 1e4;
  const double occ_err =
      (occupancy.transpose() - q).cwiseAbs().maxCoeff();

  Outcome out;
  out.pass = worst_idem <= 1e-12 && worst_excess <= kProjOptimalitySlack &&
             occ_err <= kOccupancyTol;
  out.detail = std::to_string(checked) +
               " matrices: idempotence " + fmt(worst_idem) +
               ", candidate excess " + fmt(worst_excess) +
               "; occupancy error " + fmt(occ_err) + " over T=1e4";
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<int, std::function<Outcome()>> criteria = {
      {1, criterion_localization},
      {2, criterion_steady_state},
      {3, criterion_brl_sanity},
      {4, criterion_feasibility},
      {5, criterion_nominal_brl},
      {6, criterion_stability_reproduction},
      {7, criterion_hinf_witness},
      {8, criterion_iqc_audit},
      {9, criterion_projection_oracles},
  };

  std::vector<int> selected;
  for (int a = 1; a < argc; ++a) {
    const int id = std::atoi(argv[a]);
    if (!criteria.count(id)) {
      std::fprintf(stderr, "unknown criterion '%s'\n", argv[a]);
      return 64;
    }
    selected.push_back(id);
  }
  if (selected.empty())
    for (const auto& [id, fn] : criteria) selected.push_back(id);

  int failures = 0;
  for (int id : selected) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = criteria.at(id)();
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    std::printf("criterion %d: %s - %s (%.1fs)\n", id,
                out.pass ? "PASS" : "FAIL", out.detail.c_str(), secs);
    std::fflush(stdout);
    if (!out.pass) ++failures;
  }
  return failures;
}
