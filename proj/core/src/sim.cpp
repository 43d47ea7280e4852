#include "jumphinf/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <iomanip>
#include <limits>
#include <sstream>
#include <thread>

#include "jumphinf/errors.hpp"

namespace jumphinf {

DisturbanceSignal DisturbanceSignal::exp_decay(double amplitude, double rate) {
  DisturbanceSignal s;
  s.family = Family::ExpDecay;
  s.amplitude = amplitude;
  s.rate = rate;
  return s;
}

DisturbanceSignal DisturbanceSignal::sampled(std::vector<double> times,
                                             std::vector<double> values) {
  if (times.size() != values.size() || times.empty())
    throw ConfigError("sampled signal needs matching nonempty times and values");
  if (!std::is_sorted(times.begin(), times.end()))
    throw ConfigError("sampled signal times must be increasing");
  DisturbanceSignal s;
  s.family = Family::Sampled;
  s.times = std::move(times);
  s.values = std::move(values);
  return s;
}

double DisturbanceSignal::value(double t) const {
  switch (family) {
    case Family::Zero:
      return 0.0;
    case Family::ExpDecay:
      return amplitude * std::exp(-rate * t);
    case Family::Sampled: {
      if (t < times.front() || t > times.back()) return 0.0;
      auto it = std::upper_bound(times.begin(), times.end(), t);
      if (it == times.begin()) return values.front();
      const std::size_t hi = static_cast<std::size_t>(it - times.begin());
      if (hi == times.size()) return values.back();
      const std::size_t lo = hi - 1;
      const double span = times[hi] - times[lo];
      if (span <= 0) return values[lo];
      const double a = (t - times[lo]) / span;
      return (1.0 - a) * values[lo] + a * values[hi];
    }
  }
  return 0.0;
}

double TrajectoryRecord::xsq_at(int k) const {
  double s = 0.0;
  for (const auto& X : states) s += X.col(k).squaredNorm();
  return s;
}

int TrajectoryRecord::grid_index(double t) const {
  auto it = std::upper_bound(times.begin(), times.end(), t + 1e-12);
  if (it == times.begin())
    throw OutOfRange("time precedes the simulation grid");
  return static_cast<int>(it - times.begin()) - 1;
}

std::string TrajectoryRecord::to_csv() const {
  const int N = static_cast<int>(states.size());
  std::ostringstream os;
  os << std::setprecision(12);
  os << "t,mode";
  for (int i = 1; i <= N; ++i) os << ",theta_" << i;
  for (int i = 1; i <= N; ++i)
    for (int r = 0; r < states[i - 1].rows(); ++r)
      os << ",x_" << i << "_" << (r + 1);
  os << ",xsq,z_energy,w_energy";
  for (int i = 1; i <= N; ++i) os << ",iqc_local_" << i;
  for (int i = 1; i <= N; ++i) os << ",iqc_inter_" << i;
  os << "\n";
  for (std::size_t k = 0; k < times.size(); ++k) {
    os << times[k] << "," << global_modes[k];
    for (int i = 0; i < N; ++i) os << "," << local_modes[i][k];
    for (int i = 0; i < N; ++i)
      for (int r = 0; r < states[i].rows(); ++r) os << "," << states[i](r, k);
    os << "," << xsq_at(static_cast<int>(k)) << "," << z_energy[k] << ","
       << w_energy[k];
    for (int i = 0; i < N; ++i) os << "," << iqc_local[i][k];
    for (int i = 0; i < N; ++i) os << "," << iqc_inter[i][k];
    os << "\n";
  }
  return os.str();
}

namespace {

struct SubsystemSlots {
  int plant = 0;      // offset of the plant state
  int loc = -1;       // offset of the local operator state, -1 if absent
  int loc_dim = 0;
  int inter = -1;     // offset of the interconnection operator state
  int inter_dim = 0;
};

struct SimWorkspace {
  const LargeScaleModel* model = nullptr;
  const Controller* controller = nullptr;
  const UncertaintySet* uncertainties = nullptr;
  std::vector<DisturbanceSignal> signals;  // one per subsystem
  std::vector<SubsystemSlots> slots;
  int total_dim = 0;
  bool any_inter = false;

  const UncertaintyOperator* local_op(int i) const {
    if (uncertainties->empty()) return nullptr;
    const auto& slot = (*uncertainties)[i - 1];
    return slot.local ? &*slot.local : nullptr;
  }
  const UncertaintyOperator* inter_op(int i) const {
    if (uncertainties->empty()) return nullptr;
    const auto& slot = (*uncertainties)[i - 1];
    return slot.inter ? &*slot.inter : nullptr;
  }
};

struct Snapshot {
  std::vector<Eigen::VectorXd> u, z, zeta, xi, r, w;
  Eigen::VectorXd xdot;
};

void check_operator(const UncertaintyOperator& op, int in_dim, int out_dim,
                    const std::string& what) {
  if (op.A.rows() != op.A.cols())
    throw ConfigError(what + ": state matrix must be square");
  if (op.B.rows() != op.A.rows() || op.B.cols() != in_dim)
    throw ConfigError(what + ": input matrix shape mismatch");
  if (op.C.cols() != op.A.rows() || op.C.rows() != out_dim)
    throw ConfigError(what + ": output matrix shape mismatch");
  if (op.D.rows() != out_dim || op.D.cols() != in_dim)
    throw ConfigError(what + ": feedthrough shape mismatch");
  if (op.x0.size() != 0 && op.x0.size() != op.A.rows())
    throw ConfigError(what + ": initial state length mismatch");
}

SimWorkspace prepare(const LargeScaleModel& model, const Controller& controller,
                     const UncertaintySet& uncertainties,
                     const std::vector<DisturbanceSignal>& disturbance) {
  const int N = model.subsystem_count();
  SimWorkspace ws;
  ws.model = &model;
  ws.controller = &controller;
  ws.uncertainties = &uncertainties;

  if (!uncertainties.empty() && static_cast<int>(uncertainties.size()) != N)
    throw ConfigError("uncertainty set must be empty or one slot per subsystem");
  if (disturbance.empty())
    ws.signals.assign(N, DisturbanceSignal::zero());
  else if (disturbance.size() == 1)
    ws.signals.assign(N, disturbance.front());
  else if (static_cast<int>(disturbance.size()) == N)
    ws.signals = disturbance;
  else
    throw ConfigError("disturbance needs 0, 1, or one signal per subsystem");

  if (controller.kind != Controller::Kind::None &&
      static_cast<int>(controller.gains.size()) != N)
    throw ConfigError("controller gain table subsystem count mismatch");

  int off = 0;
  for (int i = 1; i <= N; ++i) {
    const auto& s = model.subsystems[i - 1];
    SubsystemSlots sl;
    sl.plant = off;
    off += s.n;
    if (const UncertaintyOperator* op = ws.local_op(i)) {
      check_operator(*op, s.pzeta(), s.pxi(),
                     "local operator of subsystem " + std::to_string(i));
      sl.loc = off;
      sl.loc_dim = op->state_dim();
      off += sl.loc_dim;
    }
    if (const UncertaintyOperator* op = ws.inter_op(i)) {
      ws.any_inter = true;
      sl.inter = off;
      sl.inter_dim = op->state_dim();
      off += sl.inter_dim;
    }
    ws.slots.push_back(sl);
  }
  ws.total_dim = off;

  if (ws.any_inter) {
    const int pz0 = model.subsystems[0].pzeta();
    for (const auto& s : model.subsystems)
      if (s.pzeta() != pz0)
        throw ConfigError(
            "interconnection operators need a common coupling output size");
    for (int i = 1; i <= N; ++i)
      if (const UncertaintyOperator* op = ws.inter_op(i))
        check_operator(*op, pz0, model.subsystems[i - 1].pr(),
                       "interconnection operator of subsystem " + std::to_string(i));
  }
  return ws;
}

void evaluate(const SimWorkspace& ws, double t, const Eigen::VectorXd& X, int mu,
              Snapshot& snap) {
  const LargeScaleModel& model = *ws.model;
  const int N = model.subsystem_count();
  snap.xdot.setZero(ws.total_dim);

  for (int i = 1; i <= N; ++i) {
    const auto& s = model.subsystems[i - 1];
    const auto& sl = ws.slots[i - 1];
    snap.zeta[i - 1] =
        s.H[model.pattern_map.local_mode(i, mu) - 1] * X.segment(sl.plant, s.n);
  }

  Eigen::VectorXd zeta_sum;
  if (ws.any_inter) {
    zeta_sum = Eigen::VectorXd::Zero(snap.zeta[0].size());
    for (int i = 0; i < N; ++i) zeta_sum += snap.zeta[i];
  }

  for (int i = 1; i <= N; ++i) {
    const auto& s = model.subsystems[i - 1];
    const auto& sl = ws.slots[i - 1];
    const int nu = model.pattern_map.local_mode(i, mu);
    const Eigen::VectorXd x = X.segment(sl.plant, s.n);

    if (const UncertaintyOperator* op = ws.local_op(i)) {
      const Eigen::VectorXd xl = X.segment(sl.loc, sl.loc_dim);
      snap.xi[i - 1] = op->C * xl + op->D * snap.zeta[i - 1];
      snap.xdot.segment(sl.loc, sl.loc_dim) = op->A * xl + op->B * snap.zeta[i - 1];
    } else {
      snap.xi[i - 1].setZero(s.pxi());
    }

    if (const UncertaintyOperator* op = ws.inter_op(i)) {
      const Eigen::VectorXd v = zeta_sum - snap.zeta[i - 1];
      const Eigen::VectorXd xr = X.segment(sl.inter, sl.inter_dim);
      snap.r[i - 1] = op->C * xr + op->D * v;
      snap.xdot.segment(sl.inter, sl.inter_dim) = op->A * xr + op->B * v;
    } else {
      snap.r[i - 1].setZero(s.pr());
    }

    switch (ws.controller->kind) {
      case Controller::Kind::None:
        snap.u[i - 1].setZero(s.m);
        break;
      case Controller::Kind::Local:
        snap.u[i - 1] = ws.controller->gains[i - 1][nu - 1] * x;
        break;
      case Controller::Kind::Global:
        snap.u[i - 1] = ws.controller->gains[i - 1][mu - 1] * x;
        break;
    }

    snap.w[i - 1].setConstant(s.pw(), ws.signals[i - 1].value(t));
    snap.z[i - 1] = s.C[nu - 1] * x + s.D[nu - 1] * snap.u[i - 1];

    snap.xdot.segment(sl.plant, s.n) = s.A[nu - 1] * x + s.B[nu - 1] * snap.u[i - 1] +
                                       s.E[nu - 1] * snap.r[i - 1] +
                                       s.F[nu - 1] * snap.xi[i - 1] +
                                       s.G[nu - 1] * snap.w[i - 1];
  }
}

void rk4_step(const SimWorkspace& ws, double t, double h, int mu,
              Eigen::VectorXd& X, Snapshot& snap) {
  evaluate(ws, t, X, mu, snap);
  const Eigen::VectorXd k1 = snap.xdot;
  evaluate(ws, t + 0.5 * h, X + 0.5 * h * k1, mu, snap);
  const Eigen::VectorXd k2 = snap.xdot;
  evaluate(ws, t + 0.5 * h, X + 0.5 * h * k2, mu, snap);
  const Eigen::VectorXd k3 = snap.xdot;
  evaluate(ws, t + h, X + h * k3, mu, snap);
  X += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + snap.xdot);
}

}  // namespace

TrajectoryRecord simulate(const LargeScaleModel& model, const Controller& controller,
                          const UncertaintySet& uncertainties,
                          const std::vector<DisturbanceSignal>& disturbance,
                          double T, double dt, std::uint64_t seed,
                          std::uint64_t trajectory_id) {
  if (!(T > 0) || !(dt > 0) || dt > T)
    throw ConfigError("need 0 < dt <= T");
  model.check_consistency();
  SimWorkspace ws = prepare(model, controller, uncertainties, disturbance);
  const int N = model.subsystem_count();

  TrajectoryRecord rec;
  rec.path = sample_path(model.Q, model.eta0, T, seed, trajectory_id);

  const int K = static_cast<int>(std::llround(T / dt));
  rec.times.resize(K + 1);
  for (int k = 0; k <= K; ++k) rec.times[k] = k * dt;
  rec.global_modes.resize(K + 1);
  rec.local_modes.assign(N, std::vector<int>(K + 1));
  rec.states.resize(N);
  rec.controls.resize(N);
  rec.outputs.resize(N);
  rec.zetas.resize(N);
  rec.xis.resize(N);
  rec.rs.resize(N);
  for (int i = 1; i <= N; ++i) {
    const auto& s = model.subsystems[i - 1];
    rec.states[i - 1].setZero(s.n, K + 1);
    rec.controls[i - 1].setZero(s.m, K + 1);
    rec.outputs[i - 1].setZero(s.pz(), K + 1);
    rec.zetas[i - 1].setZero(s.pzeta(), K + 1);
    rec.xis[i - 1].setZero(s.pxi(), K + 1);
    rec.rs[i - 1].setZero(s.pr(), K + 1);
  }

  Eigen::VectorXd X = Eigen::VectorXd::Zero(ws.total_dim);
  rec.x0_sqnorm = 0.0;
  for (int i = 1; i <= N; ++i) {
    const auto& s = model.subsystems[i - 1];
    const auto& sl = ws.slots[i - 1];
    X.segment(sl.plant, s.n) = model.x0[i - 1];
    rec.x0_sqnorm += model.x0[i - 1].squaredNorm();
    if (const UncertaintyOperator* op = ws.local_op(i))
      if (op->x0.size()) X.segment(sl.loc, sl.loc_dim) = op->x0;
    if (const UncertaintyOperator* op = ws.inter_op(i))
      if (op->x0.size()) X.segment(sl.inter, sl.inter_dim) = op->x0;
  }

  Snapshot snap;
  snap.u.resize(N);
  snap.z.resize(N);
  snap.zeta.resize(N);
  snap.xi.resize(N);
  snap.r.resize(N);
  snap.w.resize(N);
  snap.xdot.setZero(ws.total_dim);

  auto record_at = [&](int k) {
    const double t = rec.times[k];
    const int mu = rec.path.mode_at(t);
    evaluate(ws, t, X, mu, snap);
    rec.global_modes[k] = mu;
    for (int i = 1; i <= N; ++i) {
      const auto& sl = ws.slots[i - 1];
      rec.local_modes[i - 1][k] = model.pattern_map.local_mode(i, mu);
      rec.states[i - 1].col(k) = X.segment(sl.plant, model.subsystems[i - 1].n);
      rec.controls[i - 1].col(k) = snap.u[i - 1];
      rec.outputs[i - 1].col(k) = snap.z[i - 1];
      rec.zetas[i - 1].col(k) = snap.zeta[i - 1];
      rec.xis[i - 1].col(k) = snap.xi[i - 1];
      rec.rs[i - 1].col(k) = snap.r[i - 1];
    }
  };

  record_at(0);
  const auto& jumps = rec.path.jump_times;
  for (int k = 0; k < K; ++k) {
    const double a = rec.times[k];
    const double b = rec.times[k + 1];
    double t = a;
    auto it = std::upper_bound(jumps.begin(), jumps.end(), a);
    while (it != jumps.end() && *it < b) {
      const double h = *it - t;
      if (h > 1e-14) rk4_step(ws, t, h, rec.path.mode_at(t), X, snap);
      t = *it;
      ++it;
    }
    if (b - t > 1e-14) rk4_step(ws, t, b - t, rec.path.mode_at(t), X, snap);
    record_at(k + 1);
  }

  rec.z_energy.setZero(K + 1);
  rec.w_energy.setZero(K + 1);
  rec.iqc_local.assign(N, Eigen::VectorXd::Zero(K + 1));
  rec.iqc_inter.assign(N, Eigen::VectorXd::Zero(K + 1));
  std::vector<double> zeta_sq(K + 1, 0.0);
  for (int i = 0; i < N; ++i)
    for (int k = 0; k <= K; ++k) zeta_sq[k] += rec.zetas[i].col(k).squaredNorm();
  auto zsq = [&](int k) {
    double s = 0.0;
    for (int i = 0; i < N; ++i) s += rec.outputs[i].col(k).squaredNorm();
    return s;
  };
  auto wsq = [&](int k) {
    double s = 0.0;
    for (int i = 0; i < N; ++i)
      s += std::pow(ws.signals[i].value(rec.times[k]), 2) *
           model.subsystems[i].pw();
    return s;
  };
  for (int k = 1; k <= K; ++k) {
    const double h = rec.times[k] - rec.times[k - 1];
    rec.z_energy[k] = rec.z_energy[k - 1] + 0.5 * h * (zsq(k - 1) + zsq(k));
    rec.w_energy[k] = rec.w_energy[k - 1] + 0.5 * h * (wsq(k - 1) + wsq(k));
    for (int i = 0; i < N; ++i) {
      const double la = rec.zetas[i].col(k - 1).squaredNorm() -
                        rec.xis[i].col(k - 1).squaredNorm();
      const double lb =
          rec.zetas[i].col(k).squaredNorm() - rec.xis[i].col(k).squaredNorm();
      rec.iqc_local[i][k] = rec.iqc_local[i][k - 1] + 0.5 * h * (la + lb);
      const double ia = zeta_sq[k - 1] - rec.zetas[i].col(k - 1).squaredNorm() -
                        rec.rs[i].col(k - 1).squaredNorm();
      const double ib = zeta_sq[k] - rec.zetas[i].col(k).squaredNorm() -
                        rec.rs[i].col(k).squaredNorm();
      rec.iqc_inter[i][k] = rec.iqc_inter[i][k - 1] + 0.5 * h * (ia + ib);
    }
  }
  return rec;
}

namespace {

void run_indexed(int count, int threads, const std::function<void(int)>& body) {
  if (threads <= 1 || count < 2) {
    for (int k = 0; k < count; ++k) body(k);
    return;
  }
  std::atomic<int> next{0};
  auto worker = [&] {
    for (;;) {
      const int k = next.fetch_add(1);
      if (k >= count) return;
      body(k);
    }
  };
  std::vector<std::thread> pool;
  const int nt = std::min(threads, count);
  pool.reserve(nt);
  for (int t = 0; t < nt; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

}  // namespace

MssEstimate estimate_mss(const LargeScaleModel& model, const Controller& controller,
                         const UncertaintySet& uncertainties, int n_traj, double T,
                         double dt, std::uint64_t seed, const MssOptions& mss_opts,
                         const std::vector<DisturbanceSignal>* disturbance) {
  if (n_traj < 1) throw ConfigError("need at least one trajectory");
  const std::vector<DisturbanceSignal> dist =
      disturbance ? *disturbance : std::vector<DisturbanceSignal>{};

  std::vector<Eigen::VectorXd> per_traj(n_traj);
  run_indexed(n_traj, mss_opts.threads, [&](int k) {
    TrajectoryRecord rec = simulate(model, controller, uncertainties, dist, T, dt,
                                    seed, static_cast<std::uint64_t>(k));
    Eigen::VectorXd xsq(rec.times.size());
    for (std::size_t j = 0; j < rec.times.size(); ++j)
      xsq[j] = rec.xsq_at(static_cast<int>(j));
    per_traj[k] = std::move(xsq);
  });

  MssEstimate est;
  const int K = static_cast<int>(std::llround(T / dt));
  est.times.resize(K + 1);
  for (int k = 0; k <= K; ++k) est.times[k] = k * dt;
  est.mean_xsq = Eigen::VectorXd::Zero(K + 1);
  for (int k = 0; k < n_traj; ++k) est.mean_xsq += per_traj[k];
  est.mean_xsq /= n_traj;
  est.x0_sqnorm = 0.0;
  for (const auto& x : model.x0) est.x0_sqnorm += x.squaredNorm();

  const double final_mean = est.mean_xsq[K];
  est.final_ratio = est.x0_sqnorm > 0
                        ? final_mean / est.x0_sqnorm
                        : (final_mean > 0
                               ? std::numeric_limits<double>::infinity()
                               : 0.0);
  if (!std::isfinite(final_mean) ||
      final_mean >= mss_opts.growth_factor * est.x0_sqnorm)
    est.verdict = MssVerdict::Diverged;
  else if (final_mean <= mss_opts.decay_fraction * est.x0_sqnorm)
    est.verdict = MssVerdict::Decayed;
  else
    est.verdict = MssVerdict::Indeterminate;
  if (est.x0_sqnorm == 0 && std::isfinite(final_mean) && final_mean > 0)
    est.verdict = MssVerdict::Indeterminate;
  return est;
}

double estimate_hinf_lower(const LargeScaleModel& model,
                           const Controller& controller,
                           const UncertaintySet& uncertainties,
                           const std::vector<std::vector<DisturbanceSignal>>& disturbance_sets,
                           int n_traj, double T, double dt, std::uint64_t seed,
                           int threads) {
  if (disturbance_sets.empty())
    throw ConfigError("need at least one disturbance set");
  if (n_traj < 1) throw ConfigError("need at least one trajectory");

  LargeScaleModel zeroed = model;
  for (auto& x : zeroed.x0) x.setZero();

  const int S = static_cast<int>(disturbance_sets.size());
  std::vector<double> z_mean(S, 0.0), w_mean(S, 0.0);
  std::vector<std::vector<double>> z_by(S, std::vector<double>(n_traj, 0.0));
  std::vector<std::vector<double>> w_by(S, std::vector<double>(n_traj, 0.0));
  run_indexed(S * n_traj, threads, [&](int idx) {
    const int s = idx / n_traj;
    const int k = idx % n_traj;
    TrajectoryRecord rec =
        simulate(zeroed, controller, uncertainties, disturbance_sets[s], T, dt,
                 seed, static_cast<std::uint64_t>(idx));
    z_by[s][k] = rec.z_energy[rec.z_energy.size() - 1];
    w_by[s][k] = rec.w_energy[rec.w_energy.size() - 1];
  });
  for (int s = 0; s < S; ++s) {
    for (int k = 0; k < n_traj; ++k) {
      z_mean[s] += z_by[s][k];
      w_mean[s] += w_by[s][k];
    }
    z_mean[s] /= n_traj;
    w_mean[s] /= n_traj;
    if (w_mean[s] <= 0)
      throw ConfigError("disturbance set " + std::to_string(s + 1) +
                        " injects no input energy");
  }
  double witness = 0.0;
  for (int s = 0; s < S; ++s)
    witness = std::max(witness, std::sqrt(z_mean[s] / w_mean[s]));
  return witness;
}

bool IqcReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const IqcCheck& c) {
    return c.pass_local && c.pass_inter;
  });
}

double IqcReport::worst_local() const {
  double w = std::numeric_limits<double>::infinity();
  for (const auto& c : checks) w = std::min(w, c.lhs_local);
  return w;
}

double IqcReport::worst_inter() const {
  double w = std::numeric_limits<double>::infinity();
  for (const auto& c : checks) w = std::min(w, c.lhs_inter);
  return w;
}

namespace {

IqcReport audit_ledgers(const TrajectoryRecord& shape,
                        const std::vector<Eigen::VectorXd>& led_local,
                        const std::vector<Eigen::VectorXd>& led_inter,
                        const std::vector<UncertaintyBudget>& budgets,
                        const std::vector<double>& checkpoints) {
  const int N = static_cast<int>(shape.states.size());
  if (static_cast<int>(budgets.size()) != N)
    throw ConfigError("budget count must match the subsystem count");

  IqcReport report;
  constexpr double tol = 1e-9;
  for (int i = 1; i <= N; ++i) {
    const Eigen::VectorXd x0 = shape.states[i - 1].col(0);
    const double off_local = x0.dot(budgets[i - 1].S_bar * x0);
    const double off_inter = x0.dot(budgets[i - 1].S_tilde * x0);
    for (double t : checkpoints) {
      const int k = shape.grid_index(t);
      IqcCheck c;
      c.i = i;
      c.t = shape.times[k];
      c.lhs_local = led_local[i - 1][k] + off_local;
      c.lhs_inter = led_inter[i - 1][k] + off_inter;
      c.pass_local = c.lhs_local >= -tol;
      c.pass_inter = c.lhs_inter >= -tol;
      report.checks.push_back(c);
    }
  }
  return report;
}

}  // namespace

IqcReport iqc_audit(const TrajectoryRecord& record,
                    const std::vector<UncertaintyBudget>& budgets,
                    const std::vector<double>& checkpoints) {
  return audit_ledgers(record, record.iqc_local, record.iqc_inter, budgets,
                       checkpoints);
}

IqcReport iqc_audit_mean(const std::vector<TrajectoryRecord>& records,
                         const std::vector<UncertaintyBudget>& budgets,
                         const std::vector<double>& checkpoints) {
  if (records.empty()) throw ConfigError("need at least one record");
  const int N = static_cast<int>(records.front().states.size());
  const auto K = records.front().times.size();
  std::vector<Eigen::VectorXd> led_local(N, Eigen::VectorXd::Zero(K));
  std::vector<Eigen::VectorXd> led_inter(N, Eigen::VectorXd::Zero(K));
  for (const auto& rec : records) {
    if (rec.times.size() != K || static_cast<int>(rec.states.size()) != N)
      throw ConfigError("records must share one grid and subsystem count");
    for (int i = 0; i < N; ++i) {
      led_local[i] += rec.iqc_local[i];
      led_inter[i] += rec.iqc_inter[i];
    }
  }
  for (int i = 0; i < N; ++i) {
    led_local[i] /= static_cast<double>(records.size());
    led_inter[i] /= static_cast<double>(records.size());
  }
  return audit_ledgers(records.front(), led_local, led_inter, budgets,
                       checkpoints);
}

}  // namespace jumphinf
