#include "jumphinf/synthesis.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include <json.hpp>

namespace jumphinf {

namespace {

double spectral_norm(const Eigen::MatrixXd& M) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  return svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
}

// Convex restriction used as a warm start: tie X_i(mu) and beta_bar_i(mu)
// across each local-mode class, drop the inverse variables, keeping only the
// first LMI family.  Within a class the extracted gains coincide, so the gap
// matrices vanish and the dropped constraints can be satisfied afterwards by
// direct construction.
struct ClusteredProblem {
  ConstraintSet set;
  VariableLayout layout;
  std::vector<int> tie;  // full coordinate -> clustered coordinate, -1 if dropped
};

ClusteredProblem remap_to_clustered(const BuiltProblem& full,
                                    const LargeScaleModel& model, double eps9,
                                    double floor_x) {
  const ModePatternMap& map = model.pattern_map;
  const int N = model.subsystem_count();

  ClusteredProblem cp;
  cp.set.epsilon = eps9;
  VariableLayout& clay = cp.layout;
  for (int i = 1; i <= N; ++i)
    for (int nu = 1; nu <= map.local_mode_count(i); ++nu)
      clay.add_sym(Family::X, i, nu, model.subsystems[i - 1].n);
  for (int i = 1; i <= N; ++i)
    for (int nu = 1; nu <= map.local_mode_count(i); ++nu)
      clay.add_scalar(Family::BetaBar, i, nu);
  for (int i = 1; i <= N; ++i) {
    clay.add_scalar(Family::Tau, i, 0);
    clay.add_scalar(Family::Theta, i, 0);
  }

  cp.tie.assign(full.layout.dimension(), -1);
  for (const auto& g : full.layout.groups()) {
    switch (g.family) {
      case Family::X: {
        const int nu = map.local_mode(g.i, g.mu);
        int k = g.offset;
        for (int r = 0; r < g.n; ++r)
          for (int c = r; c < g.n; ++c)
            cp.tie[k++] = clay.sym_index(Family::X, g.i, nu, r, c);
        break;
      }
      case Family::BetaBar:
        cp.tie[g.offset] = clay.scalar_index(Family::BetaBar, g.i,
                                             map.local_mode(g.i, g.mu));
        break;
      case Family::Tau:
        cp.tie[g.offset] = clay.scalar_index(Family::Tau, g.i, 0);
        break;
      case Family::Theta:
        cp.tie[g.offset] = clay.scalar_index(Family::Theta, g.i, 0);
        break;
      default:
        break;
    }
  }

  for (const auto& b : full.set.lmi_neg) {
    if (b.name.rfind("dissipation", 0) != 0) continue;
    AffineMatrixExpr e("c" + b.name, b.dim);
    e.constant = b.constant;
    for (const auto& [j, mat] : b.coeffs) {
      if (cp.tie[j] < 0)
        throw LayoutError("block " + b.name + " touches an untied coordinate");
      e.add(cp.tie[j], mat);
    }
    cp.set.lmi_neg.push_back(std::move(e));
  }

  for (int i = 1; i <= N; ++i) {
    const int n = model.subsystems[i - 1].n;
    for (int nu = 1; nu <= map.local_mode_count(i); ++nu) {
      AffineMatrixExpr fl("cfloorX_i" + std::to_string(i) + "_k" + std::to_string(nu), n);
      fl.constant = -floor_x * Eigen::MatrixXd::Identity(n, n);
      for (int r = 0; r < n; ++r)
        for (int c = r; c < n; ++c) {
          Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n, n);
          B(r, c) = 1.0;
          B(c, r) = 1.0;
          fl.add(clay.sym_index(Family::X, i, nu, r, c), B);
        }
      cp.set.lmi_nonneg.push_back(std::move(fl));
      cp.set.scalar_pos.push_back(clay.scalar_index(Family::BetaBar, i, nu));
    }
    cp.set.scalar_pos.push_back(clay.scalar_index(Family::Tau, i, 0));
    cp.set.scalar_pos.push_back(clay.scalar_index(Family::Theta, i, 0));
  }
  return cp;
}

Eigen::VectorXd inflate(const ClusteredProblem& cp, const Eigen::VectorXd& cx,
                        const BuiltProblem& full, const AuxiliarySystem& aux) {
  const LargeScaleModel& model = aux.model();
  const ModePatternMap& map = model.pattern_map;
  const int N = model.subsystem_count();
  const int M = model.global_mode_count();

  Eigen::VectorXd x = Eigen::VectorXd::Zero(full.layout.dimension());
  for (int i = 1; i <= N; ++i) {
    for (int mu = 1; mu <= M; ++mu) {
      const int nu = map.local_mode(i, mu);
      const Eigen::MatrixXd Xh = cp.layout.sym(cx, Family::X, i, nu);
      full.layout.set_sym(x, Family::X, i, mu, Xh);
      full.layout.set_sym(x, Family::Xbar, i, mu, Xh.inverse());
      const double bb = cp.layout.scalar(cx, Family::BetaBar, i, nu);
      full.layout.set_scalar(x, Family::BetaBar, i, mu, bb);
      full.layout.set_scalar(x, Family::BetaTilde, i, mu, 1.0 / bb);
    }
    full.layout.set_scalar(x, Family::Tau, i, 0,
                           cp.layout.scalar(cx, Family::Tau, i, 0));
    full.layout.set_scalar(x, Family::Theta, i, 0,
                           cp.layout.scalar(cx, Family::Theta, i, 0));
    double rmax = 0.0;
    for (int mu = 1; mu <= M; ++mu) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(aux.R(i, mu),
                                                        Eigen::EigenvaluesOnly);
      rmax = std::max(rmax, es.eigenvalues().maxCoeff());
    }
    full.layout.set_scalar(x, Family::Phi, i, 0, 0.99 / rmax);
  }
  return x;
}

}  // namespace

bool GainGapReport::all_pass() const {
  return std::all_of(entries.begin(), entries.end(),
                     [](const GainGapEntry& e) { return e.pass; });
}

double GainGapReport::worst_excess() const {
  double w = -std::numeric_limits<double>::infinity();
  for (const auto& e : entries) w = std::max(w, e.norm * e.norm - e.beta_u);
  return w;
}

GainTable extract_global_gains(const AuxiliarySystem& aux,
                               const VariableLayout& layout,
                               const Eigen::VectorXd& point) {
  const int N = aux.subsystem_count();
  const int M = aux.global_mode_count();
  GainTable gains(N);
  for (int i = 1; i <= N; ++i) {
    gains[i - 1].resize(M);
    for (int mu = 1; mu <= M; ++mu) {
      const Eigen::MatrixXd& R = aux.R(i, mu);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(R, Eigen::EigenvaluesOnly);
      if (es.eigenvalues().minCoeff() <= 1e-12)
        throw AssumptionViolation("R of subsystem " + std::to_string(i) +
                                  " mode " + std::to_string(mu) + " is singular");
      const Eigen::MatrixXd Xbar = layout.sym(point, Family::Xbar, i, mu);
      gains[i - 1][mu - 1] = -R.inverse() * aux.B(i, mu).transpose() * Xbar;
    }
  }
  return gains;
}

GainTable localize_gains(const GainTable& global_gains, const ModePatternMap& map,
                         const Eigen::RowVectorXd& q_inf) {
  const int N = map.subsystem_count();
  const int M = map.global_mode_count();
  if (static_cast<int>(global_gains.size()) != N)
    throw LayoutError("gain table subsystem count mismatch");
  if (q_inf.size() != M) throw LayoutError("q_inf length mismatch");

  GainTable local(N);
  for (int i = 1; i <= N; ++i) {
    const int Mi = map.local_mode_count(i);
    local[i - 1].resize(Mi);
    for (int nu = 1; nu <= Mi; ++nu) {
      const auto& cls = map.class_of(i, nu);
      double den = 0.0;
      for (int mu : cls) den += q_inf[mu - 1];
      if (den <= 0)
        throw DegenerateModeClass("subsystem " + std::to_string(i) + " local mode " +
                                  std::to_string(nu) + " has zero steady-state mass");
      Eigen::MatrixXd K = Eigen::MatrixXd::Zero(global_gains[i - 1][cls[0] - 1].rows(),
                                                global_gains[i - 1][cls[0] - 1].cols());
      for (int mu : cls) K += (q_inf[mu - 1] / den) * global_gains[i - 1][mu - 1];
      local[i - 1][nu - 1] = K;
    }
  }
  return local;
}

GainGapReport gain_gap_check(const GainTable& global_gains,
                             const GainTable& local_gains,
                             const ModePatternMap& map,
                             const std::vector<std::vector<double>>& beta_u,
                             double slack) {
  GainGapReport report;
  const int N = map.subsystem_count();
  const int M = map.global_mode_count();
  for (int i = 1; i <= N; ++i) {
    for (int mu = 1; mu <= M; ++mu) {
      GainGapEntry e;
      e.i = i;
      e.mu = mu;
      const int nu = map.local_mode(i, mu);
      e.delta = global_gains[i - 1][mu - 1] - local_gains[i - 1][nu - 1];
      e.norm = spectral_norm(e.delta);
      e.beta_u = beta_u[i - 1][mu - 1];
      e.pass = e.norm * e.norm <= e.beta_u + slack;
      report.entries.push_back(std::move(e));
    }
  }
  return report;
}

SynthesisResult synthesize(const LargeScaleModel& model, double gamma,
                           const SolverOptions& opts) {
  SynthesisResult result;
  result.gamma = gamma;
  result.stage = "build_auxiliary";
  const AuxiliarySystem aux(model);

  result.stage = "steady_state";
  const Eigen::RowVectorXd q_inf = steady_state(model.Q);

  result.stage = "build_theorem1";
  BuiltProblem full = build_theorem1(aux, q_inf, model.Q, gamma, opts.epsilon);

  result.stage = "clustered_warm_start";
  std::optional<Eigen::VectorXd> warm;
  {
    ClusteredProblem cp = remap_to_clustered(full, model, 5e-4, 1e-2);
    SolverOptions copts = opts;
    copts.accel = Accel::Reflected;
    copts.residual_tol = 1e-9;
    copts.max_iters = std::max(opts.max_iters, 5000);
    copts.stall_window = std::max(opts.stall_window, 500);
    copts.iter_log = nullptr;
    FeasibilityOutcome warm_outcome =
        solve_feasibility(cp.set, cp.layout, copts);
    if (warm_outcome.feasible())
      warm = inflate(cp, warm_outcome.point, full, aux);
  }

  result.stage = "solve_feasibility";
  FeasibilityOutcome outcome = solve_feasibility(full.set, full.layout, opts, warm);
  result.solver_iterations = outcome.iterations;
  result.restarts_used = outcome.restarts_used;
  if (!outcome.feasible()) {
    result.status = outcome.status;
    result.point = outcome.point;
    result.margins = outcome.certificate;
    return result;
  }

  result.stage = "refine_and_certify";
  FeasibilityOutcome refined =
      refine_and_certify(full.set, full.layout, outcome.point, opts.residual_tol);
  result.point = refined.point;
  result.margins = refined.certificate;
  if (!refined.feasible()) {
    result.status = refined.status;
    return result;
  }

  result.stage = "extract_gains";
  result.global_gains = extract_global_gains(aux, full.layout, refined.point);
  result.local_gains = localize_gains(result.global_gains, model.pattern_map, q_inf);

  result.stage = "gain_gap_check";
  const int N = model.subsystem_count();
  const int M = model.global_mode_count();
  result.beta_u.assign(N, std::vector<double>(M, 0.0));
  for (int i = 1; i <= N; ++i) {
    const double phi = full.layout.scalar(refined.point, Family::Phi, i, 0);
    for (int mu = 1; mu <= M; ++mu)
      result.beta_u[i - 1][mu - 1] =
          phi * full.layout.scalar(refined.point, Family::BetaTilde, i, mu);
  }
  result.gaps = gain_gap_check(result.global_gains, result.local_gains,
                               model.pattern_map, result.beta_u);

  result.stage = "complete";
  result.status = SolveStatus::Feasible;
  return result;
}

SynthesisResult synthesize_min_gamma(const LargeScaleModel& model, double lo,
                                     double hi, double tol,
                                     const SolverOptions& opts) {
  if (!(lo > 0) || !(hi > lo) || !(tol > 0))
    throw ConfigError("need 0 < lo < hi and tol > 0");
  SynthesisResult best = synthesize(model, hi, opts);
  if (!best.feasible()) return best;
  double flo = lo, fhi = hi;
  while (fhi - flo > tol) {
    const double mid = 0.5 * (flo + fhi);
    SynthesisResult r = synthesize(model, mid, opts);
    if (r.feasible()) {
      best = std::move(r);
      fhi = mid;
    } else {
      flo = mid;
    }
  }
  return best;
}

std::vector<ModeLTI> nominal_closed_loop(const AuxiliarySystem& aux,
                                         const GainTable& global_gains) {
  const LargeScaleModel& model = aux.model();
  const int N = model.subsystem_count();
  const int M = model.global_mode_count();
  int n_tot = 0, w_tot = 0, z_tot = 0;
  for (const auto& s : model.subsystems) {
    n_tot += s.n;
    w_tot += s.pw();
    z_tot += s.pz();
  }
  std::vector<ModeLTI> modes(M);
  for (int mu = 1; mu <= M; ++mu) {
    ModeLTI md;
    md.A = Eigen::MatrixXd::Zero(n_tot, n_tot);
    md.B = Eigen::MatrixXd::Zero(n_tot, w_tot);
    md.C = Eigen::MatrixXd::Zero(z_tot, n_tot);
    md.D = Eigen::MatrixXd::Zero(z_tot, w_tot);
    int ro = 0, wo = 0, zo = 0;
    for (int i = 1; i <= N; ++i) {
      const auto& s = model.subsystems[i - 1];
      const Eigen::MatrixXd& K = global_gains[i - 1][mu - 1];
      md.A.block(ro, ro, s.n, s.n) = aux.A(i, mu) + aux.B(i, mu) * K;
      md.B.block(ro, wo, s.n, s.pw()) = aux.G(i, mu);
      md.C.block(zo, ro, s.pz(), s.n) = aux.C(i, mu) + aux.D(i, mu) * K;
      ro += s.n;
      wo += s.pw();
      zo += s.pz();
    }
    modes[mu - 1] = std::move(md);
  }
  return modes;
}

FeasibilityOutcome verify_nominal_brl(const LargeScaleModel& model,
                                      const GainTable& global_gains, double gamma,
                                      const SolverOptions& opts) {
  const AuxiliarySystem aux(model);
  BuiltProblem brl =
      build_brl(nominal_closed_loop(aux, global_gains), model.Q, gamma, opts.epsilon);
  return solve_feasibility(brl.set, brl.layout, opts);
}

std::string to_json(const SynthesisResult& result) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["status"] = status_name(result.status);
  j["stage"] = result.stage;
  j["gamma"] = result.gamma;
  j["solver_iterations"] = result.solver_iterations;
  j["restarts_used"] = result.restarts_used;

  auto matrix_json = [](const Eigen::MatrixXd& M) {
    nlohmann::json rows = nlohmann::json::array();
    for (int r = 0; r < M.rows(); ++r) {
      nlohmann::json row = nlohmann::json::array();
      for (int c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
      rows.push_back(std::move(row));
    }
    return rows;
  };

  j["global_gains"] = nlohmann::json::array();
  for (std::size_t i = 0; i < result.global_gains.size(); ++i)
    for (std::size_t mu = 0; mu < result.global_gains[i].size(); ++mu)
      j["global_gains"].push_back({{"i", i + 1},
                                   {"mu", mu + 1},
                                   {"K", matrix_json(result.global_gains[i][mu])}});
  j["local_gains"] = nlohmann::json::array();
  for (std::size_t i = 0; i < result.local_gains.size(); ++i)
    for (std::size_t nu = 0; nu < result.local_gains[i].size(); ++nu)
      j["local_gains"].push_back({{"i", i + 1},
                                  {"nu", nu + 1},
                                  {"K", matrix_json(result.local_gains[i][nu])}});
  j["beta_u"] = result.beta_u;
  j["gain_gaps"] = nlohmann::json::array();
  for (const auto& e : result.gaps.entries)
    j["gain_gaps"].push_back({{"i", e.i},
                              {"mu", e.mu},
                              {"norm", e.norm},
                              {"beta_u", e.beta_u},
                              {"pass", e.pass}});
  j["margins"] = nlohmann::json::array();
  for (const auto& m : result.margins.entries)
    j["margins"].push_back({{"name", m.name}, {"margin", m.margin}});
  j["max_margin"] = result.margins.max_margin;

  nlohmann::json pt = nlohmann::json::array();
  for (int k = 0; k < result.point.size(); ++k) pt.push_back(result.point[k]);
  j["point"] = std::move(pt);
  return j.dump(2);
}

}  // namespace jumphinf
