#include "jumphinf/solver.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <ostream>
#include <thread>

#include "jumphinf/rng.hpp"

namespace jumphinf {

const char* status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::Feasible: return "Feasible";
    case SolveStatus::Infeasible: return "Infeasible";
    case SolveStatus::Stalled: return "Stalled";
  }
  return "?";
}

Eigen::MatrixXd project_psd(const Eigen::MatrixXd& S) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  const Eigen::VectorXd w = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * w.asDiagonal() * es.eigenvectors().transpose();
}

Eigen::MatrixXd project_rank(const Eigen::MatrixXd& S, int r) {
  const int n = static_cast<int>(S.rows());
  if (r <= 0 || r >= n) throw LayoutError("rank bound must satisfy 0 < r < dim");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  // eigenvalues ascend; keep the r largest clamped at zero, drop the rest
  Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
  for (int k = n - r; k < n; ++k) w[k] = std::max(es.eigenvalues()[k], 0.0);
  return es.eigenvectors() * w.asDiagonal() * es.eigenvectors().transpose();
}

namespace {

enum class BlockKind { Neg, Nonneg, Rank, ScalarPos };

struct FlatBlock {
  BlockKind kind;
  const AffineMatrixExpr* expr;
  int rank = 0;
};

struct Flattened {
  std::vector<FlatBlock> blocks;
  std::vector<AffineMatrixExpr> scalar_exprs;  // storage for 1x1 scalar blocks
};

Flattened flatten(const ConstraintSet& set) {
  Flattened f;
  f.scalar_exprs.reserve(set.scalar_pos.size());
  for (int j : set.scalar_pos) {
    AffineMatrixExpr e("scalar_pos(" + std::to_string(j) + ")", 1);
    e.constant(0, 0) = -set.epsilon;
    e.add(j, Eigen::MatrixXd::Identity(1, 1));
    f.scalar_exprs.push_back(std::move(e));
  }
  for (const auto& b : set.lmi_neg) f.blocks.push_back({BlockKind::Neg, &b, 0});
  for (const auto& b : set.lmi_nonneg) f.blocks.push_back({BlockKind::Nonneg, &b, 0});
  for (const auto& rb : set.rank_bounds)
    f.blocks.push_back({BlockKind::Rank, &rb.expr, rb.max_rank});
  for (const auto& e : f.scalar_exprs) f.blocks.push_back({BlockKind::ScalarPos, &e, 0});
  return f;
}

Eigen::MatrixXd project_onto(const Eigen::MatrixXd& S, const FlatBlock& fb,
                             double eps) {
  switch (fb.kind) {
    case BlockKind::Neg: {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
      const Eigen::VectorXd w = es.eigenvalues().cwiseMin(-eps);
      return es.eigenvectors() * w.asDiagonal() * es.eigenvectors().transpose();
    }
    case BlockKind::Nonneg:
    case BlockKind::ScalarPos:
      return project_psd(S);
    case BlockKind::Rank:
      return project_rank(S, fb.rank);
  }
  return S;
}

double block_margin(const Eigen::MatrixXd& S, const FlatBlock& fb, double eps) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
  switch (fb.kind) {
    case BlockKind::Neg:
      return es.eigenvalues().maxCoeff() + eps;
    case BlockKind::Nonneg:
    case BlockKind::ScalarPos:
      return -es.eigenvalues().minCoeff();
    case BlockKind::Rank: {
      Eigen::VectorXd mags = es.eigenvalues().cwiseAbs();
      std::sort(mags.data(), mags.data() + mags.size(), std::greater<double>());
      return mags[fb.rank];
    }
  }
  return 0.0;
}

class LiftedProblem {
 public:
  LiftedProblem(const ConstraintSet& set, const VariableLayout& layout, int threads)
      : set_(set), flat_(flatten(set)), d_(layout.dimension()),
        threads_(std::max(1, threads)) {
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(d_, d_);
    for (const auto& fb : flat_.blocks) {
      const auto& coeffs = fb.expr->coeffs;
      for (std::size_t a = 0; a < coeffs.size(); ++a) {
        for (std::size_t b = a; b < coeffs.size(); ++b) {
          const double v = coeffs[a].second.cwiseProduct(coeffs[b].second).sum();
          gram(coeffs[a].first, coeffs[b].first) += v;
          if (a != b) gram(coeffs[b].first, coeffs[a].first) += v;
        }
      }
    }
    llt_.compute(gram);
    if (llt_.info() != Eigen::Success)
      throw LayoutError("consistency subspace is ill-posed: a decision coordinate "
                        "appears in no constraint");
  }

  int block_count() const { return static_cast<int>(flat_.blocks.size()); }
  const FlatBlock& block(int k) const { return flat_.blocks[k]; }
  int dimension() const { return d_; }

  void eval_all(const Eigen::VectorXd& x, std::vector<Eigen::MatrixXd>& out) const {
    out.resize(flat_.blocks.size());
    parallel_for([&](int k) { out[k] = flat_.blocks[k].expr->eval(x); });
  }

  // Projects each lifted copy; returns the worst margin of the inputs.
  double project_all(const std::vector<Eigen::MatrixXd>& in,
                     std::vector<Eigen::MatrixXd>& out,
                     std::vector<double>* margins = nullptr) const {
    out.resize(flat_.blocks.size());
    std::vector<double> m(flat_.blocks.size());
    parallel_for([&](int k) {
      m[k] = block_margin(in[k], flat_.blocks[k], set_.epsilon);
      out[k] = project_onto(in[k], flat_.blocks[k], set_.epsilon);
    });
    if (margins) *margins = m;
    double mx = -std::numeric_limits<double>::infinity();
    for (double v : m) mx = std::max(mx, v);
    return mx;
  }

  double margins_at(const Eigen::VectorXd& x) const {
    std::vector<double> m(flat_.blocks.size());
    parallel_for([&](int k) {
      m[k] = block_margin(flat_.blocks[k].expr->eval(x), flat_.blocks[k], set_.epsilon);
    });
    double mx = -std::numeric_limits<double>::infinity();
    for (double v : m) mx = std::max(mx, v);
    return mx;
  }

  // Least-squares point whose lifted image is closest to the given copies.
  Eigen::VectorXd least_squares(const std::vector<Eigen::MatrixXd>& copies) const {
    Eigen::VectorXd b = Eigen::VectorXd::Zero(d_);
    for (std::size_t k = 0; k < flat_.blocks.size(); ++k) {
      const auto& e = *flat_.blocks[k].expr;
      const Eigen::MatrixXd dY = copies[k] - e.constant;
      for (const auto& [j, mat] : e.coeffs) b[j] += mat.cwiseProduct(dY).sum();
    }
    return llt_.solve(b);
  }

  double lifted_dist2(const std::vector<Eigen::MatrixXd>& at,
                      const std::vector<Eigen::MatrixXd>& proj) const {
    double s = 0.0;
    for (std::size_t k = 0; k < at.size(); ++k) s += (at[k] - proj[k]).squaredNorm();
    return s;
  }

 private:
  template <class F>
  void parallel_for(F&& body) const {
    const int n = static_cast<int>(flat_.blocks.size());
    if (threads_ <= 1 || n < 2 * threads_) {
      for (int k = 0; k < n; ++k) body(k);
      return;
    }
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    for (int t = 0; t < threads_; ++t) {
      pool.emplace_back([&]() {
        for (int k = next.fetch_add(1); k < n; k = next.fetch_add(1)) body(k);
      });
    }
    for (auto& th : pool) th.join();
  }

  const ConstraintSet& set_;
  Flattened flat_;
  int d_;
  int threads_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

struct AttemptResult {
  Eigen::VectorXd point;
  double best_margin = std::numeric_limits<double>::infinity();
  bool converged = false;
  int iterations = 0;
};

void log_header(std::ostream* os, const VariableLayout& layout) {
  if (!os) return;
  *os << "iter,max_margin,dist2";
  for (const auto& g : layout.groups())
    *os << "," << family_name(g.family) << "_" << g.i << "_" << g.mu;
  *os << "\n";
}

void log_row(std::ostream* os, const VariableLayout& layout, int iter, double margin,
             double dist2, const Eigen::VectorXd& x) {
  if (!os) return;
  *os << iter << "," << margin << "," << dist2;
  for (const auto& g : layout.groups()) {
    double s = 0.0;
    for (int k = 0; k < g.size(); ++k) s += x[g.offset + k] * x[g.offset + k];
    *os << "," << std::sqrt(s);
  }
  *os << "\n";
}

AttemptResult run_plain(const LiftedProblem& lp, const VariableLayout& layout,
                        const SolverOptions& opts, const Eigen::VectorXd& x0,
                        std::vector<double>& history) {
  AttemptResult res;
  Eigen::VectorXd x = x0;
  res.point = x;
  std::vector<Eigen::MatrixXd> S, Y;
  int since_improvement = 0;
  for (int it = 0; it < opts.max_iters; ++it) {
    lp.eval_all(x, S);
    const double mx = lp.project_all(S, Y);
    history.push_back(mx);
    ++res.iterations;
    log_row(opts.iter_log, layout, it, mx, lp.lifted_dist2(S, Y), x);
    if (mx < res.best_margin - 1e-12) {
      res.best_margin = mx;
      res.point = x;
      since_improvement = 0;
    } else {
      ++since_improvement;
    }
    if (mx <= opts.residual_tol) {
      res.best_margin = mx;
      res.point = x;
      res.converged = true;
      return res;
    }
    if (since_improvement >= opts.stall_window) return res;
    x = lp.least_squares(Y);
  }
  return res;
}

AttemptResult run_reflected(const LiftedProblem& lp, const VariableLayout& layout,
                            const SolverOptions& opts, const Eigen::VectorXd& x0,
                            std::vector<double>& history) {
  AttemptResult res;
  std::vector<Eigen::MatrixXd> Z, Y, SR, junk;
  lp.eval_all(x0, Z);
  res.point = x0;
  int since_improvement = 0;
  for (int it = 0; it < opts.max_iters; ++it) {
    const double ignored = lp.project_all(Z, Y);
    (void)ignored;
    const Eigen::VectorXd xh = lp.least_squares(Y);
    const double mx = lp.margins_at(xh);
    history.push_back(mx);
    ++res.iterations;
    if (opts.iter_log) {
      std::vector<Eigen::MatrixXd> Sh, Ph;
      lp.eval_all(xh, Sh);
      lp.project_all(Sh, Ph);
      log_row(opts.iter_log, layout, it, mx, lp.lifted_dist2(Sh, Ph), xh);
    }
    if (mx < res.best_margin - 1e-12) {
      res.best_margin = mx;
      res.point = xh;
      since_improvement = 0;
    } else {
      ++since_improvement;
    }
    if (mx <= opts.residual_tol) {
      res.best_margin = mx;
      res.point = xh;
      res.converged = true;
      return res;
    }
    if (since_improvement >= opts.stall_window) return res;
    std::vector<Eigen::MatrixXd> R(Z.size());
    for (std::size_t k = 0; k < Z.size(); ++k) R[k] = 2.0 * Y[k] - Z[k];
    const Eigen::VectorXd xr = lp.least_squares(R);
    lp.eval_all(xr, SR);
    for (std::size_t k = 0; k < Z.size(); ++k) Z[k] += SR[k] - Y[k];
  }
  return res;
}

}  // namespace

FeasibilityOutcome solve_feasibility(const ConstraintSet& set,
                                     const VariableLayout& layout,
                                     const SolverOptions& opts,
                                     const std::optional<Eigen::VectorXd>& warm_start) {
  LiftedProblem lp(set, layout, opts.threads);
  Eigen::VectorXd x0 =
      warm_start.has_value() ? *warm_start : layout.default_point();
  if (x0.size() != layout.dimension())
    throw LayoutError("warm start length does not match layout dimension");

  FeasibilityOutcome out;
  log_header(opts.iter_log, layout);

  Eigen::VectorXd best_point = x0;
  double best_margin = std::numeric_limits<double>::infinity();

  for (int attempt = 0; attempt <= opts.restarts; ++attempt) {
    Eigen::VectorXd start = x0;
    if (attempt > 0) {
      SplitMix64 rng(opts.seed, 0x5eedULL + static_cast<std::uint64_t>(attempt));
      const double scale =
          0.1 * std::max(best_point.norm(), 1.0) / std::sqrt(double(layout.dimension()));
      start = best_point;
      for (int j = 0; j < start.size(); ++j) start[j] += scale * rng.normal();
    }
    AttemptResult res = (opts.accel == Accel::Reflected)
                            ? run_reflected(lp, layout, opts, start, out.history)
                            : run_plain(lp, layout, opts, start, out.history);
    out.restarts_used = attempt;
    out.iterations += res.iterations;
    if (res.best_margin < best_margin) {
      best_margin = res.best_margin;
      best_point = res.point;
    }
    if (res.converged) break;
  }

  out.point = best_point;
  out.certificate = eval_residual(set, best_point);
  out.status = out.certificate.max_margin <= opts.residual_tol
                   ? SolveStatus::Feasible
                   : SolveStatus::Stalled;
  return out;
}

FeasibilityOutcome refine_and_certify(const ConstraintSet& set,
                                      const VariableLayout& layout,
                                      const Eigen::VectorXd& point, double tol) {
  if (point.size() != layout.dimension())
    throw LayoutError("point length does not match layout dimension");
  Eigen::VectorXd x = point;

  for (const auto& g : layout.groups()) {
    if (g.family == Family::Xbar) {
      const Eigen::MatrixXd X = layout.sym(x, Family::X, g.i, g.mu);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(X);
      const double lo = es.eigenvalues().cwiseAbs().minCoeff();
      const double hi = es.eigenvalues().cwiseAbs().maxCoeff();
      if (lo <= 1e-12 * std::max(hi, 1.0))
        throw RefinementFailed("X(" + std::to_string(g.i) + "," + std::to_string(g.mu) +
                               ") is numerically singular");
      const Eigen::MatrixXd Xinv = es.eigenvectors() *
                                   es.eigenvalues().cwiseInverse().asDiagonal() *
                                   es.eigenvectors().transpose();
      layout.set_sym(x, Family::Xbar, g.i, g.mu, Xinv);
    } else if (g.family == Family::BetaBar) {
      const double bt = layout.scalar(x, Family::BetaTilde, g.i, g.mu);
      if (std::abs(bt) < 1e-300)
        throw RefinementFailed("beta_tilde(" + std::to_string(g.i) + "," +
                               std::to_string(g.mu) + ") is zero");
      x[g.offset] = 1.0 / bt;
    }
  }

  FeasibilityOutcome out;
  out.point = x;
  out.certificate = eval_residual(set, x);
  out.status = out.certificate.max_margin <= tol ? SolveStatus::Feasible
                                                 : SolveStatus::Infeasible;
  return out;
}

}  // namespace jumphinf
