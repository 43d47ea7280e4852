#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "fixture.hpp"
#include "jumphinf/lmi.hpp"
#include "jumphinf/rng.hpp"
#include "jumphinf/solver.hpp"

using namespace jumphinf;

namespace {

Eigen::MatrixXd random_sym(int n, std::uint64_t seed) {
  SplitMix64 rng(seed);
  Eigen::MatrixXd M(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) M(r, c) = rng.normal();
  return 0.5 * (M + M.transpose());
}

// Bounded-real problem for the scalar plant 1/(s+1); feasible iff gamma > 1.
BuiltProblem scalar_brl(double gamma) {
  ModeLTI md;
  md.A = (Eigen::MatrixXd(1, 1) << -1.0).finished();
  md.B = Eigen::MatrixXd::Identity(1, 1);
  md.C = Eigen::MatrixXd::Identity(1, 1);
  md.D = Eigen::MatrixXd::Zero(1, 1);
  return build_brl({md}, TransitionRateMatrix(Eigen::MatrixXd::Zero(1, 1)),
                   gamma);
}

BuiltProblem contradictory_set() {
  BuiltProblem p;
  p.layout.add_scalar(Family::Phi, 1, 0);
  AffineMatrixExpr e("ceiling", 1);
  e.add(0, 1.0);
  p.set.lmi_neg.push_back(e);  // x <= -eps
  p.set.scalar_pos.push_back(0);  // x >= eps
  return p;
}

}  // namespace

TEST_CASE("psd projection is idempotent and beats random candidates") {
  for (std::uint64_t seed : {3u, 5u, 9u}) {
    const Eigen::MatrixXd S = random_sym(4, seed);
    const Eigen::MatrixXd P = project_psd(S);

    CHECK((P - P.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(P);
    CHECK(es.eigenvalues().minCoeff() >= -1e-10);
    CHECK((project_psd(P) - P).cwiseAbs().maxCoeff() <= 1e-10);

    const double best = (S - P).norm();
    SplitMix64 rng(seed * 31 + 17);
    for (int t = 0; t < 200; ++t) {
      Eigen::MatrixXd R(4, 4);
      for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) R(r, c) = rng.normal();
      const Eigen::MatrixXd cand = R * R.transpose();
      CHECK((S - cand).norm() >= best - 1e-10);
    }
  }
}

TEST_CASE("rank projection keeps the leading part of the spectrum") {
  Eigen::MatrixXd D = Eigen::Vector3d(3.0, 2.0, 1.0).asDiagonal();
  const Eigen::MatrixXd P = project_rank(D, 2);
  CHECK((P - Eigen::MatrixXd(Eigen::Vector3d(3.0, 2.0, 0.0).asDiagonal()))
            .cwiseAbs()
            .maxCoeff() <= 1e-12);

  for (std::uint64_t seed : {21u, 22u}) {
    const Eigen::MatrixXd S = random_sym(5, seed);
    const Eigen::MatrixXd R2 = project_rank(S, 2);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(R2);
    CHECK(es.eigenvalues().minCoeff() >= -1e-10);
    int positive = 0;
    for (int k = 0; k < 5; ++k)
      if (es.eigenvalues()[k] > 1e-10) ++positive;
    CHECK(positive <= 2);
    CHECK((project_rank(R2, 2) - R2).cwiseAbs().maxCoeff() <= 1e-10);

    const double best = (S - R2).norm();
    SplitMix64 rng(seed + 1000);
    for (int t = 0; t < 200; ++t) {
      Eigen::MatrixXd V(5, 2);
      for (int r = 0; r < 5; ++r)
        for (int c = 0; c < 2; ++c) V(r, c) = rng.normal();
      CHECK((S - V * V.transpose()).norm() >= best - 1e-10);
    }
  }

  CHECK_THROWS_AS(project_rank(D, 0), LayoutError);
  CHECK_THROWS_AS(project_rank(D, 3), LayoutError);
}

TEST_CASE("feasible bounded real problem converges") {
  const BuiltProblem p = scalar_brl(1.05);
  SolverOptions opts;
  opts.accel = Accel::Reflected;
  const FeasibilityOutcome out = solve_feasibility(p.set, p.layout, opts);

  CHECK(out.feasible());
  CHECK(out.certificate.max_margin <= opts.residual_tol);
  CHECK(out.restarts_used == 0);
  CHECK(static_cast<int>(out.history.size()) == out.iterations);

  // The certificate is exactly the residual of the returned point.
  const ResidualReport again = eval_residual(p.set, out.point);
  CHECK(again.max_margin == out.certificate.max_margin);
}

TEST_CASE("infeasible bounded real problem never certifies") {
  const BuiltProblem p = scalar_brl(0.95);
  SolverOptions opts;
  opts.accel = Accel::Reflected;
  opts.max_iters = 400;
  opts.stall_window = 60;
  opts.restarts = 1;
  const FeasibilityOutcome out = solve_feasibility(p.set, p.layout, opts);
  CHECK_FALSE(out.feasible());
  CHECK(out.certificate.max_margin > opts.residual_tol);
}

TEST_CASE("contradictory scalar bounds stall and report the gap") {
  const BuiltProblem p = contradictory_set();
  SolverOptions opts;
  opts.max_iters = 200;
  opts.stall_window = 30;
  opts.restarts = 2;
  const FeasibilityOutcome out = solve_feasibility(p.set, p.layout, opts);

  CHECK(out.status == SolveStatus::Stalled);
  CHECK(out.restarts_used == 2);
  // Best compromise sits at x = 0 where both sides miss by epsilon.
  CHECK(out.certificate.max_margin >= 0.5 * p.set.epsilon);
  CHECK(out.certificate.max_margin <= 10.0 * p.set.epsilon);
}

TEST_CASE("solver runs are deterministic") {
  const BuiltProblem p = scalar_brl(1.02);
  SolverOptions opts;
  opts.accel = Accel::Reflected;
  opts.seed = 7;

  const FeasibilityOutcome a = solve_feasibility(p.set, p.layout, opts);
  const FeasibilityOutcome b = solve_feasibility(p.set, p.layout, opts);
  REQUIRE(a.point.size() == b.point.size());
  CHECK((a.point - b.point).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.iterations == b.iterations);

  opts.threads = 3;
  const FeasibilityOutcome c = solve_feasibility(p.set, p.layout, opts);
  CHECK((a.point - c.point).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.iterations == c.iterations);
}

TEST_CASE("warm start at a solution is accepted immediately") {
  const BuiltProblem p = scalar_brl(1.05);
  SolverOptions opts;
  opts.accel = Accel::Reflected;
  const FeasibilityOutcome first = solve_feasibility(p.set, p.layout, opts);
  REQUIRE(first.feasible());

  SolverOptions plain;
  plain.accel = Accel::None;
  const FeasibilityOutcome again =
      solve_feasibility(p.set, p.layout, plain, first.point);
  CHECK(again.feasible());
  CHECK(again.iterations == 1);
  CHECK(again.restarts_used == 0);
  CHECK((again.point - first.point).cwiseAbs().maxCoeff() == 0.0);

  Eigen::VectorXd bad(2);
  bad << 1.0, 1.0;
  CHECK_THROWS_AS(solve_feasibility(p.set, p.layout, plain, bad), LayoutError);
}

TEST_CASE("iteration log is well-formed CSV with shrinking distance") {
  const BuiltProblem p = scalar_brl(1.05);
  std::ostringstream log;
  SolverOptions opts;
  opts.accel = Accel::None;
  opts.restarts = 0;
  opts.max_iters = 50;
  opts.iter_log = &log;

  Eigen::VectorXd far(1);
  far << 50.0;
  solve_feasibility(p.set, p.layout, opts, far);

  std::istringstream in(log.str());
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "iter,max_margin,dist2,P_0_1");

  std::vector<double> dist2;
  while (std::getline(in, line)) {
    std::istringstream row(line);
    std::string cell;
    std::vector<double> cells;
    while (std::getline(row, cell, ',')) cells.push_back(std::stod(cell));
    REQUIRE(cells.size() == 4);
    dist2.push_back(cells[2]);
  }
  REQUIRE(dist2.size() >= 3);
  for (std::size_t k = 1; k < dist2.size(); ++k)
    CHECK(dist2[k] <= dist2[k - 1] + 1e-9);
}

TEST_CASE("a stall window bounds the iteration count") {
  const BuiltProblem p = contradictory_set();
  SolverOptions opts;
  opts.max_iters = 10000;
  opts.stall_window = 25;
  opts.restarts = 0;
  const FeasibilityOutcome out = solve_feasibility(p.set, p.layout, opts);
  CHECK(out.iterations <= 2 * opts.stall_window + 2);
}

TEST_CASE("unconstrained coordinates are rejected") {
  BuiltProblem p;
  p.layout.add_scalar(Family::Tau, 1, 0);
  p.layout.add_scalar(Family::Theta, 1, 0);
  p.set.scalar_pos.push_back(0);  // Theta never appears in any block
  SolverOptions opts;
  CHECK_THROWS_AS(solve_feasibility(p.set, p.layout, opts), LayoutError);
}

TEST_CASE("refinement substitutes exact inverses") {
  VariableLayout lay;
  lay.add_sym(Family::X, 1, 1, 2);
  lay.add_sym(Family::Xbar, 1, 1, 2);
  lay.add_scalar(Family::BetaBar, 1, 1);
  lay.add_scalar(Family::BetaTilde, 1, 1);

  ConstraintSet set;
  RankBound rb;
  rb.max_rank = 2;
  rb.expr = AffineMatrixExpr("pair", 4);
  rb.expr.constant.topRightCorner(2, 2) = Eigen::MatrixXd::Identity(2, 2);
  rb.expr.constant.bottomLeftCorner(2, 2) = Eigen::MatrixXd::Identity(2, 2);
  for (int r = 0; r < 2; ++r)
    for (int c = r; c < 2; ++c) {
      Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(2, 2);
      basis(r, c) = basis(c, r) = 1.0;
      Eigen::MatrixXd M = Eigen::MatrixXd::Zero(4, 4);
      M.topLeftCorner(2, 2) = basis;
      rb.expr.add(lay.sym_index(Family::Xbar, 1, 1, r, c), M);
      M.setZero();
      M.bottomRightCorner(2, 2) = basis;
      rb.expr.add(lay.sym_index(Family::X, 1, 1, r, c), M);
    }
  set.rank_bounds.push_back(rb);
  set.scalar_pos.push_back(lay.scalar_index(Family::BetaBar, 1, 1));
  set.scalar_pos.push_back(lay.scalar_index(Family::BetaTilde, 1, 1));

  Eigen::VectorXd x = Eigen::VectorXd::Zero(lay.dimension());
  Eigen::MatrixXd X(2, 2);
  X << 2.0, 0.5, 0.5, 1.0;
  lay.set_sym(x, Family::X, 1, 1, X);
  lay.set_sym(x, Family::Xbar, 1, 1, 9.0 * Eigen::MatrixXd::Ones(2, 2));
  lay.set_scalar(x, Family::BetaTilde, 1, 1, 4.0);
  lay.set_scalar(x, Family::BetaBar, 1, 1, -3.0);

  const FeasibilityOutcome out = refine_and_certify(set, lay, x, 1e-9);
  CHECK(out.status == SolveStatus::Feasible);
  CHECK((lay.sym(out.point, Family::Xbar, 1, 1) - X.inverse())
            .cwiseAbs()
            .maxCoeff() <= 1e-14);
  CHECK(lay.scalar(out.point, Family::BetaBar, 1, 1) == 0.25);
  CHECK(out.certificate.max_margin <= 1e-9);

  lay.set_sym(x, Family::X, 1, 1,
              (Eigen::MatrixXd(2, 2) << 1.0, 0.0, 0.0, 0.0).finished());
  CHECK_THROWS_AS(refine_and_certify(set, lay, x, 1e-9), RefinementFailed);

  lay.set_sym(x, Family::X, 1, 1, X);
  lay.set_scalar(x, Family::BetaTilde, 1, 1, 0.0);
  CHECK_THROWS_AS(refine_and_certify(set, lay, x, 1e-9), RefinementFailed);
}
