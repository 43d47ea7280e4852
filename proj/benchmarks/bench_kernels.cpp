#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include "jumphinf/lmi.hpp"
#include "jumphinf/markov.hpp"
#include "jumphinf/model.hpp"
#include "jumphinf/rng.hpp"
#include "jumphinf/sim.hpp"
#include "jumphinf/solver.hpp"
#include "jumphinf/synthesis.hpp"

namespace {

using namespace jumphinf;

Eigen::MatrixXd random_sym(int n, SplitMix64& rng) {
  Eigen::MatrixXd M(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) M(r, c) = rng.normal();
  return 0.5 * (M + M.transpose());
}

LargeScaleModel bench_model() {
  SubsystemModel s;
  s.n = 2;
  s.m = 1;
  Eigen::MatrixXd A1(2, 2), A2(2, 2);
  A1 << 0.5, 1.0, 0.0, -1.0;
  A2 << -1.0, 0.3, 0.2, -2.0;
  Eigen::MatrixXd B1(2, 1), B2(2, 1);
  B1 << 1.0, 0.5;
  B2 << 0.8, -0.4;
  Eigen::MatrixXd C(2, 2), D(2, 1);
  C << 1.0, 0.0, 0.0, 0.0;
  D << 0.0, 0.5;
  Eigen::MatrixXd E(2, 1), F(2, 1), G(2, 1), H(1, 2);
  E << 0.1, 0.1;
  F << 0.1, -0.1;
  G << 0.2, 0.1;
  H << 0.4, 0.2;
  s.A = {A1, A2};
  s.B = {B1, B2};
  s.C = {C, C};
  s.D = {D, D};
  s.E = {E, E};
  s.F = {F, F};
  s.G = {G, G};
  s.H = {H, H};

  Eigen::MatrixXd Q(2, 2);
  Q << -1.0, 1.0, 2.0, -2.0;

  UncertaintyBudget b{Eigen::MatrixXd::Identity(2, 2),
                      Eigen::MatrixXd::Identity(2, 2)};
  Eigen::VectorXd x0(2);
  x0 << 1.0, -1.0;

  return LargeScaleModel{{s, s},
                         ModePatternMap({{1, 1}, {2, 2}}),
                         TransitionRateMatrix(Q),
                         1.5,
                         {b, b},
                         {x0, x0},
                         1};
}

void BM_ProjectPsd(benchmark::State& state) {
  SplitMix64 rng(7);
  const int n = static_cast<int>(state.range(0));
  const Eigen::MatrixXd S = random_sym(n, rng);
  for (auto _ : state) benchmark::DoNotOptimize(project_psd(S));
}
BENCHMARK(BM_ProjectPsd)->Arg(4)->Arg(15)->Arg(30);

void BM_ProjectRank(benchmark::State& state) {
  SplitMix64 rng(11);
  const int n = static_cast<int>(state.range(0));
  const Eigen::MatrixXd S = random_sym(n, rng);
  for (auto _ : state) benchmark::DoNotOptimize(project_rank(S, n / 2));
}
BENCHMARK(BM_ProjectRank)->Arg(4)->Arg(16);

void BM_EvalResidual(benchmark::State& state) {
  const LargeScaleModel model = bench_model();
  const AuxiliarySystem aux(model);
  const Eigen::RowVectorXd q = steady_state(model.Q);
  const BuiltProblem built = build_theorem1(aux, q, model.Q, model.gamma);
  const Eigen::VectorXd x = built.layout.default_point();
  for (auto _ : state)
    benchmark::DoNotOptimize(eval_residual(built.set, x));
}
BENCHMARK(BM_EvalResidual);

void BM_SolverIterations(benchmark::State& state) {
  const LargeScaleModel model = bench_model();
  const AuxiliarySystem aux(model);
  const Eigen::RowVectorXd q = steady_state(model.Q);
  const BuiltProblem built = build_theorem1(aux, q, model.Q, model.gamma);
  SolverOptions opts;
  opts.max_iters = static_cast<int>(state.range(0));
  opts.restarts = 0;
  opts.residual_tol = 0.0;  // force the full iteration budget
  opts.accel = Accel::Reflected;
  for (auto _ : state)
    benchmark::DoNotOptimize(solve_feasibility(built.set, built.layout, opts));
}
BENCHMARK(BM_SolverIterations)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_SamplePath(benchmark::State& state) {
  Eigen::MatrixXd Q(4, 4);
  Q << -0.35, 0.2, 0.1, 0.05, 0.5, -2.4, 0.7, 1.2, 0.4, 0.3, -1.45, 0.75, 0.1,
      0.2, 0.3, -0.6;
  const TransitionRateMatrix rates(Q);
  std::uint64_t id = 0;
  for (auto _ : state) benchmark::DoNotOptimize(sample_path(rates, 1, 100.0, 5, id++));
}
BENCHMARK(BM_SamplePath);

void BM_SimulateTrajectory(benchmark::State& state) {
  const LargeScaleModel model = bench_model();
  std::uint64_t id = 0;
  for (auto _ : state)
    benchmark::DoNotOptimize(simulate(model, Controller::none(), {},
                                      {DisturbanceSignal::exp_decay(1.0, 0.5)},
                                      1.0, 1e-3, 3, id++));
}
BENCHMARK(BM_SimulateTrajectory)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
