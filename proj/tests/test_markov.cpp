#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "fixture.hpp"
#include "jumphinf/markov.hpp"

using namespace jumphinf;

namespace {

Eigen::MatrixXd example_rate_matrix() {
  Eigen::MatrixXd Q(4, 4);
  Q << -0.35, 0.2, 0.1, 0.05, 0.5, -2.4, 0.7, 1.2, 0.4, 0.3, -1.45, 0.75, 0.1,
      0.2, 0.3, -0.6;
  return Q;
}

}  // namespace

TEST_CASE("rate matrix validation") {
  CHECK(rate_matrix_issues(example_rate_matrix()).empty());

  Eigen::MatrixXd bad = example_rate_matrix();
  bad(0, 1) = -0.2;
  CHECK_FALSE(rate_matrix_issues(bad).empty());

  bad = example_rate_matrix();
  bad(2, 2) = -1.0;
  CHECK_FALSE(rate_matrix_issues(bad).empty());

  CHECK_FALSE(rate_matrix_issues(Eigen::MatrixXd::Zero(2, 3)).empty());

  CHECK_THROWS_AS(TransitionRateMatrix{bad}, ConfigError);
}

TEST_CASE("stationary distribution matches the exact rational solution") {
  const TransitionRateMatrix Q(example_rate_matrix());
  const Eigen::RowVectorXd q = steady_state(Q);

  // Solving (Q + E)' q = e by hand in exact arithmetic gives
  // q = (1722, 362, 638, 1665) / 4387.
  CHECK(q[0] == doctest::Approx(1722.0 / 4387.0).epsilon(1e-12));
  CHECK(q[1] == doctest::Approx(362.0 / 4387.0).epsilon(1e-12));
  CHECK(q[2] == doctest::Approx(638.0 / 4387.0).epsilon(1e-12));
  CHECK(q[3] == doctest::Approx(1665.0 / 4387.0).epsilon(1e-12));

  CHECK(std::abs(q.sum() - 1.0) <= 1e-12);
  CHECK((q * example_rate_matrix()).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("non-ergodic chains are rejected") {
  CHECK_THROWS_AS(steady_state(TransitionRateMatrix(Eigen::MatrixXd::Zero(2, 2))),
                  NotErgodic);

  Eigen::MatrixXd absorbing(2, 2);
  absorbing << -1.0, 1.0, 0.0, 0.0;
  CHECK_THROWS_AS(steady_state(TransitionRateMatrix(absorbing)), NotErgodic);
}

TEST_CASE("sampled paths are reproducible and cover the horizon") {
  const TransitionRateMatrix Q(example_rate_matrix());
  const ModePath a = sample_path(Q, 1, 50.0, 42, 7);
  const ModePath b = sample_path(Q, 1, 50.0, 42, 7);
  const ModePath c = sample_path(Q, 1, 50.0, 42, 8);

  CHECK(a.jump_times == b.jump_times);
  CHECK(a.modes == b.modes);
  CHECK(a.jump_times != c.jump_times);

  REQUIRE_FALSE(a.jump_times.empty());
  CHECK(a.jump_times.front() == 0.0);
  CHECK(a.modes.front() == 1);
  CHECK(a.horizon == 50.0);
  CHECK_FALSE(a.absorbed);
  for (std::size_t k = 1; k < a.jump_times.size(); ++k) {
    CHECK(a.jump_times[k] > a.jump_times[k - 1]);
    CHECK(a.jump_times[k] < a.horizon);
    CHECK(a.modes[k] != a.modes[k - 1]);
  }
}

TEST_CASE("mode_at honors half-open intervals") {
  ModePath p;
  p.jump_times = {0.0, 1.0, 2.5};
  p.modes = {1, 3, 2};
  p.horizon = 4.0;
  CHECK(p.mode_at(0.0) == 1);
  CHECK(p.mode_at(0.999) == 1);
  CHECK(p.mode_at(1.0) == 3);
  CHECK(p.mode_at(2.5) == 2);
  CHECK(p.mode_at(4.0) == 2);
  CHECK(p.jump_count() == 2);
}

TEST_CASE("absorbing state sets the flag and ends the path") {
  Eigen::MatrixXd Q(2, 2);
  Q << -1.0, 1.0, 0.0, 0.0;
  const ModePath p = sample_path(TransitionRateMatrix(Q), 1, 100.0, 3);
  CHECK(p.absorbed);
  CHECK(p.modes.back() == 2);
  CHECK(p.jump_count() == 1);
}

TEST_CASE("holding times in a mode average to one over the exit rate") {
  const TransitionRateMatrix Q(example_rate_matrix());
  double total = 0.0;
  int count = 0;
  for (std::uint64_t id = 0; id < 200; ++id) {
    const ModePath p = sample_path(Q, 1, 100.0, 99, id);
    for (std::size_t k = 0; k + 1 < p.jump_times.size(); ++k)
      if (p.modes[k] == 2) {
        total += p.jump_times[k + 1] - p.jump_times[k];
        ++count;
      }
  }
  REQUIRE(count > 500);
  const double mean = total / count;
  CHECK(mean == doctest::Approx(1.0 / 2.4).epsilon(0.02));
}

TEST_CASE("occupancy fractions converge to the stationary distribution") {
  const TransitionRateMatrix Q(example_rate_matrix());
  const Eigen::RowVectorXd q = steady_state(Q);
  const ModePath p = sample_path(Q, 1, 1e4, 2718);
  const Eigen::VectorXd occ = occupancy(p);
  REQUIRE(occ.size() == 4);
  CHECK(std::abs(occ.sum() - 1.0) <= 1e-12);
  for (int mu = 0; mu < 4; ++mu)
    CHECK(std::abs(occ[mu] - q[mu]) <= 0.02);
}
