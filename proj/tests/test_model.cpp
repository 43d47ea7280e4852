#include <doctest.h>

#include <Eigen/Dense>

#include "fixture.hpp"
#include "jumphinf/model.hpp"

using namespace jumphinf;

TEST_CASE("mode pattern map indexes both directions") {
  const ModePatternMap map({{1, 1, 1}, {1, 2, 2}, {2, 1, 2}, {2, 2, 1}});
  CHECK(map.subsystem_count() == 3);
  CHECK(map.global_mode_count() == 4);
  for (int i = 1; i <= 3; ++i) CHECK(map.local_mode_count(i) == 2);

  for (int mu = 1; mu <= 4; ++mu) CHECK(map.psi(map.psi_inv(mu)) == mu);

  CHECK(map.local_mode(1, 3) == 2);
  CHECK(map.local_mode(2, 3) == 1);
  CHECK(map.local_mode(3, 4) == 1);

  CHECK(map.class_of(1, 1) == std::vector<int>{1, 2});
  CHECK(map.class_of(1, 2) == std::vector<int>{3, 4});
  CHECK(map.class_of(2, 1) == std::vector<int>{1, 3});
  CHECK(map.class_of(2, 2) == std::vector<int>{2, 4});
  CHECK(map.class_of(3, 1) == std::vector<int>{1, 4});
  CHECK(map.class_of(3, 2) == std::vector<int>{2, 3});

  CHECK_THROWS_AS(map.psi({2, 1, 1}), UnknownPattern);
  CHECK_THROWS_AS(map.psi_inv(5), OutOfRange);
  CHECK_THROWS_AS(map.local_mode(4, 1), OutOfRange);
}

TEST_CASE("pattern map construction rejects malformed inputs") {
  CHECK_THROWS_AS(ModePatternMap({}), ConfigError);
  CHECK_THROWS_AS(ModePatternMap({{1, 1}, {1}}), ConfigError);
  CHECK_THROWS_AS(ModePatternMap({{1, 1}, {1, 1}}), ConfigError);
  CHECK_THROWS_AS(ModePatternMap({{1, 0}}), ConfigError);
  // Local mode 2 of subsystem 1 never appears even though 3 does.
  CHECK_THROWS_AS(ModePatternMap({{1, 1}, {3, 2}}), ConfigError);
}

TEST_CASE("auxiliary system resolves per-pattern matrices") {
  const auto cfg = testfix::example_config();
  const AuxiliarySystem aux(cfg.model);

  for (int i = 1; i <= 3; ++i)
    for (int mu = 1; mu <= 4; ++mu) {
      const int nu = cfg.model.pattern_map.local_mode(i, mu);
      CHECK(aux.A(i, mu) == cfg.model.subsystems[i - 1].A[nu - 1]);
      CHECK(aux.H(i, mu) == cfg.model.subsystems[i - 1].H[nu - 1]);
      const Eigen::MatrixXd& D = cfg.model.subsystems[i - 1].D[nu - 1];
      CHECK((aux.R(i, mu) - D.transpose() * D).cwiseAbs().maxCoeff() <= 1e-15);
    }

  // Subsystem 2 under global mode 3 runs local mode 1; its R comes from
  // D = [0; 0.6], so R = 0.36.
  CHECK(aux.R(2, 3)(0, 0) == doctest::Approx(0.36));
}

TEST_CASE("consistency checking catches dimension drift") {
  auto cfg = testfix::example_config();
  CHECK_NOTHROW(cfg.model.check_consistency());

  auto broken = cfg.model;
  broken.subsystems[0].B[0] = Eigen::MatrixXd::Zero(2, 2);
  CHECK_THROWS_AS(broken.check_consistency(), ConfigError);

  broken = cfg.model;
  broken.x0[1] = Eigen::VectorXd::Zero(3);
  CHECK_THROWS_AS(broken.check_consistency(), ConfigError);

  broken = cfg.model;
  broken.budgets.pop_back();
  CHECK_THROWS_AS(broken.check_consistency(), ConfigError);

  broken = cfg.model;
  broken.eta0 = 9;
  CHECK_THROWS_AS(broken.check_consistency(), ConfigError);

  broken = cfg.model;
  broken.subsystems[2].H.pop_back();
  CHECK_THROWS_AS(broken.check_consistency(), ConfigError);
}

TEST_CASE("assumption checks pass on the example and fail when weights break") {
  const auto cfg = testfix::example_config();
  const AssumptionReport rep = validate_assumptions(cfg.model);
  CHECK(rep.all_pass());
  CHECK_FALSE(rep.checks.empty());
  CHECK_FALSE(rep.notes.empty());

  auto no_weight = cfg.model;
  for (auto& D : no_weight.subsystems[0].D) D.setZero();
  const AssumptionReport bad = validate_assumptions(no_weight);
  CHECK_FALSE(bad.all_pass());
  bool named = false;
  for (const auto& c : bad.checks)
    if (!c.pass && c.subsystem == 1) named = true;
  CHECK(named);

  auto mixed = cfg.model;
  mixed.subsystems[1].C[0](0, 0) = 0.0;
  mixed.subsystems[1].C[0](1, 0) = 1.0;  // now D' C != 0 in mode 1
  CHECK_FALSE(validate_assumptions(mixed).all_pass());
}

TEST_CASE("stabilizability check uses the Hautus pencil") {
  LargeScaleModel m = testfix::smoke_model();
  CHECK(validate_assumptions(m).all_pass());

  // Remove control authority: the unstable eigenvalue 0.4 becomes fixed.
  m.subsystems[0].B[0].setZero();
  const AssumptionReport rep = validate_assumptions(m);
  CHECK_FALSE(rep.all_pass());
}
