#pragma once

#include <string>

#include "config.hpp"
#include "jumphinf/model.hpp"

namespace testfix {

inline std::string data_dir() { return JUMPHINF_DATA_DIR; }

inline jumphinf::tools::RunConfig example_config() {
  return jumphinf::tools::parse_config(data_dir() + "/example_sectionV.json");
}

// Scalar single-mode plant 1/(s+1): A=-1, disturbance enters directly,
// z = [x; u] with unit control weight so R = I.
inline jumphinf::LargeScaleModel scalar_model() {
  using namespace jumphinf;
  SubsystemModel s;
  s.n = 1;
  s.m = 1;
  s.A = {(Eigen::MatrixXd(1, 1) << -1.0).finished()};
  s.B = {Eigen::MatrixXd::Zero(1, 1)};
  s.C = {(Eigen::MatrixXd(2, 1) << 1.0, 0.0).finished()};
  s.D = {(Eigen::MatrixXd(2, 1) << 0.0, 1.0).finished()};
  s.E = {Eigen::MatrixXd::Zero(1, 0)};
  s.F = {Eigen::MatrixXd::Zero(1, 0)};
  s.G = {Eigen::MatrixXd::Identity(1, 1)};
  s.H = {Eigen::MatrixXd::Zero(0, 1)};

  UncertaintyBudget b{Eigen::MatrixXd::Identity(1, 1),
                      Eigen::MatrixXd::Identity(1, 1)};
  return LargeScaleModel{{s},
                         ModePatternMap(std::vector<std::vector<int>>{{1}}),
                         TransitionRateMatrix(Eigen::MatrixXd::Zero(1, 1)),
                         1.5,
                         {b},
                         {Eigen::VectorXd::Zero(1)},
                         1};
}

// Stabilizable single-mode subsystem used for end-to-end synthesis smoke
// tests: unstable plant, proper control authority and weights.
inline jumphinf::LargeScaleModel smoke_model() {
  using namespace jumphinf;
  SubsystemModel s;
  s.n = 2;
  s.m = 1;
  s.A = {(Eigen::MatrixXd(2, 2) << 0.4, 1.0, 0.0, -0.5).finished()};
  s.B = {(Eigen::MatrixXd(2, 1) << 1.0, 0.6).finished()};
  s.C = {(Eigen::MatrixXd(2, 2) << 1.0, 0.0, 0.0, 0.0).finished()};
  s.D = {(Eigen::MatrixXd(2, 1) << 0.0, 1.0).finished()};
  s.E = {(Eigen::MatrixXd(2, 1) << 0.05, 0.05).finished()};
  s.F = {(Eigen::MatrixXd(2, 1) << 0.05, -0.05).finished()};
  s.G = {(Eigen::MatrixXd(2, 1) << 0.2, 0.1).finished()};
  s.H = {(Eigen::MatrixXd(1, 2) << 0.1, 0.1).finished()};

  UncertaintyBudget b{Eigen::MatrixXd::Identity(2, 2),
                      Eigen::MatrixXd::Identity(2, 2)};
  return LargeScaleModel{{s},
                         ModePatternMap(std::vector<std::vector<int>>{{1}}),
                         TransitionRateMatrix(Eigen::MatrixXd::Zero(1, 1)),
                         4.0,
                         {b},
                         {(Eigen::VectorXd(2) << 1.0, -1.0).finished()},
                         1};
}

}  // namespace testfix
