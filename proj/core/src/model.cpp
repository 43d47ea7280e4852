#include "jumphinf/model.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <set>
#include <sstream>

namespace jumphinf {

namespace {

std::string tuple_str(const std::vector<int>& t) {
  std::ostringstream os;
  os << "(";
  for (std::size_t k = 0; k < t.size(); ++k) os << (k ? "," : "") << t[k];
  os << ")";
  return os.str();
}

}  // namespace

ModePatternMap::ModePatternMap(std::vector<std::vector<int>> patterns)
    : patterns_(std::move(patterns)) {
  if (patterns_.empty()) throw ConfigError("pattern list is empty");
  const std::size_t N = patterns_.front().size();
  if (N == 0) throw ConfigError("patterns must have at least one component");

  counts_.assign(N, 0);
  for (const auto& t : patterns_) {
    if (t.size() != N)
      throw ConfigError("pattern " + tuple_str(t) + " has wrong arity");
    for (std::size_t i = 0; i < N; ++i) {
      if (t[i] < 1)
        throw ConfigError("pattern " + tuple_str(t) + " has a mode below 1");
      counts_[i] = std::max(counts_[i], t[i]);
    }
  }

  for (std::size_t k = 0; k < patterns_.size(); ++k) {
    if (!index_.emplace(patterns_[k], static_cast<int>(k) + 1).second)
      throw ConfigError("duplicate pattern " + tuple_str(patterns_[k]));
  }

  classes_.resize(N);
  for (std::size_t i = 0; i < N; ++i) {
    classes_[i].resize(counts_[i]);
    for (std::size_t k = 0; k < patterns_.size(); ++k)
      classes_[i][patterns_[k][i] - 1].push_back(static_cast<int>(k) + 1);
    for (int nu = 1; nu <= counts_[i]; ++nu) {
      if (classes_[i][nu - 1].empty())
        throw ConfigError("local mode " + std::to_string(nu) + " of subsystem " +
                          std::to_string(i + 1) + " appears in no pattern");
    }
  }
}

int ModePatternMap::local_mode_count(int i) const {
  if (i < 1 || i > subsystem_count())
    throw OutOfRange("subsystem index " + std::to_string(i));
  return counts_[i - 1];
}

int ModePatternMap::psi(const std::vector<int>& tuple) const {
  auto it = index_.find(tuple);
  if (it == index_.end())
    throw UnknownPattern("tuple " + tuple_str(tuple) + " is not in the pattern set");
  return it->second;
}

const std::vector<int>& ModePatternMap::psi_inv(int mu) const {
  if (mu < 1 || mu > global_mode_count())
    throw OutOfRange("global mode " + std::to_string(mu));
  return patterns_[mu - 1];
}

int ModePatternMap::local_mode(int i, int mu) const {
  if (i < 1 || i > subsystem_count())
    throw OutOfRange("subsystem index " + std::to_string(i));
  return psi_inv(mu)[i - 1];
}

const std::vector<int>& ModePatternMap::class_of(int i, int nu) const {
  if (i < 1 || i > subsystem_count())
    throw OutOfRange("subsystem index " + std::to_string(i));
  if (nu < 1 || nu > counts_[i - 1])
    throw OutOfRange("local mode " + std::to_string(nu) + " of subsystem " +
                     std::to_string(i));
  return classes_[i - 1][nu - 1];
}

Eigen::MatrixXd SubsystemModel::R(int nu) const {
  const auto& Dn = D.at(nu - 1);
  return Dn.transpose() * Dn;
}

void LargeScaleModel::check_consistency() const {
  const int N = subsystem_count();
  if (pattern_map.subsystem_count() != N)
    throw ConfigError("pattern map covers " +
                      std::to_string(pattern_map.subsystem_count()) +
                      " subsystems, model has " + std::to_string(N));
  if (Q.mode_count() != pattern_map.global_mode_count())
    throw ConfigError("Q is " + std::to_string(Q.mode_count()) +
                      "x" + std::to_string(Q.mode_count()) + ", pattern map has " +
                      std::to_string(pattern_map.global_mode_count()) + " modes");
  if (gamma <= 0) throw ConfigError("gamma must be positive");
  if (eta0 < 1 || eta0 > pattern_map.global_mode_count())
    throw ConfigError("eta0 out of range");
  if (!x0.empty() && static_cast<int>(x0.size()) != N)
    throw ConfigError("x0 covers " + std::to_string(x0.size()) +
                      " subsystems, model has " + std::to_string(N));
  if (!budgets.empty() && static_cast<int>(budgets.size()) != N)
    throw ConfigError("budgets cover " + std::to_string(budgets.size()) +
                      " subsystems, model has " + std::to_string(N));

  for (int i = 1; i <= N; ++i) {
    const auto& s = subsystems[i - 1];
    const std::string tag = "subsystem " + std::to_string(i);
    const int Mi = pattern_map.local_mode_count(i);
    auto family = [&](const char* label, const std::vector<Eigen::MatrixXd>& v,
                      int rows, int cols) {
      if (static_cast<int>(v.size()) != Mi)
        throw ConfigError(tag + " " + label + " has " + std::to_string(v.size()) +
                          " modes, expected " + std::to_string(Mi));
      for (int nu = 1; nu <= Mi; ++nu) {
        const auto& m = v[nu - 1];
        if ((rows >= 0 && m.rows() != rows) || (cols >= 0 && m.cols() != cols))
          throw ConfigError(tag + " mode " + std::to_string(nu) + " " + label +
                            " is " + std::to_string(m.rows()) + "x" +
                            std::to_string(m.cols()));
      }
    };
    family("A", s.A, s.n, s.n);
    family("B", s.B, s.n, s.m);
    family("C", s.C, s.pz(), s.n);
    family("D", s.D, s.pz(), s.m);
    family("E", s.E, s.n, s.pr());
    family("F", s.F, s.n, s.pxi());
    family("G", s.G, s.n, s.pw());
    family("H", s.H, s.pzeta(), s.n);
    if (i - 1 < static_cast<int>(x0.size()) && x0[i - 1].size() != s.n)
      throw ConfigError(tag + " x0 has length " + std::to_string(x0[i - 1].size()));
    if (i - 1 < static_cast<int>(budgets.size())) {
      const auto& b = budgets[i - 1];
      if (b.S_bar.rows() != s.n || b.S_bar.cols() != s.n ||
          b.S_tilde.rows() != s.n || b.S_tilde.cols() != s.n)
        throw ConfigError(tag + " budget dimensions do not match n");
    }
  }
}

AuxiliarySystem::AuxiliarySystem(const LargeScaleModel& model) : model_(&model) {
  model.check_consistency();
  const int N = model.subsystem_count();
  const int M = model.global_mode_count();
  r_cache_.resize(N);
  for (int i = 1; i <= N; ++i) {
    r_cache_[i - 1].resize(M);
    for (int mu = 1; mu <= M; ++mu) {
      const int nu = model.pattern_map.local_mode(i, mu);
      r_cache_[i - 1][mu - 1] = model.subsystems[i - 1].R(nu);
    }
  }
}

const Eigen::MatrixXd& AuxiliarySystem::pick(
    int i, int mu, std::vector<Eigen::MatrixXd> SubsystemModel::*family) const {
  const int nu = model_->pattern_map.local_mode(i, mu);
  return (model_->subsystems[i - 1].*family)[nu - 1];
}

const Eigen::MatrixXd& AuxiliarySystem::R(int i, int mu) const {
  if (i < 1 || i > subsystem_count()) throw OutOfRange("subsystem index");
  if (mu < 1 || mu > global_mode_count()) throw OutOfRange("global mode");
  return r_cache_[i - 1][mu - 1];
}

bool AssumptionReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const AssumptionCheck& c) { return c.pass; });
}

AssumptionReport validate_assumptions(const LargeScaleModel& model, double tol) {
  model.check_consistency();
  AssumptionReport report;
  const int N = model.subsystem_count();

  for (int i = 1; i <= N; ++i) {
    const auto& s = model.subsystems[i - 1];
    for (int nu = 1; nu <= s.mode_count(); ++nu) {
      {
        AssumptionCheck c;
        c.subsystem = i;
        c.local_mode = nu;
        c.name = "orthogonal_output_weights";
        const Eigen::MatrixXd dc = s.D[nu - 1].transpose() * s.C[nu - 1];
        const double cross = dc.cwiseAbs().maxCoeff();
        const Eigen::MatrixXd r = s.R(nu);
        const double rmin =
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(r).eigenvalues().minCoeff();
        c.pass = cross <= tol && rmin > tol;
        std::ostringstream os;
        os << "max|D'C| = " << cross << ", lambda_min(D'D) = " << rmin;
        c.detail = os.str();
        report.checks.push_back(std::move(c));
      }
      {
        AssumptionCheck c;
        c.subsystem = i;
        c.local_mode = nu;
        c.name = "stabilizable";
        c.pass = true;
        const Eigen::MatrixXd& A = s.A[nu - 1];
        const Eigen::MatrixXd& B = s.B[nu - 1];
        Eigen::EigenSolver<Eigen::MatrixXd> es(A);
        for (int k = 0; k < A.rows(); ++k) {
          const std::complex<double> lam = es.eigenvalues()[k];
          if (lam.real() < -tol) continue;
          Eigen::MatrixXcd pencil(A.rows(), A.cols() + B.cols());
          pencil << A.cast<std::complex<double>>() -
                        lam * Eigen::MatrixXcd::Identity(A.rows(), A.cols()),
              B.cast<std::complex<double>>();
          Eigen::JacobiSVD<Eigen::MatrixXcd> svd(pencil);
          const auto& sv = svd.singularValues();
          const double cutoff = tol * sv.maxCoeff();
          if (sv.minCoeff() <= cutoff) {
            c.pass = false;
            std::ostringstream os;
            os << "Hautus rank deficit at eigenvalue " << lam;
            c.detail = os.str();
            break;
          }
        }
        if (c.pass) c.detail = "Hautus test passed for all unstable eigenvalues";
        report.checks.push_back(std::move(c));
      }
    }
  }

  report.notes.push_back(
      "stabilizability is checked per subsystem and local mode; it does not by "
      "itself imply stabilizability of the interconnected large-scale system");
  return report;
}

}  // namespace jumphinf
