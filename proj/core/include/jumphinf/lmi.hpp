#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "jumphinf/errors.hpp"
#include "jumphinf/markov.hpp"
#include "jumphinf/model.hpp"

namespace jumphinf {

enum class Family { X, Xbar, BetaBar, BetaTilde, Tau, Theta, Phi, P };

const char* family_name(Family f);

// Flat registry of decision coordinates.  Symmetric matrices pack their upper
// triangle row-major; scalars occupy one coordinate.  Groups that do not vary
// over subsystems or modes register with i = 0 or mu = 0.
class VariableLayout {
 public:
  struct Group {
    Family family;
    int i = 0;
    int mu = 0;
    int n = 0;  // matrix order; 0 marks a scalar
    int offset = 0;

    bool scalar() const { return n == 0; }
    int size() const { return scalar() ? 1 : n * (n + 1) / 2; }
  };

  int add_sym(Family f, int i, int mu, int n);
  int add_scalar(Family f, int i, int mu);

  int dimension() const { return dim_; }
  const std::vector<Group>& groups() const { return groups_; }
  bool has(Family f, int i, int mu) const;
  const Group& group(Family f, int i, int mu) const;

  int sym_index(Family f, int i, int mu, int r, int c) const;
  int scalar_index(Family f, int i, int mu) const;

  Eigen::MatrixXd sym(const Eigen::VectorXd& x, Family f, int i, int mu) const;
  void set_sym(Eigen::VectorXd& x, Family f, int i, int mu,
               const Eigen::MatrixXd& S) const;
  double scalar(const Eigen::VectorXd& x, Family f, int i, int mu) const;
  void set_scalar(Eigen::VectorXd& x, Family f, int i, int mu, double v) const;

  // X = I for matrix groups, 1 for scalars.
  Eigen::VectorXd default_point() const;

 private:
  std::vector<Group> groups_;
  int dim_ = 0;
};

// constant + sum_j x[coord_j] * coeff_j, all terms symmetric.
struct AffineMatrixExpr {
  std::string name;
  int dim = 0;
  Eigen::MatrixXd constant;
  std::vector<std::pair<int, Eigen::MatrixXd>> coeffs;

  explicit AffineMatrixExpr(std::string label = "", int k = 0);

  // Accumulates M into the coefficient of coordinate coord.
  void add(int coord, const Eigen::MatrixXd& M);
  void add(int coord, double scale);  // scale * I shorthand

  Eigen::MatrixXd eval(const Eigen::VectorXd& x) const;
};

struct RankBound {
  AffineMatrixExpr expr;
  int max_rank = 0;
};

struct ConstraintSet {
  std::vector<AffineMatrixExpr> lmi_neg;     // required <= -eps I
  std::vector<AffineMatrixExpr> lmi_nonneg;  // required >= 0
  std::vector<RankBound> rank_bounds;        // required PSD with rank <= r
  std::vector<int> scalar_pos;               // coordinates required >= eps
  double epsilon = 1e-6;

  int block_count() const {
    return static_cast<int>(lmi_neg.size() + lmi_nonneg.size() +
                            rank_bounds.size() + scalar_pos.size());
  }
};

struct ConstraintMargin {
  std::string name;
  double margin = 0.0;
};

struct ResidualReport {
  std::vector<ConstraintMargin> entries;
  double max_margin = 0.0;
  std::string worst_name;
};

// Margin conventions: for <= -eps I blocks, lambda_max + eps; for >= 0
// blocks, -lambda_min; for rank bounds, the (r+1)-th largest eigenvalue
// magnitude; for scalar bounds, eps - x.  Margin <= 0 on every entry means
// the point is feasible.
ResidualReport eval_residual(const ConstraintSet& set, const Eigen::VectorXd& point);

struct BuiltProblem {
  ConstraintSet set;
  VariableLayout layout;
};

BuiltProblem build_theorem1(const AuxiliarySystem& aux,
                            const Eigen::RowVectorXd& q_inf,
                            const TransitionRateMatrix& Q, double gamma,
                            double eps = 1e-6);

struct ModeLTI {
  Eigen::MatrixXd A, B, C, D;
};

BuiltProblem build_brl(const std::vector<ModeLTI>& modes,
                       const TransitionRateMatrix& Q, double gamma,
                       double eps = 1e-6);

// Text form for diffing: one header line per block, then the constant and
// each coefficient as sparse (row, col, value) triplets.
std::string dump_constraint_set(const ConstraintSet& set);

}  // namespace jumphinf
