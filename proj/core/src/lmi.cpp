#include "jumphinf/lmi.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace jumphinf {

const char* family_name(Family f) {
  switch (f) {
    case Family::X: return "X";
    case Family::Xbar: return "Xbar";
    case Family::BetaBar: return "beta_bar";
    case Family::BetaTilde: return "beta_tilde";
    case Family::Tau: return "tau";
    case Family::Theta: return "theta";
    case Family::Phi: return "phi";
    case Family::P: return "P";
  }
  return "?";
}

int VariableLayout::add_sym(Family f, int i, int mu, int n) {
  if (n < 1) throw LayoutError("symmetric group needs order >= 1");
  if (has(f, i, mu)) throw LayoutError("duplicate group registration");
  groups_.push_back({f, i, mu, n, dim_});
  dim_ += n * (n + 1) / 2;
  return groups_.back().offset;
}

int VariableLayout::add_scalar(Family f, int i, int mu) {
  if (has(f, i, mu)) throw LayoutError("duplicate group registration");
  groups_.push_back({f, i, mu, 0, dim_});
  dim_ += 1;
  return groups_.back().offset;
}

bool VariableLayout::has(Family f, int i, int mu) const {
  for (const auto& g : groups_)
    if (g.family == f && g.i == i && g.mu == mu) return true;
  return false;
}

const VariableLayout::Group& VariableLayout::group(Family f, int i, int mu) const {
  for (const auto& g : groups_)
    if (g.family == f && g.i == i && g.mu == mu) return g;
  std::ostringstream os;
  os << "no group " << family_name(f) << "(i=" << i << ", mu=" << mu << ")";
  throw LayoutError(os.str());
}

int VariableLayout::sym_index(Family f, int i, int mu, int r, int c) const {
  const Group& g = group(f, i, mu);
  if (g.scalar()) throw LayoutError("group is a scalar");
  if (r > c) std::swap(r, c);
  if (r < 0 || c >= g.n) throw LayoutError("matrix entry out of range");
  // upper triangle, row-major: row r starts after r*n - r(r-1)/2 entries
  return g.offset + r * g.n - r * (r - 1) / 2 + (c - r);
}

int VariableLayout::scalar_index(Family f, int i, int mu) const {
  const Group& g = group(f, i, mu);
  if (!g.scalar()) throw LayoutError("group is a matrix");
  return g.offset;
}

Eigen::MatrixXd VariableLayout::sym(const Eigen::VectorXd& x, Family f, int i,
                                    int mu) const {
  const Group& g = group(f, i, mu);
  if (g.scalar()) throw LayoutError("group is a scalar");
  Eigen::MatrixXd S(g.n, g.n);
  int k = g.offset;
  for (int r = 0; r < g.n; ++r)
    for (int c = r; c < g.n; ++c) {
      S(r, c) = x[k];
      S(c, r) = x[k];
      ++k;
    }
  return S;
}

void VariableLayout::set_sym(Eigen::VectorXd& x, Family f, int i, int mu,
                             const Eigen::MatrixXd& S) const {
  const Group& g = group(f, i, mu);
  if (g.scalar()) throw LayoutError("group is a scalar");
  if (S.rows() != g.n || S.cols() != g.n) throw LayoutError("matrix size mismatch");
  int k = g.offset;
  for (int r = 0; r < g.n; ++r)
    for (int c = r; c < g.n; ++c) x[k++] = 0.5 * (S(r, c) + S(c, r));
}

double VariableLayout::scalar(const Eigen::VectorXd& x, Family f, int i,
                              int mu) const {
  return x[scalar_index(f, i, mu)];
}

void VariableLayout::set_scalar(Eigen::VectorXd& x, Family f, int i, int mu,
                                double v) const {
  x[scalar_index(f, i, mu)] = v;
}

Eigen::VectorXd VariableLayout::default_point() const {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(dim_);
  for (const auto& g : groups_) {
    if (g.scalar()) {
      x[g.offset] = 1.0;
    } else {
      int k = g.offset;
      for (int r = 0; r < g.n; ++r)
        for (int c = r; c < g.n; ++c) x[k++] = (r == c) ? 1.0 : 0.0;
    }
  }
  return x;
}

AffineMatrixExpr::AffineMatrixExpr(std::string label, int k)
    : name(std::move(label)), dim(k), constant(Eigen::MatrixXd::Zero(k, k)) {}

void AffineMatrixExpr::add(int coord, const Eigen::MatrixXd& M) {
  if (M.rows() != dim || M.cols() != dim)
    throw LayoutError("coefficient size mismatch in block " + name);
  for (auto& [j, mat] : coeffs) {
    if (j == coord) {
      mat += M;
      return;
    }
  }
  coeffs.emplace_back(coord, M);
}

void AffineMatrixExpr::add(int coord, double scale) {
  add(coord, scale * Eigen::MatrixXd::Identity(dim, dim));
}

Eigen::MatrixXd AffineMatrixExpr::eval(const Eigen::VectorXd& x) const {
  Eigen::MatrixXd S = constant;
  for (const auto& [j, mat] : coeffs) {
    if (j < 0 || j >= x.size()) throw LayoutError("point too short for block " + name);
    S.noalias() += x[j] * mat;
  }
  return S;
}

namespace {

// Symmetric basis element: unit on (r,c) and (c,r).
Eigen::MatrixXd sym_basis(int n, int r, int c) {
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n, n);
  B(r, c) = 1.0;
  B(c, r) = 1.0;
  return B;
}

double margin_neg(const Eigen::MatrixXd& S, double eps) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff() + eps;
}

double margin_nonneg(const Eigen::MatrixXd& S) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
  return -es.eigenvalues().minCoeff();
}

double margin_rank(const Eigen::MatrixXd& S, int rank) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
  Eigen::VectorXd mags = es.eigenvalues().cwiseAbs();
  std::sort(mags.data(), mags.data() + mags.size(), std::greater<double>());
  return mags[rank];
}

}  // namespace

ResidualReport eval_residual(const ConstraintSet& set, const Eigen::VectorXd& point) {
  ResidualReport report;
  report.max_margin = -std::numeric_limits<double>::infinity();
  auto push = [&](std::string name, double m) {
    if (m > report.max_margin) {
      report.max_margin = m;
      report.worst_name = name;
    }
    report.entries.push_back({std::move(name), m});
  };
  for (const auto& b : set.lmi_neg) push(b.name, margin_neg(b.eval(point), set.epsilon));
  for (const auto& b : set.lmi_nonneg) push(b.name, margin_nonneg(b.eval(point)));
  for (const auto& rb : set.rank_bounds)
    push(rb.expr.name, margin_rank(rb.expr.eval(point), rb.max_rank));
  for (int j : set.scalar_pos) {
    if (j < 0 || j >= point.size()) throw LayoutError("scalar_pos coordinate out of range");
    push("scalar_pos(" + std::to_string(j) + ")", set.epsilon - point[j]);
  }
  return report;
}

BuiltProblem build_theorem1(const AuxiliarySystem& aux,
                            const Eigen::RowVectorXd& q_inf,
                            const TransitionRateMatrix& Q, double gamma,
                            double eps) {
  const LargeScaleModel& model = aux.model();
  const ModePatternMap& map = model.pattern_map;
  const int N = model.subsystem_count();
  const int M = model.global_mode_count();
  if (q_inf.size() != M) throw LayoutError("q_inf length mismatch");
  if ((q_inf.array() <= 0).any())
    throw NotErgodic("q_inf has a nonpositive entry");

  BuiltProblem p;
  p.set.epsilon = eps;
  VariableLayout& lay = p.layout;

  for (int i = 1; i <= N; ++i)
    for (int mu = 1; mu <= M; ++mu) lay.add_sym(Family::X, i, mu, model.subsystems[i - 1].n);
  for (int i = 1; i <= N; ++i)
    for (int mu = 1; mu <= M; ++mu) lay.add_sym(Family::Xbar, i, mu, model.subsystems[i - 1].n);
  for (int i = 1; i <= N; ++i)
    for (int mu = 1; mu <= M; ++mu) lay.add_scalar(Family::BetaBar, i, mu);
  for (int i = 1; i <= N; ++i)
    for (int mu = 1; mu <= M; ++mu) lay.add_scalar(Family::BetaTilde, i, mu);
  for (int i = 1; i <= N; ++i) lay.add_scalar(Family::Tau, i, 0);
  for (int i = 1; i <= N; ++i) lay.add_scalar(Family::Theta, i, 0);
  for (int i = 1; i <= N; ++i) lay.add_scalar(Family::Phi, i, 0);

  std::vector<std::vector<Eigen::MatrixXd>> r_inv(N);
  for (int i = 1; i <= N; ++i) {
    r_inv[i - 1].resize(M);
    for (int mu = 1; mu <= M; ++mu) {
      const Eigen::MatrixXd& R = aux.R(i, mu);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(R, Eigen::EigenvaluesOnly);
      if (es.eigenvalues().minCoeff() <= 1e-12)
        throw AssumptionViolation("R of subsystem " + std::to_string(i) + " mode " +
                                  std::to_string(mu) + " is singular");
      r_inv[i - 1][mu - 1] = R.inverse();
    }
  }

  for (int i = 1; i <= N; ++i) {
    const auto& sub = model.subsystems[i - 1];
    const int n = sub.n;
    const int m = sub.m;
    const int pz = sub.pz();
    const int pzeta = sub.pzeta();

    for (int mu = 1; mu <= M; ++mu) {
      const std::string tag = "_i" + std::to_string(i) + "_mu" + std::to_string(mu);
      const Eigen::MatrixXd& Am = aux.A(i, mu);
      const Eigen::MatrixXd& Bm = aux.B(i, mu);
      const Eigen::MatrixXd& Cm = aux.C(i, mu);
      const Eigen::MatrixXd& Em = aux.E(i, mu);
      const Eigen::MatrixXd& Fm = aux.F(i, mu);
      const Eigen::MatrixXd& Gm = aux.G(i, mu);
      const Eigen::MatrixXd& Hm = aux.H(i, mu);
      const Eigen::MatrixXd& Rinv = r_inv[i - 1][mu - 1];

      const int d2 = pz + n + N * pzeta;
      const int d3 = (M - 1) * n;
      const int dim = n + d2 + d3;

      AffineMatrixExpr blk("dissipation" + tag, dim);
      blk.constant.topLeftCorner(n, n) =
          std::pow(gamma, -2) * Gm * Gm.transpose() - Bm * Rinv * Bm.transpose();
      blk.constant.block(n, n, pz, pz) = -Eigen::MatrixXd::Identity(pz, pz);

      Eigen::MatrixXd W12(n, d2);
      W12.leftCols(pz) = Cm.transpose();
      W12.middleCols(pz, n) = Eigen::MatrixXd::Identity(n, n);
      for (int k = 0; k < N; ++k) W12.middleCols(pz + n + k * pzeta, pzeta) = Hm.transpose();

      std::vector<int> other_modes;
      for (int nu = 1; nu <= M; ++nu)
        if (nu != mu) other_modes.push_back(nu);
      Eigen::MatrixXd W13(n, d3);
      for (std::size_t k = 0; k < other_modes.size(); ++k)
        W13.middleCols(static_cast<int>(k) * n, n) =
            std::sqrt(std::max(Q.Q(mu - 1, other_modes[k] - 1), 0.0)) *
            Eigen::MatrixXd::Identity(n, n);

      for (int r = 0; r < n; ++r)
        for (int c = r; c < n; ++c) {
          const Eigen::MatrixXd Bc = sym_basis(n, r, c);
          Eigen::MatrixXd Mat = Eigen::MatrixXd::Zero(dim, dim);
          Mat.topLeftCorner(n, n) =
              Bc * Am.transpose() + Am * Bc + Q.Q(mu - 1, mu - 1) * Bc;
          Mat.block(0, n, n, d2) = Bc * W12;
          Mat.block(n, 0, d2, n) = Mat.block(0, n, n, d2).transpose();
          if (d3 > 0) {
            Mat.block(0, n + d2, n, d3) = Bc * W13;
            Mat.block(n + d2, 0, d3, n) = Mat.block(0, n + d2, n, d3).transpose();
          }
          blk.add(lay.sym_index(Family::X, i, mu, r, c), Mat);
        }

      for (std::size_t k = 0; k < other_modes.size(); ++k) {
        const int nu = other_modes[k];
        const int off = n + d2 + static_cast<int>(k) * n;
        for (int r = 0; r < n; ++r)
          for (int c = r; c < n; ++c) {
            Eigen::MatrixXd Mat = Eigen::MatrixXd::Zero(dim, dim);
            Mat.block(off, off, n, n) = -sym_basis(n, r, c);
            blk.add(lay.sym_index(Family::X, i, nu, r, c), Mat);
          }
      }

      {
        Eigen::MatrixXd Mat = Eigen::MatrixXd::Zero(dim, dim);
        Mat.topLeftCorner(n, n) = Em * Em.transpose();
        blk.add(lay.scalar_index(Family::Theta, i, 0), Mat);
      }
      {
        Eigen::MatrixXd Mat = Eigen::MatrixXd::Zero(dim, dim);
        Mat.topLeftCorner(n, n) = Fm * Fm.transpose();
        Mat.block(n + pz + n, n + pz + n, pzeta, pzeta) =
            -Eigen::MatrixXd::Identity(pzeta, pzeta);
        blk.add(lay.scalar_index(Family::Tau, i, 0), Mat);
      }
      {
        Eigen::MatrixXd Mat = Eigen::MatrixXd::Zero(dim, dim);
        Mat.block(n + pz, n + pz, n, n) = -Eigen::MatrixXd::Identity(n, n);
        blk.add(lay.scalar_index(Family::BetaBar, i, mu), Mat);
      }
      int slot = 0;
      for (int j = 1; j <= N; ++j) {
        if (j == i) continue;
        Eigen::MatrixXd Mat = Eigen::MatrixXd::Zero(dim, dim);
        const int off = n + pz + n + pzeta + slot * pzeta;
        Mat.block(off, off, pzeta, pzeta) = -Eigen::MatrixXd::Identity(pzeta, pzeta);
        blk.add(lay.scalar_index(Family::Theta, j, 0), Mat);
        ++slot;
      }
      p.set.lmi_neg.push_back(std::move(blk));

      {
        AffineMatrixExpr b10("phi_cap" + tag, m);
        b10.constant = -Eigen::MatrixXd::Identity(m, m);
        b10.add(lay.scalar_index(Family::Phi, i, 0), aux.R(i, mu));
        p.set.lmi_neg.push_back(std::move(b10));
      }

      {
        const int d11 = m + n;
        AffineMatrixExpr b11("beta_coupling" + tag, d11);
        {
          Eigen::MatrixXd Mat = Eigen::MatrixXd::Zero(d11, d11);
          Mat.topLeftCorner(m, m) = Eigen::MatrixXd::Identity(m, m);
          b11.add(lay.scalar_index(Family::Phi, i, 0), Mat);
        }
        {
          Eigen::MatrixXd Mat = Eigen::MatrixXd::Zero(d11, d11);
          Mat.bottomRightCorner(n, n) = Eigen::MatrixXd::Identity(n, n);
          b11.add(lay.scalar_index(Family::BetaTilde, i, mu), Mat);
        }
        const int local_mu = map.local_mode(i, mu);
        const auto& cls = map.class_of(i, local_mu);
        double den = 0.0;
        for (int nu : cls) den += q_inf[nu - 1];
        if (den <= 0)
          throw DegenerateModeClass("class of subsystem " + std::to_string(i) +
                                    " local mode " + std::to_string(local_mu) +
                                    " has zero steady-state mass");
        for (int nu : cls) {
          const double w = q_inf[nu - 1] / den - (nu == mu ? 1.0 : 0.0);
          const Eigen::MatrixXd Rv = r_inv[i - 1][nu - 1] * aux.B(i, nu).transpose();
          for (int r = 0; r < n; ++r)
            for (int c = r; c < n; ++c) {
              Eigen::MatrixXd Mat = Eigen::MatrixXd::Zero(d11, d11);
              Mat.block(0, m, m, n) = w * Rv * sym_basis(n, r, c);
              Mat.block(m, 0, n, m) = Mat.block(0, m, m, n).transpose();
              b11.add(lay.sym_index(Family::Xbar, i, nu, r, c), Mat);
            }
        }
        p.set.lmi_nonneg.push_back(std::move(b11));
      }

      {
        RankBound rb;
        rb.max_rank = n;
        rb.expr = AffineMatrixExpr("inverse_pair" + tag, 2 * n);
        rb.expr.constant.topRightCorner(n, n) = Eigen::MatrixXd::Identity(n, n);
        rb.expr.constant.bottomLeftCorner(n, n) = Eigen::MatrixXd::Identity(n, n);
        for (int r = 0; r < n; ++r)
          for (int c = r; c < n; ++c) {
            Eigen::MatrixXd Mat = Eigen::MatrixXd::Zero(2 * n, 2 * n);
            Mat.topLeftCorner(n, n) = sym_basis(n, r, c);
            rb.expr.add(lay.sym_index(Family::Xbar, i, mu, r, c), Mat);
            Mat.setZero();
            Mat.bottomRightCorner(n, n) = sym_basis(n, r, c);
            rb.expr.add(lay.sym_index(Family::X, i, mu, r, c), Mat);
          }
        p.set.rank_bounds.push_back(std::move(rb));
      }

      {
        RankBound rb;
        rb.max_rank = 1;
        rb.expr = AffineMatrixExpr("scalar_pair" + tag, 2);
        rb.expr.constant << 0, 1, 1, 0;
        Eigen::MatrixXd Mat = Eigen::MatrixXd::Zero(2, 2);
        Mat(0, 0) = 1;
        rb.expr.add(lay.scalar_index(Family::BetaBar, i, mu), Mat);
        Mat.setZero();
        Mat(1, 1) = 1;
        rb.expr.add(lay.scalar_index(Family::BetaTilde, i, mu), Mat);
        p.set.rank_bounds.push_back(std::move(rb));
      }

      {
        AffineMatrixExpr fx("floorX" + tag, n);
        fx.constant = -eps * Eigen::MatrixXd::Identity(n, n);
        for (int r = 0; r < n; ++r)
          for (int c = r; c < n; ++c)
            fx.add(lay.sym_index(Family::X, i, mu, r, c), sym_basis(n, r, c));
        p.set.lmi_nonneg.push_back(std::move(fx));

        AffineMatrixExpr fb("floorXbar" + tag, n);
        fb.constant = -eps * Eigen::MatrixXd::Identity(n, n);
        for (int r = 0; r < n; ++r)
          for (int c = r; c < n; ++c)
            fb.add(lay.sym_index(Family::Xbar, i, mu, r, c), sym_basis(n, r, c));
        p.set.lmi_nonneg.push_back(std::move(fb));
      }

      p.set.scalar_pos.push_back(lay.scalar_index(Family::BetaBar, i, mu));
      p.set.scalar_pos.push_back(lay.scalar_index(Family::BetaTilde, i, mu));
    }
  }
  for (int i = 1; i <= N; ++i) {
    p.set.scalar_pos.push_back(lay.scalar_index(Family::Tau, i, 0));
    p.set.scalar_pos.push_back(lay.scalar_index(Family::Theta, i, 0));
    p.set.scalar_pos.push_back(lay.scalar_index(Family::Phi, i, 0));
  }
  return p;
}

BuiltProblem build_brl(const std::vector<ModeLTI>& modes,
                       const TransitionRateMatrix& Q, double gamma, double eps) {
  const int M = static_cast<int>(modes.size());
  if (M == 0) throw LayoutError("no modes supplied");
  if (Q.mode_count() != M) throw LayoutError("Q size does not match mode count");
  const int n = static_cast<int>(modes.front().A.rows());
  const int nw = static_cast<int>(modes.front().B.cols());
  const int nz = static_cast<int>(modes.front().C.rows());
  for (const auto& md : modes) {
    if (md.A.rows() != n || md.A.cols() != n || md.B.rows() != n ||
        md.B.cols() != nw || md.C.rows() != nz || md.C.cols() != n ||
        md.D.rows() != nz || md.D.cols() != nw)
      throw LayoutError("inconsistent mode dimensions");
  }

  BuiltProblem p;
  p.set.epsilon = eps;
  VariableLayout& lay = p.layout;
  for (int mu = 1; mu <= M; ++mu) lay.add_sym(Family::P, 0, mu, n);

  const int dim = n + nw + nz;
  for (int mu = 1; mu <= M; ++mu) {
    const auto& md = modes[mu - 1];
    AffineMatrixExpr blk("brl_mu" + std::to_string(mu), dim);
    blk.constant.block(n, n, nw, nw) = -gamma * gamma * Eigen::MatrixXd::Identity(nw, nw);
    blk.constant.bottomRightCorner(nz, nz) = -Eigen::MatrixXd::Identity(nz, nz);
    blk.constant.block(0, n + nw, n, nz) = md.C.transpose();
    blk.constant.block(n + nw, 0, nz, n) = md.C;
    blk.constant.block(n, n + nw, nw, nz) = md.D.transpose();
    blk.constant.block(n + nw, n, nz, nw) = md.D;

    for (int r = 0; r < n; ++r)
      for (int c = r; c < n; ++c) {
        const Eigen::MatrixXd Bc = sym_basis(n, r, c);
        Eigen::MatrixXd Mat = Eigen::MatrixXd::Zero(dim, dim);
        Mat.topLeftCorner(n, n) =
            md.A.transpose() * Bc + Bc * md.A + Q.Q(mu - 1, mu - 1) * Bc;
        Mat.block(0, n, n, nw) = Bc * md.B;
        Mat.block(n, 0, nw, n) = Mat.block(0, n, n, nw).transpose();
        blk.add(lay.sym_index(Family::P, 0, mu, r, c), Mat);
      }
    for (int nu = 1; nu <= M; ++nu) {
      if (nu == mu) continue;
      for (int r = 0; r < n; ++r)
        for (int c = r; c < n; ++c) {
          Eigen::MatrixXd Mat = Eigen::MatrixXd::Zero(dim, dim);
          Mat.topLeftCorner(n, n) = Q.Q(mu - 1, nu - 1) * sym_basis(n, r, c);
          blk.add(lay.sym_index(Family::P, 0, nu, r, c), Mat);
        }
    }
    p.set.lmi_neg.push_back(std::move(blk));

    AffineMatrixExpr fl("brl_floorP_mu" + std::to_string(mu), n);
    fl.constant = -eps * Eigen::MatrixXd::Identity(n, n);
    for (int r = 0; r < n; ++r)
      for (int c = r; c < n; ++c)
        fl.add(lay.sym_index(Family::P, 0, mu, r, c), sym_basis(n, r, c));
    p.set.lmi_nonneg.push_back(std::move(fl));
  }
  return p;
}

namespace {

void dump_expr(std::ostringstream& os, const AffineMatrixExpr& e, const char* kind,
               int rank) {
  os << "block " << e.name << " kind=" << kind << " dim=" << e.dim;
  if (rank >= 0) os << " rank<=" << rank;
  os << "\n";
  os << "  constant:";
  for (int r = 0; r < e.dim; ++r)
    for (int c = r; c < e.dim; ++c)
      if (e.constant(r, c) != 0.0)
        os << " (" << r << "," << c << "," << e.constant(r, c) << ")";
  os << "\n";
  for (const auto& [j, mat] : e.coeffs) {
    os << "  coeff x[" << j << "]:";
    for (int r = 0; r < e.dim; ++r)
      for (int c = r; c < e.dim; ++c)
        if (mat(r, c) != 0.0) os << " (" << r << "," << c << "," << mat(r, c) << ")";
    os << "\n";
  }
}

}  // namespace

std::string dump_constraint_set(const ConstraintSet& set) {
  std::ostringstream os;
  os << "epsilon " << set.epsilon << "\n";
  for (const auto& b : set.lmi_neg) dump_expr(os, b, "neg", -1);
  for (const auto& b : set.lmi_nonneg) dump_expr(os, b, "nonneg", -1);
  for (const auto& rb : set.rank_bounds) dump_expr(os, rb.expr, "rank", rb.max_rank);
  os << "scalar_pos:";
  for (int j : set.scalar_pos) os << " " << j;
  os << "\n";
  return os.str();
}

}  // namespace jumphinf
