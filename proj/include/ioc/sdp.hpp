#pragma once

// Semidefinite programs with block-diagonal PSD variables, free scalar
// variables, and sparse linear equality/inequality rows:
//
//   minimize    <C, X> + c_f' s
//   subject to  <A_r, X> + a_r' s  (= | <=)  b_r,   X block-PSD, s free.
//
// The solver is a primal-dual path-following interior-point method with
// Nesterov-Todd scaling and Mehrotra predictor-corrector steps, run on the
// homogeneous self-dual embedding so that infeasibility and unboundedness
// come out as certificates (via the tau/kappa ratio) instead of timeouts.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace ioc::sdp {

/// Coefficient on a symmetric block entry: value v at (i, j), i <= j, means
/// the symmetric matrix A has A_ij = A_ji = v, contributing
/// v*X_ii (diagonal) or 2*v*X_ij (off-diagonal) to <A, X>.
struct BlockEntry {
  int block;
  int i, j;
  double value;
};

struct ScalarEntry {
  int scalar;
  double value;
};

enum class RowKind { kEq, kLe };

struct LinearRow {
  RowKind kind = RowKind::kEq;
  std::vector<BlockEntry> mat;
  std::vector<ScalarEntry> sca;
  double rhs = 0.0;
  std::string name;
};

struct SdpProblem {
  std::vector<int> block_sizes;
  int num_scalars = 0;
  std::vector<BlockEntry> obj_mat;
  std::vector<ScalarEntry> obj_sca;
  std::vector<LinearRow> rows;

  void check_entry(const BlockEntry& e) const {
    if (e.block < 0 || e.block >= static_cast<int>(block_sizes.size()) ||
        e.i < 0 || e.j < e.i || e.j >= block_sizes[e.block])
      throw std::invalid_argument("SdpProblem: block entry out of range");
  }
  void check_entry(const ScalarEntry& e) const {
    if (e.scalar < 0 || e.scalar >= num_scalars)
      throw std::invalid_argument("SdpProblem: scalar entry out of range");
  }
  void validate() const {
    if (rows.empty() && obj_mat.empty() && obj_sca.empty())
      throw std::invalid_argument("SdpProblem: empty objective and no rows");
    for (const auto& e : obj_mat) check_entry(e);
    for (const auto& e : obj_sca) check_entry(e);
    for (const auto& row : rows) {
      for (const auto& e : row.mat) check_entry(e);
      for (const auto& e : row.sca) check_entry(e);
    }
  }
};

struct SolveOptions {
  double gap_tol = 1e-8;   // relative duality gap
  double feas_tol = 1e-8;  // relative primal/dual residuals
  double eig_tol = 1e-9;   // PSD slack allowed in validation
  int max_iter = 200;
  bool verbose = false;
};

enum class SolveStatus {
  kOptimal,
  kInfeasible,
  kUnbounded,
  kMaxIter,
  kNumericalFailure,
};

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::kOptimal: return "optimal";
    case SolveStatus::kInfeasible: return "infeasible";
    case SolveStatus::kUnbounded: return "unbounded";
    case SolveStatus::kMaxIter: return "max_iter";
    case SolveStatus::kNumericalFailure: return "numerical_failure";
  }
  return "?";
}

struct SdpSolution {
  SolveStatus status = SolveStatus::kNumericalFailure;
  std::vector<Eigen::MatrixXd> blocks;  // primal PSD values
  std::vector<double> scalars;          // primal free values
  std::vector<double> dual;             // one multiplier per row
  double objective = 0.0;
  double dual_objective = 0.0;
  double gap = 0.0;            // relative duality gap at exit
  double max_violation = 0.0;  // max primal residual at exit
  int iterations = 0;
  std::string log;
};

// ---------------------------------------------------------------------------
// Internal homogeneous self-dual IPM.

namespace detail {

struct FullEntry {
  int i, j;  // full (mirrored) coordinates
  double v;
};

// One row's footprint on one PSD cone block.
struct RowBlockPart {
  int row;
  std::vector<FullEntry> entries;
};

struct Cones {
  // PSD part: cone index -> size, plus per-cone row footprints.
  std::vector<int> psd_sizes;
  std::vector<std::vector<RowBlockPart>> psd_rows;  // per cone
  std::vector<Eigen::MatrixXd> C_psd;
  // Diagonal (nonnegative) part: size-1 user blocks and slack variables.
  int diag_dim = 0;
  std::vector<std::vector<std::pair<int, double>>> diag_rows;  // per row
  Eigen::VectorXd c_diag;
  // Free part.
  Eigen::MatrixXd A_free;  // m x F
  Eigen::VectorXd c_free;
  Eigen::VectorXd b;
  // Mapping back to user blocks: (psd cone | diag slot) per user block.
  std::vector<int> user_to_psd, user_to_diag;
  std::vector<double> row_scale;  // internal row r was divided by this
  int num_rows() const { return static_cast<int>(b.size()); }
};

inline double sym_dot(const std::vector<FullEntry>& entries,
                      const Eigen::MatrixXd& X) {
  double v = 0.0;
  for (const auto& e : entries) v += e.v * X(e.i, e.j);
  return v;
}

inline Cones build_cones(const SdpProblem& p) {
  Cones c;
  const int nb = static_cast<int>(p.block_sizes.size());
  c.user_to_psd.assign(nb, -1);
  c.user_to_diag.assign(nb, -1);
  for (int ub = 0; ub < nb; ++ub) {
    if (p.block_sizes[ub] <= 0)
      throw std::invalid_argument("SdpProblem: nonpositive block size");
    if (p.block_sizes[ub] == 1) {
      c.user_to_diag[ub] = c.diag_dim++;
    } else {
      c.user_to_psd[ub] = static_cast<int>(c.psd_sizes.size());
      c.psd_sizes.push_back(p.block_sizes[ub]);
    }
  }
  int num_slacks = 0;
  for (const auto& row : p.rows)
    if (row.kind == RowKind::kLe) ++num_slacks;
  const int slack_base = c.diag_dim;
  c.diag_dim += num_slacks;

  const int m = static_cast<int>(p.rows.size());
  const int F = p.num_scalars;
  c.psd_rows.resize(c.psd_sizes.size());
  c.diag_rows.resize(m);
  c.A_free = Eigen::MatrixXd::Zero(m, F);
  c.b.resize(m);
  c.row_scale.assign(m, 1.0);

  // Row scaling: divide each row by its max absolute coefficient.
  int slack = 0;
  for (int r = 0; r < m; ++r) {
    const LinearRow& row = p.rows[r];
    double scale = 0.0;
    for (const auto& e : row.mat) scale = std::max(scale, std::abs(e.value));
    for (const auto& e : row.sca) scale = std::max(scale, std::abs(e.value));
    if (scale <= 0.0) scale = 1.0;
    c.row_scale[r] = scale;
    c.b[r] = row.rhs / scale;

    std::vector<std::vector<FullEntry>> per_psd(c.psd_sizes.size());
    for (const auto& e : row.mat) {
      double v = e.value / scale;
      int pc = c.user_to_psd[e.block];
      if (pc >= 0) {
        per_psd[pc].push_back({e.i, e.j, v});
        if (e.i != e.j) per_psd[pc].push_back({e.j, e.i, v});
      } else {
        c.diag_rows[r].emplace_back(c.user_to_diag[e.block], v);
      }
    }
    for (size_t pc = 0; pc < per_psd.size(); ++pc)
      if (!per_psd[pc].empty())
        c.psd_rows[pc].push_back({r, std::move(per_psd[pc])});
    for (const auto& e : row.sca) c.A_free(r, e.scalar) += e.value / scale;
    if (row.kind == RowKind::kLe)
      c.diag_rows[r].emplace_back(slack_base + slack++, 1.0);
  }

  c.C_psd.resize(c.psd_sizes.size());
  for (size_t pc = 0; pc < c.psd_sizes.size(); ++pc)
    c.C_psd[pc] = Eigen::MatrixXd::Zero(c.psd_sizes[pc], c.psd_sizes[pc]);
  c.c_diag = Eigen::VectorXd::Zero(c.diag_dim);
  c.c_free = Eigen::VectorXd::Zero(F);
  for (const auto& e : p.obj_mat) {
    int pc = c.user_to_psd[e.block];
    if (pc >= 0) {
      c.C_psd[pc](e.i, e.j) += e.value;
      if (e.i != e.j) c.C_psd[pc](e.j, e.i) += e.value;
    } else {
      c.c_diag[c.user_to_diag[e.block]] += e.value;
    }
  }
  for (const auto& e : p.obj_sca) c.c_free[e.scalar] += e.value;
  return c;
}

// Nesterov-Todd scaling of one PSD cone: R'ZR = Rinv X Rinv' = diag(lam).
struct NtScaling {
  Eigen::MatrixXd R, Rinv, G;  // G = R R'
  Eigen::VectorXd lam;
};

// Cholesky with an escalating diagonal shift; iterates can graze the cone
// boundary after a long step.
inline bool shifted_llt(const Eigen::MatrixXd& M,
                        Eigen::LLT<Eigen::MatrixXd>* llt) {
  llt->compute(M);
  double shift = 1e-14 * (1.0 + M.diagonal().maxCoeff());
  for (int k = 0; k < 3 && llt->info() != Eigen::Success; ++k, shift *= 1e3) {
    Eigen::MatrixXd Ms = M;
    Ms.diagonal().array() += shift;
    llt->compute(Ms);
  }
  return llt->info() == Eigen::Success;
}

inline bool nt_scaling(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Z,
                       NtScaling* out) {
  Eigen::LLT<Eigen::MatrixXd> lltx, lltz;
  if (!shifted_llt(X, &lltx) || !shifted_llt(Z, &lltz)) return false;
  Eigen::MatrixXd Lx = lltx.matrixL();
  Eigen::MatrixXd Lz = lltz.matrixL();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      Lz.transpose() * Lx, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Eigen::VectorXd s = svd.singularValues();
  if (s.minCoeff() <= 0) return false;
  Eigen::VectorXd si = s.cwiseSqrt().cwiseInverse();
  out->R = Lx * svd.matrixV() * si.asDiagonal();
  out->Rinv = si.asDiagonal() * svd.matrixU().transpose() * Lz.transpose();
  out->G = out->R * out->R.transpose();
  out->lam = s;
  return true;
}

// Max alpha in [0, cap] with M + alpha*dM staying PSD, via the smallest
// eigenvalue of L^{-1} dM L^{-T}.
inline double psd_max_step(const Eigen::MatrixXd& M, const Eigen::MatrixXd& dM,
                           double cap) {
  Eigen::LLT<Eigen::MatrixXd> llt(M);
  if (llt.info() != Eigen::Success) return 0.0;
  Eigen::MatrixXd L = llt.matrixL();
  Eigen::MatrixXd T = L.triangularView<Eigen::Lower>().solve(dM);
  T = L.triangularView<Eigen::Lower>().solve(T.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
      0.5 * (T + T.transpose()), Eigen::EigenvaluesOnly);
  double lmin = es.eigenvalues().minCoeff();
  if (lmin >= 0) return cap;
  return std::min(cap, -1.0 / lmin);
}

class HsdSolver {
 public:
  HsdSolver(const Cones& c, const SolveOptions& opt) : c_(c), opt_(opt) {
    m_ = c_.num_rows();
    F_ = static_cast<int>(c_.c_free.size());
    P_ = static_cast<int>(c_.psd_sizes.size());
    cone_dim_ = c_.diag_dim + 1;
    for (int k : c_.psd_sizes) cone_dim_ += k;
    X_.resize(P_);
    Z_.resize(P_);
    for (int pc = 0; pc < P_; ++pc) {
      X_[pc] = Eigen::MatrixXd::Identity(c_.psd_sizes[pc], c_.psd_sizes[pc]);
      Z_[pc] = X_[pc];
    }
    xd_ = Eigen::VectorXd::Ones(c_.diag_dim);
    zd_ = Eigen::VectorXd::Ones(c_.diag_dim);
    xf_ = Eigen::VectorXd::Zero(F_);
    y_ = Eigen::VectorXd::Zero(m_);
    tau_ = kappa_ = 1.0;
    bnorm_ = 1.0 + c_.b.lpNorm<Eigen::Infinity>();
    double cn = c_.c_free.size() ? c_.c_free.lpNorm<Eigen::Infinity>() : 0.0;
    cn = std::max(cn, c_.c_diag.size()
                          ? c_.c_diag.lpNorm<Eigen::Infinity>()
                          : 0.0);
    for (const auto& C : c_.C_psd)
      cn = std::max(cn, C.size() ? C.cwiseAbs().maxCoeff() : 0.0);
    cnorm_ = 1.0 + cn;
  }

  SolveStatus run();

  // Results (already divided by tau when optimal).
  std::vector<Eigen::MatrixXd> X_;
  Eigen::VectorXd xd_, xf_, y_;
  std::vector<Eigen::MatrixXd> Z_;
  Eigen::VectorXd zd_;
  double tau_ = 1.0, kappa_ = 1.0;
  double pobj_ = 0.0, dobj_ = 0.0, relgap_ = 0.0, pres_ = 0.0, dres_ = 0.0;
  int iterations_ = 0;
  std::ostringstream log_;

 private:
  struct Direction {
    std::vector<Eigen::MatrixXd> dX, dZ;
    Eigen::VectorXd dxd, dzd, dxf, dy;
    double dtau = 0.0, dkappa = 0.0;
  };

  double cdotx() const {
    double v = c_.c_diag.dot(xd_) + c_.c_free.dot(xf_);
    for (int pc = 0; pc < P_; ++pc)
      v += (c_.C_psd[pc].array() * X_[pc].array()).sum();
    return v;
  }

  Eigen::VectorXd apply_A() const {  // (A x)_r over all cones + frees
    Eigen::VectorXd ax = c_.A_free * xf_;
    for (int pc = 0; pc < P_; ++pc)
      for (const auto& part : c_.psd_rows[pc])
        ax[part.row] += sym_dot(part.entries, X_[pc]);
    for (int r = 0; r < m_; ++r)
      for (const auto& [d, v] : c_.diag_rows[r]) ax[r] += v * xd_[d];
    return ax;
  }

  // A' y accumulated into per-cone containers.
  void apply_At(const Eigen::VectorXd& y, std::vector<Eigen::MatrixXd>* psd,
                Eigen::VectorXd* diag) const {
    psd->resize(P_);
    for (int pc = 0; pc < P_; ++pc) {
      (*psd)[pc] =
          Eigen::MatrixXd::Zero(c_.psd_sizes[pc], c_.psd_sizes[pc]);
      for (const auto& part : c_.psd_rows[pc])
        for (const auto& e : part.entries)
          (*psd)[pc](e.i, e.j) += e.v * y[part.row];
    }
    *diag = Eigen::VectorXd::Zero(c_.diag_dim);
    for (int r = 0; r < m_; ++r)
      for (const auto& [d, v] : c_.diag_rows[r]) (*diag)[d] += v * y[r];
  }

  bool compute_scalings();
  void form_schur();
  bool factorize();
  bool solve_kkt(const Eigen::VectorXd& rhs_p,
                 const std::vector<Eigen::MatrixXd>& RhsD,
                 const Eigen::VectorXd& rhs_dd, const Eigen::VectorXd& rhs_f,
                 double rhs_g, const std::vector<Eigen::MatrixXd>& Rc,
                 const Eigen::VectorXd& rc_d, double d_tk, Direction* dir);
  double max_step(const Direction& dir, int* blocking = nullptr) const;

  const Cones& c_;
  SolveOptions opt_;
  int m_ = 0, F_ = 0, P_ = 0, cone_dim_ = 0;
  double bnorm_ = 1.0, cnorm_ = 1.0;

  std::vector<NtScaling> nt_;
  Eigen::VectorXd gd_;  // diag NT scaling sqrt(x/z)
  Eigen::VectorXd lam_d_;
  Eigen::MatrixXd M_;       // Schur complement over cone part
  Eigen::MatrixXd Yf_;      // M^{-1} A_free
  Eigen::MatrixXd S_;       // A_free' M^{-1} A_free
  Eigen::LLT<Eigen::MatrixXd> mllt_, sllt_;
  std::vector<Eigen::MatrixXd> Vc_;  // G C G per psd cone
  Eigen::VectorXd vc_d_, q_;
  double rho_ = 0.0;
  double reg_ = 1e-12;
};

inline bool HsdSolver::compute_scalings() {
  nt_.resize(P_);
  for (int pc = 0; pc < P_; ++pc)
    if (!nt_scaling(X_[pc], Z_[pc], &nt_[pc])) return false;
  gd_ = (xd_.array() / zd_.array()).sqrt();
  lam_d_ = (xd_.array() * zd_.array()).sqrt();
  Vc_.resize(P_);
  for (int pc = 0; pc < P_; ++pc)
    Vc_[pc] = nt_[pc].G * c_.C_psd[pc] * nt_[pc].G;
  vc_d_ = gd_.array().square() * c_.c_diag.array();
  q_ = Eigen::VectorXd::Zero(m_);
  for (int pc = 0; pc < P_; ++pc)
    for (const auto& part : c_.psd_rows[pc])
      q_[part.row] += sym_dot(part.entries, Vc_[pc]);
  for (int r = 0; r < m_; ++r)
    for (const auto& [d, v] : c_.diag_rows[r]) q_[r] += v * vc_d_[d];
  rho_ = c_.c_diag.dot(vc_d_);
  for (int pc = 0; pc < P_; ++pc)
    rho_ += (c_.C_psd[pc].array() * Vc_[pc].array()).sum();
  return true;
}

inline void HsdSolver::form_schur() {
  M_ = Eigen::MatrixXd::Zero(m_, m_);
  // PSD cones: M_rs += <A_r, G A_s G>, sparse-sparse formula.
  for (int pc = 0; pc < P_; ++pc) {
    const Eigen::MatrixXd& G = nt_[pc].G;
    const auto& rows = c_.psd_rows[pc];
    for (size_t a = 0; a < rows.size(); ++a) {
      for (size_t b = a; b < rows.size(); ++b) {
        double sum = 0.0;
        for (const auto& e : rows[a].entries) {
          const double* Gj = G.col(e.j).data();  // G symmetric: col == row
          const double* Gi = G.col(e.i).data();
          double partial = 0.0;
          for (const auto& f : rows[b].entries)
            partial += f.v * Gj[f.i] * Gi[f.j];
          sum += e.v * partial;
        }
        M_(rows[a].row, rows[b].row) += sum;
        if (rows[a].row != rows[b].row) M_(rows[b].row, rows[a].row) += sum;
      }
    }
  }
  // Diagonal cone.
  std::vector<std::vector<std::pair<int, double>>> diag_to_rows(c_.diag_dim);
  for (int r = 0; r < m_; ++r)
    for (const auto& [d, v] : c_.diag_rows[r]) diag_to_rows[d].emplace_back(r, v);
  for (int d = 0; d < c_.diag_dim; ++d) {
    double g2 = gd_[d] * gd_[d];
    const auto& touch = diag_to_rows[d];
    for (size_t a = 0; a < touch.size(); ++a)
      for (size_t b = a; b < touch.size(); ++b) {
        double val = g2 * touch[a].second * touch[b].second;
        M_(touch[a].first, touch[b].first) += val;
        if (touch[a].first != touch[b].first)
          M_(touch[b].first, touch[a].first) += val;
      }
  }
}

inline bool HsdSolver::factorize() {
  double shift = reg_ * (1.0 + M_.diagonal().maxCoeff());
  for (int attempt = 0; attempt < 4; ++attempt) {
    Eigen::MatrixXd Mr = M_;
    Mr.diagonal().array() += shift;
    mllt_.compute(Mr);
    if (mllt_.info() == Eigen::Success) {
      if (F_ > 0) {
        Yf_ = mllt_.solve(c_.A_free);
        S_ = c_.A_free.transpose() * Yf_;
        S_.diagonal().array() += shift;
        sllt_.compute(S_);
        if (sllt_.info() != Eigen::Success) {
          shift *= 100;
          continue;
        }
      }
      return true;
    }
    shift *= 100;
  }
  return false;
}

inline bool HsdSolver::solve_kkt(
    const Eigen::VectorXd& rhs_p, const std::vector<Eigen::MatrixXd>& RhsD,
    const Eigen::VectorXd& rhs_dd, const Eigen::VectorXd& rhs_f, double rhs_g,
    const std::vector<Eigen::MatrixXd>& Rc, const Eigen::VectorXd& rc_d,
    double d_tk, Direction* dir) {
  // T = Rc + G RhsD G per cone; r1 = rhs_p - A(T).
  std::vector<Eigen::MatrixXd> T(P_);
  for (int pc = 0; pc < P_; ++pc)
    T[pc] = Rc[pc] + nt_[pc].G * RhsD[pc] * nt_[pc].G;
  Eigen::VectorXd t_d =
      rc_d.array() + gd_.array().square() * rhs_dd.array();
  Eigen::VectorXd r1 = rhs_p;
  for (int pc = 0; pc < P_; ++pc)
    for (const auto& part : c_.psd_rows[pc])
      r1[part.row] -= sym_dot(part.entries, T[pc]);
  for (int r = 0; r < m_; ++r)
    for (const auto& [d, v] : c_.diag_rows[r]) r1[r] -= v * t_d[d];

  double ctdott = c_.c_diag.dot(t_d);
  for (int pc = 0; pc < P_; ++pc)
    ctdott += (c_.C_psd[pc].array() * T[pc].array()).sum();
  double r3 = rhs_g + ctdott + d_tk / tau_;

  Eigen::VectorXd Y0 = mllt_.solve(r1);
  Eigen::VectorXd Y2 = mllt_.solve((q_ + c_.b).eval());

  Eigen::VectorXd g0 = Eigen::VectorXd::Zero(F_);
  Eigen::VectorXd g1 = Eigen::VectorXd::Zero(F_);
  if (F_ > 0) {
    g0 = sllt_.solve((c_.A_free.transpose() * Y0 + rhs_f).eval());
    g1 = sllt_.solve((c_.A_free.transpose() * Y2 - c_.c_free).eval());
  }
  Eigen::VectorXd bq = c_.b - q_;
  double den = bq.dot(Y2) + rho_ + kappa_ / tau_;
  double num = r3 - bq.dot(Y0);
  if (F_ > 0) {
    den += -bq.dot(Yf_ * g1) - c_.c_free.dot(g1);
    num += bq.dot(Yf_ * g0) + c_.c_free.dot(g0);
  }
  if (!(std::abs(den) > 0) || !std::isfinite(den) || !std::isfinite(num))
    return false;
  double dtau = num / den;

  dir->dxf = g0 + g1 * dtau;
  dir->dy = Y0 + Y2 * dtau;
  if (F_ > 0) dir->dy -= Yf_ * dir->dxf;

  // Two rounds of iterative refinement of the reduced system
  //   M dy + A_f dxf - (q+b) dtau = r1
  //   A_f' dy - c_f dtau = -rhs_f
  //   (b-q)' dy - c_f' dxf + (rho + kappa/tau) dtau = r3
  // against the unregularized M; the factorization carries a diagonal
  // shift whose effect this removes.
  for (int round = 0; round < 2; ++round) {
    Eigen::VectorXd e1 = r1 - M_ * dir->dy + (q_ + c_.b) * dtau;
    Eigen::VectorXd e2 = Eigen::VectorXd::Zero(F_);
    double e3 = r3 - bq.dot(dir->dy) + c_.c_free.dot(dir->dxf) -
                (rho_ + kappa_ / tau_) * dtau;
    if (F_ > 0) {
      e1 -= c_.A_free * dir->dxf;
      e2 = -rhs_f - c_.A_free.transpose() * dir->dy + c_.c_free * dtau;
    }
    if (e1.lpNorm<Eigen::Infinity>() < 1e-14 && std::abs(e3) < 1e-14 &&
        (F_ == 0 || e2.lpNorm<Eigen::Infinity>() < 1e-14))
      break;
    Eigen::VectorXd cY0 = mllt_.solve(e1);
    Eigen::VectorXd cg0 = Eigen::VectorXd::Zero(F_);
    Eigen::VectorXd cg1 = g1;
    if (F_ > 0) cg0 = sllt_.solve((c_.A_free.transpose() * cY0 + e2).eval());
    double cden = den;
    double cnum = e3 - bq.dot(cY0 - (F_ > 0 ? (Yf_ * cg0).eval()
                                            : Eigen::VectorXd::Zero(m_))) +
                  (F_ > 0 ? c_.c_free.dot(cg0) : 0.0);
    double cdtau = cnum / cden;
    Eigen::VectorXd cdxf = cg0 + cg1 * cdtau;
    Eigen::VectorXd cdy = cY0 + Y2 * cdtau;
    if (F_ > 0) cdy -= Yf_ * cdxf;
    dtau += cdtau;
    dir->dxf += cdxf;
    dir->dy += cdy;
  }

  std::vector<Eigen::MatrixXd> Aty;
  Eigen::VectorXd aty_d;
  apply_At(dir->dy, &Aty, &aty_d);
  dir->dZ.resize(P_);
  dir->dX.resize(P_);
  for (int pc = 0; pc < P_; ++pc) {
    dir->dZ[pc] = -RhsD[pc] - Aty[pc] + c_.C_psd[pc] * dtau;
    dir->dX[pc] = Rc[pc] - nt_[pc].G * dir->dZ[pc] * nt_[pc].G;
    dir->dX[pc] = 0.5 * (dir->dX[pc] + dir->dX[pc].transpose()).eval();
    dir->dZ[pc] = 0.5 * (dir->dZ[pc] + dir->dZ[pc].transpose()).eval();
  }
  dir->dzd = -rhs_dd - aty_d + c_.c_diag * dtau;
  dir->dxd = rc_d.array() - gd_.array().square() * dir->dzd.array();
  dir->dtau = dtau;
  dir->dkappa = (d_tk - kappa_ * dtau) / tau_;
  for (double v : {dtau, dir->dkappa})
    if (!std::isfinite(v)) return false;
  return true;
}

inline double HsdSolver::max_step(const Direction& dir, int* blocking) const {
  double alpha = 1.0 / 0.99;  // allow a full unit step after damping
  auto note = [&](double candidate, int code) {
    if (candidate < alpha) {
      alpha = candidate;
      if (blocking) *blocking = code;
    }
  };
  for (int pc = 0; pc < P_; ++pc) {
    note(psd_max_step(X_[pc], dir.dX[pc], alpha), 100 + pc);
    note(psd_max_step(Z_[pc], dir.dZ[pc], alpha), 200 + pc);
  }
  for (int d = 0; d < c_.diag_dim; ++d) {
    if (dir.dxd[d] < 0) note(-xd_[d] / dir.dxd[d], 300);
    if (dir.dzd[d] < 0) note(-zd_[d] / dir.dzd[d], 400);
  }
  if (dir.dtau < 0) note(-tau_ / dir.dtau, 500);
  if (dir.dkappa < 0) note(-kappa_ / dir.dkappa, 600);
  return std::min(1.0, 0.99 * alpha);
}

inline SolveStatus HsdSolver::run() {
  log_ << "iter        pobj        dobj      relgap      pres      dres    "
          "step\n";
  SolveStatus status = SolveStatus::kMaxIter;
  for (int it = 0; it < opt_.max_iter; ++it) {
    iterations_ = it;
    // Residuals of the homogeneous model.
    // Negated residuals of the homogeneous model, i.e. the Newton RHS:
    //   A x - b tau = 0,  -A'y - z + c tau = 0,  b'y - c'x - kappa = 0.
    Eigen::VectorXd ax = apply_A();
    Eigen::VectorXd rp = c_.b * tau_ - ax;
    std::vector<Eigen::MatrixXd> Aty;
    Eigen::VectorXd aty_d;
    apply_At(y_, &Aty, &aty_d);
    std::vector<Eigen::MatrixXd> Rd(P_);
    for (int pc = 0; pc < P_; ++pc)
      Rd[pc] = Aty[pc] + Z_[pc] - c_.C_psd[pc] * tau_;
    Eigen::VectorXd rd_d = aty_d + zd_ - c_.c_diag * tau_;
    Eigen::VectorXd rd_f = c_.A_free.transpose() * y_ - c_.c_free * tau_;
    double cx = cdotx();
    double by = c_.b.dot(y_);
    double rg = kappa_ + cx - by;

    // Scaled (tau-normalized) exit measures.
    pobj_ = cx / tau_;
    dobj_ = by / tau_;
    pres_ = (ax / tau_ - c_.b).lpNorm<Eigen::Infinity>() / bnorm_;
    double dr = rd_f.size()
                    ? (rd_f / tau_).lpNorm<Eigen::Infinity>()
                    : 0.0;
    dr = std::max(dr, rd_d.size()
                          ? (rd_d / tau_).lpNorm<Eigen::Infinity>()
                          : 0.0);
    for (int pc = 0; pc < P_; ++pc)
      dr = std::max(dr, Rd[pc].cwiseAbs().maxCoeff() / tau_);
    dres_ = dr / cnorm_;
    relgap_ = std::abs(pobj_ - dobj_) /
              (1.0 + std::max(std::abs(pobj_), std::abs(dobj_)));

    if (pres_ <= opt_.feas_tol && dres_ <= opt_.feas_tol &&
        relgap_ <= opt_.gap_tol) {
      status = SolveStatus::kOptimal;
      break;
    }
    // Certificates of infeasibility, signalled by kappa dominating tau.
    if (kappa_ / tau_ > 1e4) {
      if (by > 0) {
        double res = (c_.A_free.transpose() * y_).size()
                         ? (c_.A_free.transpose() * y_).lpNorm<Eigen::Infinity>()
                         : 0.0;
        res = std::max(res, (aty_d + zd_).lpNorm<Eigen::Infinity>());
        for (int pc = 0; pc < P_; ++pc)
          res = std::max(res, (Aty[pc] + Z_[pc]).cwiseAbs().maxCoeff());
        if (res / by <= 1e3 * opt_.feas_tol) {
          status = SolveStatus::kInfeasible;
          break;
        }
      }
      if (cx < 0 && ax.lpNorm<Eigen::Infinity>() / (-cx) <= 1e3 * opt_.feas_tol) {
        status = SolveStatus::kUnbounded;
        break;
      }
    }

    if (!compute_scalings()) {
      if (opt_.verbose) std::fputs("scaling failure\n", stderr);
      status = SolveStatus::kNumericalFailure;
      break;
    }
    form_schur();
    if (!factorize()) {
      if (opt_.verbose) std::fputs("factorization failure\n", stderr);
      status = SolveStatus::kNumericalFailure;
      break;
    }

    double mu = tau_ * kappa_ + xd_.dot(zd_);
    for (int pc = 0; pc < P_; ++pc)
      mu += (X_[pc].array() * Z_[pc].array()).sum();
    mu /= cone_dim_;

    // Predictor (affine scaling) direction.
    std::vector<Eigen::MatrixXd> Rc(P_);
    for (int pc = 0; pc < P_; ++pc) Rc[pc] = -X_[pc];
    Direction aff;
    if (!solve_kkt(rp, Rd, rd_d, rd_f, rg, Rc, -xd_, -tau_ * kappa_, &aff)) {
      status = SolveStatus::kNumericalFailure;
      break;
    }
    double a_aff = max_step(aff);
    double mu_aff = (tau_ + a_aff * aff.dtau) * (kappa_ + a_aff * aff.dkappa) +
                    (xd_ + a_aff * aff.dxd).dot(zd_ + a_aff * aff.dzd);
    for (int pc = 0; pc < P_; ++pc)
      mu_aff += ((X_[pc] + a_aff * aff.dX[pc]).array() *
                 (Z_[pc] + a_aff * aff.dZ[pc]).array())
                    .sum();
    mu_aff /= cone_dim_;
    double sigma = std::pow(std::clamp(mu_aff / mu, 0.0, 1.0), 3);

    // Corrector: Mehrotra second-order term in the scaled (lambda) frame.
    for (int pc = 0; pc < P_; ++pc) {
      const NtScaling& nt = nt_[pc];
      Eigen::MatrixXd dsa = nt.Rinv * aff.dX[pc] * nt.Rinv.transpose();
      Eigen::MatrixXd dza = nt.R.transpose() * aff.dZ[pc] * nt.R;
      Eigen::MatrixXd E =
          -0.5 * (dsa * dza + dza * dsa);
      E.diagonal() -= nt.lam.cwiseAbs2();
      E.diagonal().array() += sigma * mu;
      // Solve lam o D = E elementwise.
      Eigen::MatrixXd D(E.rows(), E.cols());
      for (int i = 0; i < E.rows(); ++i)
        for (int j = 0; j < E.cols(); ++j)
          D(i, j) = 2.0 * E(i, j) / (nt.lam[i] + nt.lam[j]);
      Rc[pc] = nt.R * D * nt.R.transpose();
    }
    Eigen::VectorXd rc_d =
        gd_.array() *
        ((sigma * mu - (aff.dxd.array() / gd_.array()) *
                           (aff.dzd.array() * gd_.array()) -
          lam_d_.array().square()) /
         lam_d_.array());
    double d_tk = sigma * mu - tau_ * kappa_ - aff.dtau * aff.dkappa;

    Direction dir;
    double eta = 1.0 - sigma;
    std::vector<Eigen::MatrixXd> Rd_eta(P_);
    for (int pc = 0; pc < P_; ++pc) Rd_eta[pc] = eta * Rd[pc];
    if (!solve_kkt(eta * rp, Rd_eta, eta * rd_d, eta * rd_f, eta * rg, Rc,
                   rc_d, d_tk, &dir)) {
      status = SolveStatus::kNumericalFailure;
      break;
    }
    double alpha = max_step(dir);

    // Multiple centrality correctors: project the trial complementarity
    // products onto a box around sigma*mu and re-solve on the same
    // factorization. This unblocks steps pinned by degenerate faces.
    const double beta_lo = 0.1, beta_hi = 10.0;
    std::vector<Eigen::MatrixXd> zero_Rd(P_);
    for (int pc = 0; pc < P_; ++pc)
      zero_Rd[pc] =
          Eigen::MatrixXd::Zero(c_.psd_sizes[pc], c_.psd_sizes[pc]);
    Eigen::VectorXd zero_m = Eigen::VectorXd::Zero(m_);
    Eigen::VectorXd zero_d = Eigen::VectorXd::Zero(c_.diag_dim);
    Eigen::VectorXd zero_f = Eigen::VectorXd::Zero(F_);
    for (int round = 0; round < 4 && alpha < 0.95; ++round) {
      double abar = std::min(1.0, alpha + 0.3);
      std::vector<Eigen::MatrixXd> Rc_corr(P_);
      for (int pc = 0; pc < P_; ++pc) {
        const NtScaling& nt = nt_[pc];
        Eigen::MatrixXd st = nt.lam.asDiagonal();
        Eigen::MatrixXd zt = st;
        st += abar * nt.Rinv * dir.dX[pc] * nt.Rinv.transpose();
        zt += abar * nt.R.transpose() * dir.dZ[pc] * nt.R;
        Eigen::MatrixXd W = 0.5 * (st * zt + zt.transpose() * st.transpose());
        W = 0.5 * (W + W.transpose()).eval();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(W);
        Eigen::VectorXd w = es.eigenvalues();
        Eigen::VectorXd delta = Eigen::VectorXd::Zero(w.size());
        for (int i = 0; i < w.size(); ++i) {
          if (w[i] < beta_lo * sigma * mu)
            delta[i] = beta_lo * sigma * mu - w[i];
          else if (w[i] > beta_hi * sigma * mu)
            delta[i] = beta_hi * sigma * mu - w[i];
        }
        Eigen::MatrixXd E = es.eigenvectors() * delta.asDiagonal() *
                            es.eigenvectors().transpose();
        Eigen::MatrixXd D(E.rows(), E.cols());
        for (int i = 0; i < E.rows(); ++i)
          for (int j = 0; j < E.cols(); ++j)
            D(i, j) = 2.0 * E(i, j) / (nt.lam[i] + nt.lam[j]);
        Rc_corr[pc] = nt.R * D * nt.R.transpose();
      }
      Eigen::VectorXd rc_corr(c_.diag_dim);
      for (int d = 0; d < c_.diag_dim; ++d) {
        double v = (xd_[d] + abar * dir.dxd[d]) / gd_[d] *
                   ((zd_[d] + abar * dir.dzd[d]) * gd_[d]);
        double target = std::clamp(v, beta_lo * sigma * mu,
                                   beta_hi * sigma * mu);
        rc_corr[d] = gd_[d] * (target - v) / lam_d_[d];
      }
      double vtk = (tau_ + abar * dir.dtau) * (kappa_ + abar * dir.dkappa);
      double dtk_corr =
          std::clamp(vtk, beta_lo * sigma * mu, beta_hi * sigma * mu) - vtk;
      Direction corr;
      if (!solve_kkt(zero_m, zero_Rd, zero_d, zero_f, 0.0, Rc_corr, rc_corr,
                     dtk_corr, &corr))
        break;
      Direction trial = dir;
      for (int pc = 0; pc < P_; ++pc) {
        trial.dX[pc] += corr.dX[pc];
        trial.dZ[pc] += corr.dZ[pc];
      }
      trial.dxd += corr.dxd;
      trial.dzd += corr.dzd;
      trial.dxf += corr.dxf;
      trial.dy += corr.dy;
      trial.dtau += corr.dtau;
      trial.dkappa += corr.dkappa;
      double alpha2 = max_step(trial);
      if (alpha2 <= alpha * 1.02) break;
      dir = std::move(trial);
      alpha = alpha2;
    }
    // The eigenvalue bound can overshoot on ill-conditioned blocks; back
    // the step off until every updated block factors as positive definite.
    for (int back = 0; back < 40 && alpha >= 1e-8; ++back) {
      bool ok = tau_ + alpha * dir.dtau > 0 && kappa_ + alpha * dir.dkappa > 0;
      for (int d = 0; ok && d < c_.diag_dim; ++d)
        ok = xd_[d] + alpha * dir.dxd[d] > 0 &&
             zd_[d] + alpha * dir.dzd[d] > 0;
      for (int pc = 0; ok && pc < P_; ++pc) {
        Eigen::LLT<Eigen::MatrixXd> lx(
            (X_[pc] + alpha * dir.dX[pc]).eval());
        Eigen::LLT<Eigen::MatrixXd> lz(
            (Z_[pc] + alpha * dir.dZ[pc]).eval());
        ok = lx.info() == Eigen::Success && lz.info() == Eigen::Success;
      }
      if (ok) break;
      alpha *= 0.9;
    }
    if (alpha < 1e-8) {
      status = SolveStatus::kNumericalFailure;
      break;
    }
    for (int pc = 0; pc < P_; ++pc) {
      X_[pc] += alpha * dir.dX[pc];
      Z_[pc] += alpha * dir.dZ[pc];
    }
    xd_ += alpha * dir.dxd;
    zd_ += alpha * dir.dzd;
    xf_ += alpha * dir.dxf;
    y_ += alpha * dir.dy;
    tau_ += alpha * dir.dtau;
    kappa_ += alpha * dir.dkappa;

    char line[200];
    std::snprintf(line, sizeof(line),
                  "%4d %+.4e %+.4e %9.2e %9.2e %9.2e %7.4f %8.1e %6.3f %8.1e "
                  "%8.1e\n",
                  it, pobj_, dobj_, relgap_, pres_, dres_, alpha, mu, sigma,
                  tau_, kappa_);
    log_ << line;
    if (opt_.verbose) std::fputs(line, stderr);
  }
  return status;
}

}  // namespace detail

/// Solves the SDP. Non-convergence is reported through the status, not as
/// an exception; only malformed problems throw.
inline SdpSolution solve(const SdpProblem& p, const SolveOptions& opt = {}) {
  p.validate();
  detail::Cones cones = detail::build_cones(p);
  detail::HsdSolver solver(cones, opt);
  SolveStatus status = solver.run();

  SdpSolution sol;
  sol.status = status;
  sol.iterations = solver.iterations_;
  sol.log = solver.log_.str();
  double tau = solver.tau_;
  bool scaled = status == SolveStatus::kOptimal ||
                status == SolveStatus::kMaxIter ||
                status == SolveStatus::kNumericalFailure;
  double denom = scaled ? tau : 1.0;
  if (denom <= 0) denom = 1.0;

  const int nb = static_cast<int>(p.block_sizes.size());
  sol.blocks.resize(nb);
  for (int ub = 0; ub < nb; ++ub) {
    int pc = cones.user_to_psd[ub];
    if (pc >= 0) {
      sol.blocks[ub] = solver.X_[pc] / denom;
    } else {
      sol.blocks[ub] = Eigen::MatrixXd::Constant(
          1, 1, solver.xd_[cones.user_to_diag[ub]] / denom);
    }
  }
  sol.scalars.resize(p.num_scalars);
  for (int f = 0; f < p.num_scalars; ++f)
    sol.scalars[f] = solver.xf_[f] / denom;
  sol.dual.resize(p.rows.size());
  for (size_t r = 0; r < p.rows.size(); ++r)
    sol.dual[r] = solver.y_[r] / denom / cones.row_scale[r];
  sol.objective = solver.pobj_;
  sol.dual_objective = solver.dobj_;
  sol.gap = solver.relgap_;
  sol.max_violation = solver.pres_;
  return sol;
}

// ---------------------------------------------------------------------------
// Independent solution validation: recomputes residuals and eigenvalue
// bounds from the problem data alone, never trusting solver internals.

struct RowReport {
  std::string name;
  double violation = 0.0;
};

struct ValidationReport {
  double max_eq_violation = 0.0;
  double max_ineq_violation = 0.0;
  double min_eigenvalue = 0.0;  // most negative over all PSD blocks
  double objective = 0.0;
  bool has_primal_point = false;
  std::vector<RowReport> worst_rows;
  std::string summary;

  bool acceptable(const SolveOptions& opt, double scale = 1.0) const {
    return has_primal_point &&
           max_eq_violation <= opt.feas_tol * scale * 10 &&
           max_ineq_violation <= opt.feas_tol * scale * 10 &&
           min_eigenvalue >= -opt.eig_tol * scale * 10;
  }
};

inline ValidationReport validate_solution(const SdpProblem& p,
                                          const SdpSolution& sol) {
  ValidationReport rep;
  if (sol.blocks.size() != p.block_sizes.size() ||
      sol.scalars.size() != static_cast<size_t>(p.num_scalars)) {
    rep.summary = "no primal certificate (status: " +
                  std::string(to_string(sol.status)) + ")";
    return rep;
  }
  if (sol.status == SolveStatus::kInfeasible ||
      sol.status == SolveStatus::kUnbounded) {
    rep.summary = "no primal certificate (status: " +
                  std::string(to_string(sol.status)) + ")";
    return rep;
  }
  rep.has_primal_point = true;

  auto row_value = [&](const std::vector<BlockEntry>& mat,
                       const std::vector<ScalarEntry>& sca) {
    double v = 0.0;
    for (const auto& e : mat) {
      const Eigen::MatrixXd& X = sol.blocks[e.block];
      v += (e.i == e.j) ? e.value * X(e.i, e.i) : 2.0 * e.value * X(e.i, e.j);
    }
    for (const auto& e : sca) v += e.value * sol.scalars[e.scalar];
    return v;
  };

  rep.objective = row_value(p.obj_mat, p.obj_sca);
  for (const auto& row : p.rows) {
    double lhs = row_value(row.mat, row.sca);
    double viol = row.kind == RowKind::kEq ? std::abs(lhs - row.rhs)
                                           : std::max(0.0, lhs - row.rhs);
    auto& slot = row.kind == RowKind::kEq ? rep.max_eq_violation
                                          : rep.max_ineq_violation;
    if (viol > slot) slot = viol;
    if (viol > 1e-9) rep.worst_rows.push_back({row.name, viol});
  }
  std::sort(rep.worst_rows.begin(), rep.worst_rows.end(),
            [](const RowReport& a, const RowReport& b) {
              return a.violation > b.violation;
            });
  if (rep.worst_rows.size() > 10) rep.worst_rows.resize(10);

  rep.min_eigenvalue = 0.0;
  for (size_t ub = 0; ub < sol.blocks.size(); ++ub) {
    const Eigen::MatrixXd& X = sol.blocks[ub];
    if (X.rows() == 0) continue;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
        0.5 * (X + X.transpose()), Eigen::EigenvaluesOnly);
    rep.min_eigenvalue = std::min(rep.min_eigenvalue, es.eigenvalues().minCoeff());
  }
  std::ostringstream os;
  os << "objective " << rep.objective << ", max eq violation "
     << rep.max_eq_violation << ", max ineq violation "
     << rep.max_ineq_violation << ", min block eigenvalue "
     << rep.min_eigenvalue;
  rep.summary = os.str();
  return rep;
}

}  // namespace ioc::sdp
