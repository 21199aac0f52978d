#pragma once

// Assembles the inverse problem from a control system, a trajectory
// database, a Lagrangian class L_{a,b}, and a value-surrogate degree;
// solves the resulting SDP; extracts and independently verifies the
// recovered triple (L, phi, eps).
//
// Decision variables: phi coefficients (free), eps (free), and the two
// PSD Gram blocks defining L = m_a(x)' Cx m_a(x) + m_b(u)' Cu m_b(u).
// Constraint families:
//   - positivity of H_f(L, phi) on [0,T] x X x U (Putinar certificate),
//   - phi(T, .) <= 0 on X_T (plus phi(T, .) >= -eps on X when the
//     terminal state is free),
//   - phi(T, x_k) >= -eps at terminal database samples,
//   - mean over trajectories of the time-weighted sample sum of
//     H_f(L, phi) <= eps,
//   - trace normalization tr(Cx) + tr(Cu) = C,
// with objective: minimize eps.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ioc/polynomial.hpp"
#include "ioc/sdp.hpp"
#include "ioc/semialgebraic.hpp"
#include "ioc/sos.hpp"
#include "ioc/trajectory_bench.hpp"

namespace ioc {

/// Lagrangian dictionary L_{a,b}: sums of an SOS polynomial of degree 2a
/// in x and an SOS polynomial of degree 2b in u, normalized by
/// tr(Cx) + tr(Cu) = C.
struct LagrangianClass {
  int a = 1;
  int b = 1;
  double C = 1.0;
};

struct IocpOptions {
  IocpOptions() {
    // Exact-recovery instances (eps* = 0) lack strictly complementary
    // optima and converge linearly; the per-iteration cost is small, so a
    // large cap is the right trade here.
    solver.max_iter = 5000;
  }
  sdp::SolveOptions solver;
  bool normalize = true;  // trace normalization; disabling admits (0,0,0)
  // Apply the phi(T, x_k) >= -eps rows at every sample instead of only the
  // terminal ones (fidelity experiments).
  bool terminal_rows_at_all_samples = false;
  double epsilon_lower_bound = -1.0;
  // 0 = derive the certificate half-degree from the template degrees.
  int cert_half_degree = 0;
};

struct IocpProgram {
  sdp::SdpProblem problem;
  VariableSpacePtr space;
  TimeMode mode = TimeMode::kFreeTime;
  int phi_half_degree = 1;
  int cert_half_degree = 1;
  int eps_scalar = -1;
  std::vector<std::pair<Monomial, int>> phi_coeffs;
  sos::GramVariable gram_x, gram_u;
  std::string dump;
};

struct IocpSolution {
  Polynomial L;
  Polynomial phi;  // value surrogate; for fixed time over (t, x)
  double epsilon = 0.0;
  Eigen::MatrixXd gram_x, gram_u;
  sdp::SdpSolution sdp;
  int phi_half_degree = 1;
  LagrangianClass cls;
};

namespace detail {

inline std::vector<int> state_control_vars(const ControlSystem& sys,
                                           bool with_time) {
  std::vector<int> vars;
  if (with_time) vars.push_back(VariableSpace::kTimeId);
  for (int i = 0; i < sys.space->n; ++i) vars.push_back(sys.space->state_id(i));
  for (int j = 0; j < sys.space->m; ++j)
    vars.push_back(sys.space->control_id(j));
  return vars;
}

inline sos::AffinePoly hjb_template(const ControlSystem& sys,
                                    const sos::AffinePoly& L,
                                    const sos::AffinePoly& phi) {
  sos::AffinePoly h = L;
  if (sys.horizon.mode == TimeMode::kFixedTime)
    h += phi.differentiate(VariableSpace::kTimeId);
  for (int i = 0; i < sys.space->n; ++i)
    h += phi.differentiate(sys.space->state_id(i)).times(sys.f[i]);
  return h;
}

}  // namespace detail

/// Builds the SDP. `phi_half_degree` p bounds deg(phi) <= 2p; the Putinar
/// half-degree is raised automatically so every template fits, unless
/// opts.cert_half_degree pins it (too small a pin throws, naming the term).
inline IocpProgram assemble(const ControlSystem& sys,
                            const TrajectoryDatabase& db,
                            const LagrangianClass& cls, int phi_half_degree,
                            const IocpOptions& opts = {}) {
  sys.validate();
  if (db.trajectories.empty())
    throw std::invalid_argument("assemble: empty database");
  if (cls.a < 0 || cls.b < 0 || phi_half_degree < 0)
    throw std::invalid_argument("assemble: degrees must be nonnegative");
  const bool fixed = sys.horizon.mode == TimeMode::kFixedTime;
  if (fixed && !sys.space->has_time)
    throw std::invalid_argument("assemble: fixed-time system without t");

  IocpProgram out;
  out.space = sys.space;
  out.mode = sys.horizon.mode;
  out.phi_half_degree = phi_half_degree;

  sos::SosProgram prog;
  // phi over (t, x) in fixed time, over (x) alone in free time.
  std::vector<int> phi_vars;
  if (fixed) phi_vars.push_back(VariableSpace::kTimeId);
  for (int i = 0; i < sys.space->n; ++i)
    phi_vars.push_back(sys.space->state_id(i));
  sos::AffinePoly phi =
      prog.free_poly(phi_vars, 2 * phi_half_degree, &out.phi_coeffs);
  out.eps_scalar = prog.add_free_scalar();

  // With a fixed horizon every admissible trajectory has the same cost
  // under a constant Lagrangian, so (c, c(T - t), 0) solves the inverse
  // problem exactly for any data; the dictionary therefore drops the
  // constant monomial from both Gram bases in fixed-time mode.
  MonomialBasis basis_x = monomial_basis(sys.space->state_ids(), cls.a);
  MonomialBasis basis_u = monomial_basis(sys.space->control_ids(), cls.b);
  if (fixed) {
    basis_x.elements.erase(basis_x.elements.begin());
    basis_u.elements.erase(basis_u.elements.begin());
    if (basis_x.elements.empty() && basis_u.elements.empty())
      throw std::invalid_argument(
          "assemble: class L_{0,0} has no non-constant terms in fixed time");
  }
  out.gram_x = prog.gram_from_basis(basis_x);
  out.gram_u = prog.gram_from_basis(basis_u);
  sos::AffinePoly L = prog.gram_poly(out.gram_x);
  L += prog.gram_poly(out.gram_u);

  sos::AffinePoly h = detail::hjb_template(sys, L, phi);

  // Positivity of H on ([0,T] x) X x U.
  BasicSemialgebraicSet full;
  full.variables = detail::state_control_vars(sys, fixed);
  if (fixed) {
    Polynomial t = Polynomial::variable(sys.space, VariableSpace::kTimeId);
    full.inequalities.push_back(
        t * (Polynomial::constant(sys.space, sys.horizon.T) - t));
  }
  for (const auto& g : sys.X.inequalities) full.inequalities.push_back(g);
  for (const auto& g : sys.U.inequalities) full.inequalities.push_back(g);
  for (const auto& e : sys.X.equalities) full.equalities.push_back(e);
  for (const auto& e : sys.U.equalities) full.equalities.push_back(e);

  int cert_p = opts.cert_half_degree > 0
                   ? opts.cert_half_degree
                   : std::max({phi_half_degree, (h.degree() + 1) / 2, 1});
  out.cert_half_degree = cert_p;
  prog.compile_positivity({h, full, cert_p, full.variables, "pos"});

  // Terminal-value conditions on phi(T, .) (phi itself in free time).
  sos::AffinePoly phiT =
      fixed ? phi.substitute(VariableSpace::kTimeId, sys.horizon.T) : phi;
  std::vector<int> xvars = sys.space->state_ids();
  int bnd_p = std::max(1, (phiT.degree() + 1) / 2);
  if (opts.cert_half_degree > 0) bnd_p = opts.cert_half_degree;
  sos::LinExpr eps_term;
  eps_term.scalars[out.eps_scalar] = 1.0;
  if (sys.free_terminal_state) {
    // Free terminal state: -eps <= phi(T, .) <= 0 must hold on all of X.
    prog.compile_positivity({phiT.scaled(-1.0), sys.X, bnd_p, xvars, "bndU"});
    sos::AffinePoly lower = phiT;
    lower.add_term(Monomial{}, eps_term);
    prog.compile_positivity({lower, sys.X, bnd_p, xvars, "bndL"});
  } else {
    prog.compile_positivity({phiT.scaled(-1.0), sys.XT, bnd_p, xvars, "bndU"});
  }

  // phi(T, x_k) >= -eps at terminal samples (all samples with the switch).
  for (size_t ti = 0; ti < db.trajectories.size(); ++ti) {
    const auto& traj = db.trajectories[ti];
    for (size_t k = 0; k < traj.samples.size(); ++k) {
      const auto& s = traj.samples[k];
      if (!opts.terminal_rows_at_all_samples && !s.is_terminal) continue;
      sos::LinExpr row = phiT.evaluate(sample_point(sys, s));
      row.add_scaled(eps_term, 1.0);
      sos::LinExpr neg;
      neg.add_scaled(row, -1.0);
      prog.add_le(neg, 0.0, "terminal:" + std::to_string(ti));
    }
  }

  // Mean over trajectories of the left-endpoint Riemann sums of H.
  sos::LinExpr integral;
  const double inv_n = 1.0 / static_cast<double>(db.trajectories.size());
  for (const auto& traj : db.trajectories) {
    for (size_t k = 0; k + 1 < traj.samples.size(); ++k) {
      double dt = traj.samples[k + 1].t - traj.samples[k].t;
      sos::LinExpr hk = h.evaluate(sample_point(sys, traj.samples[k]));
      integral.add_scaled(hk, dt * inv_n);
    }
  }
  integral.add_scaled(eps_term, -1.0);
  prog.add_le(integral, 0.0, "integral");

  if (opts.normalize) {
    sos::LinExpr trace;
    for (int i = 0; i < out.gram_x.basis.size(); ++i)
      trace.grams[{out.gram_x.block, i, i}] += 1.0;
    for (int i = 0; i < out.gram_u.basis.size(); ++i)
      trace.grams[{out.gram_u.block, i, i}] += 1.0;
    prog.add_eq(trace, cls.C, "trace");
  }

  // Keeps the feasible region bounded below in eps for the interior-point
  // method; never active at an optimum of a valid instance.
  sos::LinExpr neg_eps;
  neg_eps.scalars[out.eps_scalar] = -1.0;
  prog.add_le(neg_eps, -opts.epsilon_lower_bound, "eps_lb");

  prog.minimize(eps_term);
  out.dump = prog.dump();
  out.problem = prog.problem();
  return out;
}

/// Extracts (L, phi, eps) from a solved program. With normalization on,
/// the whole triple is rescaled so the trace equality holds exactly; every
/// other constraint family is homogeneous in (L, phi, eps), so the rescale
/// preserves feasibility while absorbing the solver's residual.
inline IocpSolution extract_solution(const IocpProgram& prog,
                                     const LagrangianClass& cls,
                                     sdp::SdpSolution sdp_sol,
                                     bool rescale_to_trace = true) {
  IocpSolution sol;
  sol.cls = cls;
  sol.phi_half_degree = prog.phi_half_degree;
  sol.epsilon = sdp_sol.scalars.empty()
                    ? 0.0
                    : sdp_sol.scalars[prog.eps_scalar];
  sol.gram_x = prog.gram_x.block >= 0 ? sdp_sol.blocks[prog.gram_x.block]
                                      : Eigen::MatrixXd(0, 0);
  sol.gram_u = prog.gram_u.block >= 0 ? sdp_sol.blocks[prog.gram_u.block]
                                      : Eigen::MatrixXd(0, 0);
  double scale = 1.0;
  if (rescale_to_trace && sdp_sol.status == sdp::SolveStatus::kOptimal) {
    double tr = sol.gram_x.trace() + sol.gram_u.trace();
    if (tr > 0) scale = cls.C / tr;
  }
  sol.gram_x *= scale;
  sol.gram_u *= scale;
  sol.epsilon *= scale;
  sol.L = sos::reconstruct(prog.gram_x, sol.gram_x, prog.space) +
          sos::reconstruct(prog.gram_u, sol.gram_u, prog.space);
  std::map<Monomial, double> phi_terms;
  for (const auto& [mono, id] : prog.phi_coeffs)
    phi_terms[mono] += scale * sdp_sol.scalars[id];
  sol.phi = Polynomial::from_terms(prog.space, std::move(phi_terms));
  sol.sdp = std::move(sdp_sol);
  if (sol.sdp.status == sdp::SolveStatus::kOptimal && sol.epsilon < -1e-6)
    throw std::runtime_error(
        "solve_iocp: invariant violated, optimal epsilon is negative");
  return sol;
}

/// Assembles and solves one level; solver failures are carried in the
/// returned status, never dropped.
inline IocpSolution solve_iocp(const ControlSystem& sys,
                               const TrajectoryDatabase& db,
                               const LagrangianClass& cls, int phi_half_degree,
                               const IocpOptions& opts = {}) {
  IocpProgram prog = assemble(sys, db, cls, phi_half_degree, opts);
  sdp::SdpSolution sdp_sol = sdp::solve(prog.problem, opts.solver);
  return extract_solution(prog, cls, std::move(sdp_sol), opts.normalize);
}

/// One solve per half-degree level in [p_min, p_max]. Failed levels keep
/// their status; later levels are still attempted.
inline std::vector<IocpSolution> hierarchy(const ControlSystem& sys,
                                           const TrajectoryDatabase& db,
                                           const LagrangianClass& cls,
                                           int p_min, int p_max,
                                           const IocpOptions& opts = {}) {
  if (p_min > p_max)
    throw std::invalid_argument("hierarchy: p_min must be <= p_max");
  std::vector<IocpSolution> out;
  for (int p = p_min; p <= p_max; ++p) {
    try {
      out.push_back(solve_iocp(sys, db, cls, p, opts));
    } catch (const std::exception& e) {
      IocpSolution failed;
      failed.cls = cls;
      failed.phi_half_degree = p;
      failed.sdp.status = sdp::SolveStatus::kNumericalFailure;
      failed.sdp.log = e.what();
      out.push_back(std::move(failed));
    }
  }
  return out;
}

/// Optimal levels must be monotone nonincreasing in eps up to `tol`.
inline bool hierarchy_monotone(const std::vector<IocpSolution>& levels,
                               double tol = 1e-7) {
  double prev = std::numeric_limits<double>::infinity();
  for (const auto& sol : levels) {
    if (sol.sdp.status != sdp::SolveStatus::kOptimal) continue;
    if (sol.epsilon > prev + tol) return false;
    prev = sol.epsilon;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Solver-independent certificate verification.

struct VerificationReport {
  bool pass = false;
  bool positivity_ok = false, boundary_ok = false, integral_ok = false,
       normalization_ok = false;
  double min_h = 0.0;                  // over the grid
  std::vector<double> min_h_point;
  double boundary_min = 0.0, boundary_max = 0.0;
  double integral_value = 0.0;         // mean trajectory Riemann sum
  double max_trajectory_integral = 0.0;
  double trace_error = 0.0;
  int grid_size = 0;
  std::string detail;
};

/// Re-checks the relaxed optimality conditions from scratch on dense
/// grids and the database itself: (i) min H >= -tol on the constraint
/// product, (ii) phi(T,.) within [-eps - tol, tol] on the terminal set and
/// at terminal samples, (iii) the sampled integral condition, (iv) the
/// trace normalization.
inline VerificationReport verify_certificate(const ControlSystem& sys,
                                             const TrajectoryDatabase& db,
                                             const IocpSolution& sol,
                                             int grid_per_axis = 10,
                                             double tol = 1e-6) {
  VerificationReport rep;
  std::ostringstream detail;
  const bool fixed = sys.horizon.mode == TimeMode::kFixedTime;
  Polynomial h = hjb_operator(sol.L, sol.phi, sys.f,
                              fixed ? TimeMode::kFixedTime
                                    : TimeMode::kFreeTime);

  // (i) H on the product grid.
  auto xg = grid_points(sys.X, grid_per_axis, sys.space->id_count());
  auto ug = grid_points(sys.U, grid_per_axis, sys.space->id_count());
  int tg = fixed ? grid_per_axis : 1;
  rep.min_h = std::numeric_limits<double>::infinity();
  for (int kt = 0; kt < tg; ++kt) {
    double t = fixed ? sys.horizon.T * kt / (tg - 1) : 0.0;
    for (const auto& zx : xg)
      for (const auto& zu : ug) {
        std::vector<double> z = zx;
        z[VariableSpace::kTimeId] = t;
        for (int j = 0; j < sys.space->m; ++j) {
          int id = sys.space->control_id(j);
          z[id] = zu[id];
        }
        double v = h.evaluate(z);
        if (v < rep.min_h) {
          rep.min_h = v;
          rep.min_h_point = z;
        }
        ++rep.grid_size;
      }
  }
  rep.positivity_ok = rep.min_h >= -tol;
  if (!rep.positivity_ok) {
    detail << "positivity violated: min H = " << rep.min_h << " at (";
    for (double v : rep.min_h_point) detail << v << " ";
    detail << "); ";
  }

  // (ii) phi(T, .) on the terminal set and at terminal samples.
  Polynomial phiT =
      fixed ? sol.phi.substitute(VariableSpace::kTimeId, sys.horizon.T)
            : sol.phi;
  std::vector<std::vector<double>> boundary_pts;
  if (sys.free_terminal_state) {
    boundary_pts = grid_points(sys.X, grid_per_axis, sys.space->id_count());
  } else {
    boundary_pts = grid_points(sys.XT, grid_per_axis, sys.space->id_count());
  }
  for (const auto& traj : db.trajectories)
    for (const auto& s : traj.samples)
      if (s.is_terminal && !sys.free_terminal_state)
        boundary_pts.push_back(sample_point(sys, s));
  rep.boundary_min = std::numeric_limits<double>::infinity();
  rep.boundary_max = -std::numeric_limits<double>::infinity();
  for (const auto& z : boundary_pts) {
    double v = phiT.evaluate(z);
    rep.boundary_min = std::min(rep.boundary_min, v);
    rep.boundary_max = std::max(rep.boundary_max, v);
  }
  rep.boundary_ok = rep.boundary_max <= tol &&
                    rep.boundary_min >= -sol.epsilon - tol;
  if (!rep.boundary_ok)
    detail << "boundary condition violated: phi(T,.) in ["
           << rep.boundary_min << ", " << rep.boundary_max
           << "] vs [-eps, 0] with eps = " << sol.epsilon << "; ";

  // (iii) sampled integral condition, same weighting as assemble.
  double total = 0.0;
  rep.max_trajectory_integral = 0.0;
  for (const auto& traj : db.trajectories) {
    double acc = 0.0;
    for (size_t k = 0; k + 1 < traj.samples.size(); ++k) {
      double dt = traj.samples[k + 1].t - traj.samples[k].t;
      acc += dt * h.evaluate(sample_point(sys, traj.samples[k]));
    }
    total += acc;
    rep.max_trajectory_integral = std::max(rep.max_trajectory_integral, acc);
  }
  rep.integral_value = total / static_cast<double>(db.trajectories.size());
  rep.integral_ok = rep.integral_value <= sol.epsilon + tol;
  if (!rep.integral_ok)
    detail << "integral condition violated: " << rep.integral_value
           << " > eps = " << sol.epsilon << "; ";

  // (iv) normalization.
  rep.trace_error =
      std::abs(sol.gram_x.trace() + sol.gram_u.trace() - sol.cls.C);
  rep.normalization_ok = rep.trace_error <= 1e-8;
  if (!rep.normalization_ok)
    detail << "trace normalization off by " << rep.trace_error << "; ";

  rep.pass = rep.positivity_ok && rep.boundary_ok && rep.integral_ok &&
             rep.normalization_ok;
  rep.detail = detail.str();
  return rep;
}

// ---------------------------------------------------------------------------
// Lagrangian comparison up to positive scale.

struct SimilarityReport {
  double cosine = 0.0;
  // Residuals of the unit-normalized, sign-fixed coefficient vectors.
  std::vector<std::pair<Monomial, double>> residuals;
  double max_residual = 0.0;
};

/// Normalizes both coefficient vectors to unit Euclidean norm with the
/// sign fixed by the largest-magnitude coefficient, then reports the
/// cosine similarity and per-monomial residuals.
inline SimilarityReport compare_lagrangians(const Polynomial& L1,
                                            const Polynomial& L2) {
  if (L1.is_zero() || L2.is_zero())
    throw std::invalid_argument("compare_lagrangians: zero polynomial");
  std::vector<Monomial> monos;
  for (const auto& [mono, c] : L1.terms()) monos.push_back(mono);
  for (const auto& [mono, c] : L2.terms())
    if (L1.coeff(mono) == 0.0) monos.push_back(mono);
  std::sort(monos.begin(), monos.end());

  auto vec = [&](const Polynomial& p) {
    Eigen::VectorXd v(monos.size());
    for (size_t i = 0; i < monos.size(); ++i) v[i] = p.coeff(monos[i]);
    int imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    if (v[imax] < 0) v = -v;
    return Eigen::VectorXd(v / v.norm());
  };
  Eigen::VectorXd a = vec(L1), b = vec(L2);
  SimilarityReport rep;
  rep.cosine = a.dot(b);
  for (size_t i = 0; i < monos.size(); ++i) {
    double r = std::abs(a[i] - b[i]);
    rep.residuals.emplace_back(monos[i], r);
    rep.max_residual = std::max(rep.max_residual, r);
  }
  return rep;
}

/// The Lagrangian the benchmark problem is known to recover, when the
/// problem id and class imply one (used for CLI similarity reporting).
inline std::optional<Polynomial> known_target(const std::string& problem,
                                              const LagrangianClass& cls,
                                              const VariableSpacePtr& space) {
  auto sq = [&](int id) {
    Polynomial v = Polynomial::variable(space, id);
    return v * v;
  };
  if (problem == "lq") {
    Polynomial x1 = Polynomial::variable(space, space->state_id(0));
    Polynomial x2 = Polynomial::variable(space, space->state_id(1));
    return 2.0 * x1 * x1 + 0.5 * x1 * x2 + x2 * x2 +
           sq(space->control_id(0));
  }
  if (problem == "exitnorm") {
    Polynomial out = Polynomial::zero(space);
    for (int id : space->state_ids()) out = out + sq(id);
    for (int id : space->control_ids()) out = out + sq(id);
    return out;
  }
  if (problem == "exittime" || problem == "brockett") {
    if (cls.b >= 2) {  // the conserved-quantity Lagrangian (1 - |u|^2)^2
      Polynomial g = Polynomial::constant(space, 1.0);
      for (int id : space->control_ids()) g = g - sq(id);
      return g * g;
    }
    if (cls.b == 1) {  // 1 + |u|^2, equivalent to the minimum-time cost
      Polynomial out = Polynomial::constant(space, 1.0);
      for (int id : space->control_ids()) out = out + sq(id);
      return out;
    }
  }
  return std::nullopt;
}

}  // namespace ioc
