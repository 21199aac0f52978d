#include "ioc/iocp.hpp"

#include <gtest/gtest.h>

#include <random>

#include "test_util.hpp"

namespace ioc {
namespace {

Polynomial conserved_quantity(const VariableSpacePtr& sp) {
  Polynomial g = Polynomial::constant(sp, 1.0);
  for (int id : sp->control_ids()) {
    Polynomial u = Polynomial::variable(sp, id);
    g = g - u * u;
  }
  return g * g;
}

class IocpTest : public ::testing::Test {
 protected:
  static const TrajectoryDatabase& exitnorm_db() {
    static const TrajectoryDatabase db = gen_exitnorm(60, 42, 20);
    return db;
  }
  static const TrajectoryDatabase& exittime_db() {
    static const TrajectoryDatabase db = gen_exittime(60, 42, std::nullopt, 20);
    return db;
  }
};

TEST_F(IocpTest, ExitNormExactRecoveryAtDegreeTwo) {
  const TrajectoryDatabase& db = exitnorm_db();
  IocpSolution sol = solve_iocp(db.system, db, {1, 1}, 1);
  ASSERT_EQ(sol.sdp.status, sdp::SolveStatus::kOptimal) << sol.sdp.log;
  EXPECT_LE(sol.epsilon, 1e-6);
  EXPECT_GE(sol.epsilon, -1e-9);

  auto target = known_target("exitnorm", {1, 1}, db.system.space);
  ASSERT_TRUE(target.has_value());
  SimilarityReport sim = compare_lagrangians(sol.L, *target);
  EXPECT_GE(sim.cosine, 0.999);

  VerificationReport rep = verify_certificate(db.system, db, sol, 14);
  EXPECT_TRUE(rep.pass) << rep.detail;
  EXPECT_GE(rep.grid_size, 10000);
}

TEST_F(IocpTest, ExitTimeConservedQuantityAtDegreeFour) {
  const TrajectoryDatabase& db = exittime_db();
  IocpSolution sol = solve_iocp(db.system, db, {0, 2}, 2);
  ASSERT_EQ(sol.sdp.status, sdp::SolveStatus::kOptimal) << sol.sdp.log;
  EXPECT_LE(sol.epsilon, 1e-6);
  SimilarityReport sim =
      compare_lagrangians(sol.L, conserved_quantity(db.system.space));
  EXPECT_GE(sim.cosine, 0.999);
  // The recovered value surrogate is (near) zero.
  EXPECT_LE(sol.phi.max_abs_coeff(), 1e-4);
}

TEST_F(IocpTest, TrivialSolutionFeasibleWithoutNormalization) {
  const TrajectoryDatabase& db = exitnorm_db();
  IocpOptions opts;
  opts.normalize = false;
  IocpProgram prog = assemble(db.system, db, {1, 1}, 1, opts);

  // The zero point satisfies every constraint with objective zero.
  sdp::SdpSolution zero;
  zero.status = sdp::SolveStatus::kOptimal;
  for (int size : prog.problem.block_sizes)
    zero.blocks.push_back(Eigen::MatrixXd::Zero(size, size));
  zero.scalars.assign(prog.problem.num_scalars, 0.0);
  sdp::ValidationReport rep = sdp::validate_solution(prog.problem, zero);
  EXPECT_LE(rep.max_eq_violation, 0.0);
  EXPECT_LE(rep.max_ineq_violation, 0.0);
  EXPECT_EQ(rep.objective, 0.0);

  IocpSolution sol = solve_iocp(db.system, db, {1, 1}, 1, opts);
  ASSERT_EQ(sol.sdp.status, sdp::SolveStatus::kOptimal) << sol.sdp.log;
  EXPECT_NEAR(sol.epsilon, 0.0, 1e-6);
}

TEST_F(IocpTest, ZeroLagrangianViolatesNormalization) {
  const TrajectoryDatabase& db = exitnorm_db();
  IocpProgram prog = assemble(db.system, db, {1, 1}, 1);
  sdp::SdpSolution zero;
  zero.status = sdp::SolveStatus::kOptimal;
  for (int size : prog.problem.block_sizes)
    zero.blocks.push_back(Eigen::MatrixXd::Zero(size, size));
  zero.scalars.assign(prog.problem.num_scalars, 0.0);
  sdp::ValidationReport rep = sdp::validate_solution(prog.problem, zero);
  // The trace row tr(Cx) + tr(Cu) = 1 is off by exactly 1 at L = 0.
  EXPECT_NEAR(rep.max_eq_violation, 1.0, 1e-12);
}

TEST_F(IocpTest, TotalVariationShiftIsExactPolynomialIdentity) {
  const ControlSystem sys = make_exit_system();
  std::mt19937_64 rng(17);
  Polynomial vanish = Polynomial::constant(sys.space, 1.0);
  for (int id : sys.space->state_ids()) {
    Polynomial x = Polynomial::variable(sys.space, id);
    vanish = vanish - x * x;  // zero on X_T = the unit circle
  }
  for (int trial = 0; trial < 20; ++trial) {
    Polynomial psi =
        vanish * testing::random_dyadic_polynomial(rng, sys.space, 2, 4);
    Polynomial L = testing::random_dyadic_polynomial(rng, sys.space, 2, 5);
    Polynomial phi = testing::random_dyadic_polynomial(rng, sys.space, 2, 5);
    // Guard: dyadic coefficients make the shift cancel exactly.
    Polynomial shift = Polynomial::zero(sys.space);
    for (int i = 0; i < sys.space->n; ++i)
      shift = shift + psi.differentiate(sys.space->state_id(i)) * sys.f[i];
    Polynomial lhs = hjb_operator(L + shift, phi - psi, sys.f,
                                  TimeMode::kFreeTime);
    Polynomial rhs = hjb_operator(L, phi, sys.f, TimeMode::kFreeTime);
    EXPECT_EQ(lhs, rhs);
  }
}

TEST_F(IocpTest, ConservedQuantityPairPassesVerification) {
  const TrajectoryDatabase& db = exittime_db();
  IocpSolution sol;
  sol.cls = {0, 2, 3.0};  // Gram trace of (1 - |u|^2)^2 is 3
  sol.phi_half_degree = 2;
  sol.L = conserved_quantity(db.system.space);
  sol.phi = Polynomial::zero(db.system.space);
  sol.epsilon = 1e-9;  // quadrature error only: samples satisfy |u| = 1
  sol.gram_x = Eigen::MatrixXd::Zero(1, 1);
  Eigen::VectorXd v(6);
  v << 1, 0, 0, -1, 0, -1;
  sol.gram_u = v * v.transpose();
  sol.sdp.status = sdp::SolveStatus::kOptimal;
  VerificationReport rep = verify_certificate(db.system, db, sol, 14);
  EXPECT_TRUE(rep.pass) << rep.detail;
  EXPECT_LE(rep.integral_value, 1e-10);
}

TEST_F(IocpTest, CorruptedPhiFailsBoundaryCheck) {
  const TrajectoryDatabase& db = exitnorm_db();
  IocpSolution sol = solve_iocp(db.system, db, {1, 1}, 1);
  ASSERT_EQ(sol.sdp.status, sdp::SolveStatus::kOptimal);
  IocpSolution corrupted = sol;
  corrupted.phi =
      sol.phi + Polynomial::constant(db.system.space, 0.1);
  VerificationReport rep = verify_certificate(db.system, db, corrupted, 10);
  EXPECT_FALSE(rep.pass);
  EXPECT_FALSE(rep.boundary_ok);
  EXPECT_NEAR(rep.boundary_max, 0.1, 2e-2);  // shift shows up on X_T
}

TEST_F(IocpTest, CompareLagrangians) {
  VariableSpacePtr sp = make_space(2, 1, true);
  Polynomial x1 = Polynomial::variable(sp, sp->state_id(0));
  Polynomial x2 = Polynomial::variable(sp, sp->state_id(1));
  Polynomial u = Polynomial::variable(sp, sp->control_id(0));
  Polynomial L1 = 2.0 * x1 * x1 + 0.5 * x1 * x2 + x2 * x2 + u * u;
  Polynomial L2 = L1 * 2.0;
  EXPECT_NEAR(compare_lagrangians(L1, L2).cosine, 1.0, 1e-12);
  EXPECT_NEAR(compare_lagrangians(L1, L1).cosine, 1.0, 1e-12);

  // A degree-4 run of the LQ problem recovers visibly wrong coefficients.
  Polynomial off = 0.78 * x1 * x1 + 0.82 * x1 * x2 + 2.11 * x2 * x2 +
                   1.12 * u * u;
  EXPECT_LT(compare_lagrangians(L1, off).cosine, 0.95);

  EXPECT_THROW(compare_lagrangians(L1, Polynomial::zero(sp)),
               std::invalid_argument);
}

TEST_F(IocpTest, HierarchySingleLevelMatchesSolve) {
  const TrajectoryDatabase& db = exitnorm_db();
  auto levels = hierarchy(db.system, db, {1, 1}, 1, 1);
  ASSERT_EQ(levels.size(), 1u);
  IocpSolution direct = solve_iocp(db.system, db, {1, 1}, 1);
  EXPECT_EQ(levels[0].epsilon, direct.epsilon);
  EXPECT_TRUE(hierarchy_monotone(levels));
  EXPECT_THROW(hierarchy(db.system, db, {1, 1}, 2, 1), std::invalid_argument);
}

TEST_F(IocpTest, AssembleErrorPaths) {
  const TrajectoryDatabase& db = exittime_db();
  TrajectoryDatabase empty = db;
  empty.trajectories.clear();
  EXPECT_THROW(assemble(db.system, empty, {1, 1}, 1), std::invalid_argument);

  // Pinning the certificate half-degree below the template degree names
  // the violating term.
  IocpOptions opts;
  opts.cert_half_degree = 1;
  try {
    assemble(db.system, db, {2, 2}, 1, opts);
    FAIL() << "expected degree error";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("certificate degree too low"),
              std::string::npos);
  }
}

TEST_F(IocpTest, ExtractionMatchesGramEvaluation) {
  const TrajectoryDatabase& db = exitnorm_db();
  IocpSolution sol = solve_iocp(db.system, db, {1, 1}, 1);
  ASSERT_EQ(sol.sdp.status, sdp::SolveStatus::kOptimal);
  // evaluate(L, z) == m_a(x)' Cx m_a(x) + m_b(u)' Cu m_b(u) at random z.
  std::mt19937_64 rng(5);
  MonomialBasis bx = monomial_basis(db.system.space->state_ids(), 1);
  MonomialBasis bu = monomial_basis(db.system.space->control_ids(), 1);
  for (int k = 0; k < 100; ++k) {
    auto z = testing::random_point(rng, db.system.space->id_count());
    Eigen::VectorXd mx(bx.size()), mu(bu.size());
    for (int i = 0; i < bx.size(); ++i) mx[i] = bx.elements[i].evaluate(z);
    for (int i = 0; i < bu.size(); ++i) mu[i] = bu.elements[i].evaluate(z);
    double expected = mx.dot(sol.gram_x * mx) + mu.dot(sol.gram_u * mu);
    EXPECT_NEAR(sol.L.evaluate(z), expected, 1e-10);
  }
}

}  // namespace
}  // namespace ioc
