#include "ioc/sos.hpp"

#include <gtest/gtest.h>

#include <random>

#include "test_util.hpp"

namespace ioc::sos {
namespace {

class SosTest : public ::testing::Test {
 protected:
  VariableSpacePtr sp_ = make_space(2, 2, false);
  int x1_ = sp_->state_id(0);
  int x2_ = sp_->state_id(1);
  int u1_ = sp_->control_id(0);
  int u2_ = sp_->control_id(1);

  Polynomial var(int id) const { return Polynomial::variable(sp_, id); }
  Polynomial c(double v) const { return Polynomial::constant(sp_, v); }
};

TEST_F(SosTest, GramParametrizeSizes) {
  SosProgram prog;
  GramVariable a = prog.gram_parametrize({u1_, u2_}, 1);
  EXPECT_EQ(a.basis.size(), 3);  // binomial(3, 1)
  EXPECT_EQ(prog.problem().block_sizes[a.block], 3);

  GramVariable b = prog.gram_parametrize({x1_}, 0);
  EXPECT_EQ(b.basis.size(), 1);

  // Enumeration oracle: binomial(4, 2) = 6.
  GramVariable d = prog.gram_parametrize({x1_, x2_}, 2);
  EXPECT_EQ(d.basis.size(), 6);
}

TEST_F(SosTest, ReconstructExamples) {
  SosProgram prog;
  GramVariable g = prog.gram_parametrize({x1_, x2_}, 1);  // [1, x1, x2]
  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(3, 3);
  Q(1, 1) = Q(2, 2) = 1.0;
  EXPECT_EQ(reconstruct(g, Q, sp_), var(x1_) * var(x1_) + var(x2_) * var(x2_));

  GramVariable g2 = prog.gram_parametrize({x1_}, 1);  // [1, x1]
  Eigen::MatrixXd Q2(2, 2);
  Q2 << 1, 1, 1, 1;
  EXPECT_EQ(reconstruct(g2, Q2, sp_),
            c(1.0) + c(2.0) * var(x1_) + var(x1_) * var(x1_));

  // Rank-1 outer product of (1, 0, 0, -1, 0, -1) over the degree-2 basis
  // in (u1, u2) expands to (1 - u1^2 - u2^2)^2.
  GramVariable g3 = prog.gram_parametrize({u1_, u2_}, 2);
  Eigen::VectorXd v(6);
  // Basis order: 1, u1, u2, u1^2, u1*u2, u2^2.
  v << 1, 0, 0, -1, 0, -1;
  Eigen::MatrixXd Q3 = v * v.transpose();
  Polynomial cq = c(1.0) - var(u1_) * var(u1_) - var(u2_) * var(u2_);
  EXPECT_EQ(reconstruct(g3, Q3, sp_), cq * cq);

  EXPECT_THROW(reconstruct(g3, Q2, sp_), std::invalid_argument);
}

TEST_F(SosTest, GramRoundTripProperty) {
  SosProgram prog;
  GramVariable g = prog.gram_parametrize({x1_, x2_, u1_}, 2);
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::MatrixXd A(g.basis.size(), g.basis.size());
    for (int i = 0; i < A.rows(); ++i)
      for (int j = 0; j < A.cols(); ++j) A(i, j) = testing::uniform(rng, -1, 1);
    Eigen::MatrixXd Q = A * A.transpose();  // random PSD
    Polynomial p = reconstruct(g, Q, sp_);
    for (int k = 0; k < 5; ++k) {
      auto z = testing::random_point(rng, sp_->id_count());
      Eigen::VectorXd mz(g.basis.size());
      for (int b = 0; b < g.basis.size(); ++b)
        mz[b] = g.basis.elements[b].evaluate(z);
      EXPECT_NEAR(p.evaluate(z), mz.dot(Q * mz), 1e-10);
    }
  }
}

// Solves the compiled feasibility problem (zero objective).
sdp::SolveStatus compile_and_solve(SosProgram& prog,
                                   const PutinarCertificate& cert) {
  prog.compile_positivity(cert);
  return sdp::solve(prog.problem()).status;
}

TEST_F(SosTest, CompileIntervalCertificate) {
  // 1 - x1^2 >= 0 on {1 - x1^2 >= 0}: sigma_0 = 0, sigma_1 = 1 works.
  BasicSemialgebraicSet K;
  K.inequalities.push_back(c(1.0) - var(x1_) * var(x1_));
  K.variables = {x1_};
  SosProgram prog;
  PutinarCertificate cert{AffinePoly(c(1.0) - var(x1_) * var(x1_)), K, 1,
                          {x1_}, "interval"};
  EXPECT_EQ(compile_and_solve(prog, cert), sdp::SolveStatus::kOptimal);
}

TEST_F(SosTest, CompileBallCertificate) {
  BasicSemialgebraicSet K = ball_set(sp_, {x1_, x2_}, 1.0);
  SosProgram prog;
  PutinarCertificate cert{
      AffinePoly(var(x1_) * var(x1_) + var(x2_) * var(x2_)), K, 1,
      {x1_, x2_}, "ball"};
  EXPECT_EQ(compile_and_solve(prog, cert), sdp::SolveStatus::kOptimal);
}

TEST_F(SosTest, CompileNegativeConstantInfeasible) {
  BasicSemialgebraicSet K = ball_set(sp_, {x1_, x2_}, 1.0);
  for (int p : {1, 2}) {
    SosProgram prog;
    PutinarCertificate cert{AffinePoly(c(-1.0)), K, p, {x1_, x2_}, "neg"};
    EXPECT_EQ(compile_and_solve(prog, cert), sdp::SolveStatus::kInfeasible);
  }
}

TEST_F(SosTest, FeasibilityIsMonotoneInDegree) {
  // If the certificate exists at half-degree p it persists at p + 1.
  BasicSemialgebraicSet K = ball_set(sp_, {x1_, x2_}, 1.0);
  for (int p : {1, 2}) {
    SosProgram prog;
    PutinarCertificate cert{
        AffinePoly(var(x1_) * var(x1_) + var(x2_) * var(x2_)), K, p,
        {x1_, x2_}, "ball"};
    EXPECT_EQ(compile_and_solve(prog, cert), sdp::SolveStatus::kOptimal)
        << "p = " << p;
  }
  BasicSemialgebraicSet I;
  I.inequalities.push_back(c(1.0) - var(x1_) * var(x1_));
  I.variables = {x1_};
  for (int p : {1, 2}) {
    SosProgram prog;
    PutinarCertificate cert{AffinePoly(c(1.0) - var(x1_) * var(x1_)), I, p,
                            {x1_}, "interval"};
    EXPECT_EQ(compile_and_solve(prog, cert), sdp::SolveStatus::kOptimal)
        << "p = " << p;
  }
}

TEST_F(SosTest, DegreeTooLowThrows) {
  BasicSemialgebraicSet K = ball_set(sp_, {x1_, x2_}, 1.0);
  Polynomial quartic = var(x1_) * var(x1_) * var(x1_) * var(x1_);
  SosProgram prog;
  PutinarCertificate cert{AffinePoly(quartic), K, 1, {x1_, x2_}, "quartic"};
  EXPECT_THROW(prog.compile_positivity(cert), std::invalid_argument);
}

TEST_F(SosTest, EqualityMultiplierCertificate) {
  // -phi >= 0 on the circle {1 - |x|^2 = 0} with phi = x1^2 + x2^2 - 1:
  // -phi = 1*h exactly, via the sign-free equality multiplier.
  BasicSemialgebraicSet circle = sphere_set(sp_, {x1_, x2_}, 1.0);
  Polynomial phi = var(x1_) * var(x1_) + var(x2_) * var(x2_) - c(1.0);
  SosProgram prog;
  PutinarCertificate cert{AffinePoly(-phi), circle, 1, {x1_, x2_}, "circle"};
  PutinarCompilation comp = prog.compile_positivity(cert);
  EXPECT_EQ(comp.eq_multipliers.size(), 1u);
  EXPECT_EQ(sdp::solve(prog.problem()).status, sdp::SolveStatus::kOptimal);
}

TEST_F(SosTest, EmittedRowsReferenceDeclaredVariables) {
  BasicSemialgebraicSet K = ball_set(sp_, {x1_, x2_}, 1.0);
  SosProgram prog;
  std::vector<std::pair<Monomial, int>> phi_ids;
  AffinePoly phi = prog.free_poly({x1_, x2_}, 2, &phi_ids);
  PutinarCertificate cert{phi, K, 1, {x1_, x2_}, "phi"};
  prog.compile_positivity(cert);
  // validate() checks every row references declared blocks and scalars.
  EXPECT_NO_THROW(prog.problem().validate());
  EXPECT_EQ(phi_ids.size(), 6u);
  EXPECT_NE(prog.dump().find("rows:"), std::string::npos);
}

TEST_F(SosTest, AffinePolyCalculus) {
  SosProgram prog;
  std::vector<std::pair<Monomial, int>> ids;
  AffinePoly phi = prog.free_poly({x1_, x2_}, 2, &ids);

  // d(phi)/dx1 evaluated with known coefficients equals the polynomial
  // derivative: fix phi = 1 + 2 x1 + 3 x1 x2.
  std::vector<double> vals(prog.problem().num_scalars, 0.0);
  Polynomial fixed = c(1.0) + c(2.0) * var(x1_) +
                     c(3.0) * var(x1_) * var(x2_);
  for (auto& [mono, id] : ids) vals[id] = fixed.coeff(mono);
  AffinePoly dphi = phi.differentiate(x1_);
  Polynomial got = dphi.to_polynomial(sp_, {}, vals);
  EXPECT_EQ(got, fixed.differentiate(x1_));

  // times() against polynomial multiplication.
  Polynomial g = c(1.0) - var(u1_) * var(u1_);
  EXPECT_EQ(phi.times(g).to_polynomial(sp_, {}, vals), fixed * g);

  // evaluate() against polynomial evaluation.
  std::vector<double> z(sp_->id_count(), 0.5);
  LinExpr e = phi.evaluate(z);
  EXPECT_NEAR(e.value({}, vals), fixed.evaluate(z), 1e-12);

  // substitute() against polynomial substitution.
  EXPECT_EQ(phi.substitute(x2_, 0.25).to_polynomial(sp_, {}, vals),
            fixed.substitute(x2_, 0.25));
}

}  // namespace
}  // namespace ioc::sos
