#include "ioc/trajectory_bench.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

namespace ioc {
namespace {

Polynomial known_lq_lagrangian(const VariableSpacePtr& sp) {
  Polynomial x1 = Polynomial::variable(sp, sp->state_id(0));
  Polynomial x2 = Polynomial::variable(sp, sp->state_id(1));
  Polynomial u = Polynomial::variable(sp, sp->control_id(0));
  return 2.0 * x1 * x1 + 0.5 * x1 * x2 + x2 * x2 + u * u;
}

Polynomial exit_norm_lagrangian(const VariableSpacePtr& sp) {
  Polynomial out = Polynomial::zero(sp);
  for (int id : sp->state_ids()) {
    Polynomial v = Polynomial::variable(sp, id);
    out = out + v * v;
  }
  for (int id : sp->control_ids()) {
    Polynomial v = Polynomial::variable(sp, id);
    out = out + v * v;
  }
  return out;
}

TEST(LqTest, TerminalControlVanishes) {
  TrajectoryDatabase db = gen_lq(20, 10, 42);
  ASSERT_EQ(db.trajectories.size(), 10u);
  for (const auto& traj : db.trajectories) {
    const auto& last = traj.samples.back();
    EXPECT_TRUE(last.is_terminal);
    EXPECT_NEAR(last.t, 1.0, 1e-12);
    EXPECT_NEAR(last.u[0], 0.0, 1e-12);  // E(T) = 0 forces u(T) = 0
  }
}

TEST(LqTest, CostMatchesRiccatiValueFunction) {
  TrajectoryDatabase db = gen_lq(50, 20, 7);
  Polynomial lbar = known_lq_lagrangian(db.system.space);
  const LqRiccati& law = lq_riccati();
  for (const auto& traj : db.trajectories) {
    const auto& s0 = traj.samples.front();
    double expected = law.value(s0.t, {s0.x[0], s0.x[1]});
    double got = trapezoid_cost(db.system, traj, lbar);
    EXPECT_NEAR(got, expected, 1e-3 * std::max(1.0, std::abs(expected)));
  }
}

TEST(LqTest, EmptyAndInvariants) {
  EXPECT_TRUE(gen_lq(10, 0, 1).trajectories.empty());
  TrajectoryDatabase db = gen_lq(30, 25, 3);
  DatabaseCheck check = validate_database(db);
  EXPECT_TRUE(check.ok) << check.message;
  EXPECT_LE(check.max_state_violation, 1e-9);
  EXPECT_LE(check.max_control_violation, 1e-9);
}

TEST(ExitNormTest, CostIsOneMinusRadiusSquared) {
  Trajectory traj = exitnorm_trajectory({0.5, 0.0}, 200);
  ControlSystem sys = make_exit_system();
  double cost = trapezoid_cost(sys, traj, exit_norm_lagrangian(sys.space));
  EXPECT_NEAR(cost, 0.75, 1e-3);  // J*(x) = 1 - |x|^2 at |x| = 0.5

  // Start on the boundary: zero-length trajectory, zero cost.
  Trajectory boundary = exitnorm_trajectory({1.0, 0.0}, 50);
  EXPECT_EQ(boundary.samples.size(), 1u);
  EXPECT_TRUE(boundary.samples[0].is_terminal);
  EXPECT_EQ(trapezoid_cost(sys, boundary, exit_norm_lagrangian(sys.space)),
            0.0);

  EXPECT_THROW(exitnorm_trajectory({0.0, 0.0}, 50), std::invalid_argument);
}

TEST(ExitNormTest, TerminalSamplesSitOnTheCircle) {
  TrajectoryDatabase db = gen_exitnorm(100, 42);
  ASSERT_EQ(db.trajectories.size(), 100u);
  for (const auto& traj : db.trajectories) {
    const auto& last = traj.samples.back();
    double r = std::hypot(last.x[0], last.x[1]);
    EXPECT_NEAR(r, 1.0, 1e-9);
  }
  DatabaseCheck check = validate_database(db);
  EXPECT_TRUE(check.ok) << check.message;
}

TEST(ExitNormTest, CostConsistencyAcrossDatabase) {
  TrajectoryDatabase db = gen_exitnorm(50, 11);
  Polynomial L = exit_norm_lagrangian(db.system.space);
  for (const auto& traj : db.trajectories) {
    double r0 = std::hypot(traj.samples[0].x[0], traj.samples[0].x[1]);
    double expected = 1.0 - r0 * r0;
    double got = trapezoid_cost(db.system, traj, L);
    EXPECT_NEAR(got, expected, 1e-3 * std::max(1.0, std::abs(expected)));
  }
}

TEST(ExitTimeTest, ExitTimeAndUnitControls) {
  Trajectory traj = exittime_trajectory({0.5, 0.0}, 50);
  EXPECT_NEAR(traj.samples.back().t, 0.5, 1e-12);  // duration 1 - |x0|
  for (const auto& s : traj.samples) {
    double g = 1.0 - s.u[0] * s.u[0] - s.u[1] * s.u[1];
    EXPECT_NEAR(g, 0.0, 1e-12);  // controls satisfy u1^2 + u2^2 = 1
  }
}

TEST(ExitTimeTest, AnnulusRegionRestrictsStarts) {
  ControlSystem sys = make_exit_system();
  BasicSemialgebraicSet annulus =
      annulus_set(sys.space, sys.space->state_ids(), 0.5, 1.0);
  TrajectoryDatabase db = gen_exittime(200, 42, annulus);
  for (const auto& traj : db.trajectories) {
    double r0 = std::hypot(traj.samples[0].x[0], traj.samples[0].x[1]);
    EXPECT_GE(r0, 0.5);
  }
  EXPECT_TRUE(validate_database(db).ok);
}

TEST(PlpTest, FamilySharesTrajectoriesExactly) {
  TrajectoryDatabase base = gen_exittime(50, 123);
  for (int p : {0, 1, 2, 5}) {
    TrajectoryDatabase db = gen_plp(p, 50, 123);
    ASSERT_EQ(db.trajectories.size(), base.trajectories.size());
    for (size_t i = 0; i < db.trajectories.size(); ++i) {
      const auto& a = db.trajectories[i].samples;
      const auto& b = base.trajectories[i].samples;
      ASSERT_EQ(a.size(), b.size());
      for (size_t k = 0; k < a.size(); ++k) {
        EXPECT_EQ(a[k].t, b[k].t);  // bit-identical
        EXPECT_EQ(a[k].x, b[k].x);
        EXPECT_EQ(a[k].u, b[k].u);
      }
    }
    EXPECT_EQ(db.plp_p, p);
  }
  EXPECT_THROW(gen_plp(-1, 5, 1), std::invalid_argument);
}

TEST(PlpTest, IntendedCostMatchesQuadrature) {
  // For L_p = |x|^p the intended value is (1 - |x0|^{p+1}) / (p+1).
  ControlSystem sys = make_exit_system();
  Trajectory traj = exittime_trajectory({0.5, 0.0}, 400);
  Polynomial x1 = Polynomial::variable(sys.space, sys.space->state_id(0));
  Polynomial x2 = Polynomial::variable(sys.space, sys.space->state_id(1));
  Polynomial L2 = x1 * x1 + x2 * x2;  // p = 2
  double got = trapezoid_cost(sys, traj, L2);
  EXPECT_NEAR(got, (1.0 - std::pow(0.5, 3)) / 3.0, 1e-3);
}

TEST(BrockettTest, PlanarSubcase) {
  Trajectory traj = brockett_planar_trajectory({1.0, 0.0}, 50);
  EXPECT_NEAR(traj.samples.back().t, 1.0, 1e-12);  // minimum time = radius
  for (const auto& s : traj.samples) {
    EXPECT_NEAR(std::hypot(s.u[0], s.u[1]), 1.0, 1e-12);
    EXPECT_NEAR(s.x[1] * s.u[0] - s.x[0] * s.u[1], 0.0, 1e-12);
    EXPECT_EQ(s.x[2], 0.0);
  }
  const auto& last = traj.samples.back();
  EXPECT_NEAR(std::hypot(last.x[0], last.x[1]), 0.0, 1e-6);
}

TEST(BrockettTest, AxisSubcaseReachesOrigin) {
  Trajectory traj = brockett_axis_trajectory(1.5, 0.7, 100);
  const auto& first = traj.samples.front();
  EXPECT_NEAR(first.x[2], 1.5, 1e-12);
  EXPECT_NEAR(first.x[0], 0.0, 1e-12);
  const auto& last = traj.samples.back();
  EXPECT_NEAR(std::abs(last.x[0]) + std::abs(last.x[1]) + std::abs(last.x[2]),
              0.0, 1e-6);
  // Minimum time from (0,0,c) is sqrt(2 pi |c|).
  EXPECT_NEAR(last.t, std::sqrt(2.0 * M_PI * 1.5), 1e-9);
}

TEST(BrockettTest, DatabasesPassInvariants) {
  TrajectoryDatabase planar =
      gen_brockett(50, 9, BrockettSubcase::kPlanar);
  TrajectoryDatabase axis = gen_brockett(25, 10, BrockettSubcase::kAxis);
  EXPECT_TRUE(validate_database(planar).ok) << validate_database(planar).message;
  EXPECT_TRUE(validate_database(axis).ok) << validate_database(axis).message;
  TrajectoryDatabase merged = merge_databases(planar, axis);
  EXPECT_EQ(merged.trajectories.size(), 75u);
  EXPECT_TRUE(validate_database(merged).ok);
}

TEST(DatabaseTest, DeterministicAndSeedSensitive) {
  TrajectoryDatabase a = gen_exittime(20, 5);
  TrajectoryDatabase b = gen_exittime(20, 5);
  TrajectoryDatabase c = gen_exittime(20, 6);
  ASSERT_EQ(a.trajectories.size(), b.trajectories.size());
  for (size_t i = 0; i < a.trajectories.size(); ++i)
    EXPECT_EQ(a.trajectories[i].samples[0].x, b.trajectories[i].samples[0].x);
  EXPECT_NE(a.trajectories[0].samples[0].x, c.trajectories[0].samples[0].x);
}

TEST(DatabaseTest, JsonRoundTripIsExact) {
  TrajectoryDatabase db = gen_lq(10, 5, 77);
  nlohmann::json j = database_to_json(db);
  TrajectoryDatabase back = database_from_json(j);
  ASSERT_EQ(back.trajectories.size(), db.trajectories.size());
  for (size_t i = 0; i < db.trajectories.size(); ++i) {
    const auto& a = db.trajectories[i].samples;
    const auto& b = back.trajectories[i].samples;
    ASSERT_EQ(a.size(), b.size());
    for (size_t k = 0; k < a.size(); ++k) {
      EXPECT_EQ(a[k].t, b[k].t);
      EXPECT_EQ(a[k].x, b[k].x);
      EXPECT_EQ(a[k].u, b[k].u);
      EXPECT_EQ(a[k].is_terminal, b[k].is_terminal);
    }
  }
  EXPECT_EQ(back.problem, "lq");
  EXPECT_EQ(back.system.horizon.mode, TimeMode::kFixedTime);
  EXPECT_TRUE(back.system.free_terminal_state);
}

TEST(DatabaseTest, CsvExport) {
  TrajectoryDatabase db = gen_exittime(3, 2, std::nullopt, 5);
  std::ostringstream os;
  export_csv(db, os);
  std::istringstream is(os.str());
  std::string header;
  std::getline(is, header);
  EXPECT_EQ(header, "trajectory,t,x1,x2,u1,u2,terminal");
  int lines = 0;
  std::string line;
  while (std::getline(is, line)) ++lines;
  EXPECT_EQ(lines, db.total_samples());
}

}  // namespace
}  // namespace ioc
