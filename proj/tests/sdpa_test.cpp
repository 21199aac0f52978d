#include "ioc/sdpa.hpp"

#include <gtest/gtest.h>

#include <sstream>

namespace ioc::sdpa {
namespace {

using sdp::RowKind;
using sdp::SdpProblem;
using sdp::SdpSolution;
using sdp::SolveStatus;

SdpProblem trace_problem() {
  SdpProblem p;
  p.block_sizes = {2};
  p.obj_mat = {{0, 0, 0, 1.0}, {0, 1, 1, 1.0}};
  p.rows = {{RowKind::kEq, {{0, 0, 0, 1.0}}, {}, 1.0, "Q00"},
            {RowKind::kEq, {{0, 1, 1, 1.0}}, {}, 1.0, "Q11"}};
  return p;
}

TEST(SdpaTest, HeaderFollowsConvention) {
  std::string text = export_sdpa_string(trace_problem());
  std::istringstream is(text);
  std::string comment, mdim, nblock, sizes, rhs;
  std::getline(is, comment);
  std::getline(is, mdim);
  std::getline(is, nblock);
  std::getline(is, sizes);
  std::getline(is, rhs);
  EXPECT_EQ(comment[0], '*');
  EXPECT_EQ(mdim, "2");
  EXPECT_EQ(nblock, "1");
  EXPECT_EQ(sizes, "2");
  EXPECT_EQ(rhs, "1 1");
}

TEST(SdpaTest, EmptyProblemThrows) {
  SdpProblem p;
  EXPECT_THROW(export_sdpa_string(p), std::invalid_argument);
}

TEST(SdpaTest, FileRoundTripIsByteExact) {
  // Mixed problem: PSD block, scalar block run, inequality, free scalar
  // with an awkward coefficient that must survive 17-digit rendering.
  SdpProblem p;
  p.block_sizes = {2, 1, 1};
  p.num_scalars = 1;
  p.obj_mat = {{0, 0, 1, 1.0 / 3.0}, {1, 0, 0, 1.0}};
  p.obj_sca = {{0, -0.1}};
  p.rows = {
      {RowKind::kEq, {{0, 0, 0, 1.0}}, {{0, 0.3}}, 1.0, ""},
      {RowKind::kLe, {{2, 0, 0, -2.0}, {0, 1, 1, 0.7}}, {}, 0.25, ""},
  };
  std::string first = export_sdpa_string(p);
  std::istringstream is1(first);
  SdpProblem imported = import_sdpa(is1);
  std::string second = export_sdpa_string(imported);
  EXPECT_EQ(first, second);
}

TEST(SdpaTest, ImportedProblemSolvesToSameOptimum) {
  SdpProblem p;
  // minimize x s.t. [[x,1],[1,x]] PSD, via a free scalar: optimum 1.
  p.block_sizes = {2};
  p.num_scalars = 1;
  p.obj_sca = {{0, 1.0}};
  p.rows = {{RowKind::kEq, {{0, 0, 0, 1.0}}, {{0, -1.0}}, 0.0, ""},
            {RowKind::kEq, {{0, 1, 1, 1.0}}, {{0, -1.0}}, 0.0, ""},
            {RowKind::kEq, {{0, 0, 1, 0.5}}, {}, 1.0, ""}};
  SdpSolution direct = sdp::solve(p);
  ASSERT_EQ(direct.status, SolveStatus::kOptimal);

  std::istringstream is2(export_sdpa_string(p));
  SdpProblem imported = import_sdpa(is2);
  SdpSolution via_file = sdp::solve(imported);
  ASSERT_EQ(via_file.status, SolveStatus::kOptimal) << via_file.log;
  EXPECT_NEAR(direct.objective, via_file.objective, 1e-6);
}

TEST(SdpaTest, CoefficientsSurviveRoundTripExactly) {
  SdpProblem p = trace_problem();
  p.rows[0].rhs = 1.0 / 7.0;
  p.rows[1].mat[0].value = 3.0 / 7.0;
  std::istringstream is3(export_sdpa_string(p));
  SdpProblem back = import_sdpa(is3);
  EXPECT_EQ(back.rows[0].rhs, 1.0 / 7.0);
  EXPECT_EQ(back.rows[1].mat[0].value, 3.0 / 7.0);
}

}  // namespace
}  // namespace ioc::sdpa
