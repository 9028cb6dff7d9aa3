#include <gtest/gtest.h>

#include <sstream>

#include "expbandit/experts.hpp"

using namespace expbandit;

namespace {

std::vector<double> as_vec(const ProbabilityVector& p) { return {p.entries().begin(), p.entries().end()}; }

}  // namespace

TEST(Advise, Uniform) {
  EXPECT_EQ(as_vec(advise(UniformExpert{}, 0, 1, 4)), (std::vector<double>{0.25, 0.25, 0.25, 0.25}));
}

TEST(Advise, FixedArm) {
  EXPECT_EQ(as_vec(advise(FixedArmExpert{2}, 0, 1, 3)), (std::vector<double>{0.0, 0.0, 1.0}));
  EXPECT_THROW(advise(FixedArmExpert{3}, 0, 1, 3), InvalidInput);
}

TEST(Advise, OracleArgmax) {
  OracleExpert oracle{{{0, {0.1, 0.9}}}};
  EXPECT_EQ(as_vec(advise(oracle, 0, 1, 2)), (std::vector<double>{0.0, 1.0}));
}

TEST(Advise, OracleTiesPickLowestIndex) {
  OracleExpert oracle{{{0, {0.5, 0.9, 0.9}}}};
  EXPECT_EQ(as_vec(advise(oracle, 0, 1, 3)), (std::vector<double>{0.0, 1.0, 0.0}));
}

TEST(Advise, OraclePerContext) {
  OracleExpert oracle{{{0, {0.1, 0.9}}, {1, {0.8, 0.2}}}};
  EXPECT_EQ(advise(oracle, 1, 1, 2)[0], 1.0);
  EXPECT_EQ(advise(oracle, 0, 1, 2)[1], 1.0);
}

TEST(Advise, ContextTableFallsBackToUniform) {
  ContextTableExpert table;
  table.rows.emplace(0, ProbabilityVector({0.9, 0.1}));
  EXPECT_EQ(as_vec(advise(table, 0, 1, 2)), (std::vector<double>{0.9, 0.1}));
  EXPECT_EQ(as_vec(advise(table, 7, 1, 2)), (std::vector<double>{0.5, 0.5}));
}

TEST(Advise, IsPureFunction) {
  ContextTableExpert table;
  table.rows.emplace(3, ProbabilityVector({0.3, 0.7}));
  const std::vector<ExpertSpec> experts = {UniformExpert{}, FixedArmExpert{1}, table,
                                           OracleExpert{{{3, {0.0, 1.0}}}}};
  for (const auto& e : experts) {
    EXPECT_EQ(as_vec(advise(e, 3, 1, 2)), as_vec(advise(e, 3, 99, 2)));
  }
}

TEST(AssembleAdvice, PreservesOrder) {
  const std::vector<ExpertSpec> experts = {UniformExpert{}, FixedArmExpert{0}};
  auto a = assemble_advice(experts, 0, 1, 2);
  EXPECT_EQ(a.num_experts(), 2u);
  EXPECT_EQ(as_vec(a.row(0)), (std::vector<double>{0.5, 0.5}));
  EXPECT_EQ(as_vec(a.row(1)), (std::vector<double>{1.0, 0.0}));
}

TEST(AssembleAdvice, SingleUniformExpert) {
  const std::vector<ExpertSpec> experts = {UniformExpert{}};
  auto a = assemble_advice(experts, 12, 5, 3);
  EXPECT_EQ(a.num_experts(), 1u);
  EXPECT_NEAR(a.at(0, 2), 1.0 / 3.0, 1e-15);
}

TEST(AssembleAdvice, EmptyListRejected) {
  const std::vector<ExpertSpec> none;
  EXPECT_THROW(assemble_advice(none, 0, 1, 2), InvalidInput);
}

TEST(Describe, NamesAndUniformFlag) {
  EXPECT_TRUE(is_uniform(UniformExpert{}));
  EXPECT_FALSE(is_uniform(FixedArmExpert{0}));
  EXPECT_EQ(describe(UniformExpert{}), "uniform");
  EXPECT_EQ(describe(FixedArmExpert{1}), "fixed 1");
}

TEST(ContextTable, ParsesLinesAndComments) {
  std::istringstream in("# header\n0 0.9 0.1\n\n5 0.25 0.75  # trailing\n");
  auto table = parse_context_table(in, 2);
  ASSERT_EQ(table.rows.size(), 2u);
  EXPECT_DOUBLE_EQ(table.rows.at(5)[1], 0.75);
}

TEST(ContextTable, RejectsMalformedRows) {
  std::istringstream wrong_width("0 0.5 0.25 0.25\n");
  EXPECT_THROW(parse_context_table(wrong_width, 2), InvalidInput);
  std::istringstream not_simplex("0 0.5 0.6\n");
  EXPECT_THROW(parse_context_table(not_simplex, 2), InvalidInput);
  std::istringstream garbage("zero 0.5 0.5\n");
  EXPECT_THROW(parse_context_table(garbage, 2), InvalidInput);
  std::istringstream bad_number("0 0.5 half\n");
  EXPECT_THROW(parse_context_table(bad_number, 2), InvalidInput);
}

// Exhaustive check over small instances: the oracle's expected per-step reward
// dominates every other expert's.
TEST(OracleDominance, ExhaustiveSmallInstances) {
  const std::vector<std::vector<double>> grid = {{0.1, 0.5, 0.9}, {0.9, 0.5, 0.1}, {0.3, 0.3, 0.7}, {0.0, 1.0, 0.5}};
  for (const auto& m0 : grid) {
    for (const auto& m1 : grid) {
      MeansByContext means = {{0, m0}, {1, m1}};
      ContextTableExpert table;
      table.rows.emplace(0, ProbabilityVector({0.2, 0.3, 0.5}));
      table.rows.emplace(1, ProbabilityVector({0.6, 0.4, 0.0}));
      const std::vector<ExpertSpec> others = {UniformExpert{}, FixedArmExpert{0}, FixedArmExpert{1},
                                              FixedArmExpert{2}, table};
      const OracleExpert oracle{means};
      for (std::int64_t ctx : {0, 1}) {
        const auto& mu = means.at(ctx);
        const auto expected = [&](const ProbabilityVector& p) {
          double s = 0.0;
          for (std::size_t j = 0; j < 3; ++j) s += p[j] * mu[j];
          return s;
        };
        const double best = expected(advise(oracle, ctx, 1, 3));
        for (const auto& e : others) EXPECT_GE(best, expected(advise(e, ctx, 1, 3)));
      }
    }
  }
}
