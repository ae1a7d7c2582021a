#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "scream/bench.hpp"

using namespace scream;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.T = 400;
  c.d = 3;
  c.period = 100;
  c.seeds = {0, 1};
  c.alphas = {0.5};
  c.per_round = false;
  return c;
}

std::filesystem::path temp_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("scream_bench_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

}  // namespace

TEST(Generator, NoiselessConstantComparatorIsExact) {
  ExperimentConfig c = small_config();
  c.noise = 0.0;
  c.period = static_cast<int>(c.T);
  const RegressionStream s = gen_piecewise_regression(c, 3);
  EXPECT_EQ(s.segment_jumps(), 0);
  const LossStream stream = s.stream();
  for (long t = 1; t <= c.T; ++t)
    EXPECT_NEAR(eval_unary_loss(stream(static_cast<int>(t)), s.comparators.points[static_cast<std::size_t>(t - 1)]),
                0.0, 1e-28);
}

TEST(Generator, SegmentsAndBounds) {
  const ExperimentConfig c = small_config();
  const RegressionStream s = gen_piecewise_regression(c, 4);
  EXPECT_EQ(s.segment_jumps(), 3);
  EXPECT_GT(s.comparators.path_length(), 0.0);
  double jumps = 0.0;
  for (std::size_t t = 1; t < s.comparators.size(); ++t)
    jumps += (s.comparators.points[t] - s.comparators.points[t - 1]).norm();
  EXPECT_NEAR(jumps, s.comparators.path_length(), 1e-12);
  for (const Vector& x : s.features) EXPECT_LE(x.norm(), c.feature_radius + 1e-12);
  for (const Vector& w : s.comparators.points) EXPECT_LE(w.norm(), c.comparator_radius + 1e-12);
  const LossStream stream = s.stream();
  const DomainBall ball(c.d, c.D);
  for (int t = 1; t <= 50; ++t) {
    const MemoryLossOracle f = stream(t);
    Vector w = Vector::Ones(c.d);
    w = ball.project(w);
    EXPECT_LE(unary_gradient(f, w).norm(), c.G);
  }
}

TEST(Generator, Reproducible) {
  const ExperimentConfig c = small_config();
  const RegressionStream a = gen_piecewise_regression(c, 5);
  const RegressionStream b = gen_piecewise_regression(c, 5);
  const RegressionStream other = gen_piecewise_regression(c, 6);
  EXPECT_EQ(a.labels, b.labels);
  EXPECT_NE(a.labels, other.labels);
}

TEST(Csv, EmptyIsHeaderOnly) {
  const std::string text = emit_csv_string({});
  EXPECT_NE(text.find(result_csv_header()), std::string::npos);
  EXPECT_TRUE(parse_csv_string(text).empty());
}

TEST(Csv, RoundTripAndStableReemission) {
  std::vector<ResultRow> rows;
  for (int i = 0; i < 5; ++i) {
    ResultRow r;
    r.scenario = "s";
    r.algorithm = i % 2 ? "ader" : "scream";
    r.seed = 4 - i;
    r.alpha = 0.1 * i;
    r.overall_loss = std::sqrt(2.0) * (i + 1);
    r.cumulative_loss = 1.0 / 3.0 + i;
    r.switching_cost = r.overall_loss - r.cumulative_loss;
    r.dynamic_regret = -0.25 * i;
    r.path_length = 1e-7 * i;
    rows.push_back(r);
  }
  const std::string text = emit_csv_string(rows);
  const std::vector<ResultRow> back = parse_csv_string(text);
  ASSERT_EQ(back.size(), rows.size());
  std::vector<ResultRow> sorted = rows;
  sort_rows(sorted);
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].algorithm, sorted[i].algorithm);
    EXPECT_EQ(back[i].seed, sorted[i].seed);
    EXPECT_NEAR(back[i].overall_loss, sorted[i].overall_loss, 1e-8 * std::abs(sorted[i].overall_loss));
  }
  EXPECT_EQ(emit_csv_string(back), text);
}

TEST(Csv, MalformedRowThrows) {
  EXPECT_ANY_THROW(parse_csv_string(result_csv_header() + "\nonly,three,fields\n"));
}

TEST(Benchmark, OverallIsCumulativePlusSwitching) {
  const BenchmarkResult r = run_oco_benchmark(small_config(), false);
  EXPECT_TRUE(r.failures.empty());
  EXPECT_EQ(r.rows.size(), 6u);
  for (const ResultRow& row : r.rows) {
    EXPECT_NEAR(row.overall_loss, row.cumulative_loss + row.switching_cost, 1e-9 * row.overall_loss);
    EXPECT_EQ(row.wall_time_ms, 0.0);
  }
  for (const std::string alg : {"ogd", "ader", "scream"}) {
    const SummaryRow* s = find_summary(r.summary, alg, 0.5);
    ASSERT_NE(s, nullptr);
    EXPECT_EQ(s->runs, 2);
  }
}

TEST(Benchmark, OutputsAreByteIdentical) {
  ExperimentConfig c = small_config();
  c.per_round = true;
  c.output_dir = temp_dir("a");
  run_oco_benchmark(c, true);
  ExperimentConfig d = c;
  d.output_dir = temp_dir("b");
  d.workers = 3;
  run_oco_benchmark(d, true);
  for (const char* file : {"results.csv", "summary.csv"}) {
    EXPECT_EQ(read_text_file(c.output_dir / file), read_text_file(d.output_dir / file)) << file;
  }
  std::filesystem::remove_all(c.output_dir);
  std::filesystem::remove_all(d.output_dir);
}

TEST(Benchmark, UnknownAlgorithmIsACellFailure) {
  ExperimentConfig c = small_config();
  c.algorithms = {"ogd", "bogus"};
  const BenchmarkResult r = run_oco_benchmark(c, false);
  ASSERT_FALSE(r.failures.empty());
  EXPECT_NE(r.failures.front().cell.find("bogus"), std::string::npos);
  EXPECT_EQ(r.rows.size(), 2u);
}

TEST(Config, ParsesKeysAndLists) {
  const ExperimentConfig c = parse_config(
      "# comment\nT = 500\nd=4\nseeds = 1, 2, 3\nalgorithms = scream,ogd\nalphas = 0.2\n"
      "preset = stable3x2\nH = 3\nT0_grid = 100,200\nper_round = false\n");
  EXPECT_EQ(c.T, 500);
  EXPECT_EQ(c.d, 4);
  EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{1, 2, 3}));
  EXPECT_EQ(c.algorithms, (std::vector<std::string>{"scream", "ogd"}));
  EXPECT_EQ(c.alphas, std::vector<double>{0.2});
  EXPECT_EQ(c.preset, "stable3x2");
  EXPECT_EQ(c.H, 3);
  EXPECT_EQ(c.T0_grid, (std::vector<long>{100, 200}));
  EXPECT_FALSE(c.per_round);
}

TEST(Config, UnknownKeyThrows) {
  EXPECT_THROW(parse_config("no_such_key = 1\n"), ContractViolation);
  EXPECT_ANY_THROW(parse_config("T = abc\n"));
}

TEST(Stats, MedianAndSlope) {
  EXPECT_EQ(median({3.0, 1.0, 2.0}), 2.0);
  EXPECT_EQ(median({4.0, 1.0, 2.0, 3.0}), 2.5);
  EXPECT_NEAR(loglog_slope({1.0, 10.0, 100.0}, {1.0, 0.1, 0.01}), -1.0, 1e-12);
}
