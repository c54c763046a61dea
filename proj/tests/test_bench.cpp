#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "qopt/bench.hpp"
#include "qopt/instances.hpp"
#include "qopt/tuner.hpp"

using namespace qopt;

namespace {

const std::string kData = QOPT_DATA_DIR;
const std::string kTests = QOPT_TEST_DIR;

ProblemInstance catalog_instance(const std::string& name) {
  static const auto catalog = read_catalog(kData + "/catalog.txt");
  return load_instance(find_descriptor(catalog, name));
}

// Two-sided p-value by Simpson integration of the Student-t density.
double t_pvalue_oracle(double t, double df) {
  const double c = std::exp(std::lgamma((df + 1) / 2) - std::lgamma(df / 2)) / std::sqrt(df * M_PI);
  auto pdf = [&](double x) { return c * std::pow(1 + x * x / df, -(df + 1) / 2); };
  const int steps = 200000;
  const double a = 0, b = std::abs(t), h = (b - a) / steps;
  double s = pdf(a) + pdf(b);
  for (int i = 1; i < steps; ++i) s += pdf(a + i * h) * (i % 2 ? 4 : 2);
  return 1.0 - 2.0 * s * h / 3;
}

SolverSpec ga_spec(const std::string& name) {
  SolverSpec s;
  s.kind = SolverKind::ga;
  s.ga = load_paper_params(name).ga;
  return s;
}

SolverSpec da_spec() {
  SolverSpec s;
  s.kind = SolverKind::da;
  s.mkp_mode = MkpMode::inequality;
  return s;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TrialSet synthetic(const std::string& name, SolverKind kind, std::vector<double> values) {
  TrialSet s;
  s.instance = name;
  s.family = Family::qap;
  s.solver = kind;
  s.time_limit = 1;
  s.optimum = 10;
  for (double v : values) s.trials.push_back({v, true, 0.1, 1.0});
  return s;
}

}  // namespace

TEST(Summarize, Examples) {
  const std::vector<double> a{1, 2, 3};
  EXPECT_DOUBLE_EQ(summarize(a).mean, 2.0);
  EXPECT_DOUBLE_EQ(summarize(a).stddev, 1.0);
  const std::vector<double> c{4, 4, 4, 4};
  EXPECT_EQ(summarize(c).stddev, 0.0);
  const std::vector<double> one{7};
  EXPECT_EQ(summarize(one).stddev, 0.0);
  EXPECT_EQ(summarize(one).count, 1u);
  EXPECT_THROW(summarize(std::vector<double>{}), SizeError);
}

TEST(TTest, IdenticalAndShuffledSamples) {
  const std::vector<double> a{1, 2, 3, 4}, b{3, 1, 4, 2};
  for (const auto* other : {&a, &b}) {
    const auto c = t_test(a, *other);
    EXPECT_EQ(c.t, 0.0);
    EXPECT_EQ(c.p, 1.0);
    EXPECT_FALSE(c.significant);
  }
}

TEST(TTest, SeparatedPair) {
  const std::vector<double> a{10, 11, 12}, b{20, 21, 22};
  const auto c = t_test(a, b);
  EXPECT_NEAR(c.t, -10.0 / std::sqrt(2.0 / 3.0), 1e-12);
  EXPECT_NEAR(c.df, 4.0, 1e-12);
  EXPECT_LT(c.p, 0.01);
  EXPECT_NEAR(c.p, t_pvalue_oracle(c.t, c.df), 1e-7);
  EXPECT_TRUE(c.significant);
}

TEST(TTest, MatchesOracleOnUnequalVariances) {
  Rng rng(3);
  for (int k = 0; k < 20; ++k) {
    std::vector<double> a, b;
    for (int i = 0; i < 5 + k % 7; ++i) a.push_back(rng.uniform() * 10);
    for (int i = 0; i < 4 + k % 5; ++i) b.push_back(rng.uniform() * 30 + 2);
    const auto c = t_test(a, b);
    const auto sa = summarize(a), sb = summarize(b);
    const double va = sa.stddev * sa.stddev / a.size(), vb = sb.stddev * sb.stddev / b.size();
    EXPECT_NEAR(c.t, (sa.mean - sb.mean) / std::sqrt(va + vb), 1e-9);
    EXPECT_NEAR(c.df, (va + vb) * (va + vb) / (va * va / (a.size() - 1) + vb * vb / (b.size() - 1)), 1e-9);
    EXPECT_NEAR(c.p, t_pvalue_oracle(c.t, c.df), 1e-6);
  }
}

TEST(TTest, SymmetryAndScale) {
  const std::vector<double> a{3, 5, 4, 8}, b{6, 9, 7, 12, 10};
  const auto ab = t_test(a, b), ba = t_test(b, a);
  EXPECT_DOUBLE_EQ(ab.t, -ba.t);
  EXPECT_DOUBLE_EQ(ab.p, ba.p);
  std::vector<double> a3, b3;
  for (double x : a) a3.push_back(3.5 * x);
  for (double x : b) b3.push_back(3.5 * x);
  EXPECT_NEAR(t_test(a3, b3).t, ab.t, 1e-12);
}

TEST(TTest, DegenerateSides) {
  const std::vector<double> a{5, 5, 5}, b{5, 5}, c{6, 6, 6};
  const auto same = t_test(a, b);
  EXPECT_TRUE(same.degenerate);
  EXPECT_EQ(same.t, 0.0);
  EXPECT_EQ(same.p, 1.0);
  const auto diff = t_test(a, c);
  EXPECT_TRUE(diff.degenerate);
  EXPECT_TRUE(std::isinf(diff.t));
  EXPECT_LT(diff.t, 0.0);
  EXPECT_TRUE(diff.significant);
  EXPECT_THROW(t_test(std::vector<double>{1}, a), SizeError);
}

TEST(RunTrials, SingleRepOnEasyInstance) {
  const auto p = catalog_instance("had12");
  auto spec = ga_spec("had12");
  spec.stop_at_optimum = true;
  const auto set = run_trials(p, spec, 1.0, 1, 3);
  ASSERT_EQ(set.reps(), 1u);
  EXPECT_LT(set.trials[0].time_to_best, 1.0);
  EXPECT_EQ(set.trials[0].value, 1652);
  EXPECT_THROW(run_trials(p, spec, 1.0, 0, 3), ConfigError);
}

TEST(RunTrials, MkpValuesArePositiveAndFeasible) {
  const auto p = catalog_instance("weing1");
  for (const auto& spec : {ga_spec("weing1"), da_spec()}) {
    const auto set = run_trials(p, spec, 0.2, 3, 11);
    for (const auto& t : set.trials) {
      ASSERT_TRUE(t.feasible);
      EXPECT_GT(*t.value, 0.0);
      EXPECT_LE(*t.value, 141278.0);
    }
  }
}

TEST(RunTrials, SameMasterSeedSameTrialSet) {
  const auto p = catalog_instance("weing1");
  auto spec = da_spec();
  spec.da.iteration_limit = 3000;
  spec.da.num_run = 2;
  const auto a = run_trials(p, spec, 30, 4, 99);
  const auto b = run_trials(p, spec, 30, 4, 99);
  EXPECT_TRUE(a.same_outcome(b));
  auto ga = ga_spec("had12");
  ga.ga.generation_limit = 100;
  EXPECT_TRUE(run_trials(catalog_instance("had12"), ga, 30, 3, 5)
                  .same_outcome(run_trials(catalog_instance("had12"), ga, 30, 3, 5)));
}

TEST(RunTrials, RespectsTimeLimit) {
  for (const char* name : {"had12", "gr17"}) {
    const auto p = catalog_instance(name);
    for (const auto& spec : {ga_spec(name), da_spec()}) {
      const auto set = run_trials(p, spec, 0.3, 2, 1);
      for (const auto& t : set.trials) EXPECT_LE(t.elapsed, 0.33) << name << ' ' << to_string(spec.kind);
    }
  }
}

TEST(RunTrials, SolverErrorsNameTheTrial) {
  auto spec = ga_spec("had12");
  spec.ga.crossover = Crossover::uniform;
  try {
    run_trials(catalog_instance("had12"), spec, 0.1, 2, 1);
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_EQ(std::string(e.what()).rfind("trial 0:", 0), 0u) << e.what();
  }
}

TEST(Report, EmptyGridIsHeaderOnly) {
  EXPECT_EQ(report_csv({}), std::string(kCsvHeader) + "\n");
}

TEST(Report, TwoSolversOneLimit) {
  const std::vector<TrialSet> sets{synthetic("x", SolverKind::da, {10, 10, 11}),
                                   synthetic("x", SolverKind::ga, {14, 15, 16})};
  const auto rows = build_report(sets);
  ASSERT_EQ(rows.size(), 2u);
  for (const auto& r : rows) {
    ASSERT_TRUE(r.t_stat);
    ASSERT_TRUE(r.p_value);
  }
  EXPECT_TRUE(rows[0].significant);
  EXPECT_FALSE(rows[1].significant);
  EXPECT_FALSE(rows[0].reached_optimum);
  std::istringstream csv(report_csv(sets));
  std::string line;
  int lines = 0;
  while (std::getline(csv, line)) ++lines;
  EXPECT_EQ(lines, 3);
}

TEST(Report, OptimumAndInfeasibleCells) {
  auto none = synthetic("y", SolverKind::ga, {});
  none.trials.push_back({std::nullopt, false, 0, 1});
  const std::vector<TrialSet> sets{synthetic("y", SolverKind::da, {10, 10}), none};
  const auto text = report_text(sets);
  EXPECT_NE(text.find("**10** (0)"), std::string::npos) << text;
  EXPECT_NE(text.find("infeasible"), std::string::npos) << text;
  const auto rows = build_report(sets);
  EXPECT_TRUE(rows[0].reached_optimum);
  EXPECT_EQ(rows[1].feasible, 0u);
  EXPECT_FALSE(rows[1].summary);
}

// Snapshot of a seeded mini-run whose trials all stop at the optimum.
TEST(Report, GoldenMiniRun) {
  std::vector<TrialSet> sets;
  auto ga = ga_spec("weing1");
  ga.stop_at_optimum = true;
  auto da = da_spec();
  da.stop_at_optimum = true;
  sets.push_back(run_trials(catalog_instance("weing1"), da, 2.0, 3, 2024));
  sets.push_back(run_trials(catalog_instance("weing1"), ga, 2.0, 3, 2024));
  auto had = ga_spec("had12");
  had.stop_at_optimum = true;
  sets.push_back(run_trials(catalog_instance("had12"), had, 2.0, 3, 2024));
  sets.push_back(synthetic("toy", SolverKind::da, {10, 11, 10, 12}));
  sets.push_back(synthetic("toy", SolverKind::ga, {19, 21, 20, 20}));
  EXPECT_EQ(report_csv(sets), slurp(kTests + "/golden/mini_report.csv"));
  EXPECT_EQ(report_text(sets), slurp(kTests + "/golden/mini_report.txt"));
}
