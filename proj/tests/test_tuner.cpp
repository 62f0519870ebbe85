#include <gtest/gtest.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <set>
#include <sstream>
#include <thread>

#include "mksvm/error.hpp"
#include "mksvm/tuner.hpp"

using namespace mksvm;

namespace {

const ParameterSpace kLine({{"x", 0.0, 1.0, 0.01, Scale::linear}});

EvaluationRecord record(double x, double objective, std::size_t seq) {
  return {Configuration{{{"x", x}}}, objective, 0.0, seq, 0, false};
}

RandomForest forest_on(const std::vector<EvaluationRecord>& history, const ParameterSpace& space) {
  Matrix x;
  std::vector<double> y;
  for (const auto& r : history) {
    x.append_row(encode(r.config, space));
    y.push_back(surrogate_loss(r));
  }
  return fit(x, y);
}

}  // namespace

TEST(Lcb, Values) {
  EXPECT_EQ(lcb(0.5, 0.0, 3.0), 0.5);
  EXPECT_NEAR(lcb(0.5, 0.1, 1.96), 0.304, 1e-12);
  EXPECT_LT(lcb(0.2, 0.5, 0.0), lcb(0.3, 0.0, 0.0));
}

TEST(SurrogateLoss, FailuresCountAsWorst) {
  EXPECT_EQ(surrogate_loss(record(0.1, kFailureSentinel, 0)), 1.0);
  EXPECT_DOUBLE_EQ(surrogate_loss(record(0.1, 0.9, 0)), 0.1);
}

TEST(Propose, ExcludesEvaluatedAndPending) {
  const ParameterSpace tiny({{"x", 0.0, 1.0, 0.5, Scale::linear}});
  const std::vector<EvaluationRecord> history{record(0.5, 0.99, 0)};
  const auto f = forest_on(history, tiny);
  TunerSettings s;
  s.kappa = 0.0;
  s.n_candidates = 64;
  std::mt19937_64 rng(1);
  for (int i = 0; i < 20; ++i) {
    const auto p = propose(history, {Configuration{{{"x", 0.0}}}}, tiny, f, s, rng);
    EXPECT_FALSE(p.fallback);
    EXPECT_EQ(p.config.at("x"), 1.0);
  }
}

TEST(Propose, FallbackWhenPoolExhausted) {
  const ParameterSpace tiny({{"x", 0.0, 1.0, 1.0, Scale::linear}});
  const std::vector<EvaluationRecord> history{record(0.0, 0.5, 0), record(1.0, 0.6, 1)};
  const auto f = forest_on(history, tiny);
  std::mt19937_64 rng(2);
  const auto p = propose(history, {}, tiny, f, TunerSettings{}, rng);
  EXPECT_TRUE(p.fallback);
  EXPECT_TRUE(tiny.is_valid(p.config));
}

TEST(Propose, ZeroSpreadKeepsFirstDraw) {
  const RandomForest flat({RegressionTree::constant(0.4), RegressionTree::constant(0.4)}, 1);
  const std::vector<EvaluationRecord> history{record(0.3, 0.6, 0)};
  TunerSettings s;
  s.n_candidates = 16;
  std::mt19937_64 rng(5), replay(5);
  Configuration first;
  do first = sample(kLine, replay);
  while (first.at("x") == 0.3);
  EXPECT_EQ(propose(history, {}, kLine, flat, s, rng).config, first);
}

TEST(Propose, EqualMeansPreferLargerSpread) {
  using Node = RegressionTree::Node;
  // Both trees predict 0.5 for x <= 0.5; beyond that they disagree (0.3 vs 0.7).
  const RegressionTree a({Node{0, 0.5, 1, 2, 0}, Node{-1, 0, 0, 0, 0.5}, Node{-1, 0, 0, 0, 0.3}});
  const RegressionTree b({Node{0, 0.5, 1, 2, 0}, Node{-1, 0, 0, 0, 0.5}, Node{-1, 0, 0, 0, 0.7}});
  const RandomForest f({a, b}, 1);
  TunerSettings s;
  s.kappa = 1.0;
  s.n_candidates = 64;
  std::mt19937_64 rng(3);
  for (int i = 0; i < 10; ++i) EXPECT_GT(propose({}, {}, kLine, f, s, rng).config.at("x"), 0.5);
}

TEST(Propose, BeatsCandidateMedianOnQuadratic) {
  int wins = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);
    std::vector<EvaluationRecord> history;
    for (std::size_t i = 0; i < 32; ++i) {
      const auto c = sample(kLine, rng);
      const double d = c.at("x") - 0.6;
      history.push_back({c, 1.0 - d * d, 0.0, i, 0, false});
    }
    TunerSettings s;
    s.kappa = 1.96;
    s.n_candidates = 64;
    ForestParams fp;
    fp.seed = seed;
    Matrix x;
    std::vector<double> y;
    for (const auto& r : history) {
      x.append_row(encode(r.config, kLine));
      y.push_back(surrogate_loss(r));
    }
    const auto f = fit(x, y, fp);
    std::mt19937_64 replay = rng;
    std::vector<double> pool;
    for (std::size_t i = 0; i < s.n_candidates; ++i) {
      const double v = sample(kLine, replay).at("x");
      pool.push_back((v - 0.6) * (v - 0.6));
    }
    std::sort(pool.begin(), pool.end());
    const double median = 0.5 * (pool[31] + pool[32]);
    const double chosen = propose(history, {}, kLine, f, s, rng).config.at("x");
    wins += (chosen - 0.6) * (chosen - 0.6) <= median;
  }
  EXPECT_GE(wins, 15);
}

TEST(RunTuning, WarmupOnly) {
  TunerSettings s;
  s.budget = 8;
  s.n_initial = 8;
  s.seed = 4;
  const auto db = run_tuning(kLine, [](const Configuration& c) { return c.at("x"); }, s);
  ASSERT_EQ(db.size(), 8u);
  std::mt19937_64 rng(4);
  std::set<double> seen;
  for (std::size_t i = 0; i < 8; ++i) {
    EXPECT_EQ(db.records()[i].sequence_index, i);
    double x;
    do x = sample(kLine, rng).at("x");
    while (seen.count(x));
    seen.insert(x);
    EXPECT_EQ(db.records()[i].config.at("x"), x);
  }
}

TEST(RunTuning, FindsQuadraticOptimum) {
  TunerSettings s;
  s.budget = 60;
  s.seed = 3;
  const auto db = run_tuning(kLine, [](const Configuration& c) { return 1 - (c.at("x") - 0.37) * (c.at("x") - 0.37); }, s);
  EXPECT_EQ(db.size(), 60u);
  EXPECT_DOUBLE_EQ(best_record(db).config.at("x"), 0.37);
}

TEST(RunTuning, NoDuplicatesUnlessFallback) {
  TunerSettings s;
  s.budget = 60;
  s.seed = 6;
  const auto db = run_tuning(kLine, [](const Configuration& c) { return c.at("x"); }, s);
  std::set<double> seen;
  for (const auto& r : db.records()) {
    EXPECT_FALSE(r.fallback);
    EXPECT_TRUE(seen.insert(r.config.at("x")).second);
  }

  const ParameterSpace tiny({{"x", 0.0, 1.0, 0.5, Scale::linear}});
  s.budget = 6;
  s.n_initial = 1;
  const auto small = run_tuning(tiny, [](const Configuration& c) { return c.at("x"); }, s);
  EXPECT_EQ(small.size(), 6u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_FALSE(small.records()[i].fallback);
  for (std::size_t i = 3; i < 6; ++i) EXPECT_TRUE(small.records()[i].fallback);
}

TEST(RunTuning, FailuresBecomeSentinel) {
  TunerSettings s;
  s.budget = 20;
  s.n_initial = 5;
  const auto db = run_tuning(kLine,
                             [](const Configuration& c) -> double {
                               if (c.at("x") < 0.3) throw std::runtime_error("boom");
                               if (c.at("x") > 0.9) return std::nan("");
                               if (c.at("x") > 0.8) return 2.0;
                               return 0.5;
                             },
                             s);
  EXPECT_EQ(db.size(), 20u);
  for (const auto& r : db.records()) {
    const double x = r.config.at("x");
    if (x < 0.3 || x > 0.8) EXPECT_TRUE(r.failed());
    else EXPECT_EQ(r.objective, 0.5);
  }
}

TEST(RunTuning, WorkersAndProgress) {
  TunerSettings s;
  s.budget = 32;
  s.n_initial = 8;
  s.n_workers = 4;
  std::ostringstream progress;
  TuningHooks hooks;
  hooks.progress = &progress;
  const auto path = std::filesystem::temp_directory_path() / "mksvm_test_tuner_db.csv";
  hooks.database_path = path;
  const auto db = run_tuning(kLine,
                             [](const Configuration& c) {
                               std::this_thread::sleep_for(std::chrono::microseconds(
                                   static_cast<int>(std::fmod(c.at("x") * 7919, 3000))));
                               return c.at("x");
                             },
                             s, hooks);
  ASSERT_EQ(db.size(), 32u);
  std::set<std::size_t> seq;
  std::set<int> workers;
  for (const auto& r : db.records()) {
    seq.insert(r.sequence_index);
    workers.insert(r.worker_id);
    EXPECT_GE(r.elapsed_seconds, 0.0);
  }
  EXPECT_EQ(seq.size(), 32u);
  EXPECT_GE(workers.size(), 2u);

  std::istringstream lines(progress.str());
  std::string line;
  int count = 0;
  while (std::getline(lines, line)) {
    ++count;
    EXPECT_EQ(line.rfind("eval ", 0), 0u);
    EXPECT_NE(line.find("best "), std::string::npos);
  }
  EXPECT_EQ(count, 32);
  EXPECT_TRUE(PerformanceDatabase::load(path, kLine).same_contents(db));
  std::filesystem::remove(path);
}

TEST(RunTuning, SingleWorkerReproducible) {
  TunerSettings s;
  s.budget = 30;
  s.seed = 17;
  auto obj = [](const Configuration& c) { return std::sin(10 * c.at("x")) * 0.5 + 0.5; };
  const auto a = run_tuning(kLine, obj, s);
  const auto b = run_tuning(kLine, obj, s);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a.records()[i].config, b.records()[i].config);
    EXPECT_EQ(a.records()[i].objective, b.records()[i].objective);
  }
}

TEST(RunTuning, InvalidSettings) {
  TunerSettings s;
  s.budget = 4;
  s.n_initial = 8;
  EXPECT_THROW(run_tuning(kLine, [](const Configuration&) { return 0.5; }, s), InvalidInput);
  s = {};
  s.n_workers = 0;
  EXPECT_THROW(run_tuning(kLine, [](const Configuration&) { return 0.5; }, s), InvalidInput);
}

TEST(BestRecord, Selection) {
  PerformanceDatabase db(kLine);
  EXPECT_THROW(best_record(db), InvalidInput);
  db.append(record(0.1, 0.83, 0));
  EXPECT_EQ(best_record(db).sequence_index, 0u);
  db.append(record(0.2, 0.946, 1));
  EXPECT_EQ(best_record(db).objective, 0.946);

  PerformanceDatabase tie(kLine);
  tie.append(record(0.1, 0.5, 1));
  tie.append(record(0.2, 0.9, 3));
  tie.append(record(0.3, 0.9, 7));
  EXPECT_EQ(best_record(tie).sequence_index, 3u);
}
