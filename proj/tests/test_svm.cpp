#include <gtest/gtest.h>

#include <random>

#include "mksvm/dataset.hpp"
#include "mksvm/error.hpp"
#include "mksvm/svm.hpp"
#include "oracles.hpp"

using namespace mksvm;

namespace {

KernelParams gaussian(double gamma, double c) {
  KernelParams p;
  p.mixed_ratio = 1.0;
  p.gaussian_ratio = gamma;
  p.c = c;
  return p;
}

TrainSettings tight() {
  TrainSettings s;
  s.kkt_tolerance = 1e-6;
  return s;
}

double sum(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s;
}

}  // namespace

TEST(TrainBinary, TwoPoints) {
  const auto x = Matrix::from_rows({{0.0}, {1.0}});
  const std::vector<int> y{-1, 1};
  const auto p = gaussian(1.0, 10.0);
  const auto m = train_binary(x, y, p, tight());
  EXPECT_TRUE(m.converged);
  EXPECT_EQ(m.dual_coefs.size(), 2u);
  EXPECT_NEAR(sum(m.dual_coefs), 0.0, 1e-6);
  EXPECT_LT(decision_function(m, x.row(0)), 0.0);
  EXPECT_GT(decision_function(m, x.row(1)), 0.0);

  const auto k = oracle::kernel_matrix(x, p);
  EXPECT_NEAR(dual_objective(m), oracle::exact_dual_max(k, y, p.c).value, 1e-6);
  EXPECT_GE(dual_objective(m), oracle::grid_dual_max(k, y, p.c, 2000) - 1e-6);
}

TEST(TrainBinary, Xor) {
  const auto x = Matrix::from_rows({{0, 0}, {1, 1}, {0, 1}, {1, 0}});
  const std::vector<int> y{-1, -1, 1, 1};
  const auto p = gaussian(1.0, 100.0);
  const auto m = train_binary(x, y, p, tight());
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(predict_binary(m, x.row(i)), y[i]);
  const auto k = oracle::kernel_matrix(x, p);
  EXPECT_NEAR(dual_objective(m), oracle::exact_dual_max(k, y, p.c).value, 1e-4);
  EXPECT_GE(dual_objective(m), oracle::grid_dual_max(k, y, p.c) - 1e-4);
}

TEST(TrainBinary, DuplicatedPointsWithOppositeLabels) {
  const auto x = Matrix::from_rows({{0.5, 0.5}, {0.5, 0.5}});
  const std::vector<int> y{-1, 1};
  const auto m = train_binary(x, y, gaussian(1.0, 1.0));
  EXPECT_TRUE(m.converged);
  const auto a = oracle::alphas_of(m, 2);
  for (double v : a) EXPECT_TRUE(v == 0.0 || v == 1.0);
  int correct = 0;
  for (std::size_t i = 0; i < 2; ++i) correct += predict_binary(m, x.row(i)) == y[i];
  EXPECT_EQ(correct, 1);
}

TEST(TrainBinary, Invariants) {
  const Dataset d = gen_rings(80, 0.1, 2);
  std::vector<int> y;
  for (int l : d.labels) y.push_back(l == 0 ? -1 : 1);
  KernelParams p;
  p.coef0 = -0.5;
  p.c = 3.0;
  const auto m = train_binary(d.features, y, p);
  EXPECT_LE(m.support_vectors.rows(), d.size());
  double s = 0;
  for (std::size_t i = 0; i < m.dual_coefs.size(); ++i) {
    EXPECT_GT(std::abs(m.dual_coefs[i]), 0.0);
    EXPECT_LE(std::abs(m.dual_coefs[i]), p.c);
    s += m.dual_coefs[i];
    const auto row = d.features.row(m.support_indices[i]);
    for (std::size_t j = 0; j < 2; ++j) EXPECT_EQ(m.support_vectors(i, j), row[j]);
  }
  EXPECT_NEAR(s, 0.0, 1e-6);
  if (m.converged) EXPECT_LE(oracle::kkt_violation(m, d.features, y), 1e-3 + 1e-12);
}

TEST(TrainBinary, Errors) {
  const auto x = Matrix::from_rows({{0.0}, {1.0}});
  EXPECT_THROW(train_binary(x, std::vector<int>{1, 1}, KernelParams{}), InvalidInput);
  EXPECT_THROW(train_binary(x, std::vector<int>{0, 1}, KernelParams{}), InvalidInput);
  EXPECT_THROW(train_binary(x, std::vector<int>{1}, KernelParams{}), InvalidInput);
  TrainSettings bad;
  bad.kkt_tolerance = 0;
  EXPECT_THROW(train_binary(x, std::vector<int>{-1, 1}, KernelParams{}, bad), InvalidInput);
}

TEST(TrainBinary, IterationCapFlagsNonConverged) {
  const Dataset d = gen_rings(100, 0.2, 3);
  std::vector<int> y;
  for (int l : d.labels) y.push_back(l == 0 ? -1 : 1);
  TrainSettings s;
  s.max_iterations = 2;
  const auto m = train_binary(d.features, y, gaussian(1.0, 10.0), s);
  EXPECT_FALSE(m.converged);
  EXPECT_EQ(m.iterations, 2u);
}

TEST(TrainBinary, Deterministic) {
  const Dataset d = gen_rings(60, 0.1, 5);
  std::vector<int> y;
  for (int l : d.labels) y.push_back(l == 0 ? -1 : 1);
  KernelParams p;
  const auto a = train_binary(d.features, y, p);
  const auto b = train_binary(d.features, y, p);
  EXPECT_EQ(a.dual_coefs, b.dual_coefs);
  EXPECT_EQ(a.bias, b.bias);
  EXPECT_EQ(a.support_indices, b.support_indices);
}

TEST(TrainBinary, MarginViolationsShrinkWithC) {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> g(0, 1);
  Matrix x(60, 2);
  std::vector<int> y(60);
  for (std::size_t i = 0; i < 60; ++i) {
    y[i] = i < 30 ? -1 : 1;
    x(i, 0) = g(rng) + (y[i] > 0 ? 1.0 : -1.0);
    x(i, 1) = g(rng);
  }
  std::size_t prev = 61;
  for (double c : {0.1, 1.0, 10.0, 100.0}) {
    const auto m = train_binary(x, y, gaussian(0.5, c), tight());
    std::size_t violations = 0;
    for (std::size_t i = 0; i < 60; ++i) violations += y[i] * decision_function(m, x.row(i)) < 1.0;
    EXPECT_LE(violations, prev) << "C=" << c;
    prev = violations;
  }
}

// Sigmoid-heavy Gram matrices make the dual nonconvex; SMO only promises a
// feasible KKT point, never more than the global maximum.
TEST(TrainBinary, IndefiniteKernelsReachKktPoint) {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> g(0, 1);
  std::uniform_real_distribution<double> u(0, 1);
  for (int t = 0; t < 40; ++t) {
    const std::size_t n = 3 + t % 4;
    Matrix x(n, 2);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x(i, 0) = g(rng);
      x(i, 1) = g(rng);
      y[i] = i % 2 ? 1 : -1;
    }
    KernelParams p;
    p.mixed_ratio = 0.3 * u(rng);
    p.sigmoid_ratio = 0.5 + u(rng);
    p.coef0 = -1.0 + u(rng);
    p.c = 1.0 + 9 * u(rng);
    const auto m = train_binary(x, y, p, tight());
    const auto k = oracle::kernel_matrix(x, p);
    const auto a = oracle::alphas_of(m, n);
    double balance = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_GE(a[i], 0.0);
      EXPECT_LE(a[i], p.c);
      balance += a[i] * y[i];
    }
    EXPECT_NEAR(balance, 0.0, 1e-9) << "trial " << t;
    EXPECT_LE(dual_objective(m), oracle::exact_dual_max(k, y, p.c).value + 1e-9) << "trial " << t;
    EXPECT_NEAR(dual_objective(m), oracle::dual_value(k, y, Eigen::Map<const Eigen::VectorXd>(a.data(), static_cast<Eigen::Index>(n))), 1e-9) << "trial " << t;
    EXPECT_LE(oracle::kkt_violation(m, x, y), 1e-3) << "trial " << t;
  }
}

TEST(DecisionFunction, EmptyModelReturnsBias) {
  BinarySVMModel m;
  m.bias = 0.25;
  EXPECT_EQ(decision_function(m, std::vector<double>{1, 2, 3}), 0.25);
}

TEST(DecisionFunction, BatchAgreesWithScalarLoop) {
  const Dataset d = gen_rings(40, 0.1, 6);
  std::vector<int> y;
  for (int l : d.labels) y.push_back(l == 0 ? -1 : 1);
  const auto m = train_binary(d.features, y, KernelParams{});
  const auto k = gram_matrix(d.features, m.support_vectors, m.kernel);
  for (std::size_t i = 0; i < d.size(); ++i) {
    double f = m.bias;
    for (std::size_t s = 0; s < m.dual_coefs.size(); ++s) f += m.dual_coefs[s] * k(i, s);
    EXPECT_NEAR(f, decision_function(m, d.features.row(i)), 1e-12);
  }
  EXPECT_THROW(decision_function(m, std::vector<double>{1.0}), InvalidInput);
}

TEST(Ovo, PairCounts) {
  for (std::size_t k : {2u, 3u, 6u}) {
    const Dataset d = gen_blobs(k, 10, 2, 6.0, 1.0, 1);
    const auto m = train_ovo(d.features, d.labels, gaussian(1.0, 10.0));
    EXPECT_EQ(m.pairwise_models.size(), k * (k - 1) / 2);
    EXPECT_EQ(m.class_labels.size(), k);
  }
  const auto x = Matrix::from_rows({{0.0}, {1.0}});
  EXPECT_THROW(train_ovo(x, std::vector<int>{3, 3}, KernelParams{}), InvalidInput);
}

TEST(Ovo, BinaryCaseMatchesBinaryModel) {
  const Dataset d = gen_blobs(2, 20, 2, 3.0, 1.0, 4);
  const auto m = train_ovo(d.features, d.labels, gaussian(0.5, 1.0));
  ASSERT_EQ(m.pairwise_models.size(), 1u);
  for (std::size_t i = 0; i < d.size(); ++i)
    EXPECT_EQ(predict(m, d.features.row(i)), predict_binary(m.pairwise_models[0].model, d.features.row(i)));
}

TEST(Ovo, SeparatedCloudsTrainingAccuracy) {
  const Dataset d = gen_blobs(3, 30, 2, 10.0, 1.0, 7);
  const auto m = train_ovo(d.features, d.labels, gaussian(1.0, 10.0));
  EXPECT_GE(accuracy(m, d.features, d.labels), 0.95);
}

TEST(Ovo, ParallelEqualsSequential) {
  const Dataset d = gen_blobs(4, 15, 3, 4.0, 1.0, 8);
  const auto a = train_ovo(d.features, d.labels, KernelParams{}, {}, false);
  const auto b = train_ovo(d.features, d.labels, KernelParams{}, {}, true);
  ASSERT_EQ(a.pairwise_models.size(), b.pairwise_models.size());
  for (std::size_t i = 0; i < a.pairwise_models.size(); ++i) {
    EXPECT_EQ(a.pairwise_models[i].model.dual_coefs, b.pairwise_models[i].model.dual_coefs);
    EXPECT_EQ(a.pairwise_models[i].model.bias, b.pairwise_models[i].model.bias);
  }
}

namespace {

// Binary model that returns a fixed score everywhere.
BinarySVMModel constant_model(double score, int a, int b) {
  BinarySVMModel m;
  m.bias = score;
  m.classes = {a, b};
  return m;
}

}  // namespace

TEST(Predict, UnanimityAndTieBreak) {
  MulticlassSVMModel m;
  m.class_labels = {5, 7, 9};
  // Unanimous for 7.
  m.pairwise_models = {{5, 7, constant_model(1, 5, 7)}, {5, 9, constant_model(-1, 5, 9)},
                       {7, 9, constant_model(-1, 7, 9)}};
  const std::vector<double> x{0.0};
  EXPECT_EQ(predict(m, x), 7);
  // One vote each: 5 beats 7 is false (7), 5 vs 9 gives 5, 7 vs 9 gives 9.
  m.pairwise_models = {{5, 7, constant_model(1, 5, 7)}, {5, 9, constant_model(-1, 5, 9)},
                       {7, 9, constant_model(1, 7, 9)}};
  EXPECT_EQ(predict(m, x), 5);
}

TEST(Accuracy, HandBuiltModel) {
  // Score is x - 0.5; labels chosen so that 6 of 10 agree.
  BinarySVMModel b;
  b.classes = {0, 1};
  b.kernel.mixed_ratio = 0.0;
  b.kernel.sigmoid_ratio = 1.0;
  b.kernel.coef0 = 0.0;
  b.support_vectors = Matrix::from_rows({{1.0}});
  b.dual_coefs = {1.0};
  b.bias = 0.0;
  MulticlassSVMModel m{{0, 1}, {{0, 1, b}}};
  Matrix x(10, 1);
  std::vector<int> y(10);
  int expect_correct = 0;
  for (std::size_t i = 0; i < 10; ++i) {
    x(i, 0) = static_cast<double>(i) - 4.5;  // tanh(x) > 0 iff x > 0
    const int truth = x(i, 0) > 0 ? 1 : 0;
    y[i] = i < 6 ? truth : 1 - truth;
    expect_correct += i < 6;
  }
  EXPECT_EQ(expect_correct, 6);
  EXPECT_DOUBLE_EQ(accuracy(m, x, y), 0.6);
  std::vector<int> flipped(y);
  for (auto& v : flipped) v = 1 - v;
  EXPECT_DOUBLE_EQ(accuracy(m, x, flipped), 1.0 - 0.6);
  EXPECT_THROW(accuracy(m, Matrix(0, 1), std::vector<int>{}), InvalidInput);
}

TEST(Accuracy, ClassAveraged) {
  MulticlassSVMModel m{{0, 1}, {{0, 1, constant_model(1, 0, 1)}}};  // always predicts 1
  const Matrix x(3, 1);
  // Class 1 recall 1.0; class 0 recall 0/1.
  EXPECT_DOUBLE_EQ(class_averaged_accuracy(m, x, std::vector<int>{0, 1, 1}), 0.5);

  // Recalls 1.0 and 0.5 give 0.75.
  BinarySVMModel b;
  b.classes = {0, 1};
  b.kernel.mixed_ratio = 0.0;
  b.support_vectors = Matrix::from_rows({{1.0}});
  b.dual_coefs = {1.0};
  MulticlassSVMModel s{{0, 1}, {{0, 1, b}}};
  const auto pts = Matrix::from_rows({{1.0}, {2.0}, {-1.0}, {1.0}});
  const std::vector<int> labels{1, 1, 0, 0};
  EXPECT_DOUBLE_EQ(class_averaged_accuracy(s, pts, labels), 0.75);

  // Balanced classes: equal to overall accuracy.
  const auto bal = Matrix::from_rows({{1.0}, {-2.0}, {-1.0}, {1.0}});
  EXPECT_DOUBLE_EQ(class_averaged_accuracy(s, bal, labels), accuracy(s, bal, labels));

  EXPECT_THROW(class_averaged_accuracy(m, Matrix(2, 1), std::vector<int>{1, 1}), InvalidInput);
}

TEST(Accuracy, SixClassMatchesConfusionOracle) {
  const Dataset d = gen_blobs(6, 25, 2, 2.0, 1.0, 13);
  KernelParams p;
  p.mixed_ratio = 1.0;
  p.c = 0.5;
  const auto m = train_ovo(d.features, d.labels, p);
  const auto pred = predict_all(m, d.features);
  EXPECT_NEAR(class_averaged_accuracy(m, d.features, d.labels),
              oracle::confusion_class_average(d.labels, pred, m.class_labels), 1e-12);
}
