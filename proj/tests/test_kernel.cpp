#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "mksvm/error.hpp"
#include "mksvm/kernel.hpp"

using namespace mksvm;

TEST(Kernel, GaussianValues) {
  const std::vector<double> a{3, 7};
  EXPECT_EQ(gaussian_kernel(a, a, 2.5), 1.0);
  EXPECT_NEAR(gaussian_kernel(std::vector<double>{0, 0}, std::vector<double>{1, 0}, 1.0), 0.3678794412, 1e-10);
  EXPECT_NEAR(gaussian_kernel(std::vector<double>{1, 2}, std::vector<double>{4, 6}, 0.1), 0.0820849986, 1e-10);
}

TEST(Kernel, SigmoidValues) {
  EXPECT_EQ(sigmoid_kernel(std::vector<double>{1, 1}, std::vector<double>{1, 1}, 0.5, -1.0), 0.0);
  EXPECT_NEAR(sigmoid_kernel(std::vector<double>{2}, std::vector<double>{3}, 0.1, 0.5), 0.8004990218, 1e-10);
  EXPECT_EQ(sigmoid_kernel(std::vector<double>{1, 0}, std::vector<double>{0, 1}, 5.0, 0.0), 0.0);
}

TEST(Kernel, MixedEndpointsAndBlend) {
  const std::vector<double> x{0.3, -1.2}, y{2.0, 0.5};
  KernelParams p;
  p.sigmoid_ratio = 0.4;
  p.gaussian_ratio = 0.8;
  p.coef0 = 0.3;
  p.mixed_ratio = 1.0;
  EXPECT_EQ(mixed_kernel(x, y, p), gaussian_kernel(x, y, 0.8));
  p.mixed_ratio = 0.0;
  EXPECT_EQ(mixed_kernel(x, y, p), sigmoid_kernel(x, y, 0.4, 0.3));

  KernelParams h;
  h.mixed_ratio = 0.5;
  EXPECT_NEAR(mixed_kernel(std::vector<double>{0, 0}, std::vector<double>{1, 0}, h), 0.1839397206, 1e-10);
}

TEST(Kernel, DimensionMismatchThrows) {
  const std::vector<double> a{1, 2}, b{1};
  EXPECT_THROW(gaussian_kernel(a, b, 1.0), InvalidInput);
  EXPECT_THROW(sigmoid_kernel(a, b, 1.0, 0.0), InvalidInput);
  EXPECT_THROW(mixed_kernel(a, b, KernelParams{}), InvalidInput);
  EXPECT_THROW(gram_matrix(Matrix(2, 2), Matrix(2, 3), KernelParams{}), InvalidInput);
}

TEST(Kernel, ParamsValidate) {
  KernelParams p;
  EXPECT_NO_THROW(p.validate());
  p.mixed_ratio = 1.5;
  EXPECT_THROW(p.validate(), InvalidInput);
  p = {};
  p.gaussian_ratio = 0.0;
  EXPECT_THROW(p.validate(), InvalidInput);
  p = {};
  p.c = -1.0;
  EXPECT_THROW(p.validate(), InvalidInput);
}

TEST(Kernel, SymmetryAndBoundedness) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(0, 2);
  std::uniform_real_distribution<double> u(0, 1);
  for (int t = 0; t < 500; ++t) {
    std::vector<double> x{g(rng), g(rng), g(rng)}, y{g(rng), g(rng), g(rng)};
    KernelParams p;
    p.mixed_ratio = u(rng);
    p.sigmoid_ratio = 0.01 + u(rng);
    p.gaussian_ratio = 0.01 + u(rng);
    p.coef0 = 4 * u(rng) - 2;
    EXPECT_EQ(mixed_kernel(x, y, p), mixed_kernel(y, x, p));
    EXPECT_LE(std::abs(mixed_kernel(x, y, p)), 1.0);
  }
}

TEST(Gram, SinglePointAndSymmetry) {
  KernelParams g1;
  g1.mixed_ratio = 1.0;
  const auto one = Matrix::from_rows({{0.4, 0.1}});
  EXPECT_EQ(gram_matrix(one, one, g1), Matrix::from_rows({{1.0}}));

  const auto pts = Matrix::from_rows({{0.1, 0.2}, {1.5, -0.3}, {-2, 0.7}, {0.3, 0.3}});
  KernelParams p;
  p.coef0 = -0.4;
  const auto k = gram_matrix(pts, pts, p);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(k(i, j), k(j, i));
}

TEST(Gram, MatchesScalarCalls) {
  const auto a = Matrix::from_rows({{0.1, 0.2}, {1.5, -0.3}, {-2, 0.7}});
  const auto b = Matrix::from_rows({{0.0, 1.0}, {2.0, 2.0}});
  KernelParams p;
  p.mixed_ratio = 1.0;
  const auto k = gram_matrix(a, b, p);
  ASSERT_EQ(k.rows(), 3u);
  ASSERT_EQ(k.cols(), 2u);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 2; ++j) EXPECT_EQ(k(i, j), mixed_kernel(a.row(i), b.row(j), p));
}

TEST(Gram, GaussianIsPositiveSemidefinite) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g(0, 1);
  for (int trial = 0; trial < 5; ++trial) {
    Matrix pts(50, 4);
    for (std::size_t i = 0; i < 50; ++i)
      for (std::size_t j = 0; j < 4; ++j) pts(i, j) = g(rng);
    KernelParams p;
    p.mixed_ratio = 1.0;
    p.gaussian_ratio = 0.2 + trial;
    const auto k = gram_matrix(pts, pts, p);
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> e(k.data().data(), 50,
                                                                                               50);
    const Eigen::MatrixXd sym = e;
    EXPECT_GE(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(sym).eigenvalues().minCoeff(), -1e-8);
  }
}
