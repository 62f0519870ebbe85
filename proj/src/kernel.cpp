#include "mksvm/kernel.hpp"

#include <cmath>
#include <string>

namespace mksvm {

namespace {

void require_same_dim(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw InvalidInput("kernel: dimension mismatch (" + std::to_string(x.size()) + " vs " +
                       std::to_string(y.size()) + ")");
  }
}

double dot(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

// Summed squared differences; the expanded |x|^2 + |y|^2 - 2<x,y> form cancels badly.
double squared_distance(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    s += d * d;
  }
  return s;
}

double mixed_unchecked(std::span<const double> x, std::span<const double> y, const KernelParams& p) {
  const double s = std::tanh(p.sigmoid_ratio * dot(x, y) + p.coef0);
  const double g = std::exp(-p.gaussian_ratio * squared_distance(x, y));
  return (1.0 - p.mixed_ratio) * s + p.mixed_ratio * g;
}

}  // namespace

void KernelParams::validate() const {
  if (!(mixed_ratio >= 0.0 && mixed_ratio <= 1.0))
    throw InvalidInput("mixed_ratio must lie in [0, 1], got " + std::to_string(mixed_ratio));
  if (!(sigmoid_ratio > 0.0)) throw InvalidInput("sigmoid_ratio must be positive");
  if (!(gaussian_ratio > 0.0)) throw InvalidInput("gaussian_ratio must be positive");
  if (!(c > 0.0)) throw InvalidInput("C must be positive");
  if (!std::isfinite(coef0)) throw InvalidInput("coef0 must be finite");
}

double gaussian_kernel(std::span<const double> x, std::span<const double> y, double gaussian_ratio) {
  require_same_dim(x, y);
  return std::exp(-gaussian_ratio * squared_distance(x, y));
}

double sigmoid_kernel(std::span<const double> x, std::span<const double> y, double sigmoid_ratio,
                      double coef0) {
  require_same_dim(x, y);
  return std::tanh(sigmoid_ratio * dot(x, y) + coef0);
}

double mixed_kernel(std::span<const double> x, std::span<const double> y, const KernelParams& p) {
  require_same_dim(x, y);
  return mixed_unchecked(x, y, p);
}

Matrix gram_matrix(const Matrix& rows, const Matrix& cols, const KernelParams& p) {
  if (rows.cols() != cols.cols() && !rows.empty() && !cols.empty()) {
    throw InvalidInput("gram_matrix: feature dimension mismatch (" + std::to_string(rows.cols()) +
                       " vs " + std::to_string(cols.cols()) + ")");
  }
  Matrix k(rows.rows(), cols.rows());
  for (std::size_t i = 0; i < rows.rows(); ++i) {
    const auto xi = rows.row(i);
    for (std::size_t j = 0; j < cols.rows(); ++j) k(i, j) = mixed_unchecked(xi, cols.row(j), p);
  }
  return k;
}

}  // namespace mksvm
