#pragma once

#include <span>

#include "mksvm/matrix.hpp"

namespace mksvm {

/// The five tunables of a mixed-kernel SVM. `c` is the soft-margin
/// regularization weight; it travels with the kernel because every
/// training call needs both.
struct KernelParams {
  double mixed_ratio = 0.5;     // weight of the Gaussian component
  double sigmoid_ratio = 1.0;   // gamma of tanh(gamma <x,y> + coef0)
  double gaussian_ratio = 1.0;  // gamma of exp(-gamma |x-y|^2)
  double coef0 = 0.0;
  double c = 1.0;

  /// Throws InvalidInput unless 0 <= mixed_ratio <= 1 and the gammas and c are positive.
  void validate() const;

  friend bool operator==(const KernelParams&, const KernelParams&) = default;
};

double gaussian_kernel(std::span<const double> x, std::span<const double> y, double gaussian_ratio);

double sigmoid_kernel(std::span<const double> x, std::span<const double> y, double sigmoid_ratio,
                      double coef0);

/// (1 - mixed_ratio) * sigmoid + mixed_ratio * gaussian.
double mixed_kernel(std::span<const double> x, std::span<const double> y, const KernelParams& p);

/// Entry (i, j) is mixed_kernel(rows[i], cols[j], p).
Matrix gram_matrix(const Matrix& rows, const Matrix& cols, const KernelParams& p);

}  // namespace mksvm
