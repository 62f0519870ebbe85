#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "mksvm/kernel.hpp"
#include "mksvm/matrix.hpp"

namespace mksvm {

/// Controls for the SMO loop.
struct TrainSettings {
  double kkt_tolerance = 1e-3;
  /// Consecutive full sweeps that find violators but make no progress
  /// before the solver gives up.
  int max_passes = 5;
  /// Successful two-variable updates allowed; unset means 1000 * n.
  std::optional<std::size_t> max_iterations;

  void validate() const;
};

/// Binary soft-margin classifier in dual form:
///   f(x) = sum_i dual_coefs[i] * K(support_vectors[i], x) + bias
/// with dual_coefs[i] = alpha_i * y_i. Label classes.first maps to -1,
/// classes.second to +1.
struct BinarySVMModel {
  Matrix support_vectors;
  std::vector<double> dual_coefs;
  /// Row of each support vector in the training matrix.
  std::vector<std::size_t> support_indices;
  double bias = 0.0;
  KernelParams kernel;
  std::pair<int, int> classes{-1, +1};
  bool converged = false;
  std::size_t iterations = 0;
};

struct PairwiseModel {
  int label_a;  // the -1 side
  int label_b;  // the +1 side
  BinarySVMModel model;
};

/// One-vs-one ensemble; pairwise models follow (i, j), i < j, over class_labels.
struct MulticlassSVMModel {
  std::vector<int> class_labels;
  std::vector<PairwiseModel> pairwise_models;
};

/// Trains with SMO. `labels` must hold only -1 and +1, both present.
/// Hitting the iteration cap is not an error: the model comes back with
/// converged == false.
BinarySVMModel train_binary(const Matrix& features, std::span<const int> labels, const KernelParams& p,
                            const TrainSettings& s = {});

double decision_function(const BinarySVMModel& m, std::span<const double> x);

/// Positive score picks classes.second; zero and negative pick classes.first.
int predict_binary(const BinarySVMModel& m, std::span<const double> x);

/// Value of the dual objective sum(alpha) - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij
/// at the model's dual variables.
double dual_objective(const BinarySVMModel& m);

/// One binary model per unordered class pair, each trained on that pair's
/// rows only. Class order is order of first appearance in `labels`.
/// With `parallel`, pairs are trained concurrently; results are identical.
MulticlassSVMModel train_ovo(const Matrix& features, std::span<const int> labels, const KernelParams& p,
                             const TrainSettings& s = {}, bool parallel = false);

/// Majority vote; ties go to the earliest class in class_labels.
int predict(const MulticlassSVMModel& m, std::span<const double> x);

std::vector<int> predict_all(const MulticlassSVMModel& m, const Matrix& features);

double accuracy(const MulticlassSVMModel& m, const Matrix& features, std::span<const int> labels);

/// Unweighted mean of per-class recall over the model's classes. Every
/// class must occur in `labels`.
double class_averaged_accuracy(const MulticlassSVMModel& m, const Matrix& features,
                               std::span<const int> labels);

}  // namespace mksvm
