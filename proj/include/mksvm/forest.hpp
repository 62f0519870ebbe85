#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "mksvm/matrix.hpp"

namespace mksvm {

struct ForestParams {
  std::size_t n_trees = 32;
  std::size_t max_depth = 16;
  std::size_t min_samples_leaf = 1;
  /// Fraction of features examined per node; the subset size is ceil(fraction * d).
  double feature_subsample = 5.0 / 6.0;
  bool bootstrap = true;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Flattened regression tree. Node 0 is the root; a node is a leaf when
/// `feature` is negative.
class RegressionTree {
 public:
  struct Node {
    int feature = -1;
    double threshold = 0.0;
    std::size_t left = 0;
    std::size_t right = 0;
    double value = 0.0;  // leaf: mean target
  };

  RegressionTree() = default;
  explicit RegressionTree(std::vector<Node> nodes) : nodes_(std::move(nodes)) {}

  /// Single-leaf tree.
  static RegressionTree constant(double value) { return RegressionTree({Node{-1, 0.0, 0, 0, value}}); }

  /// Samples with x[feature] <= threshold go left.
  double predict(std::span<const double> x) const;
  std::size_t depth() const;
  const std::vector<Node>& nodes() const noexcept { return nodes_; }

 private:
  std::vector<Node> nodes_;
};

class RandomForest {
 public:
  RandomForest(std::vector<RegressionTree> trees, std::size_t n_features, ForestParams params = {});

  const std::vector<RegressionTree>& trees() const noexcept { return trees_; }
  std::size_t n_features() const noexcept { return n_features_; }
  const ForestParams& params() const noexcept { return params_; }

 private:
  std::vector<RegressionTree> trees_;
  std::size_t n_features_;
  ForestParams params_;
};

/// CART regression forest: variance-reduction splits at midpoints between
/// consecutive distinct values, per-node random feature subsets, optional
/// bootstrap. Deterministic for a given seed.
RandomForest fit(const Matrix& x, std::span<const double> y, const ForestParams& params = {});

/// Mean and population standard deviation of the per-tree predictions.
std::pair<double, double> predict_mean_std(const RandomForest& f, std::span<const double> x);

}  // namespace mksvm
