#include "mksvm/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "mksvm/error.hpp"

namespace mksvm {

namespace {

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& x, std::span<const double> y, const ForestParams& p, std::mt19937_64& rng)
      : x_(x), y_(y), p_(p), rng_(rng) {
    const auto d = x.cols();
    n_try_ = static_cast<std::size_t>(std::ceil(p.feature_subsample * static_cast<double>(d)));
    n_try_ = std::clamp<std::size_t>(n_try_, 1, d);
    features_.resize(d);
  }

  RegressionTree build(std::vector<std::size_t> idx) {
    grow(std::move(idx), 0);
    return RegressionTree(std::move(nodes_));
  }

 private:
  struct Split {
    int feature = -1;
    double threshold = 0.0;
    double gain = -1.0;
  };

  // Mean anchored at the first target so that constant targets come back exactly.
  double mean(const std::vector<std::size_t>& idx) const {
    const double anchor = y_[idx.front()];
    double s = 0.0;
    for (auto i : idx) s += y_[i] - anchor;
    return anchor + s / static_cast<double>(idx.size());
  }

  std::size_t grow(std::vector<std::size_t> idx, std::size_t depth) {
    const std::size_t id = nodes_.size();
    nodes_.push_back({-1, 0.0, 0, 0, mean(idx)});

    const bool constant =
        std::all_of(idx.begin(), idx.end(), [&](auto i) { return y_[i] == y_[idx.front()]; });
    if (constant || depth >= p_.max_depth || idx.size() < 2 * p_.min_samples_leaf) return id;

    const Split s = best_split(idx);
    if (s.feature < 0) return id;

    std::vector<std::size_t> left, right;
    for (auto i : idx) (x_(i, static_cast<std::size_t>(s.feature)) <= s.threshold ? left : right).push_back(i);
    idx.clear();
    idx.shrink_to_fit();

    const std::size_t l = grow(std::move(left), depth + 1);
    const std::size_t r = grow(std::move(right), depth + 1);
    auto& node = nodes_[id];
    node.feature = s.feature;
    node.threshold = s.threshold;
    node.left = l;
    node.right = r;
    return id;
  }

  Split best_split(const std::vector<std::size_t>& idx) {
    // Random feature subset, examined in ascending index order so ties
    // resolve to the lowest feature.
    std::iota(features_.begin(), features_.end(), std::size_t{0});
    for (std::size_t k = 0; k < n_try_; ++k) {
      std::uniform_int_distribution<std::size_t> pick(k, features_.size() - 1);
      std::swap(features_[k], features_[pick(rng_)]);
    }
    std::vector<std::size_t> chosen(features_.begin(), features_.begin() + static_cast<long>(n_try_));
    std::sort(chosen.begin(), chosen.end());

    const std::size_t n = idx.size();
    const std::size_t min_leaf = p_.min_samples_leaf;
    double total = 0.0, total_sq = 0.0;
    for (auto i : idx) {
      total += y_[i];
      total_sq += y_[i] * y_[i];
    }
    const double parent_sse = total_sq - total * total / static_cast<double>(n);

    Split best;
    std::vector<std::size_t> order(idx);
    for (const std::size_t f : chosen) {
      std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return x_(a, f) < x_(b, f); });
      double ls = 0.0, lsq = 0.0;
      for (std::size_t k = 0; k + 1 < n; ++k) {
        const double yk = y_[order[k]];
        ls += yk;
        lsq += yk * yk;
        const std::size_t nl = k + 1;
        const std::size_t nr = n - nl;
        const double here = x_(order[k], f);
        const double next = x_(order[k + 1], f);
        if (!(here < next) || nl < min_leaf || nr < min_leaf) continue;
        const double rs = total - ls;
        const double rsq = total_sq - lsq;
        const double sse = (lsq - ls * ls / static_cast<double>(nl)) + (rsq - rs * rs / static_cast<double>(nr));
        const double gain = parent_sse - sse;
        if (gain > best.gain) {
          best.gain = gain;
          best.feature = static_cast<int>(f);
          best.threshold = 0.5 * (here + next);
          // The midpoint of adjacent doubles can round up to `next`.
          if (!(best.threshold < next)) best.threshold = here;
        }
      }
    }
    return best;
  }

  const Matrix& x_;
  std::span<const double> y_;
  const ForestParams& p_;
  std::mt19937_64& rng_;
  std::size_t n_try_ = 1;
  std::vector<std::size_t> features_;
  std::vector<RegressionTree::Node> nodes_;
};

}  // namespace

void ForestParams::validate() const {
  if (n_trees < 1) throw InvalidInput("n_trees must be >= 1");
  if (max_depth < 1) throw InvalidInput("max_depth must be >= 1");
  if (min_samples_leaf < 1) throw InvalidInput("min_samples_leaf must be >= 1");
  if (!(feature_subsample > 0.0 && feature_subsample <= 1.0))
    throw InvalidInput("feature_subsample must lie in (0, 1]");
}

double RegressionTree::predict(std::span<const double> x) const {
  std::size_t i = 0;
  while (nodes_[i].feature >= 0)
    i = x[static_cast<std::size_t>(nodes_[i].feature)] <= nodes_[i].threshold ? nodes_[i].left : nodes_[i].right;
  return nodes_[i].value;
}

std::size_t RegressionTree::depth() const {
  std::vector<std::size_t> d(nodes_.size(), 0);
  std::size_t deepest = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    deepest = std::max(deepest, d[i]);
    if (nodes_[i].feature >= 0) {
      d[nodes_[i].left] = d[i] + 1;
      d[nodes_[i].right] = d[i] + 1;
    }
  }
  return deepest;
}

RandomForest::RandomForest(std::vector<RegressionTree> trees, std::size_t n_features, ForestParams params)
    : trees_(std::move(trees)), n_features_(n_features), params_(params) {
  if (trees_.empty()) throw InvalidInput("a forest needs at least one tree");
}

RandomForest fit(const Matrix& x, std::span<const double> y, const ForestParams& params) {
  params.validate();
  if (x.rows() == 0 || x.rows() != y.size())
    throw InvalidInput("fit: need matching, nonempty inputs (" + std::to_string(x.rows()) + " rows, " +
                       std::to_string(y.size()) + " targets)");
  const std::size_t n = x.rows();
  std::vector<RegressionTree> trees;
  trees.reserve(params.n_trees);
  for (std::size_t t = 0; t < params.n_trees; ++t) {
    std::seed_seq seq{static_cast<std::uint32_t>(params.seed), static_cast<std::uint32_t>(params.seed >> 32),
                      static_cast<std::uint32_t>(t)};
    std::mt19937_64 rng(seq);
    std::vector<std::size_t> idx(n);
    if (params.bootstrap) {
      std::uniform_int_distribution<std::size_t> draw(0, n - 1);
      for (auto& i : idx) i = draw(rng);
      std::sort(idx.begin(), idx.end());
    } else {
      std::iota(idx.begin(), idx.end(), std::size_t{0});
    }
    trees.push_back(TreeBuilder(x, y, params, rng).build(std::move(idx)));
  }
  return RandomForest(std::move(trees), x.cols(), params);
}

std::pair<double, double> predict_mean_std(const RandomForest& f, std::span<const double> x) {
  if (x.size() != f.n_features())
    throw InvalidInput("predict_mean_std: expected " + std::to_string(f.n_features()) + " features, got " +
                       std::to_string(x.size()));
  const auto& trees = f.trees();
  std::vector<double> preds;
  preds.reserve(trees.size());
  for (const auto& t : trees) preds.push_back(t.predict(x));
  const double n = static_cast<double>(preds.size());
  // Anchored at the first prediction so agreeing trees give an exact mean and zero spread.
  double shift = 0.0;
  for (double p : preds) shift += p - preds.front();
  const double mean = preds.front() + shift / n;
  double var = 0.0;
  for (double p : preds) var += (p - mean) * (p - mean);
  return {mean, std::sqrt(var / n)};
}

}  // namespace mksvm
