#include "mksvm/svm.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <string>

namespace mksvm {

namespace {

constexpr std::size_t kFullGramLimit = 4000;

// Kernel rows over the training set, either precomputed or evaluated on demand.
class KernelRows {
 public:
  KernelRows(const Matrix& x, const KernelParams& p) : x_(x), p_(p), n_(x.rows()) {
    if (n_ <= kFullGramLimit) {
      full_ = gram_matrix(x, x, p);
    } else {
      buf_a_.resize(n_);
      buf_b_.resize(n_);
    }
  }

  // Valid until the next call with the same slot.
  std::span<const double> row(std::size_t i, int slot) {
    if (!full_.empty()) return full_.row(i);
    auto& buf = slot == 0 ? buf_a_ : buf_b_;
    const auto xi = x_.row(i);
    for (std::size_t j = 0; j < n_; ++j) buf[j] = mixed_kernel(xi, x_.row(j), p_);
    return buf;
  }

  double diag(std::size_t i) const {
    if (!full_.empty()) return full_(i, i);
    return mixed_kernel(x_.row(i), x_.row(i), p_);
  }

 private:
  const Matrix& x_;
  KernelParams p_;
  std::size_t n_;
  Matrix full_;
  std::vector<double> buf_a_, buf_b_;
};

// Platt's SMO. The error cache holds E_i = g_i - y_i with
// g_i = sum_j alpha_j y_j K_ij, i.e. without the bias; the bias is
// re-derived from the current multipliers after every step so that the
// violation test and the returned model agree.
class SmoSolver {
 public:
  SmoSolver(const Matrix& x, std::span<const int> labels, const KernelParams& p, const TrainSettings& s)
      : n_(x.rows()),
        c_(p.c),
        tol_(s.kkt_tolerance),
        max_passes_(s.max_passes),
        max_iter_(s.max_iterations.value_or(1000 * x.rows())),
        rows_(x, p),
        y_(labels.begin(), labels.end()),
        alpha_(n_, 0.0),
        err_(n_) {
    for (std::size_t i = 0; i < n_; ++i) err_[i] = -y_[i];
    bias_ = compute_bias();
  }

  void run() {
    bool examine_all = true;
    int stalled = 0;
    while (iterations_ < max_iter_) {
      std::size_t changed = 0;
      std::size_t violators = 0;
      for (std::size_t i = 0; i < n_ && iterations_ < max_iter_; ++i) {
        if (!examine_all && !is_free(i)) continue;
        if (!violates(i)) continue;
        ++violators;
        if (examine(i)) ++changed;
      }
      if (examine_all) {
        if (violators == 0) {
          converged_ = true;
          break;
        }
        stalled = changed == 0 ? stalled + 1 : 0;
        if (stalled >= max_passes_) break;
        examine_all = false;
      } else if (changed == 0) {
        examine_all = true;
      }
    }
  }

  BinarySVMModel model(const Matrix& x, const KernelParams& p) const {
    BinarySVMModel m;
    m.kernel = p;
    m.bias = bias_;
    m.converged = converged_;
    m.iterations = iterations_;
    for (std::size_t i = 0; i < n_; ++i) {
      if (alpha_[i] > 0.0) {
        m.support_indices.push_back(i);
        m.dual_coefs.push_back(alpha_[i] * y_[i]);
      }
    }
    m.support_vectors = x.select_rows(m.support_indices);
    return m;
  }

 private:
  bool is_free(std::size_t i) const { return alpha_[i] > 0.0 && alpha_[i] < c_; }

  bool violates(std::size_t i) const {
    const double r = y_[i] * (err_[i] + y_[i] + bias_) - 1.0;  // y_i f(x_i) - 1
    return (alpha_[i] < c_ && r < -tol_) || (alpha_[i] > 0.0 && r > tol_);
  }

  // Average of y_i - g_i over free vectors; otherwise the midpoint of the
  // interval of biases consistent with the bound multipliers.
  double compute_bias() const {
    double sum = 0.0;
    std::size_t free = 0;
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n_; ++i) {
      const double b_i = -err_[i];  // y_i - g_i
      if (is_free(i)) {
        sum += b_i;
        ++free;
      } else if ((alpha_[i] == 0.0) == (y_[i] > 0)) {
        lo = std::max(lo, b_i);
      } else {
        hi = std::min(hi, b_i);
      }
    }
    if (free > 0) return sum / static_cast<double>(free);
    if (std::isinf(lo) && std::isinf(hi)) return 0.0;
    if (std::isinf(lo)) return hi;
    if (std::isinf(hi)) return lo;
    return 0.5 * (lo + hi);
  }

  bool examine(std::size_t i2) {
    // Second choice: the free multiplier maximizing |E1 - E2|.
    std::size_t best = n_;
    double best_gap = -1.0;
    for (std::size_t k = 0; k < n_; ++k) {
      if (k == i2 || !is_free(k)) continue;
      const double gap = std::abs(err_[k] - err_[i2]);
      if (gap > best_gap) {
        best_gap = gap;
        best = k;
      }
    }
    if (best < n_ && take_step(best, i2)) return true;
    // Fall back to every free multiplier, then to all of them.
    for (std::size_t off = 1; off < n_; ++off) {
      const std::size_t k = (i2 + off) % n_;
      if (is_free(k) && k != best && take_step(k, i2)) return true;
    }
    for (std::size_t off = 1; off < n_; ++off) {
      const std::size_t k = (i2 + off) % n_;
      if (!is_free(k) && take_step(k, i2)) return true;
    }
    return false;
  }

  bool take_step(std::size_t i1, std::size_t i2) {
    if (i1 == i2) return false;
    const double a1 = alpha_[i1];
    const double a2 = alpha_[i2];
    const double y1 = y_[i1];
    const double y2 = y_[i2];
    const double e1 = err_[i1];
    const double e2 = err_[i2];
    const double s = y1 * y2;

    double lo, hi;
    if (s < 0) {
      lo = std::max(0.0, a2 - a1);
      hi = std::min(c_, c_ + a2 - a1);
    } else {
      lo = std::max(0.0, a1 + a2 - c_);
      hi = std::min(c_, a1 + a2);
    }
    if (hi - lo <= kStepEps * c_) return false;

    const auto row1 = rows_.row(i1, 0);
    const double k11 = row1[i1];
    const double k12 = row1[i2];
    const double k22 = rows_.diag(i2);
    const double eta = k11 + k22 - 2.0 * k12;

    // Change of the minimized objective as a function of the step in alpha_2.
    const double slope = y2 * (e2 - e1);
    auto delta = [&](double d) { return slope * d + 0.5 * eta * d * d; };

    double a2_new;
    if (eta > 0.0) {
      a2_new = std::clamp(a2 + y2 * (e1 - e2) / eta, lo, hi);
    } else {
      // Indefinite or flat along the pair: the minimum sits at an end of the segment.
      const double at_lo = delta(lo - a2);
      const double at_hi = delta(hi - a2);
      a2_new = at_lo < at_hi ? lo : hi;
    }
    a2_new = snap(a2_new);
    if (std::abs(a2_new - a2) <= kStepEps * (a2 + a2_new + kStepEps)) return false;
    if (!(delta(a2_new - a2) < 0.0)) return false;

    const double a1_new = snap(std::clamp(a1 + s * (a2 - a2_new), 0.0, c_));
    const double d1 = (a1_new - a1) * y1;
    const double d2 = (a2_new - a2) * y2;
    alpha_[i1] = a1_new;
    alpha_[i2] = a2_new;

    const auto r1 = rows_.row(i1, 0);
    const auto r2 = rows_.row(i2, 1);
    for (std::size_t k = 0; k < n_; ++k) err_[k] += d1 * r1[k] + d2 * r2[k];
    bias_ = compute_bias();
    ++iterations_;
    return true;
  }

  double snap(double a) const {
    if (a < kBoundEps * c_) return 0.0;
    if (a > c_ * (1.0 - kBoundEps)) return c_;
    return a;
  }

  static constexpr double kStepEps = 1e-12;
  static constexpr double kBoundEps = 1e-12;

  std::size_t n_;
  double c_;
  double tol_;
  int max_passes_;
  std::size_t max_iter_;
  KernelRows rows_;
  std::vector<double> y_;
  std::vector<double> alpha_;
  std::vector<double> err_;
  double bias_ = 0.0;
  bool converged_ = false;
  std::size_t iterations_ = 0;
};

void require_dim(const BinarySVMModel& m, std::span<const double> x) {
  if (!m.support_vectors.empty() && m.support_vectors.cols() != x.size()) {
    throw InvalidInput("decision_function: expected dimension " + std::to_string(m.support_vectors.cols()) +
                       ", got " + std::to_string(x.size()));
  }
}

}  // namespace

void TrainSettings::validate() const {
  if (!(kkt_tolerance > 0.0)) throw InvalidInput("kkt_tolerance must be positive");
  if (max_passes < 1) throw InvalidInput("max_passes must be positive");
  if (max_iterations && *max_iterations < 1) throw InvalidInput("max_iterations must be >= 1");
}

BinarySVMModel train_binary(const Matrix& features, std::span<const int> labels, const KernelParams& p,
                            const TrainSettings& s) {
  p.validate();
  s.validate();
  if (features.rows() != labels.size())
    throw InvalidInput("train_binary: " + std::to_string(features.rows()) + " rows but " +
                       std::to_string(labels.size()) + " labels");
  bool pos = false, neg = false;
  for (int l : labels) {
    if (l == 1) pos = true;
    else if (l == -1) neg = true;
    else throw InvalidInput("train_binary: labels must be -1 or +1, got " + std::to_string(l));
  }
  if (!pos || !neg) throw InvalidInput("train_binary: both classes need at least one example");

  SmoSolver smo(features, labels, p, s);
  smo.run();
  return smo.model(features, p);
}

double decision_function(const BinarySVMModel& m, std::span<const double> x) {
  require_dim(m, x);
  double f = m.bias;
  for (std::size_t i = 0; i < m.dual_coefs.size(); ++i)
    f += m.dual_coefs[i] * mixed_kernel(m.support_vectors.row(i), x, m.kernel);
  return f;
}

int predict_binary(const BinarySVMModel& m, std::span<const double> x) {
  return decision_function(m, x) > 0.0 ? m.classes.second : m.classes.first;
}

double dual_objective(const BinarySVMModel& m) {
  const Matrix k = gram_matrix(m.support_vectors, m.support_vectors, m.kernel);
  double linear = 0.0;
  double quad = 0.0;
  for (std::size_t i = 0; i < m.dual_coefs.size(); ++i) {
    linear += std::abs(m.dual_coefs[i]);
    for (std::size_t j = 0; j < m.dual_coefs.size(); ++j) quad += m.dual_coefs[i] * m.dual_coefs[j] * k(i, j);
  }
  return linear - 0.5 * quad;
}

MulticlassSVMModel train_ovo(const Matrix& features, std::span<const int> labels, const KernelParams& p,
                             const TrainSettings& s, bool parallel) {
  if (features.rows() != labels.size())
    throw InvalidInput("train_ovo: " + std::to_string(features.rows()) + " rows but " +
                       std::to_string(labels.size()) + " labels");
  MulticlassSVMModel out;
  for (int l : labels)
    if (std::find(out.class_labels.begin(), out.class_labels.end(), l) == out.class_labels.end())
      out.class_labels.push_back(l);
  if (out.class_labels.size() < 2)
    throw InvalidInput("train_ovo: need at least 2 classes, got " + std::to_string(out.class_labels.size()));

  const std::size_t k = out.class_labels.size();
  auto train_pair = [&](int a, int b) {
    std::vector<std::size_t> idx;
    std::vector<int> y;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == a || labels[i] == b) {
        idx.push_back(i);
        y.push_back(labels[i] == b ? 1 : -1);
      }
    }
    PairwiseModel pm{a, b, train_binary(features.select_rows(idx), y, p, s)};
    pm.model.classes = {a, b};
    return pm;
  };

  if (parallel) {
    std::vector<std::future<PairwiseModel>> jobs;
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = i + 1; j < k; ++j)
        jobs.push_back(std::async(std::launch::async, train_pair, out.class_labels[i], out.class_labels[j]));
    for (auto& f : jobs) out.pairwise_models.push_back(f.get());
  } else {
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = i + 1; j < k; ++j)
        out.pairwise_models.push_back(train_pair(out.class_labels[i], out.class_labels[j]));
  }
  return out;
}

int predict(const MulticlassSVMModel& m, std::span<const double> x) {
  std::vector<int> votes(m.class_labels.size(), 0);
  auto slot = [&](int label) {
    return static_cast<std::size_t>(std::find(m.class_labels.begin(), m.class_labels.end(), label) -
                                    m.class_labels.begin());
  };
  for (const auto& pm : m.pairwise_models) ++votes[slot(predict_binary(pm.model, x))];
  const auto best = std::max_element(votes.begin(), votes.end());  // first maximum wins ties
  return m.class_labels[static_cast<std::size_t>(best - votes.begin())];
}

std::vector<int> predict_all(const MulticlassSVMModel& m, const Matrix& features) {
  std::vector<int> out(features.rows());
  for (std::size_t i = 0; i < features.rows(); ++i) out[i] = predict(m, features.row(i));
  return out;
}

double accuracy(const MulticlassSVMModel& m, const Matrix& features, std::span<const int> labels) {
  if (features.rows() == 0) throw InvalidInput("accuracy: empty evaluation set");
  if (features.rows() != labels.size()) throw InvalidInput("accuracy: row/label count mismatch");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < features.rows(); ++i)
    if (predict(m, features.row(i)) == labels[i]) ++correct;
  return static_cast<double>(correct) / static_cast<double>(features.rows());
}

double class_averaged_accuracy(const MulticlassSVMModel& m, const Matrix& features,
                               std::span<const int> labels) {
  if (features.rows() != labels.size()) throw InvalidInput("class_averaged_accuracy: row/label count mismatch");
  const std::size_t k = m.class_labels.size();
  std::vector<std::size_t> total(k, 0), hit(k, 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto it = std::find(m.class_labels.begin(), m.class_labels.end(), labels[i]);
    if (it == m.class_labels.end())
      throw InvalidInput("class_averaged_accuracy: label " + std::to_string(labels[i]) + " unknown to the model");
    const auto c = static_cast<std::size_t>(it - m.class_labels.begin());
    ++total[c];
    if (predict(m, features.row(i)) == labels[i]) ++hit[c];
  }
  double sum = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    if (total[c] == 0)
      throw InvalidInput("class_averaged_accuracy: class " + std::to_string(m.class_labels[c]) +
                         " has no examples");
    sum += static_cast<double>(hit[c]) / static_cast<double>(total[c]);
  }
  return sum / static_cast<double>(k);
}

}  // namespace mksvm
