#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "mksvm/matrix.hpp"

namespace mksvm {

/// Labels are dense integers 0..k-1; class_names[k] is the original token.
struct Dataset {
  Matrix features;
  std::vector<int> labels;
  std::vector<std::string> class_names;

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t dims() const noexcept { return features.cols(); }
  std::size_t num_classes() const;
  void validate() const;
  Dataset subset(const std::vector<std::size_t>& idx) const;
};

/// Label column given by header name or zero-based index.
using LabelColumn = std::variant<std::string, std::size_t>;

/// Comma-separated numbers, optional single header line. Labels are
/// encoded by order of first appearance. Errors name the 1-based line and
/// 0-based column.
Dataset load_csv(const std::filesystem::path& path, const LabelColumn& label_column, bool has_header);

/// Writes features then a trailing `label` column holding class_names
/// (or the integer label when names are absent), with a header line.
void save_csv(const Dataset& d, const std::filesystem::path& path);

/// Disjoint, exhaustive split. Test size is round(test_fraction * n),
/// computed per class when stratified.
std::pair<Dataset, Dataset> split(const Dataset& d, double test_fraction, std::mt19937_64& rng, bool stratified);

struct Standardizer {
  std::vector<double> means;
  std::vector<double> stds;  // population std; 1 for constant columns
};

Standardizer fit_standardizer(const Dataset& train);
Dataset apply_standardizer(const Standardizer& s, const Dataset& d);

/// k Gaussian clouds with per-axis std `noise`, centers evenly spaced on a
/// circle (d >= 2) or a line (d == 1) so neighbouring centers sit
/// `separation` apart.
Dataset gen_blobs(std::size_t k, std::size_t per_class, std::size_t d, double separation, double noise,
                  std::uint64_t seed);

/// Two concentric annuli of radius 1 (class 0) and 2 (class 1) with
/// Gaussian radial noise; n/2 points each (the outer ring takes the odd one).
Dataset gen_rings(std::size_t n, double noise, std::uint64_t seed);

}  // namespace mksvm
