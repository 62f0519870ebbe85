#pragma once

#include <cstddef>
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "mksvm/kernel.hpp"

namespace mksvm {

enum class Scale { linear, log };

/// One quantized, box-bounded tunable. Admissible values are
/// lower + k * q for integer k >= 0, not exceeding upper.
struct ParameterDef {
  std::string name;
  double lower = 0.0;
  double upper = 1.0;
  double q = 0.01;
  Scale scale = Scale::linear;

  void validate() const;
  /// Number of admissible grid points.
  std::size_t grid_size() const;
  /// The k-th grid point, lower + k * q.
  double grid_value(std::size_t k) const;

  friend bool operator==(const ParameterDef&, const ParameterDef&) = default;
};

/// Parameter values keyed by name.
struct Configuration {
  std::map<std::string, double> values;

  double at(const std::string& name) const;
  bool contains(const std::string& name) const { return values.count(name) != 0; }

  friend bool operator==(const Configuration&, const Configuration&) = default;
};

/// Ordered parameter list; the order fixes the encoding and the
/// database column layout.
class ParameterSpace {
 public:
  ParameterSpace() = default;
  explicit ParameterSpace(std::vector<ParameterDef> params);

  const std::vector<ParameterDef>& params() const noexcept { return params_; }
  std::size_t size() const noexcept { return params_.size(); }
  const ParameterDef& operator[](std::size_t i) const { return params_[i]; }
  const ParameterDef& get(const std::string& name) const;
  bool contains(const std::string& name) const;
  std::size_t index_of(const std::string& name) const;

  /// Copy with one definition swapped out (matched by name).
  ParameterSpace with(const ParameterDef& def) const;

  /// Throws InvalidInput naming the first offending parameter.
  void validate(const Configuration& c) const;
  bool is_valid(const Configuration& c) const;

  /// Values in space order.
  std::vector<double> values_of(const Configuration& c) const;
  Configuration make(std::span<const double> values) const;

  /// Total grid size, saturating at SIZE_MAX.
  std::size_t grid_size() const;

  friend bool operator==(const ParameterSpace&, const ParameterSpace&) = default;

 private:
  std::vector<ParameterDef> params_;
};

/// Clamp to [lower, upper], then snap to the nearest grid point. Exact
/// halves round toward upper.
double quantize(double value, const ParameterDef& def);

/// Uniform on the parameter's scale, then quantized.
Configuration sample(const ParameterSpace& space, std::mt19937_64& rng);

/// Coordinates in [0,1]^d, log-transformed first for log-scale parameters.
std::vector<double> encode(const Configuration& c, const ParameterSpace& space);

Configuration decode(std::span<const double> v, const ParameterSpace& space);

/// Full Cartesian product of the grids, first parameter varying slowest.
/// Throws Refusal when the product exceeds `cap`.
std::vector<Configuration> grid_enumerate(const ParameterSpace& space, std::size_t cap);

/// mixed_ratio, sigmoid_ratio, gaussian_ratio, C, coef0 with the wide
/// ranges used before any refinement.
ParameterSpace default_space();

/// Canonical parameter names shared with KernelParams.
namespace param_names {
inline constexpr const char* mixed_ratio = "mixed_ratio";
inline constexpr const char* sigmoid_ratio = "sigmoid_ratio";
inline constexpr const char* gaussian_ratio = "gaussian_ratio";
inline constexpr const char* c = "C";
inline constexpr const char* coef0 = "coef0";
}  // namespace param_names

/// Kernel parameters from a configuration; names absent from `c` keep
/// the value in `defaults`. Unknown names are rejected.
KernelParams to_kernel_params(const Configuration& c, const KernelParams& defaults);

}  // namespace mksvm
