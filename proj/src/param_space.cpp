#include "mksvm/param_space.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <set>

#include "mksvm/error.hpp"

namespace mksvm {

namespace {

// Grid arithmetic slack: (upper - lower) / q is rarely an exact integer in binary.
constexpr double kGridSlack = 1e-7;

// lower + k*q carries binary noise (0.1 + 27*0.01 = 0.37000000000000005);
// routing through 12 significant decimal digits lands on the nearest double
// to the intended decimal and keeps quantize idempotent.
double tidy(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return std::strtod(buf, nullptr);
}

double to_unit(double v, const ParameterDef& d) {
  if (d.scale == Scale::log) return (std::log(v) - std::log(d.lower)) / (std::log(d.upper) - std::log(d.lower));
  return (v - d.lower) / (d.upper - d.lower);
}

double from_unit(double u, const ParameterDef& d) {
  u = std::clamp(u, 0.0, 1.0);
  if (d.scale == Scale::log) return std::exp(std::log(d.lower) + u * (std::log(d.upper) - std::log(d.lower)));
  return d.lower + u * (d.upper - d.lower);
}

}  // namespace

void ParameterDef::validate() const {
  if (name.empty()) throw InvalidInput("parameter name must not be empty");
  if (!std::isfinite(lower) || !std::isfinite(upper) || !(lower < upper))
    throw InvalidInput("parameter " + name + ": need finite lower < upper");
  if (!(q > 0.0) || !std::isfinite(q)) throw InvalidInput("parameter " + name + ": q must be positive");
  if (scale == Scale::log && !(lower > 0.0))
    throw InvalidInput("parameter " + name + ": log scale needs lower > 0");
}

std::size_t ParameterDef::grid_size() const {
  const double steps = (upper - lower) / q;
  return static_cast<std::size_t>(std::floor(steps + kGridSlack * std::max(1.0, steps))) + 1;
}

double ParameterDef::grid_value(std::size_t k) const {
  const double v = tidy(lower + static_cast<double>(k) * q);
  return std::min(v, upper);
}

double Configuration::at(const std::string& name) const {
  const auto it = values.find(name);
  if (it == values.end()) throw InvalidInput("configuration has no parameter '" + name + "'");
  return it->second;
}

ParameterSpace::ParameterSpace(std::vector<ParameterDef> params) : params_(std::move(params)) {
  std::set<std::string> seen;
  for (const auto& p : params_) {
    p.validate();
    if (!seen.insert(p.name).second) throw InvalidInput("duplicate parameter name '" + p.name + "'");
  }
}

const ParameterDef& ParameterSpace::get(const std::string& name) const { return params_[index_of(name)]; }

bool ParameterSpace::contains(const std::string& name) const {
  return std::any_of(params_.begin(), params_.end(), [&](const auto& p) { return p.name == name; });
}

std::size_t ParameterSpace::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < params_.size(); ++i)
    if (params_[i].name == name) return i;
  throw InvalidInput("space has no parameter '" + name + "'");
}

ParameterSpace ParameterSpace::with(const ParameterDef& def) const {
  auto ps = params_;
  ps[index_of(def.name)] = def;
  return ParameterSpace(std::move(ps));
}

void ParameterSpace::validate(const Configuration& c) const {
  if (c.values.size() != params_.size())
    throw InvalidInput("configuration has " + std::to_string(c.values.size()) + " values, space has " +
                       std::to_string(params_.size()) + " parameters");
  for (const auto& p : params_) {
    const auto it = c.values.find(p.name);
    if (it == c.values.end()) throw InvalidInput("configuration is missing '" + p.name + "'");
    const double v = it->second;
    const double slack = kGridSlack * (p.upper - p.lower);
    if (!(v >= p.lower - slack && v <= p.upper + slack))
      throw InvalidInput("parameter " + p.name + " = " + std::to_string(v) + " outside [" +
                         std::to_string(p.lower) + ", " + std::to_string(p.upper) + "]");
    const double steps = (v - p.lower) / p.q;
    if (std::abs(steps - std::round(steps)) > 1e-6 && std::abs(v - p.upper) > slack)
      throw InvalidInput("parameter " + p.name + " = " + std::to_string(v) + " is off its q grid");
  }
}

bool ParameterSpace::is_valid(const Configuration& c) const {
  try {
    validate(c);
    return true;
  } catch (const InvalidInput&) {
    return false;
  }
}

std::vector<double> ParameterSpace::values_of(const Configuration& c) const {
  std::vector<double> v;
  v.reserve(params_.size());
  for (const auto& p : params_) v.push_back(c.at(p.name));
  return v;
}

Configuration ParameterSpace::make(std::span<const double> values) const {
  if (values.size() != params_.size())
    throw InvalidInput("expected " + std::to_string(params_.size()) + " values, got " +
                       std::to_string(values.size()));
  Configuration c;
  for (std::size_t i = 0; i < params_.size(); ++i) c.values[params_[i].name] = values[i];
  return c;
}

std::size_t ParameterSpace::grid_size() const {
  std::size_t total = 1;
  for (const auto& p : params_) {
    const std::size_t g = p.grid_size();
    if (total > std::numeric_limits<std::size_t>::max() / g) return std::numeric_limits<std::size_t>::max();
    total *= g;
  }
  return total;
}

double quantize(double value, const ParameterDef& def) {
  if (std::isnan(value)) value = def.lower;
  const double v = std::clamp(value, def.lower, def.upper);
  const std::size_t last = def.grid_size() - 1;
  const double t = (v - def.lower) / def.q;
  const auto k = static_cast<std::size_t>(std::min<double>(std::floor(t + 0.5), static_cast<double>(last)));
  return def.grid_value(k);
}

Configuration sample(const ParameterSpace& space, std::mt19937_64& rng) {
  Configuration c;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (const auto& p : space.params()) c.values[p.name] = quantize(from_unit(unit(rng), p), p);
  return c;
}

std::vector<double> encode(const Configuration& c, const ParameterSpace& space) {
  space.validate(c);
  std::vector<double> v;
  v.reserve(space.size());
  for (const auto& p : space.params()) v.push_back(std::clamp(to_unit(c.at(p.name), p), 0.0, 1.0));
  return v;
}

Configuration decode(std::span<const double> v, const ParameterSpace& space) {
  if (v.size() != space.size())
    throw InvalidInput("decode: expected " + std::to_string(space.size()) + " coordinates, got " +
                       std::to_string(v.size()));
  Configuration c;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto& p = space[i];
    c.values[p.name] = quantize(from_unit(v[i], p), p);
  }
  return c;
}

std::vector<Configuration> grid_enumerate(const ParameterSpace& space, std::size_t cap) {
  const std::size_t total = space.grid_size();
  if (total > cap)
    throw Refusal("grid of " + std::to_string(total) + " configurations exceeds the cap of " + std::to_string(cap));
  std::vector<Configuration> out;
  out.reserve(total);
  std::vector<std::size_t> k(space.size(), 0);
  for (std::size_t n = 0; n < total; ++n) {
    Configuration c;
    for (std::size_t i = 0; i < space.size(); ++i) c.values[space[i].name] = space[i].grid_value(k[i]);
    out.push_back(std::move(c));
    // Odometer with the last parameter varying fastest.
    for (std::size_t i = space.size(); i-- > 0;) {
      if (++k[i] < space[i].grid_size()) break;
      k[i] = 0;
    }
  }
  return out;
}

ParameterSpace default_space() {
  using namespace param_names;
  return ParameterSpace({
      {mixed_ratio, 0.0, 1.0, 1e-5, Scale::linear},
      {sigmoid_ratio, 1e-5, 10.0, 1e-5, Scale::log},
      {gaussian_ratio, 1e-5, 10.0, 1e-5, Scale::log},
      {c, 0.1, 100.0, 0.01, Scale::linear},
      {coef0, -15.0, 15.0, 0.01, Scale::linear},
  });
}

KernelParams to_kernel_params(const Configuration& c, const KernelParams& defaults) {
  KernelParams p = defaults;
  for (const auto& [name, v] : c.values) {
    if (name == param_names::mixed_ratio) p.mixed_ratio = v;
    else if (name == param_names::sigmoid_ratio) p.sigmoid_ratio = v;
    else if (name == param_names::gaussian_ratio) p.gaussian_ratio = v;
    else if (name == param_names::c) p.c = v;
    else if (name == param_names::coef0) p.coef0 = v;
    else throw InvalidInput("unknown kernel parameter '" + name + "'");
  }
  return p;
}

}  // namespace mksvm
