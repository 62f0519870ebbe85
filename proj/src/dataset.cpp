#include "mksvm/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <set>

#include "mksvm/error.hpp"
#include "mksvm/number_text.hpp"

namespace mksvm {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos - start)));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

std::size_t Dataset::num_classes() const {
  if (!class_names.empty()) return class_names.size();
  return std::set<int>(labels.begin(), labels.end()).size();
}

void Dataset::validate() const {
  if (labels.empty()) throw InvalidInput("dataset has no rows");
  if (features.cols() == 0) throw InvalidInput("dataset has no feature columns");
  if (features.rows() != labels.size()) throw InvalidInput("dataset row and label counts differ");
  if (!class_names.empty())
    for (int l : labels)
      if (l < 0 || static_cast<std::size_t>(l) >= class_names.size())
        throw InvalidInput("label " + std::to_string(l) + " has no class name");
}

Dataset Dataset::subset(const std::vector<std::size_t>& idx) const {
  Dataset out;
  out.features = features.select_rows(idx);
  out.labels.reserve(idx.size());
  for (auto i : idx) out.labels.push_back(labels[i]);
  out.class_names = class_names;
  return out;
}

Dataset load_csv(const std::filesystem::path& path, const LabelColumn& label_column, bool has_header) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open dataset " + path.string(), 0);

  std::string line;
  std::size_t lineno = 0;
  std::size_t width = 0;
  std::size_t label_idx = 0;
  bool label_resolved = false;

  if (const auto* idx = std::get_if<std::size_t>(&label_column)) {
    label_idx = *idx;
    label_resolved = true;
  }

  if (has_header) {
    if (!std::getline(in, line)) throw ParseError(path.string() + ": empty file", 1);
    ++lineno;
    const auto header = split_fields(line);
    width = header.size();
    if (const auto* name = std::get_if<std::string>(&label_column)) {
      const auto it = std::find(header.begin(), header.end(), *name);
      if (it == header.end())
        throw ParseError(path.string() + ":1: no column named '" + *name + "'", 1);
      label_idx = static_cast<std::size_t>(it - header.begin());
      label_resolved = true;
    }
  } else if (std::holds_alternative<std::string>(label_column)) {
    throw ParseError(path.string() + ": a label column name needs a header line", 0);
  }

  Dataset d;
  std::vector<double> row;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (width == 0) width = fields.size();
    const auto where = path.string() + ":" + std::to_string(lineno);
    if (fields.size() != width)
      throw ParseError(where + ": row " + std::to_string(lineno) + " has " + std::to_string(fields.size()) +
                           " fields, expected " + std::to_string(width),
                       lineno);
    if (label_resolved && label_idx >= width)
      throw ParseError(path.string() + ": label column " + std::to_string(label_idx) + " out of range (" +
                           std::to_string(width) + " columns)",
                       lineno, static_cast<long>(label_idx));
    row.clear();
    for (std::size_t j = 0; j < width; ++j) {
      if (j == label_idx) continue;
      const auto v = parse_double(fields[j]);
      if (!v)
        throw ParseError(where + ": column " + std::to_string(j) + ": '" + fields[j] + "' is not a number", lineno,
                         static_cast<long>(j));
      row.push_back(*v);
    }
    if (row.empty()) throw ParseError(where + ": no feature columns", lineno);
    d.features.append_row(row);
    const auto& token = fields[label_idx];
    const auto it = std::find(d.class_names.begin(), d.class_names.end(), token);
    if (it == d.class_names.end()) {
      d.labels.push_back(static_cast<int>(d.class_names.size()));
      d.class_names.push_back(token);
    } else {
      d.labels.push_back(static_cast<int>(it - d.class_names.begin()));
    }
  }
  if (d.labels.empty()) throw ParseError(path.string() + ": no data rows", lineno);
  return d;
}

void save_csv(const Dataset& d, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  for (std::size_t j = 0; j < d.dims(); ++j) out << "f" << j << ",";
  out << "label\n";
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (double v : d.features.row(i)) out << format_double(v) << ",";
    const int l = d.labels[i];
    if (!d.class_names.empty()) out << d.class_names.at(static_cast<std::size_t>(l));
    else out << l;
    out << "\n";
  }
  if (!out) throw std::runtime_error("write to " + path.string() + " failed");
}

std::pair<Dataset, Dataset> split(const Dataset& d, double test_fraction, std::mt19937_64& rng, bool stratified) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw InvalidInput("test_fraction must lie in (0, 1)");
  d.validate();

  std::vector<std::size_t> train, test;
  auto take = [&](std::vector<std::size_t> idx) {
    std::shuffle(idx.begin(), idx.end(), rng);
    const auto n_test = static_cast<std::size_t>(std::lround(test_fraction * static_cast<double>(idx.size())));
    test.insert(test.end(), idx.begin(), idx.begin() + static_cast<long>(n_test));
    train.insert(train.end(), idx.begin() + static_cast<long>(n_test), idx.end());
  };

  if (stratified) {
    std::vector<int> classes;
    for (int l : d.labels)
      if (std::find(classes.begin(), classes.end(), l) == classes.end()) classes.push_back(l);
    for (int c : classes) {
      std::vector<std::size_t> idx;
      for (std::size_t i = 0; i < d.size(); ++i)
        if (d.labels[i] == c) idx.push_back(i);
      if (idx.size() < 2)
        throw InvalidInput("stratified split: class " + std::to_string(c) + " has fewer than 2 examples");
      take(std::move(idx));
    }
  } else {
    std::vector<std::size_t> idx(d.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    take(std::move(idx));
  }
  if (train.empty() || test.empty())
    throw InvalidInput("split of " + std::to_string(d.size()) + " rows leaves one side empty");
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {d.subset(train), d.subset(test)};
}

Standardizer fit_standardizer(const Dataset& train) {
  const std::size_t n = train.size();
  const std::size_t dims = train.dims();
  Standardizer s{std::vector<double>(dims, 0.0), std::vector<double>(dims, 1.0)};
  if (n == 0) return s;
  for (std::size_t j = 0; j < dims; ++j) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += train.features(i, j);
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double dv = train.features(i, j) - mean;
      ss += dv * dv;
    }
    const double sd = std::sqrt(ss / static_cast<double>(n));
    s.means[j] = mean;
    s.stds[j] = sd > 0.0 ? sd : 1.0;
  }
  return s;
}

Dataset apply_standardizer(const Standardizer& s, const Dataset& d) {
  if (s.means.size() != d.dims()) throw InvalidInput("standardizer dimension does not match the dataset");
  Dataset out = d;
  for (std::size_t i = 0; i < out.size(); ++i)
    for (std::size_t j = 0; j < out.dims(); ++j) out.features(i, j) = (d.features(i, j) - s.means[j]) / s.stds[j];
  return out;
}

Dataset gen_blobs(std::size_t k, std::size_t per_class, std::size_t d, double separation, double noise,
                  std::uint64_t seed) {
  if (k == 0 || per_class == 0 || d == 0) throw InvalidInput("gen_blobs: sizes must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, noise);

  // Centers on a circle whose chord between neighbours equals `separation`.
  Matrix centers(k, d, 0.0);
  if (d == 1 || k <= 2) {
    for (std::size_t c = 0; c < k; ++c) centers(c, 0) = separation * static_cast<double>(c);
  } else {
    const double radius = separation / (2.0 * std::sin(std::numbers::pi / static_cast<double>(k)));
    for (std::size_t c = 0; c < k; ++c) {
      const double angle = 2.0 * std::numbers::pi * static_cast<double>(c) / static_cast<double>(k);
      centers(c, 0) = radius * std::cos(angle);
      centers(c, 1) = radius * std::sin(angle);
    }
  }

  Dataset out;
  out.features = Matrix(k * per_class, d);
  for (std::size_t c = 0; c < k; ++c) {
    out.class_names.push_back(std::to_string(c));
    for (std::size_t i = 0; i < per_class; ++i) {
      const std::size_t r = c * per_class + i;
      for (std::size_t j = 0; j < d; ++j) out.features(r, j) = centers(c, j) + gauss(rng);
      out.labels.push_back(static_cast<int>(c));
    }
  }
  return out;
}

Dataset gen_rings(std::size_t n, double noise, std::uint64_t seed) {
  if (n < 2) throw InvalidInput("gen_rings: need at least 2 points");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  std::normal_distribution<double> radial(0.0, noise);

  Dataset out;
  out.features = Matrix(n, 2);
  out.class_names = {"inner", "outer"};
  const std::size_t inner = n / 2;
  for (std::size_t i = 0; i < n; ++i) {
    const int label = i < inner ? 0 : 1;
    const double r = (label == 0 ? 1.0 : 2.0) + radial(rng);
    const double t = angle(rng);
    out.features(i, 0) = r * std::cos(t);
    out.features(i, 1) = r * std::sin(t);
    out.labels.push_back(label);
  }
  return out;
}

}  // namespace mksvm
