#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mksvm/number_text.hpp"
#include "mksvm/param_space.hpp"

namespace mksvm {

/// Objective stored for an evaluation that threw or returned a non-finite value.
inline constexpr double kFailureSentinel = -1.0;

struct EvaluationRecord {
  Configuration config;
  double objective = 0.0;
  double elapsed_seconds = 0.0;
  std::size_t sequence_index = 0;
  int worker_id = 0;
  /// Set when the proposal pool held only already-seen configurations and
  /// a fresh random sample was dispatched instead. Not persisted.
  bool fallback = false;

  bool failed() const noexcept { return objective == kFailureSentinel; }
};

/// Order-sensitive FNV-1a digest of (name, lower, upper, q, scale), hex encoded.
std::string space_fingerprint(const ParameterSpace& space);

/// Append-only log of evaluations over one parameter space. When attached
/// to a file, every append is written and flushed before it returns.
///
/// On-disk layout:
///   # space: <fingerprint>
///   seq,worker,elapsed_s,objective,<param names in space order>
///   one line per record
class PerformanceDatabase {
 public:
  explicit PerformanceDatabase(const ParameterSpace& space);

  PerformanceDatabase(const PerformanceDatabase& other);
  PerformanceDatabase& operator=(const PerformanceDatabase& other);
  PerformanceDatabase(PerformanceDatabase&&) noexcept = default;
  PerformanceDatabase& operator=(PerformanceDatabase&&) noexcept = default;
  ~PerformanceDatabase();

  /// Starts (truncating) a file and writes the header. Records already
  /// held are written too.
  void attach(const std::filesystem::path& path);

  /// Throws IntegrityError on an invalid configuration or a sequence
  /// index that does not exceed the last one.
  void append(EvaluationRecord r);

  void save(const std::filesystem::path& path) const;

  /// Parses a database file. With `expected`, the stored fingerprint must
  /// match it and every record must be valid in it.
  static PerformanceDatabase load(const std::filesystem::path& path,
                                  const std::optional<ParameterSpace>& expected = std::nullopt);

  const std::vector<EvaluationRecord>& records() const noexcept { return records_; }
  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }
  const std::string& fingerprint() const noexcept { return fingerprint_; }
  const std::vector<std::string>& param_names() const noexcept { return names_; }
  /// Absent for databases loaded without a reference space.
  const std::optional<ParameterSpace>& space() const noexcept { return space_; }

  /// Same fingerprint, columns and records (fallback flags are not compared).
  bool same_contents(const PerformanceDatabase& other) const;

 private:
  PerformanceDatabase() = default;
  std::string header() const;
  std::string line(const EvaluationRecord& r) const;

  std::optional<ParameterSpace> space_;
  std::string fingerprint_;
  std::vector<std::string> names_;
  std::vector<EvaluationRecord> records_;
  std::unique_ptr<std::ofstream> sink_;
};

/// Prefix maxima of the objective: (sequence_index, best so far).
std::vector<std::pair<std::size_t, double>> running_best(const PerformanceDatabase& db);

}  // namespace mksvm
