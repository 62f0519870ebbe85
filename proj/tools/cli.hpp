#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "mksvm/dataset.hpp"
#include "mksvm/refinement.hpp"
#include "mksvm/svm.hpp"
#include "mksvm/tuner.hpp"

namespace mksvm::cli {

enum class Metric { overall, class_averaged };

/// What the tuner optimizes. `svm` trains on the dataset; `slabs` is a
/// closed-form benchmark over C and coef0 with failing regions at
/// C <= 0.36 and |coef0| > 1, for exercising the refinement loop quickly.
enum class ObjectiveKind { svm, slabs };

struct RunConfig {
  /// CSV path, or a generator: rings[:n[:noise]] / blobs[:k[:per_class[:dims]]].
  std::string dataset = "rings";
  /// Header name, or a zero-based index when all digits.
  std::string label_column = "label";
  bool has_header = true;
  bool standardize = true;
  Metric metric = Metric::overall;
  /// Space file path or "default".
  std::string space = "default";
  double test_fraction = 0.3;
  TunerSettings tuner{};
  RefinementPolicy policy{};
  TrainSettings train{};
  std::filesystem::path out_dir = "out";
  std::uint64_t seed = 0;
  ObjectiveKind objective = ObjectiveKind::svm;
  std::ostream* log = nullptr;
};

/// Train/test split after optional standardization, ready to score configurations.
struct Problem {
  Dataset train;
  Dataset test;
  Metric metric = Metric::overall;
  TrainSettings settings{};
  /// Values used for parameters the space leaves out.
  KernelParams defaults{};

  double score(const Configuration& c) const;
};

Problem prepare_problem(const RunConfig& cfg);
ParameterSpace resolve_space(const RunConfig& cfg);
Objective make_objective(const RunConfig& cfg);

/// Closed-form objective behind ObjectiveKind::slabs.
double slabs_objective(const Configuration& c);

/// Baseline kernel values: mixed_ratio 0.5, both gammas 1/dims, C 1, coef0 0.
KernelParams baseline_params(std::size_t dims);

/// Scores one configuration (missing parameters take baseline values) and
/// writes evaluate.csv. Throws InvalidInput when a value lies outside the space.
double cmd_evaluate(const RunConfig& cfg, const Configuration& config);

struct TuneSummary {
  EvaluationRecord best;
  std::size_t evaluations = 0;
};

/// Writes tune.csv, running_best.csv and best.txt.
TuneSummary cmd_tune(const RunConfig& cfg);

/// Writes round_<k>.csv, round_<k>_space.txt, refine_<k>.txt and best.txt.
FrameworkResult cmd_refine(const RunConfig& cfg);

/// Exhaustive evaluation of a small space; writes grid.csv and best.txt.
TuneSummary cmd_grid(const RunConfig& cfg, std::size_t cap);

/// seq,objective,running_best series for a database file.
void cmd_plotdata(const std::filesystem::path& db_path, const std::filesystem::path& out_path);

void write_best_report(const EvaluationRecord& best, const std::filesystem::path& path);

}  // namespace mksvm::cli
