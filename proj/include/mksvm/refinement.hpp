#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mksvm/param_space.hpp"
#include "mksvm/perfdb.hpp"
#include "mksvm/text_format.hpp"
#include "mksvm/tuner.hpp"

namespace mksvm {

struct RefinementPolicy {
  /// Objectives at or below this (and the failure sentinel) count as failing.
  double fail_threshold = 0.2;
  /// Extra old-grid steps kept on the failing side of a frontier.
  double prune_margin = 0.0;
  /// New q = old q * q_shrink.
  double q_shrink = 0.1;
  double min_improvement = 0.001;
  std::size_t max_rounds = 4;
  std::vector<std::string> refinable_params{param_names::c, param_names::coef0};

  void validate() const;
  void validate(const ParameterSpace& space) const;
  bool is_failing(const EvaluationRecord& r) const { return r.failed() || r.objective <= fail_threshold; }
};

/// How one parameter's range was cut.
struct PruneReport {
  ParameterDef before;
  ParameterDef after;
  /// Largest failing value below the survivors / smallest above, if any.
  std::optional<double> failing_below;
  std::optional<double> failing_above;
  double survivor_min = 0.0;
  double survivor_max = 0.0;
  std::size_t failing_count = 0;
};

/// Narrows `param` to the region between the failing frontier and the
/// top-decile survivors, and shrinks q.
///
/// Survivors S are the best ceil(n/10) non-failing records. A failing
/// record is charged to `param` when every other refinable parameter of
/// that record lies inside the span of all non-failing records; otherwise
/// another parameter explains the failure. On each side, the bound moves to the first old
/// grid point past the nearest charged failure (minus prune_margin steps);
/// a side without charged failures shrinks to the span of S padded by 10%
/// of the current range. Bounds are clamped to the old range and re-snapped
/// to the new q.
///
/// Throws InvalidInput for an empty database and Refusal when every record fails.
ParameterDef prune_range(const PerformanceDatabase& db, const ParameterDef& param, const RefinementPolicy& policy,
                         PruneReport* report = nullptr);

struct RefinementDecision {
  enum class Kind { stop, refine };
  Kind kind = Kind::refine;
  EvaluationRecord best;
  /// The space for the next round; equal to the input space on stop.
  ParameterSpace new_space;
  std::vector<PruneReport> pruned;
  std::string rationale;

  TextDocument to_document() const;
};

/// Stops when a previous best exists, the improvement is below
/// min_improvement and nothing failed; otherwise prunes every refinable
/// parameter present in `space`.
RefinementDecision analyze(const PerformanceDatabase& db, const ParameterSpace& space,
                           std::optional<double> prev_best, const RefinementPolicy& policy);

struct RoundResult {
  ParameterSpace space;
  PerformanceDatabase database;
  RefinementDecision decision;
};

struct FrameworkResult {
  EvaluationRecord best;
  std::vector<RoundResult> rounds;
  /// True when max_rounds ran out before the stop rule fired.
  bool budget_stopped = false;
};

struct FrameworkHooks {
  std::ostream* progress = nullptr;
  /// When set, round_<k>.csv, round_<k>_space.txt and refine_<k>.txt are written here.
  std::optional<std::filesystem::path> out_dir;
};

/// Tune, analyze, refine, repeat. Round k uses seed tuner.seed + k - 1 and
/// a fresh surrogate.
FrameworkResult run_framework(const ParameterSpace& initial_space, const Objective& objective,
                              const RefinementPolicy& policy, const TunerSettings& tuner,
                              const FrameworkHooks& hooks = {});

}  // namespace mksvm
