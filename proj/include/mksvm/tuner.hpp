#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <random>
#include <vector>

#include "mksvm/forest.hpp"
#include "mksvm/param_space.hpp"
#include "mksvm/perfdb.hpp"

namespace mksvm {

struct TunerSettings {
  std::size_t budget = 128;
  std::size_t n_initial = 16;
  double kappa = 1.96;
  std::size_t n_candidates = 512;
  std::size_t retrain_every = 1;
  std::size_t n_workers = 1;
  std::uint64_t seed = 0;
  ForestParams forest{};

  void validate() const;
};

/// Maps a configuration to an accuracy in [0,1]. May throw; a throw, a
/// non-finite value or a value outside [0,1] is recorded as a failure.
using Objective = std::function<double(const Configuration&)>;

/// Lower confidence bound on a minimized loss: mean - kappa * std.
double lcb(double mean, double std, double kappa);

/// Loss seen by the surrogate: 1 - objective, or 1 for failures.
double surrogate_loss(const EvaluationRecord& r);

struct Proposal {
  Configuration config;
  /// Every candidate was already evaluated or in flight.
  bool fallback = false;
};

/// Scores n_candidates random configurations by LCB and returns the lowest,
/// skipping anything in `history` or `pending`. Equal scores keep the
/// earliest draw.
Proposal propose(const std::vector<EvaluationRecord>& history, const std::vector<Configuration>& pending,
                 const ParameterSpace& space, const RandomForest& forest, const TunerSettings& settings,
                 std::mt19937_64& rng);

struct TuningHooks {
  /// One line per completed evaluation.
  std::ostream* progress = nullptr;
  /// When set, the database is written there and flushed per record.
  std::optional<std::filesystem::path> database_path;
};

/// Bayesian optimization with a random-forest surrogate. A manager thread
/// owns the history, the surrogate and the pending set; `n_workers`
/// threads evaluate and report back through a channel. Each completion is
/// recorded, the surrogate refreshed, and the freed worker handed a new
/// configuration immediately.
PerformanceDatabase run_tuning(const ParameterSpace& space, const Objective& objective,
                               const TunerSettings& settings, const TuningHooks& hooks = {});

/// Largest objective, lowest sequence index on ties.
EvaluationRecord best_record(const PerformanceDatabase& db);

}  // namespace mksvm
