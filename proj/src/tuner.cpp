#include "mksvm/tuner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <set>
#include <string>
#include <thread>

#include "mksvm/channel.hpp"
#include "mksvm/error.hpp"

namespace mksvm {

namespace {

using Key = std::vector<double>;

struct Task {
  std::size_t dispatch_index;
  Configuration config;
  bool fallback;
};

struct Result {
  int worker_id;
  Task task;
  double objective;
  double elapsed_seconds;
};

double guarded_call(const Objective& objective, const Configuration& c) {
  try {
    const double v = objective(c);
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) return kFailureSentinel;
    return v;
  } catch (...) {
    return kFailureSentinel;
  }
}

// A worker evaluates whatever arrives on its inbox and posts the outcome to
// the shared outbox. Workers never talk to each other.
class Worker {
 public:
  Worker(int id, const Objective& objective, Channel<Result>& outbox)
      : thread_([this, id, &objective, &outbox] {
          while (auto task = inbox_.pop()) {
            const auto start = std::chrono::steady_clock::now();
            const double value = guarded_call(objective, task->config);
            const std::chrono::duration<double> took = std::chrono::steady_clock::now() - start;
            outbox.push(Result{id, std::move(*task), value, took.count()});
          }
        }) {}

  ~Worker() {
    inbox_.close();
    if (thread_.joinable()) thread_.join();
  }

  void send(Task t) { inbox_.push(std::move(t)); }

 private:
  Channel<Task> inbox_;
  std::thread thread_;
};

RandomForest train_surrogate(const ParameterSpace& space, const std::vector<EvaluationRecord>& history,
                             const TunerSettings& settings) {
  Matrix x;
  std::vector<double> y;
  for (const auto& r : history) {
    x.append_row(encode(r.config, space));
    y.push_back(surrogate_loss(r));
  }
  ForestParams fp = settings.forest;
  fp.seed = settings.seed * 0x9E3779B97F4A7C15ull + history.size();
  return fit(x, y, fp);
}

std::set<Key> seen_keys(const std::vector<EvaluationRecord>& history, const std::vector<Configuration>& pending,
                        const ParameterSpace& space) {
  std::set<Key> seen;
  for (const auto& r : history) seen.insert(space.values_of(r.config));
  for (const auto& c : pending) seen.insert(space.values_of(c));
  return seen;
}

// Warm-up draw that avoids repeats; gives up after `tries` draws.
Proposal fresh_sample(const std::vector<EvaluationRecord>& history, const std::vector<Configuration>& pending,
                      const ParameterSpace& space, std::size_t tries, std::mt19937_64& rng) {
  const auto seen = seen_keys(history, pending, space);
  Configuration c;
  for (std::size_t i = 0; i < tries; ++i) {
    c = sample(space, rng);
    if (!seen.count(space.values_of(c))) return {std::move(c), false};
  }
  return {std::move(c), true};
}

}  // namespace

void TunerSettings::validate() const {
  if (budget < 1) throw InvalidInput("budget must be >= 1");
  if (n_initial < 1) throw InvalidInput("n_initial must be >= 1");
  if (n_initial > budget) throw InvalidInput("n_initial must not exceed budget");
  if (!(kappa >= 0.0)) throw InvalidInput("kappa must be nonnegative");
  if (n_candidates < 1) throw InvalidInput("n_candidates must be >= 1");
  if (retrain_every < 1) throw InvalidInput("retrain_every must be >= 1");
  if (n_workers < 1) throw InvalidInput("n_workers must be >= 1");
  forest.validate();
}

double lcb(double mean, double std, double kappa) { return mean - kappa * std; }

double surrogate_loss(const EvaluationRecord& r) { return r.failed() ? 1.0 : 1.0 - r.objective; }

Proposal propose(const std::vector<EvaluationRecord>& history, const std::vector<Configuration>& pending,
                 const ParameterSpace& space, const RandomForest& forest, const TunerSettings& settings,
                 std::mt19937_64& rng) {
  const auto seen = seen_keys(history, pending, space);
  std::optional<Configuration> best;
  double best_score = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < settings.n_candidates; ++i) {
    Configuration c = sample(space, rng);
    if (seen.count(space.values_of(c))) continue;
    const auto [mean, sd] = predict_mean_std(forest, encode(c, space));
    const double score = lcb(mean, sd, settings.kappa);
    if (!best || score < best_score) {
      best_score = score;
      best = std::move(c);
    }
  }
  if (best) return {std::move(*best), false};
  return {sample(space, rng), true};
}

PerformanceDatabase run_tuning(const ParameterSpace& space, const Objective& objective,
                               const TunerSettings& settings, const TuningHooks& hooks) {
  settings.validate();
  if (space.size() == 0) throw InvalidInput("run_tuning: empty parameter space");

  PerformanceDatabase db(space);
  if (hooks.database_path) db.attach(*hooks.database_path);

  std::mt19937_64 rng(settings.seed);
  std::vector<EvaluationRecord> history;
  std::vector<std::optional<Configuration>> in_flight(settings.n_workers);
  std::optional<RandomForest> forest;
  std::size_t trained_on = 0;
  std::size_t dispatched = 0;
  double running = -std::numeric_limits<double>::infinity();

  auto next_task = [&]() -> Task {
    const std::size_t index = dispatched++;
    std::vector<Configuration> pending;
    for (const auto& c : in_flight)
      if (c) pending.push_back(*c);
    if (index < settings.n_initial || history.empty()) {
      auto p = fresh_sample(history, pending, space, settings.n_candidates, rng);
      return {index, std::move(p.config), p.fallback};
    }
    if (!forest || history.size() - trained_on >= settings.retrain_every) {
      forest = train_surrogate(space, history, settings);
      trained_on = history.size();
    }
    auto p = propose(history, pending, space, *forest, settings, rng);
    return {index, std::move(p.config), p.fallback};
  };

  Channel<Result> outbox;
  {
    std::vector<std::unique_ptr<Worker>> workers;
    for (std::size_t w = 0; w < settings.n_workers; ++w)
      workers.push_back(std::make_unique<Worker>(static_cast<int>(w), objective, outbox));

    auto dispatch = [&](std::size_t w) {
      Task t = next_task();
      in_flight[w] = t.config;
      workers[w]->send(std::move(t));
    };
    for (std::size_t w = 0; w < settings.n_workers && dispatched < settings.budget; ++w) dispatch(w);

    while (history.size() < settings.budget) {
      auto msg = outbox.pop();
      if (!msg) break;
      const auto w = static_cast<std::size_t>(msg->worker_id);
      in_flight[w].reset();

      EvaluationRecord r;
      r.config = std::move(msg->task.config);
      r.objective = msg->objective;
      r.elapsed_seconds = msg->elapsed_seconds;
      r.sequence_index = history.size();
      r.worker_id = msg->worker_id;
      r.fallback = msg->task.fallback;
      db.append(r);
      history.push_back(std::move(r));

      const auto& last = history.back();
      running = std::max(running, last.objective);
      if (hooks.progress) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "eval %zu  objective %.6f  elapsed %.3fs  best %.6f\n",
                      last.sequence_index, last.objective, last.elapsed_seconds, running);
        *hooks.progress << buf << std::flush;
      }
      if (dispatched < settings.budget) dispatch(w);
    }
  }  // workers drain and join here
  return db;
}

EvaluationRecord best_record(const PerformanceDatabase& db) {
  if (db.empty()) throw InvalidInput("best_record: empty database");
  const EvaluationRecord* best = &db.records().front();
  for (const auto& r : db.records())
    if (r.objective > best->objective ||
        (r.objective == best->objective && r.sequence_index < best->sequence_index))
      best = &r;
  return *best;
}

}  // namespace mksvm
