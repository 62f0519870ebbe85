#include "mksvm/refinement.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <map>
#include <ostream>

#include "mksvm/error.hpp"

namespace mksvm {

namespace {

constexpr double kSlack = 1e-7;
constexpr double kPadFraction = 0.1;

double tidy(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return std::strtod(buf, nullptr);
}

// Largest point of the grid lower + k*step not exceeding v.
double floor_to_grid(double v, double lower, double step) {
  const double k = std::floor((v - lower) / step + kSlack);
  return tidy(lower + std::max(0.0, k) * step);
}

std::string describe(const std::optional<double>& v) { return v ? format_double(*v) : "none"; }

}  // namespace

void RefinementPolicy::validate() const {
  if (!(fail_threshold >= 0.0 && fail_threshold <= 1.0)) throw InvalidInput("fail_threshold must lie in [0, 1]");
  if (!(prune_margin >= 0.0)) throw InvalidInput("prune_margin must be nonnegative");
  if (!(q_shrink > 0.0 && q_shrink < 1.0)) throw InvalidInput("q_shrink must lie in (0, 1)");
  if (!(min_improvement >= 0.0)) throw InvalidInput("min_improvement must be nonnegative");
  if (max_rounds < 1) throw InvalidInput("max_rounds must be >= 1");
}

void RefinementPolicy::validate(const ParameterSpace& space) const {
  validate();
  for (const auto& name : refinable_params)
    if (!space.contains(name)) throw InvalidInput("refinable parameter '" + name + "' is not in the space");
}

ParameterDef prune_range(const PerformanceDatabase& db, const ParameterDef& param, const RefinementPolicy& policy,
                         PruneReport* report) {
  if (db.empty()) throw InvalidInput("prune_range: empty database");
  const auto& names = db.param_names();
  if (std::find(names.begin(), names.end(), param.name) == names.end())
    throw InvalidInput("prune_range: database has no column '" + param.name + "'");

  std::vector<const EvaluationRecord*> survivors;
  for (const auto& r : db.records())
    if (!policy.is_failing(r)) survivors.push_back(&r);
  if (survivors.empty())
    throw Refusal("prune_range: every record fails; no surviving region for " + param.name);

  // Span of every refinable column over all surviving records, used to
  // decide which parameter a failure belongs to.
  std::map<std::string, std::pair<double, double>> span;
  for (const auto& name : policy.refinable_params) {
    if (std::find(names.begin(), names.end(), name) == names.end() || name == param.name) continue;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto* r : survivors) {
      const double v = r->config.at(name);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    span[name] = {lo, hi};
  }

  std::stable_sort(survivors.begin(), survivors.end(), [](const auto* a, const auto* b) {
    return a->objective > b->objective;
  });
  const std::size_t decile = (db.size() + 9) / 10;
  survivors.resize(std::clamp<std::size_t>(decile, 1, survivors.size()));
  double s_min = std::numeric_limits<double>::infinity(), s_max = -s_min;
  for (const auto* r : survivors) {
    s_min = std::min(s_min, r->config.at(param.name));
    s_max = std::max(s_max, r->config.at(param.name));
  }

  std::optional<double> fail_below, fail_above;
  std::size_t charged = 0;
  for (const auto& r : db.records()) {
    if (!policy.is_failing(r)) continue;
    const bool explained_elsewhere = std::any_of(span.begin(), span.end(), [&](const auto& kv) {
      const double v = r.config.at(kv.first);
      return v < kv.second.first || v > kv.second.second;
    });
    if (explained_elsewhere) continue;
    ++charged;
    const double v = r.config.at(param.name);
    if (v < s_min && (!fail_below || v > *fail_below)) fail_below = v;
    if (v > s_max && (!fail_above || v < *fail_above)) fail_above = v;
  }

  const double q_old = param.q;
  const double q_new = q_old * policy.q_shrink;
  const double pad = kPadFraction * (param.upper - param.lower);

  double lo = fail_below ? *fail_below + q_old - policy.prune_margin * q_old : s_min - pad;
  double hi = fail_above ? *fail_above - q_old + policy.prune_margin * q_old : s_max + pad;
  lo = floor_to_grid(std::max(lo, param.lower), param.lower, q_old);
  hi = std::min(hi, param.upper);

  double steps = std::floor((hi - lo) / q_new + kSlack);
  if (steps < 1.0) {
    // Keep at least two grid points.
    if (lo + q_new <= param.upper) {
      steps = 1.0;
    } else {
      lo = tidy(param.upper - q_new);
      steps = 1.0;
    }
  }
  ParameterDef out{param.name, lo, std::min(tidy(lo + steps * q_new), param.upper), tidy(q_new), param.scale};

  if (report) {
    report->before = param;
    report->after = out;
    report->failing_below = fail_below;
    report->failing_above = fail_above;
    report->survivor_min = s_min;
    report->survivor_max = s_max;
    report->failing_count = charged;
  }
  return out;
}

TextDocument RefinementDecision::to_document() const {
  TextDocument doc;
  doc.top.emplace_back("decision", kind == Kind::stop ? "stop" : "refine");
  doc.top.emplace_back("rationale", rationale);
  doc.top.emplace_back("best_objective", format_double(best.objective));
  doc.top.emplace_back("best_sequence_index", std::to_string(best.sequence_index));
  for (const auto& [name, value] : best.config.values) doc.top.emplace_back("best." + name, format_double(value));
  for (const auto& p : pruned) {
    doc.sections.push_back({p.before.name,
                            {{"old_lower", format_double(p.before.lower)},
                             {"old_upper", format_double(p.before.upper)},
                             {"old_q", format_double(p.before.q)},
                             {"new_lower", format_double(p.after.lower)},
                             {"new_upper", format_double(p.after.upper)},
                             {"new_q", format_double(p.after.q)},
                             {"failing_below", describe(p.failing_below)},
                             {"failing_above", describe(p.failing_above)},
                             {"failing_count", std::to_string(p.failing_count)},
                             {"survivor_min", format_double(p.survivor_min)},
                             {"survivor_max", format_double(p.survivor_max)}}});
  }
  return doc;
}

RefinementDecision analyze(const PerformanceDatabase& db, const ParameterSpace& space,
                           std::optional<double> prev_best, const RefinementPolicy& policy) {
  if (db.empty()) throw InvalidInput("analyze: empty database");
  policy.validate();

  RefinementDecision d;
  d.best = best_record(db);
  d.new_space = space;
  const auto failures = static_cast<std::size_t>(
      std::count_if(db.records().begin(), db.records().end(), [&](const auto& r) { return policy.is_failing(r); }));

  if (prev_best && d.best.objective - *prev_best < policy.min_improvement && failures == 0) {
    d.kind = RefinementDecision::Kind::stop;
    d.rationale = "no improvement over " + format_double(*prev_best) + " and no failing evaluations";
    return d;
  }

  d.kind = RefinementDecision::Kind::refine;
  for (const auto& name : policy.refinable_params) {
    if (!space.contains(name)) continue;
    PruneReport rep;
    d.new_space = d.new_space.with(prune_range(db, space.get(name), policy, &rep));
    d.pruned.push_back(rep);
  }
  d.rationale = failures > 0 ? std::to_string(failures) + " failing evaluations; ranges pruned"
                             : (prev_best ? "accuracy improved; ranges narrowed around the best region"
                                          : "first round; ranges narrowed around the best region");
  return d;
}

FrameworkResult run_framework(const ParameterSpace& initial_space, const Objective& objective,
                              const RefinementPolicy& policy, const TunerSettings& tuner,
                              const FrameworkHooks& hooks) {
  policy.validate();
  tuner.validate();
  FrameworkResult out;
  ParameterSpace space = initial_space;
  std::optional<double> prev_best;
  bool have_best = false;

  for (std::size_t round = 1; round <= policy.max_rounds; ++round) {
    TunerSettings settings = tuner;
    settings.seed = tuner.seed + (round - 1);
    TuningHooks th;
    th.progress = hooks.progress;
    const std::string stem = "round_" + std::to_string(round);
    if (hooks.out_dir) {
      th.database_path = *hooks.out_dir / (stem + ".csv");
      write_space(space, *hooks.out_dir / (stem + "_space.txt"));
    }
    if (hooks.progress) *hooks.progress << "round " << round << ": tuning " << space.size() << " parameters\n";

    PerformanceDatabase db = run_tuning(space, objective, settings, th);
    const EvaluationRecord round_best = best_record(db);
    if (!have_best || round_best.objective > out.best.objective) {
      out.best = round_best;
      have_best = true;
    }

    RefinementDecision decision = analyze(db, space, prev_best, policy);
    if (hooks.out_dir) decision.to_document().save(*hooks.out_dir / ("refine_" + std::to_string(round) + ".txt"));
    if (hooks.progress)
      *hooks.progress << "round " << round << ": best " << format_double(round_best.objective) << "; "
                      << (decision.kind == RefinementDecision::Kind::stop ? "stop" : "refine") << " ("
                      << decision.rationale << ")\n";

    const bool stop = decision.kind == RefinementDecision::Kind::stop;
    ParameterSpace next = decision.new_space;
    out.rounds.push_back({space, std::move(db), std::move(decision)});
    if (stop) return out;
    prev_best = out.best.objective;
    space = std::move(next);
  }
  out.budget_stopped = true;
  return out;
}

}  // namespace mksvm
