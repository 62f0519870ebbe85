#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <memory>
#include <cmath>
#include <fstream>
#include <ostream>

#include "mksvm/error.hpp"
#include "mksvm/number_text.hpp"
#include "mksvm/text_format.hpp"

namespace mksvm::cli {

namespace {

std::vector<std::string> split_colon(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(':', start);
    out.push_back(s.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

double field_number(const std::vector<std::string>& parts, std::size_t i, double fallback) {
  if (parts.size() <= i || parts[i].empty()) return fallback;
  const auto v = parse_double(parts[i]);
  if (!v) throw InvalidInput("dataset descriptor: '" + parts[i] + "' is not a number");
  return *v;
}

Dataset load_dataset(const RunConfig& cfg) {
  const auto parts = split_colon(cfg.dataset);
  if (parts[0] == "rings") {
    return gen_rings(static_cast<std::size_t>(field_number(parts, 1, 400)), field_number(parts, 2, 0.05), cfg.seed);
  }
  if (parts[0] == "blobs") {
    return gen_blobs(static_cast<std::size_t>(field_number(parts, 1, 3)),
                     static_cast<std::size_t>(field_number(parts, 2, 30)),
                     static_cast<std::size_t>(field_number(parts, 3, 2)), 6.0, 1.0, cfg.seed);
  }
  const bool numeric = !cfg.label_column.empty() &&
                       std::all_of(cfg.label_column.begin(), cfg.label_column.end(), ::isdigit);
  const LabelColumn col = numeric ? LabelColumn{static_cast<std::size_t>(std::stoul(cfg.label_column))}
                                  : LabelColumn{cfg.label_column};
  return load_csv(cfg.dataset, col, cfg.has_header);
}

// Fills parameters the configuration leaves out with baseline values snapped to the space.
Configuration complete(const Configuration& given, const ParameterSpace& space, const KernelParams& base) {
  Configuration c;
  const Configuration base_cfg{{{param_names::mixed_ratio, base.mixed_ratio},
                                {param_names::sigmoid_ratio, base.sigmoid_ratio},
                                {param_names::gaussian_ratio, base.gaussian_ratio},
                                {param_names::c, base.c},
                                {param_names::coef0, base.coef0}}};
  for (const auto& p : space.params()) {
    if (given.contains(p.name)) c.values[p.name] = given.at(p.name);
    else if (base_cfg.contains(p.name)) c.values[p.name] = quantize(base_cfg.at(p.name), p);
    else throw InvalidInput("no value for parameter '" + p.name + "'");
  }
  for (const auto& [name, v] : given.values)
    if (!space.contains(name)) throw InvalidInput("parameter '" + name + "' is not in the space");
  space.validate(c);
  return c;
}

void write_series(const PerformanceDatabase& db, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "seq,objective,running_best\n";
  const auto best = running_best(db);
  for (std::size_t i = 0; i < db.size(); ++i)
    out << db.records()[i].sequence_index << "," << format_double(db.records()[i].objective) << ","
        << format_double(best[i].second) << "\n";
}

void log_line(const RunConfig& cfg, const std::string& s) {
  if (cfg.log) *cfg.log << s << "\n";
}

}  // namespace

KernelParams baseline_params(std::size_t dims) {
  KernelParams p;
  p.mixed_ratio = 0.5;
  p.sigmoid_ratio = 1.0 / static_cast<double>(std::max<std::size_t>(dims, 1));
  p.gaussian_ratio = p.sigmoid_ratio;
  p.c = 1.0;
  p.coef0 = 0.0;
  return p;
}

double Problem::score(const Configuration& c) const {
  const KernelParams p = to_kernel_params(c, defaults);
  const auto model = train_ovo(train.features, train.labels, p, settings);
  return metric == Metric::overall ? accuracy(model, test.features, test.labels)
                                   : class_averaged_accuracy(model, test.features, test.labels);
}

Problem prepare_problem(const RunConfig& cfg) {
  Dataset data = load_dataset(cfg);
  data.validate();
  std::mt19937_64 rng(cfg.seed);
  auto [train, test] = split(data, cfg.test_fraction, rng, true);
  if (cfg.standardize) {
    const auto s = fit_standardizer(train);
    train = apply_standardizer(s, train);
    test = apply_standardizer(s, test);
  }
  Problem p{std::move(train), std::move(test), cfg.metric, cfg.train, {}};
  p.defaults = baseline_params(p.train.dims());
  return p;
}

ParameterSpace resolve_space(const RunConfig& cfg) {
  if (cfg.space == "default") return default_space();
  return read_space(cfg.space);
}

double slabs_objective(const Configuration& c) {
  const double cv = c.contains(param_names::c) ? c.at(param_names::c) : 1.0;
  const double coef0 = c.contains(param_names::coef0) ? c.at(param_names::coef0) : 0.0;
  if (cv <= 0.36 + 1e-9 || std::abs(coef0) > 1.0 + 1e-9) return 0.052;
  const double lc = std::log(cv / 2.0);
  return 0.8 + 0.15 * std::exp(-lc * lc / (2 * 1.5 * 1.5) - (coef0 - 0.5) * (coef0 - 0.5) / (2 * 0.5 * 0.5));
}

Objective make_objective(const RunConfig& cfg) {
  if (cfg.objective == ObjectiveKind::slabs) return slabs_objective;
  auto problem = std::make_shared<const Problem>(prepare_problem(cfg));
  return [problem](const Configuration& c) { return problem->score(c); };
}

void write_best_report(const EvaluationRecord& best, const std::filesystem::path& path) {
  TextDocument doc;
  doc.top.emplace_back("objective", format_double(best.objective));
  doc.top.emplace_back("sequence_index", std::to_string(best.sequence_index));
  for (const auto& [name, v] : best.config.values) doc.top.emplace_back(name, format_double(v));
  doc.save(path);
}

double cmd_evaluate(const RunConfig& cfg, const Configuration& config) {
  const ParameterSpace space = resolve_space(cfg);
  std::filesystem::create_directories(cfg.out_dir);
  double value;
  Configuration full;
  if (cfg.objective == ObjectiveKind::slabs) {
    full = complete(config, space, baseline_params(2));
    value = slabs_objective(full);
  } else {
    const Problem problem = prepare_problem(cfg);
    full = complete(config, space, problem.defaults);
    value = problem.score(full);
  }
  PerformanceDatabase db(space);
  db.append({full, value, 0.0, 0, 0, false});
  db.save(cfg.out_dir / "evaluate.csv");
  log_line(cfg, "objective " + format_double(value));
  return value;
}

TuneSummary cmd_tune(const RunConfig& cfg) {
  const ParameterSpace space = resolve_space(cfg);
  std::filesystem::create_directories(cfg.out_dir);
  TunerSettings ts = cfg.tuner;
  ts.seed = cfg.seed;
  const auto db = run_tuning(space, make_objective(cfg), ts, {cfg.log, cfg.out_dir / "tune.csv"});
  write_series(db, cfg.out_dir / "running_best.csv");
  const auto best = best_record(db);
  write_best_report(best, cfg.out_dir / "best.txt");
  log_line(cfg, "best objective " + format_double(best.objective) + " at evaluation " +
                    std::to_string(best.sequence_index));
  return {best, db.size()};
}

FrameworkResult cmd_refine(const RunConfig& cfg) {
  const ParameterSpace space = resolve_space(cfg);
  std::vector<std::string> refinable;
  for (const auto& n : cfg.policy.refinable_params)
    if (space.contains(n)) refinable.push_back(n);
  RefinementPolicy policy = cfg.policy;
  policy.refinable_params = refinable;
  std::filesystem::create_directories(cfg.out_dir);
  TunerSettings ts = cfg.tuner;
  ts.seed = cfg.seed;
  auto result = run_framework(space, make_objective(cfg), policy, ts, {cfg.log, cfg.out_dir});
  write_best_report(result.best, cfg.out_dir / "best.txt");
  log_line(cfg, "best objective " + format_double(result.best.objective) + " after " +
                    std::to_string(result.rounds.size()) + " round(s)" +
                    (result.budget_stopped ? " (round limit reached)" : ""));
  return result;
}

TuneSummary cmd_grid(const RunConfig& cfg, std::size_t cap) {
  const ParameterSpace space = resolve_space(cfg);
  const auto grid = grid_enumerate(space, cap);
  std::filesystem::create_directories(cfg.out_dir);
  const Objective objective = make_objective(cfg);
  PerformanceDatabase db(space);
  db.attach(cfg.out_dir / "grid.csv");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double v;
    const auto start = std::chrono::steady_clock::now();
    try {
      v = objective(grid[i]);
      if (!std::isfinite(v) || v < 0.0 || v > 1.0) v = kFailureSentinel;
    } catch (const std::exception&) {
      v = kFailureSentinel;
    }
    const std::chrono::duration<double> took = std::chrono::steady_clock::now() - start;
    db.append({grid[i], v, took.count(), i, 0, false});
  }
  const auto best = best_record(db);
  write_best_report(best, cfg.out_dir / "best.txt");
  log_line(cfg, "grid of " + std::to_string(grid.size()) + ": best objective " + format_double(best.objective));
  return {best, db.size()};
}

void cmd_plotdata(const std::filesystem::path& db_path, const std::filesystem::path& out_path) {
  write_series(PerformanceDatabase::load(db_path), out_path);
}

}  // namespace mksvm::cli
