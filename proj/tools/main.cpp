#include <algorithm>
#include <iostream>

#include "CLI11.hpp"
#include "cli.hpp"
#include "mksvm/error.hpp"
#include "mksvm/text_format.hpp"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

}  // namespace

int main(int argc, char** argv) {
  using namespace mksvm;
  using namespace mksvm::cli;

  CLI::App app{"Mixed-kernel SVM hyperparameter autotuning"};
  app.require_subcommand(1);

  RunConfig cfg;
  cfg.log = &std::cout;
  std::string metric = "overall";
  std::string objective = "svm";
  bool no_standardize = false;
  bool no_header = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--dataset", cfg.dataset, "CSV file, or rings[:n[:noise]] / blobs[:k[:per_class[:dims]]]");
    sub->add_option("--label-column", cfg.label_column, "label column name, or zero-based index");
    sub->add_flag("--no-header", no_header, "CSV has no header line");
    sub->add_flag("--no-standardize", no_standardize, "skip feature standardization");
    sub->add_option("--metric", metric, "overall | class-averaged")
        ->check(CLI::IsMember({"overall", "class-averaged"}));
    sub->add_option("--objective", objective, "svm | slabs (closed-form benchmark)")
        ->check(CLI::IsMember({"svm", "slabs"}));
    sub->add_option("--space", cfg.space, "space file, or 'default'");
    sub->add_option("--test-fraction", cfg.test_fraction, "held-out fraction");
    sub->add_option("--seed", cfg.seed, "random seed");
    sub->add_option("--out", cfg.out_dir, "output directory");
  };
  auto add_tuning = [&](CLI::App* sub) {
    sub->add_option("--budget", cfg.tuner.budget, "evaluations per tuning run");
    sub->add_option("--initial", cfg.tuner.n_initial, "random warm-up evaluations");
    sub->add_option("--workers", cfg.tuner.n_workers, "parallel evaluators");
    sub->add_option("--kappa", cfg.tuner.kappa, "LCB exploration weight");
    sub->add_option("--candidates", cfg.tuner.n_candidates, "acquisition sample size");
  };

  auto* evaluate = app.add_subcommand("evaluate", "score one configuration");
  add_common(evaluate);
  std::string config_file;
  std::vector<std::string> sets;
  evaluate->add_option("--config", config_file, "configuration file (name = value lines)");
  evaluate->add_option("--set", sets, "name=value override")->take_all();

  auto* tune = app.add_subcommand("tune", "Bayesian optimization over the space");
  add_common(tune);
  add_tuning(tune);

  auto* refine = app.add_subcommand("refine", "tune, prune C/coef0 ranges, repeat");
  add_common(refine);
  add_tuning(refine);
  refine->add_option("--rounds", cfg.policy.max_rounds, "maximum rounds");
  refine->add_option("--fail-threshold", cfg.policy.fail_threshold, "objective at or below this fails");
  refine->add_option("--prune-margin", cfg.policy.prune_margin, "grid steps kept past a failing frontier");

  auto* grid = app.add_subcommand("grid", "exhaustive search of a small space");
  add_common(grid);
  std::size_t cap = 10000;
  grid->add_option("--cap", cap, "refuse grids larger than this");

  auto* plot = app.add_subcommand("plotdata", "seq,objective,running_best series from a database");
  std::string db_path, series_path;
  plot->add_option("db", db_path, "database CSV")->required();
  plot->add_option("--out", series_path, "series file (default <db>.series.csv)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  // Only the default warm-up size shrinks to fit a small budget.
  for (auto* sub : {tune, refine})
    if (sub->parsed() && sub->count("--initial") == 0)
      cfg.tuner.n_initial = std::min(cfg.tuner.n_initial, cfg.tuner.budget);
  cfg.standardize = !no_standardize;
  cfg.has_header = !no_header;
  cfg.metric = metric == "overall" ? Metric::overall : Metric::class_averaged;
  cfg.objective = objective == "svm" ? ObjectiveKind::svm : ObjectiveKind::slabs;

  try {
    if (evaluate->parsed()) {
      Configuration c;
      if (!config_file.empty()) c = read_configuration(config_file);
      for (const auto& s : sets) {
        const auto eq = s.find('=');
        const auto v = eq == std::string::npos ? std::nullopt : parse_double(s.substr(eq + 1));
        if (!v) throw InvalidInput("--set expects name=value, got '" + s + "'");
        c.values[s.substr(0, eq)] = *v;
      }
      cmd_evaluate(cfg, c);
    } else if (tune->parsed()) {
      cmd_tune(cfg);
    } else if (refine->parsed()) {
      cmd_refine(cfg);
    } else if (grid->parsed()) {
      cmd_grid(cfg, cap);
    } else if (plot->parsed()) {
      cmd_plotdata(db_path, series_path.empty() ? db_path + ".series.csv" : series_path);
    }
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const IntegrityError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const Refusal& e) {
    std::cerr << "refused: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "failed: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
