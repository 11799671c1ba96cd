#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "fairprobe/cli.hpp"

int main(int argc, char** argv) {
  using fairprobe::cli::Mode;
  using fairprobe::cli::RunConfig;

  CLI::App app{"fairprobe: finds the most-discriminated subgroup under a "
               "model's predictions and distills it into rules"};
  app.set_version_flag("--version", fairprobe::cli::kVersion);

  RunConfig cfg;
  std::string mode = "ie-dt";
  std::string grouping = "attribute";
  std::vector<std::string> formats;
  std::vector<std::string> hint_cat, hint_cont;

  app.add_option("--input", cfg.input,
                 "CSV file: header row, attribute columns plus the prediction column")
      ->required();
  app.add_option("--fav-column", cfg.fav_column,
                 "name of the prediction column")->required();
  app.add_option("--fav-value", cfg.fav_value,
                 "prediction value counted as favorable")->required();
  app.add_option("--sensitive", cfg.sensitive,
                 "attribute to audit (repeatable; default: all attributes)");
  app.add_option("--hint-categorical", hint_cat,
                 "force a column to be treated as categorical (repeatable)");
  app.add_option("--hint-continuous", hint_cont,
                 "force a column to be treated as continuous (repeatable)");
  app.add_option("--k", cfg.k, "key attribute budget")->capture_default_str();
  app.add_option("--alpha", cfg.alpha, "group size lower bound (fraction of rows)")
      ->capture_default_str();
  app.add_option("--beta", cfg.beta, "group size upper bound (fraction of rows)")
      ->capture_default_str();
  app.add_option("--lambda", cfg.lambda, "sparsity penalty weight")
      ->capture_default_str();
  app.add_option("--mode", mode, "ie | ie-dt | enum")
      ->check(CLI::IsMember({"ie", "ie-dt", "enum"}))
      ->capture_default_str();
  app.add_option("--seed", cfg.solver.seed, "base RNG seed")->capture_default_str();
  app.add_option("--seeds", cfg.seeds,
                 "number of consecutive seeds to try; the best evidence is kept")
      ->capture_default_str();
  app.add_option("--lr", cfg.solver.learning_rate, "ascent step size")
      ->capture_default_str();
  app.add_option("--iters", cfg.solver.iterations, "total ascent iterations")
      ->capture_default_str();
  app.add_option("--clip-norm", cfg.solver.clip_norm, "gradient 2-norm cap")
      ->capture_default_str();
  app.add_option("--penalty-rounds", cfg.solver.penalty_rounds,
                 "size-constraint escalation rounds")->capture_default_str();
  app.add_option("--mu-init", cfg.solver.mu_init,
                 "initial size-constraint weight")->capture_default_str();
  app.add_option("--mu-growth", cfg.solver.mu_growth,
                 "size-constraint weight multiplier per round")
      ->capture_default_str();
  app.add_option("--init-scale", cfg.solver.init_scale,
                 "stddev of the weight init")->capture_default_str();
  app.add_option("--k-grouping", grouping,
                 "how k is counted: attribute | column")
      ->check(CLI::IsMember({"attribute", "column"}))
      ->capture_default_str();
  app.add_option("--min-leaf", cfg.min_leaf,
                 "minimum rows per tree leaf (0 = max(5, n/200))")
      ->capture_default_str();
  app.add_option("--time-budget", cfg.time_budget_secs,
                 "enum search budget, seconds")->capture_default_str();
  app.add_option("--out", cfg.out_dir, "output directory")->capture_default_str();
  app.add_option("--format", formats,
                 "extra artifacts: text (rules.txt), dot (tree.dot); "
                 "report.json is always written");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;  // any usage problem is exit 1
  }

  cfg.mode = mode == "ie" ? Mode::ie : (mode == "enum" ? Mode::enumerate : Mode::ie_dt);
  cfg.k_grouping = grouping == "column" ? fairprobe::solver::KGrouping::column
                                        : fairprobe::solver::KGrouping::attribute;
  for (const auto& name : hint_cat)
    cfg.schema_hints[name] = fairprobe::dataset::AttrKind::categorical;
  for (const auto& name : hint_cont) {
    if (cfg.schema_hints.count(name)) {
      std::cerr << "error: conflicting schema hints for '" << name << "'\n";
      return 1;
    }
    cfg.schema_hints[name] = fairprobe::dataset::AttrKind::continuous;
  }
  for (const auto& f : formats) {
    if (f == "text") cfg.format_text = true;
    else if (f == "dot") cfg.format_dot = true;
    else if (f != "json") {
      std::cerr << "error: unknown format '" << f << "'\n";
      return 1;
    }
  }

  try {
    return fairprobe::cli::run(cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
