#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rulex/pipeline.hpp"

using nlohmann::json;

namespace {

struct Flags {
  std::string config, dataset, hints, target, oracle, oracle_cmd, classes, miner, fitness, output;
  int n_trees = 0, max_depth = 0, samples = 0, top_k = 0, generations = 0, population = 0;
  int max_bins = 0, budget_factor = 0;
  double support = 0, crossover = 0, mutation = 0;
  std::vector<std::size_t> sizes;
  std::size_t robustness_size = 0;
  std::uint64_t seed = 0;
  bool robustness = false, augment = false, history = false;
};

std::vector<std::string> split_words(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep))
    if (!cur.empty()) out.push_back(cur);
  return out;
}

void add_run_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "JSON run configuration; flags override it");
  cmd->add_option("--dataset", f.dataset, "CSV file with a header row");
  cmd->add_option("--schema-hints", f.hints, "JSON map feature -> numeric|categorical");
  cmd->add_option("--target", f.target, "ground-truth column (default: last, builtin oracles)");
  cmd->add_option("--oracle", f.oracle, "tree | forest | external")
      ->check(CLI::IsMember({"tree", "forest", "external"}));
  cmd->add_option("--oracle-cmd", f.oracle_cmd, "external model command line");
  cmd->add_option("--classes", f.classes, "comma separated class labels of the external model");
  cmd->add_option("--n-trees", f.n_trees, "forest size");
  cmd->add_option("--max-depth", f.max_depth, "builtin oracle depth");
  cmd->add_option("--miner", f.miner, "local | frequent")
      ->check(CLI::IsMember({"local", "frequent"}));
  cmd->add_option("--support", f.support, "frequent miner support threshold");
  cmd->add_option("--samples", f.samples, "local explainer perturbation samples");
  cmd->add_option("--top-k", f.top_k, "conditions kept per local explanation");
  cmd->add_option("--budget-factor", f.budget_factor, "explanations per class instance");
  cmd->add_option("--generations", f.generations);
  cmd->add_option("--population", f.population);
  cmd->add_option("--crossover", f.crossover);
  cmd->add_option("--mutation", f.mutation);
  cmd->add_option("--fitness", f.fitness, "mi | f1")->check(CLI::IsMember({"mi", "f1"}));
  cmd->add_option("--sizes", f.sizes, "rule set sizes, ascending")->delimiter(',');
  cmd->add_flag("--robustness", f.robustness, "run the distribution shift analysis");
  cmd->add_option("--robustness-size", f.robustness_size);
  cmd->add_flag("--augment", f.augment, "augment training data with shifted samples");
  cmd->add_option("--max-bins", f.max_bins);
  cmd->add_option("--seed", f.seed);
  cmd->add_option("--output", f.output, "output directory");
  cmd->add_flag("--history", f.history, "write per-generation GA statistics");
}

rulex::RunConfig build_config(const CLI::App* cmd, const Flags& f) {
  auto set = [&](const char* name) { return cmd->count(name) > 0; };
  json base = json::object();
  if (set("--config")) {
    std::ifstream in(f.config);
    if (!in) throw rulex::UsageError("cannot open config '" + f.config + "'");
    try {
      base = json::parse(in);
    } catch (const json::exception& e) {
      throw rulex::UsageError("config '" + f.config + "': " + e.what());
    }
  }
  json j = json::object();
  if (set("--dataset")) j["dataset"] = f.dataset;
  if (set("--schema-hints")) j["schema_hints"] = f.hints;
  if (set("--target")) j["target"] = f.target;
  json o = json::object();
  if (set("--oracle")) {
    if (f.oracle == "external")
      o["external"] = split_words(f.oracle_cmd, ' ');
    else
      o["builtin"] = f.oracle;
  } else if (set("--oracle-cmd")) {
    o["external"] = split_words(f.oracle_cmd, ' ');
  }
  if (set("--classes")) o["classes"] = split_words(f.classes, ',');
  if (set("--n-trees")) o["n_trees"] = f.n_trees;
  if (set("--max-depth")) o["max_depth"] = f.max_depth;
  if (!o.empty()) j["oracle"] = o;
  json m = json::object();
  if (set("--miner")) m["kind"] = f.miner;
  if (set("--support")) m["support"] = f.support;
  if (set("--samples")) m["samples"] = f.samples;
  if (set("--top-k")) m["top_k"] = f.top_k;
  if (set("--budget-factor")) m["budget_factor"] = f.budget_factor;
  if (!m.empty()) j["miner"] = m;
  json g = json::object();
  if (set("--generations")) g["generations"] = f.generations;
  if (set("--population")) g["population_size"] = f.population;
  if (set("--crossover")) g["crossover_prob"] = f.crossover;
  if (set("--mutation")) g["mutation_prob"] = f.mutation;
  if (set("--fitness")) g["fitness"] = f.fitness;
  if (!g.empty()) j["ga"] = g;
  if (set("--sizes")) j["sizes"] = f.sizes;
  if (set("--robustness")) j["robustness"] = f.robustness;
  if (set("--robustness-size")) j["robustness_size"] = f.robustness_size;
  if (set("--augment")) j["augment"] = f.augment;
  if (set("--max-bins")) j["max_bins"] = f.max_bins;
  if (set("--seed")) j["seed"] = f.seed;
  if (set("--output")) j["output"] = f.output;
  if (set("--history")) j["history"] = f.history;

  auto cfg = rulex::RunConfig::from_json(j, rulex::RunConfig::from_json(base));
  cfg.validate();
  return cfg;
}

void print_scores(const std::map<std::size_t, double>& scores) {
  for (const auto& [k, v] : scores)
    std::cout << "  " << k << " rules: " << rulex::format_fixed(v) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Global rule-based explanations of black-box classifiers"};
  app.require_subcommand(1);

  Flags explain_flags, robust_flags, compare_flags;
  auto* explain = app.add_subcommand("explain", "induce an interpretation of the model");
  add_run_flags(explain, explain_flags);

  auto* robust = app.add_subcommand("robustness", "score interpretations on shifted data");
  add_run_flags(robust, robust_flags);
  std::vector<std::string> interp_files;
  robust->add_option("--interpretation", interp_files, "interpretation JSON files")
      ->required();

  auto* compare = app.add_subcommand("compare", "rule-set size comparison against baselines");
  add_run_flags(compare, compare_flags);

  auto* predict = app.add_subcommand("predict", "apply an interpretation to a CSV");
  std::string predict_interp, predict_input, predict_output;
  predict->add_option("--interpretation", predict_interp)->required();
  predict->add_option("--input", predict_input)->required();
  predict->add_option("--output", predict_output, "write here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*explain) {
      auto cfg = build_config(explain, explain_flags);
      auto res = rulex::cmd_explain(cfg);
      std::cout << "scoring Set-Score\n";
      print_scores(res.scoring_scores);
      for (const auto& p : res.interpretation_files) std::cout << "wrote " << p.string() << "\n";
      if (res.robustness) std::cout << rulex::robustness_markdown(*res.robustness);
    } else if (*robust) {
      auto cfg = build_config(robust, robust_flags);
      std::vector<std::filesystem::path> files(interp_files.begin(), interp_files.end());
      std::cout << rulex::robustness_markdown(rulex::cmd_robustness(cfg, files));
    } else if (*compare) {
      auto cfg = build_config(compare, compare_flags);
      auto res = rulex::cmd_compare(cfg);
      std::cout << rulex::comparison_markdown(res, cfg.sizes);
      if (res.robustness) std::cout << "\n" << rulex::robustness_markdown(*res.robustness);
    } else if (*predict) {
      auto preds = rulex::cmd_predict(predict_interp, predict_input);
      std::ofstream file;
      if (!predict_output.empty()) {
        file.open(predict_output, std::ios::binary);
        if (!file) throw std::runtime_error("cannot write '" + predict_output + "'");
      }
      std::ostream& out = predict_output.empty() ? std::cout : file;
      out << "row,prediction\n";
      for (std::size_t i = 0; i < preds.size(); ++i)
        out << i << "," << preds[i].value_or("abstain") << "\n";
    }
  } catch (const rulex::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const rulex::PipelineError& e) {
    std::cerr << "error in stage " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
