#include "rulex/pipeline.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "rulex/random.hpp"

namespace rulex {

using nlohmann::json;

namespace {

template <class F>
auto run_stage(const std::string& stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const PipelineError&) {
    throw;
  } catch (const UsageError&) {
    throw;
  } catch (const std::exception& e) {
    throw PipelineError(stage, e.what());
  }
}

std::string kind_name(OracleSpec::Kind k) {
  switch (k) {
    case OracleSpec::Kind::Tree: return "tree";
    case OracleSpec::Kind::Forest: return "forest";
    case OracleSpec::Kind::External: return "external";
  }
  return "";
}

std::string fitness_name(FitnessKind k) {
  return k == FitnessKind::MutualInformation ? "mutual_information" : "f1";
}

template <class T>
void read_field(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

std::string header_last_column(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty CSV input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  auto pos = line.rfind(',');
  return pos == std::string::npos ? line : line.substr(pos + 1);
}

template <class T>
std::vector<T> pick(const std::vector<T>& v, const std::vector<std::size_t>& idx) {
  std::vector<T> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(v[i]);
  return out;
}

std::filesystem::path interpretation_path(const RunConfig& cfg, const std::string& approach,
                                          std::size_t size) {
  return cfg.output_dir / ("interpretation_" + approach + "_" + std::to_string(size) + ".json");
}

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
  out << text;
}

json base_metadata(const RunConfig& cfg, const PreparedRun& run, std::size_t train_rows) {
  return {{"config_hash", cfg.hash()},
          {"dataset", cfg.dataset.filename().string()},
          {"oracle", kind_name(cfg.oracle.kind)},
          {"rows", {{"train", train_rows},
                    {"validation", run.valid_rows.size()},
                    {"scoring", run.score_rows.size()}}},
          {"augmented", cfg.augment}};
}

struct Selected {
  Interpretation interp;
  std::map<std::size_t, double> valid, scoring;
};

Selected select_and_score(std::span<const ScoredRule> candidates, const RunConfig& cfg,
                          const std::vector<CodedRow>& valid, std::span<const Label> valid_labels,
                          const std::vector<CodedRow>& score, std::span<const Label> score_labels,
                          const std::string& approach) {
  Selected s;
  s.interp = greedy_select(candidates, cfg.sizes.back(), valid, valid_labels);
  s.interp.approach = approach;
  s.interp.seed = cfg.seed;
  for (auto k : cfg.sizes) {
    auto p = s.interp.prefix(k);
    s.valid[k] = set_score(p, valid, valid_labels);
    s.scoring[k] = set_score(p, score, score_labels);
  }
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------

void RunConfig::validate() const {
  if (dataset.empty()) throw UsageError("missing dataset path");
  if (!std::filesystem::is_regular_file(dataset))
    throw UsageError("dataset not found: " + dataset.string());
  if (oracle.kind == OracleSpec::Kind::External && oracle.argv.empty())
    throw UsageError("external oracle needs a command");
  if (oracle.kind != OracleSpec::Kind::External && oracle.max_depth < 1)
    throw UsageError("oracle max_depth must be >= 1");
  if (oracle.kind == OracleSpec::Kind::Forest && oracle.n_trees < 1)
    throw UsageError("oracle n_trees must be >= 1");
  if (sizes.empty()) throw UsageError("selection sizes must not be empty");
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (sizes[i] == 0) throw UsageError("selection sizes must be positive");
    if (i > 0 && sizes[i] <= sizes[i - 1])
      throw UsageError("selection sizes must be ascending");
  }
  if (robustness_size == 0) throw UsageError("robustness size must be positive");
  if (miner.kind == MinerSpec::Kind::Frequent && !(miner.support > 0 && miner.support < 1))
    throw UsageError("miner support must be in (0,1)");
  if (miner.local.samples < 2 || miner.local.top_k < 1)
    throw UsageError("local explainer needs samples >= 2 and top_k >= 1");
  if (max_bins < 2) throw UsageError("max_bins must be >= 2");
  if (augment_marginal < 0 || augment_uniform < 0)
    throw UsageError("augmentation fractions must be non-negative");
  try {
    ga.validate();
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
}

json RunConfig::to_json() const {
  json o = {{"builtin", kind_name(oracle.kind)}};
  if (oracle.kind == OracleSpec::Kind::External) {
    o = {{"external", oracle.argv}, {"classes", oracle.classes}};
  } else {
    o["max_depth"] = oracle.max_depth;
    if (oracle.kind == OracleSpec::Kind::Forest) o["n_trees"] = oracle.n_trees;
  }
  json m;
  if (miner.kind == MinerSpec::Kind::Local)
    m = {{"kind", "local"},
         {"samples", miner.local.samples},
         {"top_k", miner.local.top_k},
         {"kernel_width", miner.local.kernel_width},
         {"ridge_lambda", miner.local.ridge_lambda},
         {"budget_factor", miner.local.budget_factor}};
  else
    m = {{"kind", "frequent"}, {"support", miner.support}};
  return {{"dataset", dataset.string()},
          {"schema_hints", schema_hints ? json(schema_hints->string()) : json(nullptr)},
          {"target", target ? json(*target) : json(nullptr)},
          {"oracle", o},
          {"miner", m},
          {"ga",
           {{"generations", ga.generations},
            {"population_size", ga.population_size},
            {"crossover_prob", ga.crossover_prob},
            {"mutation_prob", ga.mutation_prob},
            {"tournament_k", ga.tournament_k},
            {"fitness", fitness_name(ga.fitness)}}},
          {"sizes", sizes},
          {"robustness", robustness},
          {"robustness_size", robustness_size},
          {"augment", augment},
          {"augment_marginal", augment_marginal},
          {"augment_uniform", augment_uniform},
          {"seed", seed},
          {"output", output_dir.string()},
          {"max_bins", max_bins},
          {"baselines",
           {{"dt_max_depth", baselines.dt_max_depth},
            {"apriori_support", baselines.apriori_support},
            {"apriori_max_clause_len", baselines.apriori_max_clause_len}}},
          {"history", write_history}};
}

RunConfig RunConfig::from_json(const json& j, RunConfig c) {
  try {
    if (j.contains("dataset")) c.dataset = j.at("dataset").get<std::string>();
    if (j.contains("schema_hints") && !j.at("schema_hints").is_null())
      c.schema_hints = j.at("schema_hints").get<std::string>();
    if (j.contains("target") && !j.at("target").is_null())
      c.target = j.at("target").get<std::string>();
    if (j.contains("oracle")) {
      const auto& o = j.at("oracle");
      if (o.contains("external")) {
        c.oracle.kind = OracleSpec::Kind::External;
        c.oracle.argv = o.at("external").get<std::vector<std::string>>();
        read_field(o, "classes", c.oracle.classes);
      } else if (o.contains("builtin")) {
        const auto b = o.at("builtin").get<std::string>();
        if (b == "tree")
          c.oracle.kind = OracleSpec::Kind::Tree;
        else if (b == "forest")
          c.oracle.kind = OracleSpec::Kind::Forest;
        else
          throw UsageError("unknown builtin oracle '" + b + "'");
      }
      read_field(o, "max_depth", c.oracle.max_depth);
      read_field(o, "n_trees", c.oracle.n_trees);
    }
    if (j.contains("miner")) {
      const auto& m = j.at("miner");
      if (m.contains("kind")) {
        const auto k = m.at("kind").get<std::string>();
        if (k == "local")
          c.miner.kind = MinerSpec::Kind::Local;
        else if (k == "frequent")
          c.miner.kind = MinerSpec::Kind::Frequent;
        else
          throw UsageError("unknown miner '" + k + "'");
      }
      read_field(m, "samples", c.miner.local.samples);
      read_field(m, "top_k", c.miner.local.top_k);
      read_field(m, "kernel_width", c.miner.local.kernel_width);
      read_field(m, "ridge_lambda", c.miner.local.ridge_lambda);
      read_field(m, "budget_factor", c.miner.local.budget_factor);
      read_field(m, "support", c.miner.support);
    }
    if (j.contains("ga")) {
      const auto& g = j.at("ga");
      read_field(g, "generations", c.ga.generations);
      read_field(g, "population_size", c.ga.population_size);
      read_field(g, "crossover_prob", c.ga.crossover_prob);
      read_field(g, "mutation_prob", c.ga.mutation_prob);
      read_field(g, "tournament_k", c.ga.tournament_k);
      if (g.contains("fitness")) {
        const auto f = g.at("fitness").get<std::string>();
        if (f == "mutual_information" || f == "mi")
          c.ga.fitness = FitnessKind::MutualInformation;
        else if (f == "f1")
          c.ga.fitness = FitnessKind::F1;
        else
          throw UsageError("unknown fitness '" + f + "'");
      }
    }
    read_field(j, "sizes", c.sizes);
    read_field(j, "robustness", c.robustness);
    read_field(j, "robustness_size", c.robustness_size);
    read_field(j, "augment", c.augment);
    read_field(j, "augment_marginal", c.augment_marginal);
    read_field(j, "augment_uniform", c.augment_uniform);
    read_field(j, "seed", c.seed);
    if (j.contains("output")) c.output_dir = j.at("output").get<std::string>();
    read_field(j, "max_bins", c.max_bins);
    if (j.contains("baselines")) {
      const auto& b = j.at("baselines");
      read_field(b, "dt_max_depth", c.baselines.dt_max_depth);
      read_field(b, "apriori_support", c.baselines.apriori_support);
      read_field(b, "apriori_max_clause_len", c.baselines.apriori_max_clause_len);
    }
    read_field(j, "history", c.write_history);
  } catch (const json::exception& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
  return c;
}

std::string RunConfig::hash() const {
  auto j = to_json();
  j.erase("output");
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a(j.dump())));
  return buf;
}

// ---------------------------------------------------------------------------

PreparedRun prepare(const RunConfig& cfg) {
  cfg.validate();
  const bool builtin = cfg.oracle.kind != OracleSpec::Kind::External;

  LoadedTable table = run_stage("load", [&] {
    SchemaHints hints;
    if (cfg.schema_hints) hints = load_schema_hints(*cfg.schema_hints);
    std::string target = cfg.target.value_or(builtin ? header_last_column(cfg.dataset) : "");
    auto t = load_csv(cfg.dataset, hints, target);
    if (builtin && t.target.empty()) throw DataError("builtin oracle needs a target column");
    return t;
  });

  auto split_idx = run_stage("split", [&] { return split(table.data, derive_seed(cfg.seed, "split")); });
  auto train_rows = pick(table.data.rows, split_idx.train_idx);

  ModelOracle oracle = run_stage("oracle", [&]() -> ModelOracle {
    if (!builtin) {
      auto classes = cfg.oracle.classes;
      if (classes.empty()) {
        if (table.target.empty())
          throw OracleError("external oracle needs class labels or a target column");
        classes = index_labels(table.target).classes;
      }
      return connect_external(cfg.oracle.argv, classes, table.data.schema);
    }
    auto idx = index_labels(table.target);
    auto truth = pick(idx.labels, split_idx.train_idx);
    Dataset train{table.data.schema, train_rows};
    if (cfg.oracle.kind == OracleSpec::Kind::Tree)
      return fit_builtin_tree(train, truth, idx.classes, cfg.oracle.max_depth);
    return fit_builtin_forest(train, truth, idx.classes, cfg.oracle.n_trees,
                              cfg.oracle.max_depth, derive_seed(cfg.seed, "oracle"));
  });

  auto valid_rows = pick(table.data.rows, split_idx.valid_idx);
  auto score_rows = pick(table.data.rows, split_idx.score_idx);
  auto labels = run_stage("label", [&] {
    return std::array<std::vector<Label>, 3>{oracle.predict_batch(train_rows),
                                             oracle.predict_batch(valid_rows),
                                             oracle.predict_batch(score_rows)};
  });
  auto classes = oracle.class_labels();
  return PreparedRun{table.data.schema,
                     std::move(classes),
                     std::move(split_idx),
                     std::move(train_rows),
                     std::move(valid_rows),
                     std::move(score_rows),
                     std::move(labels[0]),
                     std::move(labels[1]),
                     std::move(labels[2]),
                     std::move(oracle)};
}

AugmentedData training_set(const RunConfig& cfg, PreparedRun& run) {
  if (!cfg.augment) {
    AugmentedData d;
    d.rows = run.train_rows;
    d.labels = run.train_labels;
    d.original_rows = d.rows.size();
    return d;
  }
  return run_stage("augment", [&] {
    return augment(run.raw_schema, run.train_rows, run.train_labels, run.oracle,
                   cfg.augment_marginal, cfg.augment_uniform, derive_seed(cfg.seed, "augment"));
  });
}

RuleInduction induce_rules(const RunConfig& cfg, const Schema& raw_schema,
                           std::span<const RawRow> train_rows,
                           std::span<const Label> train_labels, ModelOracle& oracle) {
  RuleInduction out;
  Dataset train{raw_schema, {train_rows.begin(), train_rows.end()}};
  run_stage("discretize", [&] {
    discretize(train, train_labels, cfg.max_bins);
    out.schema = train.schema;
  });
  const auto coded = train.coded();

  std::set<Label> present(train_labels.begin(), train_labels.end());
  run_stage("mine", [&] {
    for (Label c : present) {
      if (cfg.miner.kind == MinerSpec::Kind::Local)
        out.pools.push_back(mine_conditions_local(c, train, train_labels, oracle, cfg.miner.local,
                                                  derive_seed(cfg.seed, "mine", c)));
      else
        out.pools.push_back(
            mine_conditions_frequent(c, out.schema, coded, train_labels, cfg.miner.support));
    }
  });

  run_stage("evolve", [&] {
    for (const auto& pool : out.pools) {
      if (pool.conditions.empty()) continue;
      GaConfig ga = cfg.ga;
      ga.seed = derive_seed(cfg.seed, "evolve", pool.class_label);
      out.evolved.push_back(evolve_rules(pool, out.schema, coded, train_labels, ga));
      auto& rules = out.evolved.back().rules;
      out.candidates.insert(out.candidates.end(), rules.begin(), rules.end());
    }
    std::sort(out.candidates.begin(), out.candidates.end(), better_scored);
    if (out.candidates.empty()) throw std::runtime_error("no candidate rules were produced");
  });
  return out;
}

// ---------------------------------------------------------------------------

ExplainResult cmd_explain(const RunConfig& cfg) {
  auto run = prepare(cfg);
  auto train = training_set(cfg, run);
  ExplainResult res;
  res.induction = induce_rules(cfg, run.raw_schema, train.rows, train.labels, run.oracle);
  const auto& schema = res.induction.schema;
  const auto valid = encode(schema, run.valid_rows);
  const auto score = encode(schema, run.score_rows);

  auto sel = run_stage("select", [&] {
    return select_and_score(res.induction.candidates, cfg, valid, run.valid_labels, score,
                            run.score_labels, "magix");
  });
  res.selected = sel.interp;
  res.valid_scores = sel.valid;
  res.scoring_scores = sel.scoring;

  run_stage("write", [&] {
    std::filesystem::create_directories(cfg.output_dir);
    json meta = base_metadata(cfg, run, train.rows.size());
    meta["miner"] = cfg.miner.kind == MinerSpec::Kind::Local ? "local" : "frequent";

    std::ostringstream md;
    md << "# Interpretation\n\nconfig hash: `" << cfg.hash() << "`\n\n";
    md << "| Rules | Validation Set-Score | Scoring Set-Score |\n|---|---|---|\n";
    for (auto k : cfg.sizes)
      md << "| " << k << " | " << format_fixed(sel.valid[k]) << " | "
         << format_fixed(sel.scoring[k]) << " |\n";

    for (auto k : cfg.sizes) {
      InterpretationFile f{sel.interp.prefix(k), schema, run.classes, meta,
                           {{"validation", sel.valid[k]}, {"scoring", sel.scoring[k]}}};
      f.interpretation.selection_size = k;
      auto path = interpretation_path(cfg, "magix", k);
      write_json(path, interpretation_to_json(f));
      res.interpretation_files.push_back(path);
      if (k == cfg.sizes.back()) md << "\n## " << k << " rules\n\n" << interpretation_markdown(f);
    }
    write_text(cfg.output_dir / "report.md", md.str());

    json pools = json::array();
    for (const auto& p : res.induction.pools) pools.push_back(pool_to_json(p, schema, run.classes));
    write_json(cfg.output_dir / "pools.json", {{"config_hash", cfg.hash()}, {"pools", pools}});

    if (cfg.write_history) {
      std::ofstream h(cfg.output_dir / "history.jsonl", std::ios::binary);
      for (const auto& e : res.induction.evolved) write_history_jsonl(h, e);
    }
  });

  if (cfg.robustness) {
    Interpretation at = sel.interp.prefix(cfg.robustness_size);
    res.robustness = run_stage("robustness", [&] {
      auto methods = standard_shift_methods(derive_seed(cfg.seed, "robustness"));
      auto r = uncertainty_analysis(at, schema, run.oracle, run.score_rows, methods, "magix");
      json j = robustness_to_json(r);
      j["config_hash"] = cfg.hash();
      write_json(cfg.output_dir / "robustness.json", j);
      write_text(cfg.output_dir / "robustness.md",
                 "config hash: `" + cfg.hash() + "`\n\n" + robustness_markdown(r));
      return r;
    });
  }
  return res;
}

RobustnessReport cmd_robustness(const RunConfig& cfg,
                                const std::vector<std::filesystem::path>& files) {
  if (files.empty()) throw UsageError("no interpretation files given");
  std::vector<InterpretationFile> interps;
  run_stage("read", [&] {
    for (const auto& p : files) {
      if (!std::filesystem::exists(p))
        throw std::runtime_error("interpretation file '" + p.string() + "' not found");
      try {
        interps.push_back(interpretation_from_json(read_json(p)));
      } catch (const std::exception& e) {
        throw std::runtime_error("'" + p.string() + "': " + e.what());
      }
    }
  });
  auto run = prepare(cfg);
  RobustnessReport report;
  run_stage("robustness", [&] {
    for (std::size_t i = 0; i < interps.size(); ++i) {
      const auto& f = interps[i];
      if (f.classes != run.classes)
        throw std::runtime_error("'" + files[i].string() + "' was built for other class labels");
      auto interp = f.interpretation.prefix(cfg.robustness_size);
      std::string name = f.interpretation.approach.empty() ? files[i].stem().string()
                                                           : f.interpretation.approach;
      for (const auto& c : report.cells)
        if (c.approach == name) name = files[i].stem().string();
      auto methods = standard_shift_methods(derive_seed(cfg.seed, "robustness"));
      auto r = uncertainty_analysis(interp, f.schema, run.oracle, run.score_rows, methods, name);
      report.cells.insert(report.cells.end(), r.cells.begin(), r.cells.end());
    }
    std::filesystem::create_directories(cfg.output_dir);
    json j = robustness_to_json(report);
    j["config_hash"] = cfg.hash();
    write_json(cfg.output_dir / "robustness.json", j);
    write_text(cfg.output_dir / "robustness.md",
               "config hash: `" + cfg.hash() + "`\n\n" + robustness_markdown(report));
  });
  return report;
}

// ---------------------------------------------------------------------------

ComparisonResult cmd_compare(const RunConfig& cfg) {
  auto run = prepare(cfg);
  auto train = training_set(cfg, run);
  auto induction = induce_rules(cfg, run.raw_schema, train.rows, train.labels, run.oracle);
  const auto& schema = induction.schema;
  const auto coded_train = encode(schema, train.rows);
  const auto valid = encode(schema, run.valid_rows);
  const auto score = encode(schema, run.score_rows);

  struct Best {
    Interpretation interp;  // grid point chosen at the robustness size
    std::string params;
  };
  ComparisonResult res;
  std::map<std::string, Best> at_robustness_size;
  const std::size_t rsize = std::min(cfg.robustness_size, cfg.sizes.back());

  auto add_row = [&](const std::string& approach,
                     const std::vector<std::pair<std::string, std::vector<ScoredRule>>>& grid) {
    ComparisonRow row;
    row.approach = approach;
    std::map<std::size_t, double> best_valid;
    double best_r = -1;
    for (const auto& [params, cands] : grid) {
      if (cands.empty()) continue;
      auto s = select_and_score(cands, cfg, valid, run.valid_labels, score, run.score_labels,
                                approach);
      for (auto k : cfg.sizes) {
        if (best_valid.count(k) && s.valid[k] <= best_valid[k]) continue;
        best_valid[k] = s.valid[k];
        row.scores[k] = s.scoring[k];
        row.params[k] = params;
      }
      auto at = s.interp.prefix(rsize);
      const double v = set_score(at, valid, run.valid_labels);
      if (v > best_r) {
        best_r = v;
        at_robustness_size[approach] = {std::move(at), params};
      }
    }
    res.rows.push_back(std::move(row));
  };

  run_stage("compare", [&] {
    add_row("magix", {{"", induction.candidates}});
    std::vector<std::pair<std::string, std::vector<ScoredRule>>> dt, ap;
    for (int d : cfg.baselines.dt_max_depth)
      dt.emplace_back("max_depth=" + std::to_string(d),
                      dt_surrogate_rules(schema, coded_train, train.labels, d));
    add_row("dt", dt);
    for (double s : cfg.baselines.apriori_support)
      ap.emplace_back("support=" + format_fixed(s, 2),
                      apriori_rules(schema, coded_train, train.labels, s,
                                    cfg.baselines.apriori_max_clause_len));
    add_row("apriori", ap);
  });

  if (cfg.robustness) {
    res.robustness = run_stage("robustness", [&] {
      RobustnessReport report;
      auto methods = standard_shift_methods(derive_seed(cfg.seed, "robustness"));
      for (const auto& row : res.rows) {
        auto it = at_robustness_size.find(row.approach);
        if (it == at_robustness_size.end()) continue;
        auto r = uncertainty_analysis(it->second.interp, schema, run.oracle, run.score_rows,
                                      methods, row.approach);
        report.cells.insert(report.cells.end(), r.cells.begin(), r.cells.end());
      }
      return report;
    });
  }

  run_stage("write", [&] {
    std::filesystem::create_directories(cfg.output_dir);
    json rows = json::object();
    for (const auto& r : res.rows) {
      json scores = json::object(), params = json::object();
      for (const auto& [k, v] : r.scores) scores[std::to_string(k)] = v;
      for (const auto& [k, v] : r.params) params[std::to_string(k)] = v;
      rows[r.approach] = {{"scores", scores}, {"params", params}};
    }
    json meta = base_metadata(cfg, run, train.rows.size());
    json out = {{"metadata", meta}, {"sizes", cfg.sizes}, {"approaches", rows}};
    if (res.robustness) out["robustness"] = robustness_to_json(*res.robustness);
    write_json(cfg.output_dir / "comparison.json", out);
    std::string md = "config hash: `" + cfg.hash() + "`\n\n" + comparison_markdown(res, cfg.sizes);
    if (res.robustness) md += "\n" + robustness_markdown(*res.robustness);
    write_text(cfg.output_dir / "comparison.md", md);

    static const std::map<std::string, std::string> file_name{
        {"magix", "magix"}, {"dt", "dt-surrogate"}, {"apriori", "apriori"}};
    for (auto& [approach, best] : at_robustness_size) {
      InterpretationFile f{best.interp, schema, run.classes, meta, {}};
      f.interpretation.approach = file_name.at(approach);
      f.interpretation.selection_size = rsize;
      f.metadata["params"] = best.params;
      f.scores["validation"] = set_score(best.interp, valid, run.valid_labels);
      f.scores["scoring"] = set_score(best.interp, score, run.score_labels);
      write_json(interpretation_path(cfg, file_name.at(approach), rsize),
                 interpretation_to_json(f));
    }
  });
  return res;
}

std::string comparison_markdown(const ComparisonResult& r, const std::vector<std::size_t>& sizes) {
  std::ostringstream md;
  md << "| Approach";
  for (auto k : sizes) md << " | " << k << " Rules";
  md << " |\n|---";
  for (std::size_t i = 0; i < sizes.size(); ++i) md << "|---";
  md << "|\n";
  for (const auto& row : r.rows) {
    md << "| " << row.approach;
    for (auto k : sizes) {
      auto it = row.scores.find(k);
      md << " | " << (it == row.scores.end() ? std::string("-") : format_fixed(it->second));
    }
    md << " |\n";
  }
  return md.str();
}

std::vector<std::optional<std::string>> cmd_predict(const std::filesystem::path& interpretation,
                                                    const std::filesystem::path& csv) {
  auto f = run_stage("read", [&] { return interpretation_from_json(read_json(interpretation)); });
  auto rows = run_stage("load", [&] {
    std::ifstream in(csv, std::ios::binary);
    if (!in) throw DataError("cannot open '" + csv.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_rows(ss.str(), f.schema, true);
  });
  std::vector<std::optional<std::string>> out;
  out.reserve(rows.size());
  for (const auto& r : rows) {
    auto p = predict_with_rules(f.interpretation, encode(f.schema, r));
    out.push_back(p ? std::optional<std::string>(f.classes.at(static_cast<std::size_t>(*p)))
                    : std::nullopt);
  }
  return out;
}

}  // namespace rulex
