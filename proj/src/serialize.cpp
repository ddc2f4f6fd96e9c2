#include "rulex/serialize.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rulex {

std::string format_fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

json schema_to_json(const Schema& schema) {
  json out = json::array();
  for (const auto& f : schema) {
    json j = {{"name", f.name}, {"kind", f.numeric() ? "numeric" : "categorical"}};
    if (f.numeric())
      j["cuts"] = f.cuts;
    else
      j["categories"] = f.categories;
    out.push_back(std::move(j));
  }
  return out;
}

Schema schema_from_json(const json& j) {
  Schema schema;
  for (const auto& f : j) {
    FeatureSchema fs;
    fs.name = f.at("name").get<std::string>();
    const auto kind = f.at("kind").get<std::string>();
    if (kind == "numeric") {
      fs.kind = FeatureKind::Numeric;
      fs.cuts = f.value("cuts", std::vector<double>{});
    } else if (kind == "categorical") {
      fs.kind = FeatureKind::Categorical;
      fs.categories = f.at("categories").get<std::vector<std::string>>();
    } else {
      throw DataError("unknown feature kind '" + kind + "'");
    }
    schema.push_back(std::move(fs));
  }
  validate_schema(schema);
  return schema;
}

namespace {

int feature_index(const Schema& schema, const std::string& name) {
  for (std::size_t j = 0; j < schema.size(); ++j)
    if (schema[j].name == name) return static_cast<int>(j);
  throw DataError("unknown feature '" + name + "'");
}

Label class_index(const std::vector<std::string>& classes, const std::string& name) {
  auto it = std::find(classes.begin(), classes.end(), name);
  if (it == classes.end()) throw DataError("unknown class label '" + name + "'");
  return static_cast<Label>(it - classes.begin());
}

}  // namespace

json condition_to_json(const Condition& c, const Schema& schema) {
  const auto& f = schema.at(static_cast<std::size_t>(c.feature()));
  json j = {{"feature", f.name}, {"op", "in"}};
  json values = json::array();
  for (int v : c.values()) values.push_back(f.code_label(v));
  j["values"] = std::move(values);
  if (f.numeric()) j["bins"] = c.values();
  return j;
}

Condition condition_from_json(const json& j, const Schema& schema) {
  if (j.value("op", "in") != "in") throw DataError("unsupported condition operator");
  const int feature = feature_index(schema, j.at("feature").get<std::string>());
  const auto& f = schema[static_cast<std::size_t>(feature)];
  std::vector<int> values;
  if (f.numeric()) {
    values = j.at("bins").get<std::vector<int>>();
  } else {
    for (const auto& v : j.at("values")) {
      auto idx = f.category_index(v.get<std::string>());
      if (!idx) throw DataError("unknown category '" + v.get<std::string>() + "' for '" + f.name + "'");
      values.push_back(*idx);
    }
  }
  return Condition(feature, std::move(values), f.domain_size());
}

json rule_to_json(const InterpretationRule& r, const Schema& schema,
                  const std::vector<std::string>& classes) {
  json clause = json::array();
  for (const auto& c : r.rule.clause) clause.push_back(condition_to_json(c, schema));
  json j = {{"clause", std::move(clause)},
            {"prediction", classes.at(static_cast<std::size_t>(r.rule.prediction))},
            {"precision", r.precision},
            {"coverage", r.coverage},
            {"fitness", r.fitness}};
  if (r.rule.default_rule) j["default_rule"] = true;
  return j;
}

InterpretationRule rule_from_json(const json& j, const Schema& schema,
                                  const std::vector<std::string>& classes) {
  InterpretationRule r;
  const Label pred = class_index(classes, j.at("prediction").get<std::string>());
  if (j.value("default_rule", false)) {
    r.rule = make_default_rule(pred);
  } else {
    std::vector<Condition> clause;
    for (const auto& c : j.at("clause")) clause.push_back(condition_from_json(c, schema));
    r.rule = make_rule(std::move(clause), pred);
  }
  r.precision = j.value("precision", 0.0);
  r.coverage = j.value("coverage", 0.0);
  r.fitness = j.value("fitness", 0.0);
  return r;
}

json pool_to_json(const ConditionPool& pool, const Schema& schema,
                  const std::vector<std::string>& classes) {
  json conds = json::array();
  for (const auto& c : pool.conditions) conds.push_back(condition_to_json(c, schema));
  json prov = pool.provenance == PoolProvenance::LocalSurrogate
                  ? json("local-surrogate")
                  : json("frequent(" + format_fixed(pool.support_threshold, 4) + ")");
  return {{"class", classes.at(static_cast<std::size_t>(pool.class_label))},
          {"provenance", prov},
          {"conditions", std::move(conds)}};
}

json interpretation_to_json(const InterpretationFile& f) {
  json rules = json::array();
  for (const auto& r : f.interpretation.rules) rules.push_back(rule_to_json(r, f.schema, f.classes));
  json meta = f.metadata;
  meta["approach"] = f.interpretation.approach;
  meta["reference_split"] = f.interpretation.reference_split;
  meta["seed"] = f.interpretation.seed;
  meta["selection_size"] = f.interpretation.selection_size;
  json scores = json::object();
  for (const auto& [k, v] : f.scores) scores[k] = v;
  return {{"metadata", std::move(meta)},
          {"schema", schema_to_json(f.schema)},
          {"classes", f.classes},
          {"rules", std::move(rules)},
          {"scores", std::move(scores)}};
}

InterpretationFile interpretation_from_json(const json& j) {
  InterpretationFile f;
  f.schema = schema_from_json(j.at("schema"));
  f.classes = j.at("classes").get<std::vector<std::string>>();
  f.metadata = j.value("metadata", json::object());
  f.interpretation.approach = f.metadata.value("approach", "");
  f.interpretation.reference_split = f.metadata.value("reference_split", "validation");
  f.interpretation.seed = f.metadata.value("seed", std::uint64_t{0});
  f.interpretation.selection_size = f.metadata.value("selection_size", std::size_t{0});
  for (const auto& r : j.at("rules"))
    f.interpretation.rules.push_back(rule_from_json(r, f.schema, f.classes));
  if (j.contains("scores"))
    for (auto& [k, v] : j.at("scores").items()) f.scores[k] = v.get<double>();
  return f;
}

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw std::runtime_error("'" + path.string() + "': " + e.what());
  }
}

std::string interpretation_markdown(const InterpretationFile& f) {
  std::ostringstream md;
  md << "| # | Rule Clause | Model Prediction | Precision | Coverage |\n";
  md << "|---|---|---|---|---|\n";
  std::size_t k = 0;
  for (const auto& r : f.interpretation.rules) {
    md << "| " << ++k << " | IF " << describe_clause(r.rule, f.schema) << " | THEN class = "
       << f.classes.at(static_cast<std::size_t>(r.rule.prediction)) << " | "
       << format_fixed(r.precision, 3) << " | " << format_fixed(r.coverage, 3) << " |\n";
  }
  return md.str();
}

json robustness_to_json(const RobustnessReport& r) {
  json cells = json::array();
  for (const auto& c : r.cells)
    cells.push_back({{"approach", c.approach},
                     {"method", to_string(c.kind)},
                     {"mean", c.mean},
                     {"std", c.stddev},
                     {"partition_scores", c.partition_scores}});
  return {{"cells", std::move(cells)}};
}

std::string robustness_markdown(const RobustnessReport& r) {
  std::vector<std::string> approaches;
  for (const auto& c : r.cells)
    if (std::find(approaches.begin(), approaches.end(), c.approach) == approaches.end())
      approaches.push_back(c.approach);
  std::ostringstream md;
  md << "| Approach | Method 1 | Method 2 | Method 3 |\n|---|---|---|---|\n";
  for (const auto& a : approaches) {
    md << "| " << a;
    for (auto kind : {ShiftKind::Bootstrap, ShiftKind::Marginal, ShiftKind::Uniform}) {
      const auto* c = r.find(a, kind);
      md << " | "
         << (c ? format_fixed(c->mean) + " ± " + format_fixed(c->stddev) : std::string("-"));
    }
    md << " |\n";
  }
  return md.str();
}

}  // namespace rulex
