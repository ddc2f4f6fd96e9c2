#ifndef RULEX_SERIALIZE_HPP
#define RULEX_SERIALIZE_HPP

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rulex/data.hpp"
#include "rulex/evaluation.hpp"
#include "rulex/miner.hpp"
#include "rulex/robustness.hpp"

namespace rulex {

using nlohmann::json;

json schema_to_json(const Schema& schema);
Schema schema_from_json(const json& j);

json condition_to_json(const Condition& c, const Schema& schema);
Condition condition_from_json(const json& j, const Schema& schema);

/// {"clause":[{"feature":..,"op":"in","values":[..]}..],"prediction":..,
///  "precision":..,"coverage":..,"fitness":..}; numeric conditions also
/// carry "bins".
json rule_to_json(const InterpretationRule& r, const Schema& schema,
                  const std::vector<std::string>& classes);
InterpretationRule rule_from_json(const json& j, const Schema& schema,
                                  const std::vector<std::string>& classes);

json pool_to_json(const ConditionPool& pool, const Schema& schema,
                  const std::vector<std::string>& classes);

/// Interpretation plus everything needed to apply it to new CSV rows.
struct InterpretationFile {
  Interpretation interpretation;
  Schema schema;
  std::vector<std::string> classes;
  json metadata = json::object();
  std::map<std::string, double> scores;  // split name -> Set-Score
};

json interpretation_to_json(const InterpretationFile& f);
InterpretationFile interpretation_from_json(const json& j);

void write_json(const std::filesystem::path& path, const json& j);
json read_json(const std::filesystem::path& path);

/// Rule listing: "IF ... THEN class = ..." with precision and coverage.
std::string interpretation_markdown(const InterpretationFile& f);

json robustness_to_json(const RobustnessReport& r);
/// Approach x {Method 1, 2, 3} matrix, cells "mean ± std".
std::string robustness_markdown(const RobustnessReport& r);

std::string format_fixed(double v, int digits = 2);

}  // namespace rulex

#endif  // RULEX_SERIALIZE_HPP
