#ifndef RULEX_PIPELINE_HPP
#define RULEX_PIPELINE_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rulex/baselines.hpp"
#include "rulex/data.hpp"
#include "rulex/evaluation.hpp"
#include "rulex/evolution.hpp"
#include "rulex/miner.hpp"
#include "rulex/oracle.hpp"
#include "rulex/robustness.hpp"
#include "rulex/serialize.hpp"

namespace rulex {

/// Invalid configuration or arguments (exit code 2).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Failure inside a named pipeline stage (exit code 1).
class PipelineError : public std::runtime_error {
 public:
  PipelineError(std::string stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct OracleSpec {
  enum class Kind { Tree, Forest, External };
  Kind kind = Kind::Forest;
  int max_depth = 12;
  int n_trees = 50;
  std::vector<std::string> argv;     // external only
  std::vector<std::string> classes;  // external only; default: target values
};

struct MinerSpec {
  enum class Kind { Local, Frequent };
  Kind kind = Kind::Local;
  LocalExplainConfig local;
  double support = 0.05;  // frequent only
};

struct RunConfig {
  std::filesystem::path dataset;
  std::optional<std::filesystem::path> schema_hints;
  /// Ground-truth column. Unset: last column for builtin oracles, none for
  /// external ones.
  std::optional<std::string> target;
  OracleSpec oracle;
  MinerSpec miner;
  GaConfig ga;
  std::vector<std::size_t> sizes{5, 10, 15, 20};
  bool robustness = false;
  std::size_t robustness_size = 20;
  bool augment = false;
  double augment_marginal = 0.10;
  double augment_uniform = 0.10;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "rulex-out";
  int max_bins = 4;
  BaselineConfig baselines;
  bool write_history = false;

  void validate() const;
  nlohmann::json to_json() const;
  /// Fields missing from `j` keep the values already in `base`.
  static RunConfig from_json(const nlohmann::json& j, RunConfig base);
  static RunConfig from_json(const nlohmann::json& j) { return from_json(j, RunConfig{}); }
  /// FNV-1a of the canonical JSON, excluding the output directory.
  std::string hash() const;
};

/// Loaded data, splits, oracle and model labels shared by every command.
struct PreparedRun {
  Schema raw_schema;  // no cut points yet
  std::vector<std::string> classes;
  SplitAssignment split;
  std::vector<RawRow> train_rows, valid_rows, score_rows;
  std::vector<Label> train_labels, valid_labels, score_labels;  // oracle output
  ModelOracle oracle;
};

PreparedRun prepare(const RunConfig& cfg);

/// Discretization, per-class pools and evolved rules for one training set.
struct RuleInduction {
  Schema schema;  // with cut points
  std::vector<ConditionPool> pools;
  std::vector<EvolvedRuleSet> evolved;
  std::vector<ScoredRule> candidates;  // all classes, better_scored order
};

RuleInduction induce_rules(const RunConfig& cfg, const Schema& raw_schema,
                           std::span<const RawRow> train_rows,
                           std::span<const Label> train_labels, ModelOracle& oracle);

/// Training rows for interpretation, optionally augmented.
AugmentedData training_set(const RunConfig& cfg, PreparedRun& run);

struct ExplainResult {
  RuleInduction induction;
  Interpretation selected;  // greedy selection at the largest size
  std::map<std::size_t, double> valid_scores, scoring_scores;
  std::vector<std::filesystem::path> interpretation_files;
  std::optional<RobustnessReport> robustness;
};

ExplainResult cmd_explain(const RunConfig& cfg);

RobustnessReport cmd_robustness(const RunConfig& cfg,
                                const std::vector<std::filesystem::path>& interpretation_files);

struct ComparisonRow {
  std::string approach;
  std::map<std::size_t, double> scores;       // scoring split
  std::map<std::size_t, std::string> params;  // grid point chosen on validation
};

struct ComparisonResult {
  std::vector<ComparisonRow> rows;
  std::optional<RobustnessReport> robustness;
};

ComparisonResult cmd_compare(const RunConfig& cfg);

/// Predicted class name per row, or nullopt for an abstention.
std::vector<std::optional<std::string>> cmd_predict(const std::filesystem::path& interpretation,
                                                    const std::filesystem::path& csv);

std::string comparison_markdown(const ComparisonResult& r, const std::vector<std::size_t>& sizes);

}  // namespace rulex

#endif  // RULEX_PIPELINE_HPP
