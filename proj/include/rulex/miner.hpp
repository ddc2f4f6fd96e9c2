#ifndef RULEX_MINER_HPP
#define RULEX_MINER_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "rulex/data.hpp"
#include "rulex/oracle.hpp"
#include "rulex/rule.hpp"

namespace rulex {

struct WeightedCondition {
  Condition condition;
  double weight = 0;
};

enum class PoolProvenance { LocalSurrogate, Frequent };

/// Candidate conditions for one class.
struct ConditionPool {
  Label class_label = 0;
  std::vector<Condition> conditions;  // duplicate-free
  PoolProvenance provenance = PoolProvenance::LocalSurrogate;
  double support_threshold = 0;  // Frequent only

  std::size_t size() const { return conditions.size(); }
};

struct LocalExplainConfig {
  int samples = 5000;
  int top_k = 10;
  /// Kernel width; non-positive means 0.75 * sqrt(feature count).
  double kernel_width = 0;
  double ridge_lambda = 1.0;
  /// Explanation budget as a multiple of the class size.
  int budget_factor = 10;
};

/// Perturbation-based local surrogate around `instance`.
///
/// Each sample keeps the instance's bin of every feature with probability
/// 1/2 and otherwise draws a bin from the background marginal; a concrete
/// value is materialized inside the drawn bin. A weighted ridge regression of
/// the one-vs-rest indicator of `target` on the "same bin as the instance"
/// indicators is fitted with an exponential kernel on the normalized Hamming
/// distance. Returns the top_k conditions by |coefficient| with a positive
/// coefficient, strongest first; each condition is "feature in {instance's bin}".
std::vector<WeightedCondition> local_explain(const RawRow& instance, ModelOracle& oracle,
                                             Label target, const Dataset& background,
                                             const LocalExplainConfig& cfg,
                                             std::uint64_t seed);

/// Explains uncovered instances of `cls`, chosen uniformly at random, until
/// every instance of the class is covered by some pool condition.
ConditionPool mine_conditions_local(Label cls, const Dataset& mining,
                                    std::span<const Label> model_labels,
                                    ModelOracle& oracle, const LocalExplainConfig& cfg,
                                    std::uint64_t seed);

/// Every single-value condition whose support within `cls` reaches the threshold.
ConditionPool mine_conditions_frequent(Label cls, const Schema& schema,
                                       std::span<const CodedRow> rows,
                                       std::span<const Label> model_labels,
                                       double support_threshold);

/// Rows of class `cls` not covered by any pool condition.
std::vector<std::size_t> uncovered_instances(const ConditionPool& pool,
                                             std::span<const CodedRow> rows,
                                             std::span<const Label> model_labels);

}  // namespace rulex

#endif  // RULEX_MINER_HPP
