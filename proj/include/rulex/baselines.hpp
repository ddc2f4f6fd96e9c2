#ifndef RULEX_BASELINES_HPP
#define RULEX_BASELINES_HPP

#include <span>
#include <vector>

#include "rulex/evolution.hpp"
#include "rulex/rule.hpp"

namespace rulex {

struct BaselineConfig {
  std::vector<int> dt_max_depth{4, 5, 6, 7, 8, 9, 10};
  std::vector<double> apriori_support{0.01, 0.02, 0.05, 0.10};
  int apriori_max_clause_len = 3;
};

/// Decision-tree surrogate on the discretized rows and model labels; every
/// root-to-leaf path becomes a rule predicting the leaf's majority label.
/// A tree without splits yields one default rule.
std::vector<ScoredRule> dt_surrogate_rules(const Schema& schema, std::span<const CodedRow> rows,
                                           std::span<const Label> model_labels, int max_depth);

/// Levelwise frequent itemsets over (feature = code) items with downward-
/// closure pruning; each itemset of length <= max_clause_len becomes a rule
/// predicting the majority model label among the rows it covers. Sorted by
/// fitness.
std::vector<ScoredRule> apriori_rules(const Schema& schema, std::span<const CodedRow> rows,
                                      std::span<const Label> model_labels, double support,
                                      int max_clause_len = 3);

}  // namespace rulex

#endif  // RULEX_BASELINES_HPP
