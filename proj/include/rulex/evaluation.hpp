#ifndef RULEX_EVALUATION_HPP
#define RULEX_EVALUATION_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rulex/evolution.hpp"
#include "rulex/rule.hpp"

namespace rulex {

struct InterpretationRule {
  Rule rule;
  double precision = 0;  // on the reference split
  double coverage = 0;   // on the reference split
  double fitness = 0;    // as reported by the producing approach
};

/// Ordered rule set; precision/coverage are cached on `reference_split`.
struct Interpretation {
  std::vector<InterpretationRule> rules;
  std::string approach;
  std::string reference_split = "validation";
  std::uint64_t seed = 0;
  std::size_t selection_size = 0;

  Interpretation prefix(std::size_t n) const;
};

/// Class of the highest-precision covering rule; ties go to higher coverage,
/// then to the earlier rule. nullopt when no rule covers the row.
std::optional<Label> predict_with_rules(const Interpretation& interp, const CodedRow& row);

/// Percentage of rows whose predicted class equals the model label;
/// abstentions count as misses.
double set_score(const Interpretation& interp, std::span<const CodedRow> rows,
                 std::span<const Label> model_labels);

/// Measures precision/coverage of each rule on the given rows.
Interpretation make_interpretation(std::span<const ScoredRule> rules,
                                   std::span<const CodedRow> rows,
                                   std::span<const Label> model_labels);

/// Forward selection maximizing validation Set-Score. Each step adds the
/// candidate with the largest strictly positive gain; ties go to higher
/// fitness, then fewer conditions, then earlier candidates. Stops at k rules
/// or when nothing improves the score.
Interpretation greedy_select(std::span<const ScoredRule> candidates, std::size_t k,
                             std::span<const CodedRow> valid_rows,
                             std::span<const Label> valid_labels);

}  // namespace rulex

#endif  // RULEX_EVALUATION_HPP
