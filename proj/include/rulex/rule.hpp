#ifndef RULEX_RULE_HPP
#define RULEX_RULE_HPP

#include <compare>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rulex/data.hpp"
#include "rulex/row_mask.hpp"

namespace rulex {

class RuleError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Single-feature predicate: the feature's code must be one of `values`.
/// The value set is non-empty and a strict subset of the feature domain.
class Condition {
 public:
  Condition(int feature, std::vector<int> values, int domain_size);
  Condition(const Schema& schema, int feature, std::vector<int> values);

  int feature() const { return feature_; }
  const std::vector<int>& values() const { return values_; }
  bool contains(int code) const;

  auto operator<=>(const Condition&) const = default;

 private:
  int feature_;
  std::vector<int> values_;  // sorted, unique
};

struct Rule {
  std::vector<Condition> clause;  // sorted by feature, one per feature
  Label prediction = 0;
  /// Always-covering rule produced by a depth-0 surrogate tree; the only
  /// rule allowed an empty clause.
  bool default_rule = false;

  auto operator<=>(const Rule&) const = default;
};

/// Validates and normalizes (sorts) a clause. Throws RuleError on an empty
/// clause or on two conditions sharing a feature.
Rule make_rule(std::vector<Condition> clause, Label prediction);
Rule make_default_rule(Label prediction);

bool covers(const Rule& rule, const CodedRow& row);
RowMask cover_mask(const Rule& rule, std::span<const CodedRow> rows);

/// 2x2 table: rows = covered / not covered, columns = model label equals
/// the rule's prediction / differs.
struct ContingencyTable {
  std::int64_t n11 = 0, n12 = 0, n21 = 0, n22 = 0;

  std::int64_t total() const { return n11 + n12 + n21 + n22; }
  std::int64_t r1() const { return n11 + n12; }
  std::int64_t r2() const { return n21 + n22; }
  std::int64_t c1() const { return n11 + n21; }
  std::int64_t c2() const { return n12 + n22; }

  bool operator==(const ContingencyTable&) const = default;
};

ContingencyTable contingency(const Rule& rule, std::span<const CodedRow> rows,
                             std::span<const Label> model_labels);

/// Table from a cover mask and the mask of rows whose label is the prediction.
ContingencyTable contingency(const RowMask& cover, const RowMask& positives);

/// Mutual information in bits between the cover indicator and the
/// "model label == prediction" indicator. Zero cells contribute 0; a zero
/// row or column sum gives 0.
double mutual_information(const ContingencyTable& t);

/// Mutual information, negated when n11 falls below r1*c1/N.
double fitness(const ContingencyTable& t);

/// Harmonic mean of precision n11/r1 and class recall n11/c1.
double f1(const ContingencyTable& t);

double precision(const ContingencyTable& t);
double coverage(const ContingencyTable& t);      // r1 / N
double class_recall(const ContingencyTable& t);  // n11 / c1

struct PrecisionCoverage {
  double precision = 0;
  double coverage = 0;
};

PrecisionCoverage precision_coverage(const Rule& rule, std::span<const CodedRow> rows,
                                     std::span<const Label> model_labels);

/// "IF a = x AND b in {y, z} THEN class = c"
std::string describe_clause(const Rule& rule, const Schema& schema);
std::string describe(const Rule& rule, const Schema& schema,
                     const std::vector<std::string>& classes);

}  // namespace rulex

#endif  // RULEX_RULE_HPP
