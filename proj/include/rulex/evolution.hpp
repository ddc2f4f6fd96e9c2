#ifndef RULEX_EVOLUTION_HPP
#define RULEX_EVOLUTION_HPP

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "rulex/miner.hpp"
#include "rulex/row_mask.hpp"
#include "rulex/rule.hpp"

namespace rulex {

/// One bit per pool condition.
struct Genome {
  std::vector<std::uint8_t> bits;

  std::size_t size() const { return bits.size(); }
  std::size_t popcount() const;
  auto operator<=>(const Genome&) const = default;
};

enum class FitnessKind { MutualInformation, F1 };

struct GaConfig {
  int generations = 1000;
  int population_size = 600;
  double crossover_prob = 0.25;
  double mutation_prob = 0.2;
  int tournament_k = 3;
  std::uint64_t seed = 0;
  FitnessKind fitness = FitnessKind::MutualInformation;

  void validate() const;
};

/// Fitness given to genomes that decode to an empty clause; below any
/// signed mutual information of a 2x2 table.
inline constexpr double kEmptyClauseFitness = -2.0;

struct ScoredRule {
  Rule rule;
  double fitness = 0;
};

struct GenerationStats {
  int generation = 0;
  double best = 0;
  double mean = 0;
  std::size_t archive_size = 0;
};

struct EvolvedRuleSet {
  Label class_label = 0;
  std::vector<ScoredRule> rules;  // fitness descending, duplicate-free
  GaConfig config;
  PoolProvenance provenance = PoolProvenance::LocalSurrogate;
  std::vector<GenerationStats> history;
};

/// Selected conditions merged per feature by value-set union and combined
/// conjunctively. A union equal to the whole domain drops the feature;
/// nothing left means an empty clause (nullopt).
std::optional<Rule> decode(const Genome& genome, const ConditionPool& pool,
                           const Schema& schema);

/// Ordering used for every rule list: fitness descending, then shorter
/// clause, then lexicographic clause.
bool better_scored(const ScoredRule& a, const ScoredRule& b);

/// Scores genomes against fixed rows using precomputed condition covers.
class GenomeEvaluator {
 public:
  GenomeEvaluator(const ConditionPool& pool, const Schema& schema,
                  std::span<const CodedRow> rows, std::span<const Label> model_labels,
                  FitnessKind kind = FitnessKind::MutualInformation);

  double evaluate(const Genome& genome) const;
  std::optional<ContingencyTable> table(const Genome& genome) const;
  std::optional<Rule> decode(const Genome& genome) const;
  std::size_t pool_size() const { return pool_.size(); }

 private:
  const ConditionPool& pool_;
  const Schema& schema_;
  FitnessKind kind_;
  std::vector<RowMask> condition_cover_;
  RowMask positives_;
  std::size_t rows_;
};

/// Fitness of the decoded rule on (rows, model_labels); kEmptyClauseFitness
/// for an empty clause.
double evaluate(const Genome& genome, const ConditionPool& pool, const Schema& schema,
                std::span<const CodedRow> rows, std::span<const Label> model_labels,
                FitnessKind kind = FitnessKind::MutualInformation);

/// Generational GA: k-way tournament selection, uniform crossover, per-
/// individual mutation gate with per-bit flips, full replacement, and a
/// best-ever archive of distinct rules merged into the result.
EvolvedRuleSet evolve_rules(const ConditionPool& pool, const Schema& schema,
                            std::span<const CodedRow> rows,
                            std::span<const Label> model_labels, const GaConfig& cfg);

void write_history_jsonl(std::ostream& out, const EvolvedRuleSet& set);

}  // namespace rulex

#endif  // RULEX_EVOLUTION_HPP
