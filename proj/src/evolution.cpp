#include "rulex/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "rulex/random.hpp"

namespace rulex {

std::size_t Genome::popcount() const {
  return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), 1));
}

void GaConfig::validate() const {
  if (generations < 1) throw std::invalid_argument("GaConfig: generations must be >= 1");
  if (population_size < 2) throw std::invalid_argument("GaConfig: population_size must be >= 2");
  if (!(crossover_prob >= 0 && crossover_prob <= 1))
    throw std::invalid_argument("GaConfig: crossover_prob outside [0,1]");
  if (!(mutation_prob >= 0 && mutation_prob <= 1))
    throw std::invalid_argument("GaConfig: mutation_prob outside [0,1]");
  if (tournament_k < 1) throw std::invalid_argument("GaConfig: tournament_k must be >= 1");
}

std::optional<Rule> decode(const Genome& genome, const ConditionPool& pool,
                           const Schema& schema) {
  if (genome.size() != pool.size())
    throw std::invalid_argument("decode: genome length differs from pool size");
  std::map<int, std::vector<int>> merged;
  for (std::size_t k = 0; k < genome.size(); ++k) {
    if (!genome.bits[k]) continue;
    const auto& c = pool.conditions[k];
    auto& v = merged[c.feature()];
    v.insert(v.end(), c.values().begin(), c.values().end());
  }
  std::vector<Condition> clause;
  for (auto& [feature, values] : merged) {
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    const int domain = schema.at(static_cast<std::size_t>(feature)).domain_size();
    if (static_cast<int>(values.size()) >= domain) continue;  // vacuous
    clause.emplace_back(feature, std::move(values), domain);
  }
  if (clause.empty()) return std::nullopt;
  return make_rule(std::move(clause), pool.class_label);
}

bool better_scored(const ScoredRule& a, const ScoredRule& b) {
  if (a.fitness != b.fitness) return a.fitness > b.fitness;
  if (a.rule.clause.size() != b.rule.clause.size())
    return a.rule.clause.size() < b.rule.clause.size();
  return a.rule < b.rule;
}

// ---------------------------------------------------------------------------

namespace {

double score_table(const ContingencyTable& t, FitnessKind kind) {
  return kind == FitnessKind::F1 ? f1(t) : fitness(t);
}

}  // namespace

GenomeEvaluator::GenomeEvaluator(const ConditionPool& pool, const Schema& schema,
                                 std::span<const CodedRow> rows,
                                 std::span<const Label> model_labels, FitnessKind kind)
    : pool_(pool), schema_(schema), kind_(kind), positives_(rows.size()),
      rows_(rows.size()) {
  if (rows.size() != model_labels.size())
    throw std::invalid_argument("GenomeEvaluator: rows and labels differ in length");
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (model_labels[i] == pool.class_label) positives_.set(i);
  condition_cover_.reserve(pool.size());
  for (const auto& c : pool.conditions) {
    RowMask m(rows.size());
    const auto f = static_cast<std::size_t>(c.feature());
    for (std::size_t i = 0; i < rows.size(); ++i)
      if (c.contains(rows[i][f])) m.set(i);
    condition_cover_.push_back(std::move(m));
  }
}

std::optional<ContingencyTable> GenomeEvaluator::table(const Genome& genome) const {
  if (genome.size() != pool_.size())
    throw std::invalid_argument("evaluate: genome length differs from pool size");
  // group selected conditions by feature
  std::map<int, std::vector<std::size_t>> groups;
  for (std::size_t k = 0; k < genome.size(); ++k)
    if (genome.bits[k]) groups[pool_.conditions[k].feature()].push_back(k);

  RowMask cover(rows_, true);
  bool any = false;
  std::vector<char> seen;
  for (const auto& [feature, members] : groups) {
    const int domain = schema_[static_cast<std::size_t>(feature)].domain_size();
    seen.assign(static_cast<std::size_t>(domain), 0);
    int distinct = 0;
    for (auto k : members)
      for (int v : pool_.conditions[k].values())
        if (!seen[v]) {
          seen[v] = 1;
          ++distinct;
        }
    if (distinct >= domain) continue;
    if (members.size() == 1) {
      cover &= condition_cover_[members[0]];
    } else {
      RowMask u = condition_cover_[members[0]];
      for (std::size_t i = 1; i < members.size(); ++i) u |= condition_cover_[members[i]];
      cover &= u;
    }
    any = true;
  }
  if (!any) return std::nullopt;
  return contingency(cover, positives_);
}

double GenomeEvaluator::evaluate(const Genome& genome) const {
  auto t = table(genome);
  return t ? score_table(*t, kind_) : kEmptyClauseFitness;
}

std::optional<Rule> GenomeEvaluator::decode(const Genome& genome) const {
  return rulex::decode(genome, pool_, schema_);
}

double evaluate(const Genome& genome, const ConditionPool& pool, const Schema& schema,
                std::span<const CodedRow> rows, std::span<const Label> model_labels,
                FitnessKind kind) {
  auto rule = decode(genome, pool, schema);
  if (!rule) return kEmptyClauseFitness;
  return score_table(contingency(*rule, rows, model_labels), kind);
}

// ---------------------------------------------------------------------------

namespace {

std::string key_of(const Genome& g) {
  return std::string(g.bits.begin(), g.bits.end());
}

struct Individual {
  Genome genome;
  double fitness = 0;
};

/// Tournament winner: higher fitness, then fewer set bits, then smaller bits.
bool wins(const Individual& a, const Individual& b) {
  if (a.fitness != b.fitness) return a.fitness > b.fitness;
  auto pa = a.genome.popcount(), pb = b.genome.popcount();
  if (pa != pb) return pa < pb;
  return a.genome.bits < b.genome.bits;
}

class Archive {
 public:
  explicit Archive(std::size_t capacity) : capacity_(capacity) {}

  double worst() const { return entries_.empty() ? kEmptyClauseFitness : entries_.back().fitness; }
  bool full() const { return entries_.size() >= capacity_; }
  std::size_t size() const { return entries_.size(); }
  double best() const { return entries_.empty() ? kEmptyClauseFitness : entries_.front().fitness; }
  const std::vector<ScoredRule>& entries() const { return entries_; }

  void offer(const Rule& rule, double fitness) {
    ScoredRule cand{rule, fitness};
    if (full() && !better_scored(cand, entries_.back())) return;
    if (!members_.insert(rule).second) return;
    auto pos = std::lower_bound(entries_.begin(), entries_.end(), cand, better_scored);
    entries_.insert(pos, std::move(cand));
    if (entries_.size() > capacity_) {
      members_.erase(entries_.back().rule);
      entries_.pop_back();
    }
  }

 private:
  std::size_t capacity_;
  std::vector<ScoredRule> entries_;
  std::set<Rule> members_;
};

}  // namespace

EvolvedRuleSet evolve_rules(const ConditionPool& pool, const Schema& schema,
                            std::span<const CodedRow> rows,
                            std::span<const Label> model_labels, const GaConfig& cfg) {
  cfg.validate();
  if (pool.conditions.empty()) throw std::invalid_argument("evolve_rules: empty pool");

  const std::size_t length = pool.size();
  const auto pop_size = static_cast<std::size_t>(cfg.population_size);
  GenomeEvaluator evaluator(pool, schema, rows, model_labels, cfg.fitness);
  std::unordered_map<std::string, double> memo;
  Archive archive(pop_size);
  Rng rng(cfg.seed);

  auto score = [&](Individual& ind) {
    auto key = key_of(ind.genome);
    if (auto it = memo.find(key); it != memo.end()) {
      ind.fitness = it->second;
      return;
    }
    ind.fitness = evaluator.evaluate(ind.genome);
    memo.emplace(std::move(key), ind.fitness);
  };

  EvolvedRuleSet result;
  result.class_label = pool.class_label;
  result.config = cfg;
  result.provenance = pool.provenance;

  auto record = [&](std::vector<Individual>& population, int generation) {
    double best = kEmptyClauseFitness, sum = 0;
    for (auto& ind : population) {
      score(ind);
      best = std::max(best, ind.fitness);
      sum += ind.fitness;
      if (ind.fitness == kEmptyClauseFitness) continue;
      if (archive.full() && ind.fitness < archive.worst()) continue;
      if (auto rule = evaluator.decode(ind.genome)) archive.offer(*rule, ind.fitness);
    }
    result.history.push_back({generation, best, sum / static_cast<double>(population.size()),
                              archive.size()});
  };

  const double density = std::min(0.5, 4.0 / static_cast<double>(length));
  std::vector<Individual> population(pop_size);
  for (auto& ind : population) {
    ind.genome.bits.resize(length);
    for (auto& b : ind.genome.bits) b = bernoulli(rng, density) ? 1 : 0;
  }
  record(population, 0);

  auto tournament = [&]() -> const Individual& {
    const Individual* best = &population[uniform_index(rng, pop_size)];
    for (int t = 1; t < cfg.tournament_k; ++t) {
      const Individual& c = population[uniform_index(rng, pop_size)];
      if (wins(c, *best)) best = &c;
    }
    return *best;
  };

  auto mutate = [&](Genome& g) {
    bool flipped = false;
    for (auto& b : g.bits)
      if (bernoulli(rng, 1.0 / static_cast<double>(length))) {
        b ^= 1;
        flipped = true;
      }
    if (!flipped) g.bits[uniform_index(rng, length)] ^= 1;
  };

  std::vector<Individual> next;
  next.reserve(pop_size);
  for (int gen = 1; gen <= cfg.generations; ++gen) {
    next.clear();
    while (next.size() < pop_size) {
      Individual a = tournament();
      Individual b = tournament();
      if (bernoulli(rng, cfg.crossover_prob))
        for (std::size_t k = 0; k < length; ++k)
          if (bernoulli(rng, 0.5)) std::swap(a.genome.bits[k], b.genome.bits[k]);
      if (bernoulli(rng, cfg.mutation_prob)) mutate(a.genome);
      if (bernoulli(rng, cfg.mutation_prob)) mutate(b.genome);
      next.push_back(std::move(a));
      if (next.size() < pop_size) next.push_back(std::move(b));
    }
    population.swap(next);
    record(population, gen);
  }

  // final population merged with the archive, duplicates removed
  std::vector<ScoredRule> merged = archive.entries();
  for (const auto& ind : population) {
    if (ind.fitness == kEmptyClauseFitness) continue;
    if (auto rule = evaluator.decode(ind.genome)) merged.push_back({std::move(*rule), ind.fitness});
  }
  std::sort(merged.begin(), merged.end(), better_scored);
  merged.erase(std::unique(merged.begin(), merged.end(),
                           [](const ScoredRule& a, const ScoredRule& b) { return a.rule == b.rule; }),
               merged.end());
  result.rules = std::move(merged);
  return result;
}

void write_history_jsonl(std::ostream& out, const EvolvedRuleSet& set) {
  for (const auto& h : set.history) {
    nlohmann::json j = {{"class", set.class_label},
                        {"generation", h.generation},
                        {"best", h.best},
                        {"mean", h.mean},
                        {"archive_size", h.archive_size}};
    out << j.dump() << '\n';
  }
}

}  // namespace rulex
