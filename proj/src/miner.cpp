#include "rulex/miner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Dense>

#include "rulex/random.hpp"

namespace rulex {

namespace {

/// Empirical per-feature bin distribution of the background rows, plus the
/// observed raw range inside each numeric bin.
struct Marginals {
  struct Feature {
    std::vector<int> codes;  // one entry per background row
    std::vector<double> lo, hi;
  };
  std::vector<Feature> features;

  Marginals(const Dataset& background) {
    const auto& schema = background.schema;
    features.resize(schema.size());
    for (std::size_t j = 0; j < schema.size(); ++j) {
      auto& f = features[j];
      const int d = schema[j].domain_size();
      f.lo.assign(d, std::numeric_limits<double>::infinity());
      f.hi.assign(d, -std::numeric_limits<double>::infinity());
      f.codes.reserve(background.rows.size());
      for (const auto& r : background.rows) {
        int c = schema[j].code_of(r[j]);
        f.codes.push_back(c);
        f.lo[c] = std::min(f.lo[c], r[j]);
        f.hi[c] = std::max(f.hi[c], r[j]);
      }
    }
  }
};

}  // namespace

std::vector<WeightedCondition> local_explain(const RawRow& instance, ModelOracle& oracle,
                                             Label target, const Dataset& background,
                                             const LocalExplainConfig& cfg,
                                             std::uint64_t seed) {
  const auto& schema = background.schema;
  const std::size_t m = schema.size();
  if (instance.size() != m) throw std::invalid_argument("local_explain: instance arity");
  if (background.rows.empty()) throw std::invalid_argument("local_explain: empty background");
  if (cfg.samples < 2) throw std::invalid_argument("local_explain: need at least 2 samples");

  const Marginals marginals(background);
  const CodedRow home = encode(schema, instance);
  Rng rng(seed);

  const auto n = static_cast<std::size_t>(cfg.samples);
  std::vector<RawRow> samples(n, instance);
  Eigen::MatrixXd same(n, m);
  same.setOnes();
  // sample 0 is the instance itself
  for (std::size_t s = 1; s < n; ++s) {
    for (std::size_t j = 0; j < m; ++j) {
      if (bernoulli(rng, 0.5)) continue;
      const auto& f = marginals.features[j];
      const int code = f.codes[uniform_index(rng, f.codes.size())];
      if (schema[j].numeric()) {
        samples[s][j] = f.lo[code] + uniform_unit(rng) * (f.hi[code] - f.lo[code]);
      } else {
        samples[s][j] = code;
      }
      same(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(j)) =
          code == home[j] ? 1.0 : 0.0;
    }
  }

  auto labels = oracle.predict_batch(samples);
  Eigen::VectorXd y(n);
  for (std::size_t s = 0; s < n; ++s) y(s) = labels[s] == target ? 1.0 : 0.0;
  if (y.minCoeff() == y.maxCoeff()) return {};

  const double width =
      cfg.kernel_width > 0 ? cfg.kernel_width : 0.75 * std::sqrt(static_cast<double>(m));
  Eigen::VectorXd w(n);
  for (std::size_t s = 0; s < n; ++s) {
    const double diff = static_cast<double>(m) - same.row(s).sum();
    const double d = diff / std::sqrt(static_cast<double>(m));
    w(s) = std::exp(-(d * d) / (width * width));
  }

  // design [1 | same], lambda on every coefficient but the intercept
  Eigen::MatrixXd design(n, m + 1);
  design.col(0).setOnes();
  design.rightCols(m) = same;
  Eigen::MatrixXd gram = design.transpose() * w.asDiagonal() * design;
  gram.diagonal().tail(m).array() += cfg.ridge_lambda;
  Eigen::VectorXd rhs = design.transpose() * (w.array() * y.array()).matrix();
  Eigen::VectorXd beta = gram.ldlt().solve(rhs);

  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
    return std::abs(beta(a + 1)) > std::abs(beta(b + 1));
  });

  std::vector<WeightedCondition> out;
  const auto keep = std::min<std::size_t>(m, static_cast<std::size_t>(std::max(0, cfg.top_k)));
  for (std::size_t k = 0; k < keep; ++k) {
    const auto j = order[k];
    const double coef = beta(static_cast<Eigen::Index>(j + 1));
    if (!(coef > 0)) continue;
    if (schema[j].domain_size() < 2) continue;
    out.push_back({Condition(static_cast<int>(j), {home[j]}, schema[j].domain_size()), coef});
  }
  return out;
}

std::vector<std::size_t> uncovered_instances(const ConditionPool& pool,
                                             std::span<const CodedRow> rows,
                                             std::span<const Label> model_labels) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (model_labels[i] != pool.class_label) continue;
    bool hit = std::any_of(pool.conditions.begin(), pool.conditions.end(),
                           [&](const Condition& c) {
                             return c.contains(rows[i][static_cast<std::size_t>(c.feature())]);
                           });
    if (!hit) out.push_back(i);
  }
  return out;
}

namespace {

void add_unique(std::vector<Condition>& pool, const Condition& c) {
  if (std::find(pool.begin(), pool.end(), c) == pool.end()) pool.push_back(c);
}

/// The instance's bin on the feature where that bin is purest for `cls`.
std::optional<Condition> purity_fallback(const CodedRow& instance, Label cls,
                                         const Schema& schema,
                                         std::span<const CodedRow> rows,
                                         std::span<const Label> labels) {
  double best = -1;
  std::optional<Condition> out;
  for (std::size_t j = 0; j < schema.size(); ++j) {
    if (schema[j].domain_size() < 2) continue;
    std::size_t match = 0, hit = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i][j] != instance[j]) continue;
      ++match;
      if (labels[i] == cls) ++hit;
    }
    const double purity = match ? static_cast<double>(hit) / match : 0.0;
    if (purity > best) {
      best = purity;
      out.emplace(static_cast<int>(j), std::vector<int>{instance[j]}, schema[j].domain_size());
    }
  }
  return out;
}

}  // namespace

ConditionPool mine_conditions_local(Label cls, const Dataset& mining,
                                    std::span<const Label> model_labels,
                                    ModelOracle& oracle, const LocalExplainConfig& cfg,
                                    std::uint64_t seed) {
  if (model_labels.size() != mining.rows.size())
    throw std::invalid_argument("mine_conditions_local: label count mismatch");
  const auto coded = mining.coded();
  ConditionPool pool;
  pool.class_label = cls;
  pool.provenance = PoolProvenance::LocalSurrogate;

  std::vector<std::size_t> members;
  for (std::size_t i = 0; i < coded.size(); ++i)
    if (model_labels[i] == cls) members.push_back(i);
  if (members.empty())
    throw std::invalid_argument("mine_conditions_local: class has no instances");

  Rng rng(seed);
  std::vector<char> covered(coded.size(), 0), explained(coded.size(), 0);
  auto refresh = [&](const Condition& c) {
    for (auto i : members)
      if (c.contains(coded[i][static_cast<std::size_t>(c.feature())])) covered[i] = 1;
  };

  const std::size_t budget = static_cast<std::size_t>(std::max(1, cfg.budget_factor)) *
                             members.size();
  std::size_t calls = 0;
  std::vector<std::size_t> open;
  while (calls < budget) {
    open.clear();
    for (auto i : members)
      if (!covered[i] && !explained[i]) open.push_back(i);
    if (open.empty()) break;
    const auto pick = open[uniform_index(rng, open.size())];
    explained[pick] = 1;
    auto conds = local_explain(mining.rows[pick], oracle, cls, mining, cfg,
                               derive_seed(seed, "local_explain", calls));
    ++calls;
    for (const auto& wc : conds) {
      add_unique(pool.conditions, wc.condition);
      refresh(wc.condition);
    }
  }

  // Instances whose explanation produced nothing covering them, or that the
  // budget never reached, fall back to their purest single-feature bin.
  for (auto i : members) {
    if (covered[i]) continue;
    if (auto c = purity_fallback(coded[i], cls, mining.schema, coded, model_labels)) {
      add_unique(pool.conditions, *c);
      refresh(*c);
    }
  }
  return pool;
}

ConditionPool mine_conditions_frequent(Label cls, const Schema& schema,
                                       std::span<const CodedRow> rows,
                                       std::span<const Label> model_labels,
                                       double support_threshold) {
  if (!(support_threshold > 0 && support_threshold < 1))
    throw std::invalid_argument("mine_conditions_frequent: threshold must be in (0,1)");
  if (rows.size() != model_labels.size())
    throw std::invalid_argument("mine_conditions_frequent: label count mismatch");
  ConditionPool pool;
  pool.class_label = cls;
  pool.provenance = PoolProvenance::Frequent;
  pool.support_threshold = support_threshold;

  std::size_t members = 0;
  std::vector<std::vector<std::size_t>> counts(schema.size());
  for (std::size_t j = 0; j < schema.size(); ++j)
    counts[j].assign(static_cast<std::size_t>(schema[j].domain_size()), 0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (model_labels[i] != cls) continue;
    ++members;
    for (std::size_t j = 0; j < schema.size(); ++j) ++counts[j][rows[i][j]];
  }
  if (members == 0) return pool;
  for (std::size_t j = 0; j < schema.size(); ++j) {
    if (schema[j].domain_size() < 2) continue;
    for (std::size_t v = 0; v < counts[j].size(); ++v) {
      const double support = static_cast<double>(counts[j][v]) / members;
      if (support >= support_threshold)
        pool.conditions.emplace_back(static_cast<int>(j), std::vector<int>{static_cast<int>(v)},
                                     schema[j].domain_size());
    }
  }
  return pool;
}

}  // namespace rulex
