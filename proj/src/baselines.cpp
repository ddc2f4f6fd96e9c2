#include "rulex/baselines.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

#include "rulex/oracle.hpp"
#include "rulex/row_mask.hpp"

namespace rulex {

namespace {

int n_classes_of(std::span<const Label> labels) {
  Label m = 0;
  for (auto l : labels) m = std::max(m, l);
  return static_cast<int>(m) + 1;
}

ScoredRule scored(Rule rule, std::span<const CodedRow> rows, std::span<const Label> labels) {
  const double f = fitness(contingency(rule, rows, labels));
  return {std::move(rule), f};
}

}  // namespace

std::vector<ScoredRule> dt_surrogate_rules(const Schema& schema, std::span<const CodedRow> rows,
                                           std::span<const Label> model_labels, int max_depth) {
  if (max_depth < 1) throw std::invalid_argument("dt_surrogate_rules: max_depth < 1");
  std::vector<RawRow> as_raw;
  as_raw.reserve(rows.size());
  for (const auto& r : rows) as_raw.emplace_back(r.begin(), r.end());
  const auto tree = DecisionTree::fit(as_raw, model_labels, nominal_mask(schema),
                                      n_classes_of(model_labels), max_depth);
  const auto& nodes = tree.nodes();

  std::vector<ScoredRule> out;
  if (nodes[0].leaf()) {
    out.push_back(scored(make_default_rule(nodes[0].prediction), rows, model_labels));
    return out;
  }

  // depth-first walk carrying the allowed codes per feature
  using Domains = std::vector<std::vector<char>>;
  Domains full(schema.size());
  for (std::size_t j = 0; j < schema.size(); ++j)
    full[j].assign(static_cast<std::size_t>(schema[j].domain_size()), 1);

  struct Frame {
    int node;
    Domains allowed;
  };
  std::vector<Frame> stack{{0, full}};
  while (!stack.empty()) {
    Frame f = std::move(stack.back());
    stack.pop_back();
    const auto& n = nodes[static_cast<std::size_t>(f.node)];
    if (n.leaf()) {
      std::vector<Condition> clause;
      for (std::size_t j = 0; j < schema.size(); ++j) {
        std::vector<int> values;
        for (std::size_t v = 0; v < f.allowed[j].size(); ++v)
          if (f.allowed[j][v]) values.push_back(static_cast<int>(v));
        if (values.size() == f.allowed[j].size() || values.empty()) continue;
        clause.emplace_back(static_cast<int>(j), std::move(values), schema[j].domain_size());
      }
      out.push_back(scored(make_rule(std::move(clause), n.prediction), rows, model_labels));
      continue;
    }
    Domains left = f.allowed, right = std::move(f.allowed);
    auto& l = left[static_cast<std::size_t>(n.feature)];
    auto& r = right[static_cast<std::size_t>(n.feature)];
    for (std::size_t v = 0; v < l.size(); ++v) {
      const double x = static_cast<double>(v);
      const bool go_left = n.nominal ? x == n.threshold : x < n.threshold;
      (go_left ? r : l)[v] = 0;
    }
    stack.push_back({n.right, std::move(right)});
    stack.push_back({n.left, std::move(left)});
  }
  return out;
}

std::vector<ScoredRule> apriori_rules(const Schema& schema, std::span<const CodedRow> rows,
                                      std::span<const Label> model_labels, double support,
                                      int max_clause_len) {
  if (!(support > 0 && support < 1))
    throw std::invalid_argument("apriori_rules: support must be in (0,1)");
  if (rows.size() != model_labels.size())
    throw std::invalid_argument("apriori_rules: rows and labels differ in length");
  if (rows.empty() || max_clause_len < 1) return {};
  const auto n = rows.size();
  const auto min_count = support * static_cast<double>(n);
  const int n_classes = n_classes_of(model_labels);

  struct Item {
    int feature, value;
    auto operator<=>(const Item&) const = default;
  };
  std::vector<Item> items;
  std::vector<RowMask> item_mask;
  for (std::size_t j = 0; j < schema.size(); ++j) {
    if (schema[j].domain_size() < 2) continue;
    for (int v = 0; v < schema[j].domain_size(); ++v) {
      RowMask m(n);
      for (std::size_t i = 0; i < n; ++i)
        if (rows[i][j] == v) m.set(i);
      if (static_cast<double>(m.count()) >= min_count) {
        items.push_back({static_cast<int>(j), v});
        item_mask.push_back(std::move(m));
      }
    }
  }

  std::vector<RowMask> class_mask(static_cast<std::size_t>(n_classes), RowMask(n));
  for (std::size_t i = 0; i < n; ++i) class_mask[static_cast<std::size_t>(model_labels[i])].set(i);

  using Itemset = std::vector<int>;  // indices into items, ascending
  std::vector<ScoredRule> out;
  auto emit = [&](const Itemset& set, const RowMask& cover) {
    Label best = 0;
    std::size_t best_count = 0;
    for (int c = 0; c < n_classes; ++c) {
      auto k = cover.count_and(class_mask[static_cast<std::size_t>(c)]);
      if (k > best_count) {
        best_count = k;
        best = c;
      }
    }
    std::vector<Condition> clause;
    for (int idx : set) {
      const auto& it = items[static_cast<std::size_t>(idx)];
      clause.emplace_back(it.feature, std::vector<int>{it.value},
                          schema[static_cast<std::size_t>(it.feature)].domain_size());
    }
    Rule rule = make_rule(std::move(clause), best);
    const double f = fitness(contingency(cover, class_mask[static_cast<std::size_t>(best)]));
    out.push_back({std::move(rule), f});
  };

  std::vector<Itemset> level;
  std::vector<RowMask> level_mask;
  for (std::size_t k = 0; k < items.size(); ++k) {
    level.push_back({static_cast<int>(k)});
    level_mask.push_back(item_mask[k]);
    emit(level.back(), level_mask.back());
  }

  for (int len = 2; len <= max_clause_len && !level.empty(); ++len) {
    std::set<Itemset> frequent(level.begin(), level.end());
    std::vector<Itemset> next;
    std::vector<RowMask> next_mask;
    for (std::size_t a = 0; a < level.size(); ++a) {
      for (std::size_t b = a + 1; b < level.size(); ++b) {
        const auto& x = level[a];
        const auto& y = level[b];
        if (!std::equal(x.begin(), x.end() - 1, y.begin())) break;  // sorted: prefix groups are contiguous
        const int last_x = x.back(), last_y = y.back();
        if (items[static_cast<std::size_t>(last_x)].feature ==
            items[static_cast<std::size_t>(last_y)].feature)
          continue;
        Itemset cand = x;
        cand.push_back(last_y);
        // downward closure: every (len-1)-subset must be frequent
        bool ok = true;
        for (std::size_t drop = 0; drop + 2 < cand.size() && ok; ++drop) {
          Itemset sub;
          for (std::size_t t = 0; t < cand.size(); ++t)
            if (t != drop) sub.push_back(cand[t]);
          ok = frequent.count(sub) > 0;
        }
        if (!ok) continue;
        RowMask m = level_mask[a];
        m &= item_mask[static_cast<std::size_t>(last_y)];
        if (static_cast<double>(m.count()) < min_count) continue;
        emit(cand, m);
        next.push_back(std::move(cand));
        next_mask.push_back(std::move(m));
      }
    }
    level = std::move(next);
    level_mask = std::move(next_mask);
  }

  std::sort(out.begin(), out.end(), better_scored);
  return out;
}

}  // namespace rulex
