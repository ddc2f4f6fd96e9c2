#include "rulex/evaluation.hpp"

#include <stdexcept>

namespace rulex {

Interpretation Interpretation::prefix(std::size_t n) const {
  Interpretation out = *this;
  if (out.rules.size() > n) out.rules.resize(n);
  out.selection_size = n;
  return out;
}

std::optional<Label> predict_with_rules(const Interpretation& interp, const CodedRow& row) {
  const InterpretationRule* best = nullptr;
  for (const auto& r : interp.rules) {
    if (!covers(r.rule, row)) continue;
    if (!best || r.precision > best->precision ||
        (r.precision == best->precision && r.coverage > best->coverage))
      best = &r;
  }
  if (!best) return std::nullopt;
  return best->rule.prediction;
}

double set_score(const Interpretation& interp, std::span<const CodedRow> rows,
                 std::span<const Label> model_labels) {
  if (rows.empty()) throw std::invalid_argument("set_score: no rows");
  if (rows.size() != model_labels.size())
    throw std::invalid_argument("set_score: rows and labels differ in length");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto p = predict_with_rules(interp, rows[i]);
    if (p && *p == model_labels[i]) ++hits;
  }
  return 100.0 * static_cast<double>(hits) / static_cast<double>(rows.size());
}

Interpretation make_interpretation(std::span<const ScoredRule> rules,
                                   std::span<const CodedRow> rows,
                                   std::span<const Label> model_labels) {
  Interpretation out;
  for (const auto& r : rules) {
    auto t = contingency(r.rule, rows, model_labels);
    out.rules.push_back({r.rule, precision(t), coverage(t), r.fitness});
  }
  out.selection_size = out.rules.size();
  return out;
}

Interpretation greedy_select(std::span<const ScoredRule> candidates, std::size_t k,
                             std::span<const CodedRow> valid_rows,
                             std::span<const Label> valid_labels) {
  if (k < 1) throw std::invalid_argument("greedy_select: k must be >= 1");
  if (candidates.empty()) throw std::invalid_argument("greedy_select: no candidates");
  if (valid_rows.size() != valid_labels.size())
    throw std::invalid_argument("greedy_select: rows and labels differ in length");

  struct Prepared {
    std::vector<std::uint32_t> cover;
    double precision = 0, coverage = 0;
    bool used = false;
  };
  std::vector<Prepared> prep(candidates.size());
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    std::int64_t n11 = 0;
    for (std::size_t i = 0; i < valid_rows.size(); ++i)
      if (covers(candidates[c].rule, valid_rows[i])) {
        prep[c].cover.push_back(static_cast<std::uint32_t>(i));
        if (valid_labels[i] == candidates[c].rule.prediction) ++n11;
      }
    const auto r1 = prep[c].cover.size();
    prep[c].precision = r1 ? static_cast<double>(n11) / static_cast<double>(r1) : 0.0;
    prep[c].coverage = valid_rows.empty()
                           ? 0.0
                           : static_cast<double>(r1) / static_cast<double>(valid_rows.size());
  }

  // current arbitration state per validation row
  const std::size_t n = valid_rows.size();
  std::vector<double> best_prec(n, -1.0), best_cov(n, -1.0);
  std::vector<Label> current(n, -1);

  auto wins = [&](const Prepared& p, std::size_t row) {
    return p.precision > best_prec[row] ||
           (p.precision == best_prec[row] && p.coverage > best_cov[row]);
  };

  Interpretation out;
  while (out.rules.size() < k) {
    std::int64_t best_gain = 0;
    std::ptrdiff_t best = -1;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      const auto& p = prep[c];
      if (p.used || p.cover.empty()) continue;
      std::int64_t gain = 0;
      const Label pred = candidates[c].rule.prediction;
      for (auto row : p.cover) {
        if (!wins(p, row)) continue;
        gain += (pred == valid_labels[row]) - (current[row] == valid_labels[row]);
      }
      if (gain <= 0) continue;
      bool take = best < 0 || gain > best_gain;
      if (!take && gain == best_gain) {
        const auto& a = candidates[c];
        const auto& b = candidates[static_cast<std::size_t>(best)];
        if (a.fitness != b.fitness)
          take = a.fitness > b.fitness;
        else
          take = a.rule.clause.size() < b.rule.clause.size();
      }
      if (take) {
        best_gain = gain;
        best = static_cast<std::ptrdiff_t>(c);
      }
    }
    if (best < 0) break;
    auto& p = prep[static_cast<std::size_t>(best)];
    p.used = true;
    const auto& cand = candidates[static_cast<std::size_t>(best)];
    for (auto row : p.cover)
      if (wins(p, row)) {
        best_prec[row] = p.precision;
        best_cov[row] = p.coverage;
        current[row] = cand.rule.prediction;
      }
    out.rules.push_back({cand.rule, p.precision, p.coverage, cand.fitness});
  }
  out.selection_size = k;
  return out;
}

}  // namespace rulex
