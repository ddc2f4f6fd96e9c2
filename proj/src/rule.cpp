#include "rulex/rule.hpp"

#include <algorithm>
#include <cmath>

namespace rulex {

Condition::Condition(int feature, std::vector<int> values, int domain_size)
    : feature_(feature), values_(std::move(values)) {
  std::sort(values_.begin(), values_.end());
  values_.erase(std::unique(values_.begin(), values_.end()), values_.end());
  if (feature_ < 0) throw RuleError("condition on a negative feature index");
  if (values_.empty()) throw RuleError("condition with an empty value set");
  if (values_.front() < 0 || values_.back() >= domain_size)
    throw RuleError("condition value outside the feature domain");
  if (static_cast<int>(values_.size()) >= domain_size)
    throw RuleError("condition covering the whole feature domain");
}

Condition::Condition(const Schema& schema, int feature, std::vector<int> values)
    : Condition(feature, std::move(values),
                schema.at(static_cast<std::size_t>(feature)).domain_size()) {}

bool Condition::contains(int code) const {
  return std::binary_search(values_.begin(), values_.end(), code);
}

Rule make_rule(std::vector<Condition> clause, Label prediction) {
  if (clause.empty()) throw RuleError("rule with an empty clause");
  std::sort(clause.begin(), clause.end());
  for (std::size_t i = 1; i < clause.size(); ++i)
    if (clause[i].feature() == clause[i - 1].feature())
      throw RuleError("two conditions on feature " +
                      std::to_string(clause[i].feature()));
  Rule r;
  r.clause = std::move(clause);
  r.prediction = prediction;
  return r;
}

Rule make_default_rule(Label prediction) {
  Rule r;
  r.prediction = prediction;
  r.default_rule = true;
  return r;
}

bool covers(const Rule& rule, const CodedRow& row) {
  return std::all_of(rule.clause.begin(), rule.clause.end(), [&](const Condition& c) {
    return c.contains(row[static_cast<std::size_t>(c.feature())]);
  });
}

RowMask cover_mask(const Rule& rule, std::span<const CodedRow> rows) {
  RowMask m(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (covers(rule, rows[i])) m.set(i);
  return m;
}

ContingencyTable contingency(const Rule& rule, std::span<const CodedRow> rows,
                             std::span<const Label> model_labels) {
  if (rows.size() != model_labels.size())
    throw std::invalid_argument("contingency: rows and labels differ in length");
  ContingencyTable t;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const bool cov = covers(rule, rows[i]);
    const bool hit = model_labels[i] == rule.prediction;
    if (cov)
      ++(hit ? t.n11 : t.n12);
    else
      ++(hit ? t.n21 : t.n22);
  }
  return t;
}

ContingencyTable contingency(const RowMask& cover, const RowMask& positives) {
  ContingencyTable t;
  const auto n = static_cast<std::int64_t>(cover.size());
  const auto r1 = static_cast<std::int64_t>(cover.count());
  const auto c1 = static_cast<std::int64_t>(positives.count());
  t.n11 = static_cast<std::int64_t>(cover.count_and(positives));
  t.n12 = r1 - t.n11;
  t.n21 = c1 - t.n11;
  t.n22 = n - r1 - t.n21;
  return t;
}

double mutual_information(const ContingencyTable& t) {
  const double n = static_cast<double>(t.total());
  if (t.total() <= 0) return 0.0;
  const std::int64_t r[2] = {t.r1(), t.r2()};
  const std::int64_t c[2] = {t.c1(), t.c2()};
  if (r[0] == 0 || r[1] == 0 || c[0] == 0 || c[1] == 0) return 0.0;
  const std::int64_t cells[2][2] = {{t.n11, t.n12}, {t.n21, t.n22}};
  double sum = 0.0;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      const auto nab = cells[a][b];
      if (nab == 0) continue;
      sum += static_cast<double>(nab) *
             std::log2(static_cast<double>(nab) * n /
                       (static_cast<double>(r[a]) * static_cast<double>(c[b])));
    }
  // rounding can leave a tiny negative residue for independent tables
  return std::max(0.0, sum / n);
}

double fitness(const ContingencyTable& t) {
  const double mi = mutual_information(t);
  // n11 >= r1*c1/N, compared exactly in integers
  return t.n11 * t.total() >= t.r1() * t.c1() ? mi : -mi;
}

double precision(const ContingencyTable& t) {
  return t.r1() == 0 ? 0.0 : static_cast<double>(t.n11) / static_cast<double>(t.r1());
}

double coverage(const ContingencyTable& t) {
  return t.total() == 0 ? 0.0
                        : static_cast<double>(t.r1()) / static_cast<double>(t.total());
}

double class_recall(const ContingencyTable& t) {
  return t.c1() == 0 ? 0.0 : static_cast<double>(t.n11) / static_cast<double>(t.c1());
}

double f1(const ContingencyTable& t) {
  const double p = precision(t), r = class_recall(t);
  if (p + r == 0.0) return 0.0;
  return 2.0 * p * r / (p + r);
}

PrecisionCoverage precision_coverage(const Rule& rule, std::span<const CodedRow> rows,
                                     std::span<const Label> model_labels) {
  auto t = contingency(rule, rows, model_labels);
  return {precision(t), coverage(t)};
}

std::string describe_clause(const Rule& rule, const Schema& schema) {
  if (rule.clause.empty()) return "TRUE";
  std::string s;
  for (std::size_t k = 0; k < rule.clause.size(); ++k) {
    const auto& c = rule.clause[k];
    const auto& f = schema.at(static_cast<std::size_t>(c.feature()));
    if (k) s += " AND ";
    if (f.numeric()) {
      // contiguous bins read as one interval
      const auto& v = c.values();
      if (v.back() - v.front() + 1 == static_cast<int>(v.size())) {
        FeatureSchema merged = f;
        if (v.front() > 0 || v.back() < static_cast<int>(f.cuts.size())) {
          std::vector<double> cuts;
          if (v.front() > 0) cuts.push_back(f.cuts[v.front() - 1]);
          if (v.back() < static_cast<int>(f.cuts.size())) cuts.push_back(f.cuts[v.back()]);
          merged.cuts = cuts;
          s += merged.interval_label(v.front() > 0 ? 1 : 0);
          continue;
        }
      }
      s += "(";
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += " OR ";
        s += f.interval_label(v[i]);
      }
      s += ")";
    } else if (c.values().size() == 1) {
      s += f.name + " = " + f.categories.at(c.values()[0]);
    } else {
      s += f.name + " in {";
      for (std::size_t i = 0; i < c.values().size(); ++i) {
        if (i) s += ", ";
        s += f.categories.at(c.values()[i]);
      }
      s += "}";
    }
  }
  return s;
}

std::string describe(const Rule& rule, const Schema& schema,
                     const std::vector<std::string>& classes) {
  return "IF " + describe_clause(rule, schema) + " THEN class = " +
         classes.at(static_cast<std::size_t>(rule.prediction));
}

}  // namespace rulex
