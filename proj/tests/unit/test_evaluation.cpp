#include <catch_amalgamated.hpp>

#include <random>

#include "rulex/evaluation.hpp"

using namespace rulex;
using Catch::Approx;

namespace {

InterpretationRule ir(Rule r, double precision, double coverage) {
  return {std::move(r), precision, coverage, 0};
}

Rule on(int feature, int value, Label pred, int domain = 3) {
  return make_rule({Condition(feature, {value}, domain)}, pred);
}

}  // namespace

TEST_CASE("overlapping rules are arbitrated by precision, then coverage, then order") {
  Interpretation in;
  in.rules = {ir(on(0, 0, 1), 0.8, 0.1), ir(on(1, 0, 2), 0.9, 0.05), ir(on(2, 0, 0), 0.9, 0.2)};
  CHECK(predict_with_rules(in, {0, 1, 1}) == 1);
  CHECK(predict_with_rules(in, {0, 0, 1}) == 2);
  CHECK(predict_with_rules(in, {0, 0, 0}) == 0);
  CHECK_FALSE(predict_with_rules(in, {1, 1, 1}).has_value());

  Interpretation tie;
  tie.rules = {ir(on(0, 0, 1), 0.5, 0.5), ir(on(1, 0, 2), 0.5, 0.5)};
  CHECK(predict_with_rules(tie, {0, 0, 0}) == 1);
}

TEST_CASE("set score counts abstentions as misses") {
  Interpretation in;
  in.rules = {ir(on(0, 0, 1), 1, 0.5)};
  std::vector<CodedRow> rows{{0}, {0}, {1}, {2}};
  CHECK(set_score(in, rows, std::vector<Label>{1, 0, 1, 1}) == Approx(25));
  CHECK(set_score(in, rows, std::vector<Label>{1, 1, 0, 0}) == Approx(50));
  Interpretation with_default = in;
  with_default.rules.push_back(ir(make_default_rule(0), 0.5, 1));
  CHECK(set_score(with_default, rows, std::vector<Label>{1, 1, 0, 0}) == Approx(100));
  CHECK_THROWS(set_score(in, {}, {}));
}

TEST_CASE("set score agrees with a direct count on random interpretations") {
  std::mt19937 rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<CodedRow> rows;
    std::vector<Label> labels;
    for (int i = 0; i < 80; ++i) {
      rows.push_back({static_cast<int>(rng() % 3), static_cast<int>(rng() % 3)});
      labels.push_back(static_cast<Label>(rng() % 2));
    }
    std::vector<ScoredRule> rules;
    for (int k = 0; k < 3; ++k)
      rules.push_back({on(static_cast<int>(rng() % 2), static_cast<int>(rng() % 3),
                          static_cast<Label>(rng() % 2)),
                       0});
    auto in = make_interpretation(rules, rows, labels);
    int hits = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const InterpretationRule* best = nullptr;
      for (const auto& r : in.rules)
        if (covers(r.rule, rows[i]) &&
            (!best || r.precision > best->precision ||
             (r.precision == best->precision && r.coverage > best->coverage)))
          best = &r;
      hits += best && best->rule.prediction == labels[i];
    }
    CHECK(set_score(in, rows, labels) == Approx(100.0 * hits / 80));
  }
}

TEST_CASE("greedy selection stops when no candidate adds a correct row") {
  std::vector<CodedRow> rows{{0}, {0}, {1}, {1}, {2}};
  std::vector<Label> labels{1, 1, 0, 0, 1};
  std::vector<ScoredRule> cands{{on(0, 0, 1), 0.3}, {on(0, 1, 0), 0.2}, {on(0, 1, 1), 0.5}};
  auto sel = greedy_select(cands, 5, rows, labels);
  REQUIRE(sel.rules.size() == 2);
  CHECK(sel.rules[0].rule == cands[0].rule);
  CHECK(sel.rules[1].rule == cands[1].rule);
  CHECK(sel.selection_size == 5);
  CHECK(set_score(sel, rows, labels) == Approx(80));
  CHECK_THROWS(greedy_select(cands, 0, rows, labels));
  CHECK_THROWS(greedy_select({}, 1, rows, labels));
}

TEST_CASE("equal gains go to the fitter, then the shorter candidate") {
  std::vector<CodedRow> rows{{0, 0}, {1, 1}};
  std::vector<Label> labels{1, 1};
  std::vector<ScoredRule> cands{{on(0, 0, 1), 0.1}, {on(0, 1, 1), 0.4}};
  CHECK(greedy_select(cands, 1, rows, labels).rules[0].rule == cands[1].rule);
  auto longer = make_rule({Condition(0, {1}, 3), Condition(1, {1}, 3)}, 1);
  std::vector<ScoredRule> same{{longer, 0.4}, {on(0, 1, 1), 0.4}};
  CHECK(greedy_select(same, 1, rows, labels).rules[0].rule.clause.size() == 1);
}

TEST_CASE("greedy score never decreases with the selection size") {
  std::mt19937 rng(21);
  std::vector<CodedRow> rows;
  std::vector<Label> labels;
  for (int i = 0; i < 200; ++i) {
    CodedRow r{static_cast<int>(rng() % 3), static_cast<int>(rng() % 3), static_cast<int>(rng() % 3)};
    rows.push_back(r);
    labels.push_back(r[0] == r[1] ? 1 : 0);
  }
  std::vector<ScoredRule> cands;
  for (int f = 0; f < 3; ++f)
    for (int v = 0; v < 3; ++v)
      for (Label p : {0, 1}) cands.push_back({on(f, v, p), 0});
  double last = -1;
  for (std::size_t k = 1; k <= 10; ++k) {
    auto sel = greedy_select(cands, k, rows, labels);
    const double s = set_score(sel, rows, labels);
    CHECK(s >= last);
    last = s;
    if (k > 1) CHECK(greedy_select(cands, k - 1, rows, labels).rules.size() <= sel.rules.size());
  }
}

TEST_CASE("prefix keeps the first rules") {
  Interpretation in;
  in.rules = {ir(on(0, 0, 1), 1, 1), ir(on(0, 1, 1), 1, 1), ir(on(0, 2, 1), 1, 1)};
  auto p = in.prefix(2);
  CHECK(p.rules.size() == 2);
  CHECK(p.selection_size == 2);
  CHECK(in.prefix(9).rules.size() == 3);
}
