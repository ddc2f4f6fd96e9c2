#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "rulex/rule.hpp"

using namespace rulex;
using Catch::Approx;

namespace {

double brute_mi(const ContingencyTable& t) {
  const double n = static_cast<double>(t.total());
  const double cell[2][2] = {{double(t.n11), double(t.n12)}, {double(t.n21), double(t.n22)}};
  double mi = 0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const double row = cell[i][0] + cell[i][1], col = cell[0][j] + cell[1][j];
      if (cell[i][j] > 0) mi += cell[i][j] / n * std::log2(cell[i][j] * n / (row * col));
    }
  return mi;
}

Schema mushroom_like() {
  return {{"odor", FeatureKind::Categorical, {"none", "foul", "almond"}, {}},
          {"size", FeatureKind::Numeric, {}, {2, 5, 9}}};
}

}  // namespace

TEST_CASE("scores of the three illustrative rules") {
  ContingencyTable good{600, 0, 1000, 400}, random{800, 200, 800, 200}, bad{1000, 400, 600, 0};
  CHECK(mutual_information(good) == Approx(0.118).margin(1e-3));
  CHECK(mutual_information(random) == Approx(0.0).margin(1e-12));
  CHECK(mutual_information(bad) == Approx(0.118).margin(1e-3));
  CHECK(f1(good) == Approx(0.545).margin(1e-3));
  CHECK(f1(random) == Approx(0.615).margin(1e-3));
  CHECK(f1(bad) == Approx(0.667).margin(1e-3));
  CHECK(fitness(good) == Approx(0.118).margin(1e-3));
  CHECK(fitness(bad) == Approx(-0.118).margin(1e-3));
  CHECK(precision(bad) == Approx(1000.0 / 1400));
  CHECK(coverage(bad) == Approx(0.7));
  CHECK(class_recall(bad) == Approx(1000.0 / 1600));
}

TEST_CASE("mutual information matches a direct evaluation and handles empty margins") {
  std::mt19937 rng(11);
  for (int i = 0; i < 500; ++i) {
    ContingencyTable t{rng() % 50, rng() % 50, rng() % 50, rng() % 50};
    if (t.total() == 0) continue;
    CHECK(mutual_information(t) == Approx(brute_mi(t)).margin(1e-12));
  }
  CHECK(mutual_information({0, 0, 5, 7}) == 0);
  CHECK(mutual_information({5, 0, 7, 0}) == 0);
  CHECK(mutual_information({0, 0, 0, 0}) == 0);
  CHECK(f1({0, 0, 0, 0}) == 0);
  CHECK(precision({0, 0, 3, 3}) == 0);
}

TEST_CASE("fitness sign follows the exact expected-count comparison") {
  // n11 * N == r1 * c1 exactly: independent, fitness 0 and non-negative
  ContingencyTable t{2, 2, 2, 2};
  CHECK(fitness(t) == 0);
  CHECK(fitness({3, 1, 1, 3}) > 0);
  CHECK(fitness({1, 3, 3, 1}) < 0);
}

TEST_CASE("conditions validate their value sets") {
  CHECK_THROWS_AS(Condition(0, {}, 3), RuleError);
  CHECK_THROWS_AS(Condition(0, {0, 1, 2}, 3), RuleError);
  CHECK_THROWS_AS(Condition(0, {3}, 3), RuleError);
  CHECK_THROWS_AS(Condition(-1, {0}, 3), RuleError);
  Condition c(0, {2, 0, 2}, 4);
  CHECK(c.values() == std::vector<int>{0, 2});
  CHECK(c.contains(2));
  CHECK_FALSE(c.contains(1));
}

TEST_CASE("rules normalize their clause and reject duplicates") {
  auto r = make_rule({Condition(1, {0}, 4), Condition(0, {1}, 3)}, 1);
  CHECK(r.clause[0].feature() == 0);
  CHECK_THROWS_AS(make_rule({}, 0), RuleError);
  CHECK_THROWS_AS(make_rule({Condition(0, {0}, 3), Condition(0, {1}, 3)}, 0), RuleError);
  auto d = make_default_rule(1);
  CHECK(d.default_rule);
  CHECK(covers(d, {5, 5}));
}

TEST_CASE("coverage and the contingency table agree with a row scan") {
  auto r = make_rule({Condition(0, {0}, 3)}, 1);
  std::vector<CodedRow> rows{{0, 0}, {0, 1}, {1, 0}, {2, 2}, {0, 3}};
  std::vector<Label> labels{1, 0, 1, 0, 1};
  auto t = contingency(r, rows, labels);
  CHECK(t == ContingencyTable{2, 1, 1, 1});
  CHECK(cover_mask(r, rows).count() == 3);
  auto pc = precision_coverage(r, rows, labels);
  CHECK(pc.precision == Approx(2.0 / 3));
  CHECK(pc.coverage == Approx(3.0 / 5));
}

TEST_CASE("rules read as IF ... THEN") {
  auto s = mushroom_like();
  CHECK(describe(make_rule({Condition(0, {0}, 3)}, 0), s, {"edible", "poisonous"}) ==
        "IF odor = none THEN class = edible");
  CHECK(describe_clause(make_rule({Condition(0, {0, 2}, 3)}, 0), s) == "odor in {none, almond}");
  CHECK(describe_clause(make_rule({Condition(1, {1, 2}, 4)}, 0), s) == "2 <= size < 9");
  CHECK(describe_clause(make_rule({Condition(1, {0, 1}, 4)}, 0), s) == "size < 5");
  CHECK(describe_clause(make_rule({Condition(1, {2, 3}, 4)}, 0), s) == "5 <= size");
  CHECK(describe_clause(make_rule({Condition(1, {0, 3}, 4)}, 0), s) == "(size < 2 OR 9 <= size)");
  CHECK(describe_clause(make_rule({Condition(0, {1}, 3), Condition(1, {0}, 4)}, 1), s) ==
        "odor = foul AND size < 2");
}
