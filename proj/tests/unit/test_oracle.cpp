#include <catch_amalgamated.hpp>

#include <atomic>
#include <random>

#include "rulex/oracle.hpp"

using namespace rulex;
using Catch::Matchers::ContainsSubstring;

namespace {

std::vector<std::string> python(const std::string& script) {
  return {"python3", std::string(RULEX_FIXTURES) + "/" + script};
}

Schema two_numeric() {
  return {{"x", FeatureKind::Numeric, {}, {}}, {"y", FeatureKind::Numeric, {}, {}}};
}

}  // namespace

TEST_CASE("labels are indexed in sorted order") {
  std::vector<std::string> raw{"yes", "no", "yes", "maybe"};
  auto idx = index_labels(raw);
  CHECK(idx.classes == std::vector<std::string>{"maybe", "no", "yes"});
  CHECK(idx.labels == std::vector<Label>{2, 1, 2, 0});
}

TEST_CASE("a depth-2 tree learns XOR on two thresholds") {
  std::vector<RawRow> rows;
  std::vector<Label> labels;
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j) {
      rows.push_back({static_cast<double>(i), static_cast<double>(j)});
      labels.push_back((i < 5) != (j < 3) ? 1 : 0);
    }
  auto tree = DecisionTree::fit(rows, labels, {false, false}, 2, 2);
  CHECK(tree.depth() <= 2);
  int wrong = 0;
  for (std::size_t k = 0; k < rows.size(); ++k) wrong += tree.predict(rows[k]) != labels[k];
  CHECK(wrong == 0);
  auto stump = DecisionTree::fit(rows, labels, {false, false}, 2, 1);
  CHECK(stump.depth() == 1);
}

TEST_CASE("split ties go to the lower feature index") {
  std::vector<RawRow> rows{{0, 0}, {1, 1}, {2, 2}, {3, 3}};
  std::vector<Label> labels{0, 0, 1, 1};
  auto tree = DecisionTree::fit(rows, labels, {false, false}, 2, 3);
  CHECK(tree.nodes()[0].feature == 0);
  CHECK(tree.nodes()[0].threshold == Catch::Approx(1.5));
}

TEST_CASE("nominal features split on equality") {
  std::vector<RawRow> rows{{0}, {1}, {2}, {1}, {0}, {2}};
  std::vector<Label> labels{0, 1, 0, 1, 0, 0};
  auto tree = DecisionTree::fit(rows, labels, {true}, 2, 1);
  REQUIRE_FALSE(tree.nodes()[0].leaf());
  CHECK(tree.nodes()[0].nominal);
  CHECK(tree.nodes()[0].threshold == 1);
  CHECK(tree.predict({1}) == 1);
  CHECK(tree.predict({2}) == 0);
}

TEST_CASE("forest is deterministic under a seed") {
  std::mt19937 rng(3);
  std::vector<RawRow> rows;
  std::vector<Label> labels;
  for (int i = 0; i < 200; ++i) {
    double x = rng() % 100, y = rng() % 100;
    rows.push_back({x, y});
    labels.push_back(x + y > 100 ? 1 : 0);
  }
  auto a = RandomForest::fit(rows, labels, {false, false}, 2, 15, 6, 9);
  auto b = RandomForest::fit(rows, labels, {false, false}, 2, 15, 6, 9);
  int agree = 0, right = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    agree += a.predict(rows[i]) == b.predict(rows[i]);
    right += a.predict(rows[i]) == labels[i];
  }
  CHECK(agree == 200);
  CHECK(right >= 180);
}

TEST_CASE("the cache sends each distinct row to the backend once") {
  std::atomic<int> evaluated{0};
  auto oracle = make_function_oracle(two_numeric(), {"a", "b"}, [&](const RawRow& r) {
    ++evaluated;
    return r[0] > 0 ? 1 : 0;
  });
  std::vector<RawRow> rows{{1, 0}, {-1, 0}, {1, 0}, {1, 0}};
  CHECK(oracle.predict_batch(rows) == std::vector<Label>{1, 0, 1, 1});
  CHECK(evaluated == 2);
  CHECK(oracle.backend_calls() == 1);
  oracle.predict_batch(rows);
  CHECK(evaluated == 2);
  CHECK(oracle.backend_calls() == 1);
  oracle.set_cache_enabled(false);
  oracle.predict(rows[0]);
  CHECK(oracle.backend_calls() == 2);
}

TEST_CASE("builtin tree oracle predicts class indices of the given labels") {
  Dataset train{two_numeric(), {{0, 0}, {1, 0}, {2, 0}, {3, 0}}};
  std::vector<Label> labels{0, 0, 1, 1};
  auto oracle = fit_builtin_tree(train, labels, {"lo", "hi"}, 3);
  CHECK(oracle.backend() == OracleBackend::BuiltinTree);
  CHECK(oracle.predict({0.5, 0}) == 0);
  CHECK(oracle.predict({2.5, 0}) == 1);
}

TEST_CASE("external oracle speaks the line protocol") {
  Schema s{{"c", FeatureKind::Categorical, {"yes", "no"}, {}}, {"v", FeatureKind::Numeric, {}, {}}};
  auto constant = connect_external(python("constant_oracle.py"), {"no", "yes"}, s);
  CHECK(constant.predict_batch(std::vector<RawRow>{{0, 1}, {1, 2.5}}) == std::vector<Label>{1, 1});
  CHECK(constant.backend() == OracleBackend::ExternalProcess);

  auto echo = connect_external(python("echo_first_oracle.py"), {"no", "yes"}, s);
  CHECK(echo.predict_batch(std::vector<RawRow>{{0, 1}, {1, 1}, {0, 3}}) ==
        std::vector<Label>{1, 0, 1});
  CHECK(echo.predict({1, 7}) == 0);
  CHECK(echo.backend_calls() == 2);
}

TEST_CASE("external oracle failures carry the diagnosis") {
  Schema s = two_numeric();
  std::vector<RawRow> rows{{0, 0}, {1, 1}};

  auto bad = connect_external(python("bad_label_oracle.py"), {"no", "yes"}, s);
  CHECK_THROWS_WITH(bad.predict_batch(rows), ContainsSubstring("unknown label 'banana'"));

  auto failing = connect_external(python("failing_oracle.py"), {"no", "yes"}, s);
  try {
    failing.predict_batch(rows);
    FAIL("expected an OracleError");
  } catch (const OracleError& e) {
    CHECK_THAT(e.what(), ContainsSubstring("exit status 3"));
    CHECK_THAT(e.what(), ContainsSubstring("model exploded"));
  }

  auto short_reply = connect_external(python("short_oracle.py"), {"no", "yes"}, s);
  CHECK_THROWS_WITH(short_reply.predict_batch(rows), ContainsSubstring("expected 2 labels, got 1"));

  CHECK_THROWS_WITH(connect_external({"/nonexistent/model-binary"}, {"a"}, s),
                    ContainsSubstring("cannot execute"));
}
