#ifndef RULEX_ORACLE_HPP
#define RULEX_ORACLE_HPP

#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "rulex/data.hpp"

namespace rulex {

class OracleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Maps string labels to indices into the sorted list of distinct labels.
struct LabelIndex {
  std::vector<std::string> classes;
  std::vector<Label> labels;
};
LabelIndex index_labels(std::span<const std::string> labels);

// ---------------------------------------------------------------------------
// CART tree on gini impurity. Each feature is either ordinal (split x < t)
// or nominal (split x == v). Used as the in-process black box and as the
// decision-tree surrogate.

struct TreeNode {
  int feature = -1;  // -1 for leaves
  bool nominal = false;
  double threshold = 0;  // ordinal: left iff x < threshold; nominal: left iff x == threshold
  int left = -1;
  int right = -1;
  int depth = 0;
  Label prediction = 0;
  std::vector<int> class_counts;

  bool leaf() const { return feature < 0; }
};

class DecisionTree {
 public:
  /// Ties in split gain go to the lower feature index, then the lower threshold.
  static DecisionTree fit(std::span<const RawRow> rows, std::span<const Label> labels,
                          const std::vector<bool>& nominal, int n_classes,
                          int max_depth);

  Label predict(const RawRow& row) const;
  int leaf_of(const RawRow& row) const;

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  int depth() const;
  int n_classes() const { return n_classes_; }

 private:
  std::vector<TreeNode> nodes_;
  int n_classes_ = 0;
};

/// Bagged trees with majority vote; ties go to the lower label index.
class RandomForest {
 public:
  static RandomForest fit(std::span<const RawRow> rows, std::span<const Label> labels,
                          const std::vector<bool>& nominal, int n_classes,
                          int n_trees, int max_depth, std::uint64_t seed);
  Label predict(const RawRow& row) const;
  const std::vector<DecisionTree>& trees() const { return trees_; }

 private:
  std::vector<DecisionTree> trees_;
  int n_classes_ = 0;
};

std::vector<bool> nominal_mask(const Schema& schema);

// ---------------------------------------------------------------------------

enum class OracleBackend { BuiltinTree, BuiltinForest, ExternalProcess, Function };

/// Backend behind a ModelOracle; predictions are class indices.
class OracleModel {
 public:
  virtual ~OracleModel() = default;
  virtual OracleBackend backend() const = 0;
  virtual std::vector<Label> predict(std::span<const RawRow> rows) = 0;
};

/// Black-box classifier with a prediction cache keyed on the exact feature
/// values of each row.
class ModelOracle {
 public:
  ModelOracle(Schema schema, std::vector<std::string> class_labels,
              std::unique_ptr<OracleModel> model);
  ModelOracle(ModelOracle&&) noexcept;
  ModelOracle& operator=(ModelOracle&&) noexcept;
  ~ModelOracle();

  std::vector<Label> predict_batch(std::span<const RawRow> rows);
  Label predict(const RawRow& row);

  const std::vector<std::string>& class_labels() const { return classes_; }
  const Schema& schema() const { return schema_; }
  OracleBackend backend() const { return model_->backend(); }
  OracleModel& model() { return *model_; }

  /// Number of times the backend has been invoked.
  std::size_t backend_calls() const;
  void set_cache_enabled(bool on) { cache_enabled_ = on; }

 private:
  Schema schema_;
  std::vector<std::string> classes_;
  std::unique_ptr<OracleModel> model_;
  bool cache_enabled_ = true;
  std::unique_ptr<std::mutex> mutex_;
  std::unordered_map<std::string, Label> cache_;
  std::size_t backend_calls_ = 0;
};

ModelOracle fit_builtin_tree(const Dataset& train, std::span<const Label> labels,
                             std::vector<std::string> class_labels, int max_depth);

ModelOracle fit_builtin_forest(const Dataset& train, std::span<const Label> labels,
                               std::vector<std::string> class_labels, int n_trees,
                               int max_depth, std::uint64_t seed);

/// Oracle backed by an arbitrary function; useful for known decision logic.
ModelOracle make_function_oracle(Schema schema, std::vector<std::string> class_labels,
                                 std::function<Label(const RawRow&)> fn);

/// Spawns `argv` and talks the line protocol: "N\n" followed by N CSV rows
/// on the child's stdin, one label per line back on its stdout.
ModelOracle connect_external(const std::vector<std::string>& argv,
                             std::vector<std::string> class_labels, Schema schema);

}  // namespace rulex

#endif  // RULEX_ORACLE_HPP
