#include "rulex/oracle.hpp"

#include <algorithm>
#include <cerrno>
#include <csignal>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <fcntl.h>
#include <sys/wait.h>
#include <unistd.h>

#include "rulex/random.hpp"

namespace rulex {

LabelIndex index_labels(std::span<const std::string> labels) {
  LabelIndex out;
  std::set<std::string> distinct(labels.begin(), labels.end());
  out.classes.assign(distinct.begin(), distinct.end());
  out.labels.reserve(labels.size());
  for (const auto& l : labels)
    out.labels.push_back(static_cast<Label>(
        std::lower_bound(out.classes.begin(), out.classes.end(), l) -
        out.classes.begin()));
  return out;
}

std::vector<bool> nominal_mask(const Schema& schema) {
  std::vector<bool> m;
  for (const auto& f : schema) m.push_back(!f.numeric());
  return m;
}

// ---------------------------------------------------------------------------
// DecisionTree

namespace {

double gini(const std::vector<int>& counts, int total) {
  if (total == 0) return 0.0;
  double s = 1.0;
  for (int c : counts) {
    double p = static_cast<double>(c) / total;
    s -= p * p;
  }
  return s;
}

Label majority(const std::vector<int>& counts) {
  return static_cast<Label>(std::max_element(counts.begin(), counts.end()) -
                            counts.begin());
}

struct SplitChoice {
  int feature = -1;
  bool nominal = false;
  double threshold = 0;
  double gain = 0;
};

class TreeBuilder {
 public:
  TreeBuilder(std::span<const RawRow> rows, std::span<const Label> labels,
              const std::vector<bool>& nominal, int n_classes, int max_depth)
      : rows_(rows), labels_(labels), nominal_(nominal),
        n_classes_(n_classes), max_depth_(max_depth) {}

  std::vector<TreeNode> build() {
    std::vector<std::size_t> idx(rows_.size());
    std::iota(idx.begin(), idx.end(), 0);
    grow(idx, 0);
    return std::move(nodes_);
  }

 private:
  int grow(std::vector<std::size_t>& idx, int depth) {
    TreeNode node;
    node.depth = depth;
    node.class_counts.assign(n_classes_, 0);
    for (auto i : idx) ++node.class_counts[labels_[i]];
    node.prediction = majority(node.class_counts);
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back(node);

    const int total = static_cast<int>(idx.size());
    if (depth >= max_depth_ || total < 2) return id;
    if (*std::max_element(node.class_counts.begin(), node.class_counts.end()) ==
        total)
      return id;

    auto choice = best_split(idx, node.class_counts);
    if (choice.feature < 0) return id;

    std::vector<std::size_t> left, right;
    for (auto i : idx) {
      double x = rows_[i][choice.feature];
      bool go_left = choice.nominal ? x == choice.threshold : x < choice.threshold;
      (go_left ? left : right).push_back(i);
    }
    idx.clear();
    idx.shrink_to_fit();
    nodes_[id].feature = choice.feature;
    nodes_[id].nominal = choice.nominal;
    nodes_[id].threshold = choice.threshold;
    int l = grow(left, depth + 1);
    int r = grow(right, depth + 1);
    nodes_[id].left = l;
    nodes_[id].right = r;
    return id;
  }

  SplitChoice best_split(const std::vector<std::size_t>& idx,
                         const std::vector<int>& counts) const {
    const int total = static_cast<int>(idx.size());
    const double parent = gini(counts, total);
    SplitChoice best;
    std::vector<int> left(n_classes_), right(n_classes_);
    std::vector<std::pair<double, Label>> col(idx.size());

    auto consider = [&](int f, bool nom, double t, int nl) {
      const int nr = total - nl;
      for (int c = 0; c < n_classes_; ++c) right[c] = counts[c] - left[c];
      double g = parent - (nl * gini(left, nl) + nr * gini(right, nr)) / total;
      if (g > best.gain + 1e-12) best = {f, nom, t, g};
    };

    const int m = static_cast<int>(nominal_.size());
    for (int f = 0; f < m; ++f) {
      for (std::size_t k = 0; k < idx.size(); ++k)
        col[k] = {rows_[idx[k]][f], labels_[idx[k]]};
      std::sort(col.begin(), col.end());
      if (nominal_[f]) {
        std::size_t k = 0;
        while (k < col.size()) {
          std::fill(left.begin(), left.end(), 0);
          std::size_t e = k;
          while (e < col.size() && col[e].first == col[k].first) ++left[col[e++].second];
          if (static_cast<int>(e - k) < total)
            consider(f, true, col[k].first, static_cast<int>(e - k));
          k = e;
        }
      } else {
        std::fill(left.begin(), left.end(), 0);
        for (std::size_t k = 0; k + 1 < col.size(); ++k) {
          ++left[col[k].second];
          if (col[k].first == col[k + 1].first) continue;
          consider(f, false, 0.5 * (col[k].first + col[k + 1].first),
                   static_cast<int>(k + 1));
        }
      }
    }
    return best;
  }

  std::span<const RawRow> rows_;
  std::span<const Label> labels_;
  const std::vector<bool>& nominal_;
  int n_classes_;
  int max_depth_;
  std::vector<TreeNode> nodes_;
};

}  // namespace

DecisionTree DecisionTree::fit(std::span<const RawRow> rows,
                               std::span<const Label> labels,
                               const std::vector<bool>& nominal, int n_classes,
                               int max_depth) {
  if (rows.size() != labels.size())
    throw std::invalid_argument("DecisionTree::fit: rows and labels differ in length");
  if (rows.empty()) throw std::invalid_argument("DecisionTree::fit: no rows");
  if (max_depth < 0) throw std::invalid_argument("DecisionTree::fit: negative max_depth");
  DecisionTree t;
  t.n_classes_ = n_classes;
  t.nodes_ = TreeBuilder(rows, labels, nominal, n_classes, max_depth).build();
  return t;
}

int DecisionTree::leaf_of(const RawRow& row) const {
  int id = 0;
  while (!nodes_[id].leaf()) {
    const auto& n = nodes_[id];
    double x = row[n.feature];
    bool go_left = n.nominal ? x == n.threshold : x < n.threshold;
    id = go_left ? n.left : n.right;
  }
  return id;
}

Label DecisionTree::predict(const RawRow& row) const {
  return nodes_[leaf_of(row)].prediction;
}

int DecisionTree::depth() const {
  int d = 0;
  for (const auto& n : nodes_) d = std::max(d, n.depth);
  return d;
}

RandomForest RandomForest::fit(std::span<const RawRow> rows,
                               std::span<const Label> labels,
                               const std::vector<bool>& nominal, int n_classes,
                               int n_trees, int max_depth, std::uint64_t seed) {
  if (n_trees < 1) throw std::invalid_argument("RandomForest::fit: n_trees < 1");
  RandomForest forest;
  forest.n_classes_ = n_classes;
  const auto n = rows.size();
  std::vector<RawRow> sample(n);
  std::vector<Label> sample_labels(n);
  for (int t = 0; t < n_trees; ++t) {
    Rng rng(derive_seed(seed, "bootstrap", static_cast<std::uint64_t>(t)));
    for (std::size_t i = 0; i < n; ++i) {
      auto k = uniform_index(rng, n);
      sample[i] = rows[k];
      sample_labels[i] = labels[k];
    }
    forest.trees_.push_back(
        DecisionTree::fit(sample, sample_labels, nominal, n_classes, max_depth));
  }
  return forest;
}

Label RandomForest::predict(const RawRow& row) const {
  std::vector<int> votes(n_classes_, 0);
  for (const auto& t : trees_) ++votes[t.predict(row)];
  return majority(votes);
}

// ---------------------------------------------------------------------------
// Backends

namespace {

class TreeModel final : public OracleModel {
 public:
  explicit TreeModel(DecisionTree tree) : tree_(std::move(tree)) {}
  OracleBackend backend() const override { return OracleBackend::BuiltinTree; }
  std::vector<Label> predict(std::span<const RawRow> rows) override {
    std::vector<Label> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(tree_.predict(r));
    return out;
  }

 private:
  DecisionTree tree_;
};

class ForestModel final : public OracleModel {
 public:
  explicit ForestModel(RandomForest forest) : forest_(std::move(forest)) {}
  OracleBackend backend() const override { return OracleBackend::BuiltinForest; }
  std::vector<Label> predict(std::span<const RawRow> rows) override {
    std::vector<Label> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(forest_.predict(r));
    return out;
  }

 private:
  RandomForest forest_;
};

class FunctionModel final : public OracleModel {
 public:
  explicit FunctionModel(std::function<Label(const RawRow&)> fn) : fn_(std::move(fn)) {}
  OracleBackend backend() const override { return OracleBackend::Function; }
  std::vector<Label> predict(std::span<const RawRow> rows) override {
    std::vector<Label> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(fn_(r));
    return out;
  }

 private:
  std::function<Label(const RawRow&)> fn_;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class ExternalModel final : public OracleModel {
 public:
  ExternalModel(const std::vector<std::string>& argv, Schema schema,
                std::vector<std::string> classes)
      : schema_(std::move(schema)), classes_(std::move(classes)) {
    if (argv.empty()) throw OracleError("external oracle: empty command");
    std::signal(SIGPIPE, SIG_IGN);

    char tmpl[] = "/tmp/rulex-oracle-stderr-XXXXXX";
    int err_fd = mkstemp(tmpl);
    if (err_fd < 0) throw OracleError("external oracle: cannot create stderr file");
    stderr_path_ = tmpl;

    int to_child[2], from_child[2], exec_status[2];
    if (pipe(to_child) != 0 || pipe(from_child) != 0 || pipe(exec_status) != 0)
      throw OracleError("external oracle: pipe failed");
    fcntl(exec_status[1], F_SETFD, FD_CLOEXEC);

    pid_ = fork();
    if (pid_ < 0) throw OracleError("external oracle: fork failed");
    if (pid_ == 0) {
      dup2(to_child[0], STDIN_FILENO);
      dup2(from_child[1], STDOUT_FILENO);
      dup2(err_fd, STDERR_FILENO);
      close(to_child[0]);
      close(to_child[1]);
      close(from_child[0]);
      close(from_child[1]);
      close(exec_status[0]);
      close(err_fd);
      std::vector<char*> args;
      for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
      args.push_back(nullptr);
      execvp(args[0], args.data());
      int e = errno;
      (void)!write(exec_status[1], &e, sizeof e);
      _exit(127);
    }
    close(to_child[0]);
    close(from_child[1]);
    close(exec_status[1]);
    close(err_fd);
    int e = 0;
    ssize_t got = read(exec_status[0], &e, sizeof e);
    close(exec_status[0]);
    if (got == static_cast<ssize_t>(sizeof e)) {
      waitpid(pid_, nullptr, 0);
      pid_ = -1;
      close(to_child[1]);
      close(from_child[0]);
      throw OracleError("external oracle: cannot execute '" + argv[0] +
                        "': " + std::strerror(e));
    }
    in_fd_ = to_child[1];
    out_ = fdopen(from_child[0], "r");
  }

  ~ExternalModel() override {
    if (in_fd_ >= 0) close(in_fd_);
    if (out_) std::fclose(out_);
    if (pid_ > 0) waitpid(pid_, nullptr, 0);
    if (!stderr_path_.empty()) std::remove(stderr_path_.c_str());
  }

  OracleBackend backend() const override { return OracleBackend::ExternalProcess; }

  std::vector<Label> predict(std::span<const RawRow> rows) override {
    std::lock_guard lock(io_mutex_);
    if (pid_ <= 0) throw OracleError("external oracle: process is not running");
    std::string msg = std::to_string(rows.size()) + "\n";
    for (const auto& r : rows) {
      for (std::size_t j = 0; j < schema_.size(); ++j) {
        if (j) msg += ',';
        msg += format_value(schema_[j], r[j]);
      }
      msg += '\n';
    }
    write_all(msg);

    std::vector<Label> out;
    out.reserve(rows.size());
    std::string line;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (!read_line(line))
        fail("expected " + std::to_string(rows.size()) + " labels, got " +
             std::to_string(i));
      auto it = std::find(classes_.begin(), classes_.end(), line);
      if (it == classes_.end()) fail("unknown label '" + line + "'");
      out.push_back(static_cast<Label>(it - classes_.begin()));
    }
    return out;
  }

 private:
  void write_all(const std::string& s) {
    std::size_t off = 0;
    while (off < s.size()) {
      ssize_t n = write(in_fd_, s.data() + off, s.size() - off);
      if (n < 0) {
        if (errno == EINTR) continue;
        fail(std::string("write failed: ") + std::strerror(errno));
      }
      off += static_cast<std::size_t>(n);
    }
  }

  bool read_line(std::string& line) {
    line.clear();
    int c;
    while ((c = std::fgetc(out_)) != EOF) {
      if (c == '\n') {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return true;
      }
      line.push_back(static_cast<char>(c));
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& what) {
    std::string status;
    if (pid_ > 0) {
      close(in_fd_);
      in_fd_ = -1;
      int st = 0;
      if (waitpid(pid_, &st, 0) == pid_) {
        if (WIFEXITED(st))
          status = " (exit status " + std::to_string(WEXITSTATUS(st)) + ")";
        else if (WIFSIGNALED(st))
          status = " (killed by signal " + std::to_string(WTERMSIG(st)) + ")";
      }
      pid_ = -1;
    }
    std::string err = read_file(stderr_path_);
    throw OracleError("external oracle: " + what + status +
                      (err.empty() ? "" : "; stderr: " + err));
  }

  Schema schema_;
  std::vector<std::string> classes_;
  pid_t pid_ = -1;
  int in_fd_ = -1;
  FILE* out_ = nullptr;
  std::string stderr_path_;
  std::mutex io_mutex_;
};

std::string fingerprint(const RawRow& row) {
  return std::string(reinterpret_cast<const char*>(row.data()),
                     row.size() * sizeof(double));
}

}  // namespace

// ---------------------------------------------------------------------------
// ModelOracle

ModelOracle::ModelOracle(Schema schema, std::vector<std::string> class_labels,
                         std::unique_ptr<OracleModel> model)
    : schema_(std::move(schema)), classes_(std::move(class_labels)),
      model_(std::move(model)), mutex_(std::make_unique<std::mutex>()) {
  if (classes_.empty()) throw OracleError("oracle needs at least one class label");
  std::set<std::string> s(classes_.begin(), classes_.end());
  if (s.size() != classes_.size()) throw OracleError("duplicate class labels");
}

ModelOracle::ModelOracle(ModelOracle&&) noexcept = default;
ModelOracle& ModelOracle::operator=(ModelOracle&&) noexcept = default;
ModelOracle::~ModelOracle() = default;

std::size_t ModelOracle::backend_calls() const {
  std::lock_guard lock(*mutex_);
  return backend_calls_;
}

std::vector<Label> ModelOracle::predict_batch(std::span<const RawRow> rows) {
  std::vector<Label> out(rows.size(), -1);
  if (rows.empty()) return out;

  std::vector<std::size_t> missing;
  std::vector<std::string> keys;
  if (cache_enabled_) {
    std::lock_guard lock(*mutex_);
    std::unordered_map<std::string, std::size_t> pending;
    keys.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      keys[i] = fingerprint(rows[i]);
      if (auto it = cache_.find(keys[i]); it != cache_.end())
        out[i] = it->second;
      else if (pending.emplace(keys[i], i).second)
        missing.push_back(i);
    }
  } else {
    missing.resize(rows.size());
    std::iota(missing.begin(), missing.end(), 0);
  }
  if (missing.empty()) return out;

  std::vector<RawRow> batch;
  batch.reserve(missing.size());
  for (auto i : missing) batch.push_back(rows[i]);
  auto labels = model_->predict(batch);
  if (labels.size() != batch.size())
    throw OracleError("oracle backend returned " + std::to_string(labels.size()) +
                      " labels for " + std::to_string(batch.size()) + " rows");
  for (auto l : labels)
    if (l < 0 || l >= static_cast<Label>(classes_.size()))
      throw OracleError("oracle backend returned an out-of-range label");

  std::lock_guard lock(*mutex_);
  ++backend_calls_;
  if (!cache_enabled_) return labels;
  for (std::size_t k = 0; k < missing.size(); ++k)
    cache_.emplace(keys[missing[k]], labels[k]);
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (out[i] < 0) out[i] = cache_.at(keys[i]);
  return out;
}

Label ModelOracle::predict(const RawRow& row) {
  return predict_batch(std::span<const RawRow>(&row, 1)).front();
}

ModelOracle fit_builtin_tree(const Dataset& train, std::span<const Label> labels,
                             std::vector<std::string> class_labels, int max_depth) {
  if (max_depth < 1) throw std::invalid_argument("fit_builtin_tree: max_depth < 1");
  auto nominal = nominal_mask(train.schema);
  auto tree = DecisionTree::fit(train.rows, labels, nominal,
                                static_cast<int>(class_labels.size()), max_depth);
  return ModelOracle(train.schema, std::move(class_labels),
                     std::make_unique<TreeModel>(std::move(tree)));
}

ModelOracle fit_builtin_forest(const Dataset& train, std::span<const Label> labels,
                               std::vector<std::string> class_labels, int n_trees,
                               int max_depth, std::uint64_t seed) {
  if (max_depth < 1) throw std::invalid_argument("fit_builtin_forest: max_depth < 1");
  auto nominal = nominal_mask(train.schema);
  auto forest = RandomForest::fit(train.rows, labels, nominal,
                                  static_cast<int>(class_labels.size()), n_trees,
                                  max_depth, seed);
  return ModelOracle(train.schema, std::move(class_labels),
                     std::make_unique<ForestModel>(std::move(forest)));
}

ModelOracle make_function_oracle(Schema schema, std::vector<std::string> class_labels,
                                 std::function<Label(const RawRow&)> fn) {
  return ModelOracle(std::move(schema), std::move(class_labels),
                     std::make_unique<FunctionModel>(std::move(fn)));
}

ModelOracle connect_external(const std::vector<std::string>& argv,
                             std::vector<std::string> class_labels, Schema schema) {
  auto model = std::make_unique<ExternalModel>(argv, schema, class_labels);
  return ModelOracle(std::move(schema), std::move(class_labels), std::move(model));
}

}  // namespace rulex
