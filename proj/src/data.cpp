#include "rulex/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <queue>
#include <set>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "rulex/random.hpp"

namespace rulex {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  for (auto& c : cells) {
    auto b = c.find_first_not_of(" \t");
    auto e = c.find_last_not_of(" \t\r");
    c = (b == std::string::npos) ? std::string{} : c.substr(b, e - b + 1);
  }
  return cells;
}

std::optional<double> parse_double(const std::string& s) {
  if (s.empty()) return std::nullopt;
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v))
    return std::nullopt;
  return v;
}

std::vector<std::string> read_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    lines.push_back(line);
  }
  return lines;
}

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

double entropy(std::span<const int> counts, int total) {
  if (total <= 0) return 0.0;
  double h = 0.0;
  for (int c : counts) {
    if (c == 0) continue;
    double p = static_cast<double>(c) / total;
    h -= p * std::log2(p);
  }
  return h;
}

int distinct_classes(std::span<const int> counts) {
  return static_cast<int>(std::count_if(counts.begin(), counts.end(),
                                        [](int c) { return c > 0; }));
}

}  // namespace

int FeatureSchema::bin_of(double value) const {
  return static_cast<int>(std::upper_bound(cuts.begin(), cuts.end(), value) -
                          cuts.begin());
}

std::string FeatureSchema::interval_label(int bin) const {
  std::string lo = bin > 0 ? format_number(cuts[bin - 1]) : "-inf";
  std::string hi =
      bin < static_cast<int>(cuts.size()) ? format_number(cuts[bin]) : "inf";
  if (bin == 0) return name + " < " + hi;
  if (bin == static_cast<int>(cuts.size())) return lo + " <= " + name;
  return lo + " <= " + name + " < " + hi;
}

std::string FeatureSchema::code_label(int code) const {
  return numeric() ? interval_label(code) : categories.at(code);
}

std::optional<int> FeatureSchema::category_index(const std::string& value) const {
  auto it = std::find(categories.begin(), categories.end(), value);
  if (it == categories.end()) return std::nullopt;
  return static_cast<int>(it - categories.begin());
}

std::string format_value(const FeatureSchema& feature, double raw) {
  if (feature.numeric()) return format_number(raw);
  return feature.categories.at(static_cast<std::size_t>(raw));
}

void validate_schema(const Schema& schema) {
  std::set<std::string> names;
  for (const auto& f : schema) {
    if (!names.insert(f.name).second)
      throw DataError("duplicate feature name '" + f.name + "'");
    if (f.numeric()) {
      for (std::size_t i = 1; i < f.cuts.size(); ++i)
        if (!(f.cuts[i - 1] < f.cuts[i]))
          throw DataError("cut points of '" + f.name +
                          "' are not strictly increasing");
    } else {
      if (f.categories.empty())
        throw DataError("categorical feature '" + f.name + "' has no values");
      std::set<std::string> seen(f.categories.begin(), f.categories.end());
      if (seen.size() != f.categories.size())
        throw DataError("duplicate categories in '" + f.name + "'");
    }
  }
}

CodedRow encode(const Schema& schema, const RawRow& row) {
  CodedRow out(schema.size());
  for (std::size_t j = 0; j < schema.size(); ++j)
    out[j] = schema[j].code_of(row[j]);
  return out;
}

std::vector<CodedRow> encode(const Schema& schema, std::span<const RawRow> rows) {
  std::vector<CodedRow> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(encode(schema, r));
  return out;
}

void Dataset::validate() const {
  validate_schema(schema);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.size() != schema.size())
      throw DataError("row " + std::to_string(i + 1) + " has " +
                      std::to_string(r.size()) + " values, expected " +
                      std::to_string(schema.size()));
    for (std::size_t j = 0; j < schema.size(); ++j) {
      if (schema[j].numeric()) {
        if (!std::isfinite(r[j]))
          throw DataError("row " + std::to_string(i + 1) +
                          ": non-finite value for '" + schema[j].name + "'");
      } else {
        double v = r[j];
        if (v < 0 || v >= static_cast<double>(schema[j].categories.size()) ||
            v != std::floor(v))
          throw DataError("row " + std::to_string(i + 1) +
                          ": unknown category for '" + schema[j].name + "'");
      }
    }
  }
}

Dataset Dataset::subset(std::span<const std::size_t> idx) const {
  Dataset out;
  out.schema = schema;
  out.rows.reserve(idx.size());
  for (auto i : idx) out.rows.push_back(rows.at(i));
  return out;
}

SchemaHints load_schema_hints(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open schema hints '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("schema hints '" + path.string() + "': " + e.what());
  }
  if (!j.is_object())
    throw DataError("schema hints must be a JSON object");
  SchemaHints hints;
  for (auto& [name, kind] : j.items()) {
    if (kind == "numeric")
      hints[name] = FeatureKind::Numeric;
    else if (kind == "categorical")
      hints[name] = FeatureKind::Categorical;
    else
      throw DataError("schema hint for '" + name +
                      "' must be \"numeric\" or \"categorical\"");
  }
  return hints;
}

LoadedTable parse_csv(const std::string& text, const SchemaHints& hints,
                      const std::string& target_column) {
  auto lines = read_lines(text);
  if (lines.empty()) throw DataError("empty CSV input");
  auto header = split_line(lines[0]);
  const std::size_t width = header.size();
  if (lines.size() < 2) throw DataError("CSV has a header but no rows");

  std::vector<std::vector<std::string>> cells;
  cells.reserve(lines.size() - 1);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto row = split_line(lines[i]);
    if (row.size() != width)
      throw DataError("row " + std::to_string(i) + " has " +
                      std::to_string(row.size()) + " cells, expected " +
                      std::to_string(width));
    for (std::size_t j = 0; j < width; ++j)
      if (row[j].empty())
        throw DataError("row " + std::to_string(i) + ": missing value for '" +
                        header[j] + "'");
    cells.push_back(std::move(row));
  }

  std::ptrdiff_t target = -1;
  if (!target_column.empty()) {
    auto it = std::find(header.begin(), header.end(), target_column);
    if (it == header.end())
      throw DataError("target column '" + target_column + "' not in header");
    target = it - header.begin();
  }

  LoadedTable out;
  out.target_name = target_column;
  std::vector<std::size_t> feature_cols;
  for (std::size_t j = 0; j < width; ++j) {
    if (static_cast<std::ptrdiff_t>(j) == target) continue;
    feature_cols.push_back(j);
    FeatureSchema f;
    f.name = header[j];
    bool all_numeric = std::all_of(cells.begin(), cells.end(), [&](auto& r) {
      return parse_double(r[j]).has_value();
    });
    f.kind = all_numeric ? FeatureKind::Numeric : FeatureKind::Categorical;
    if (auto h = hints.find(f.name); h != hints.end()) {
      if (h->second == FeatureKind::Numeric && !all_numeric)
        throw DataError("feature '" + f.name +
                        "' hinted numeric but has non-numeric values");
      f.kind = h->second;
    }
    if (!f.numeric()) {
      // categories ordered by first appearance
      for (auto& r : cells)
        if (!f.category_index(r[j])) f.categories.push_back(r[j]);
    }
    out.data.schema.push_back(std::move(f));
  }
  for (auto& [name, kind] : hints) {
    (void)kind;
    if (std::none_of(header.begin(), header.end(),
                     [&](auto& h) { return h == name; }))
      throw DataError("schema hint names unknown feature '" + name + "'");
  }

  out.data.rows.reserve(cells.size());
  for (auto& r : cells) {
    RawRow row;
    row.reserve(feature_cols.size());
    for (std::size_t k = 0; k < feature_cols.size(); ++k) {
      const auto& f = out.data.schema[k];
      const auto& cell = r[feature_cols[k]];
      row.push_back(f.numeric() ? *parse_double(cell)
                                : static_cast<double>(*f.category_index(cell)));
    }
    out.data.rows.push_back(std::move(row));
    if (target >= 0) out.target.push_back(r[static_cast<std::size_t>(target)]);
  }
  out.data.validate();
  return out;
}

LoadedTable load_csv(const std::filesystem::path& path, const SchemaHints& hints,
                     const std::string& target_column) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str(), hints, target_column);
}

std::vector<RawRow> parse_rows(const std::string& text, const Schema& schema,
                               bool header) {
  auto lines = read_lines(text);
  std::vector<RawRow> rows;
  std::vector<std::size_t> order(schema.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t width = schema.size();
  std::size_t first = 0;
  if (header) {
    if (lines.empty()) throw DataError("empty CSV input");
    auto names = split_line(lines[0]);
    width = names.size();
    for (std::size_t j = 0; j < schema.size(); ++j) {
      auto it = std::find(names.begin(), names.end(), schema[j].name);
      if (it == names.end())
        throw DataError("column '" + schema[j].name + "' missing from input");
      order[j] = static_cast<std::size_t>(it - names.begin());
    }
    first = 1;
  }
  for (std::size_t i = first; i < lines.size(); ++i) {
    auto cells = split_line(lines[i]);
    const auto rowno = std::to_string(i + (header ? 0 : 1));
    if (cells.size() != width)
      throw DataError("row " + rowno + " has " + std::to_string(cells.size()) +
                      " cells, expected " + std::to_string(width));
    RawRow row(schema.size());
    for (std::size_t j = 0; j < schema.size(); ++j) {
      const auto& cell = cells[order[j]];
      if (schema[j].numeric()) {
        auto v = parse_double(cell);
        if (!v)
          throw DataError("row " + rowno + ": '" + cell +
                          "' is not numeric for '" + schema[j].name + "'");
        row[j] = *v;
      } else {
        auto c = schema[j].category_index(cell);
        if (!c)
          throw DataError("row " + rowno + ": unknown category '" + cell +
                          "' for '" + schema[j].name + "'");
        row[j] = *c;
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Entropy discretization

namespace {

struct Interval {
  std::size_t begin, end;  // into the sorted order
};

struct CutCandidate {
  double gain = 0;
  double cut = 0;
  std::size_t pos = 0;  // first index of the right side
  Interval iv{};
};

struct CandidateOrder {
  bool operator()(const CutCandidate& a, const CutCandidate& b) const {
    if (a.gain != b.gain) return a.gain < b.gain;
    return a.cut > b.cut;
  }
};

std::optional<CutCandidate> best_mdl_cut(std::span<const double> sorted_values,
                                         std::span<const int> sorted_labels,
                                         int n_classes, Interval iv) {
  const int n = static_cast<int>(iv.end - iv.begin);
  if (n < 2) return std::nullopt;
  std::vector<int> total(n_classes, 0), left(n_classes, 0), right;
  for (auto i = iv.begin; i < iv.end; ++i) ++total[sorted_labels[i]];
  const double ent = entropy(total, n);

  double best_weighted = std::numeric_limits<double>::infinity();
  std::optional<CutCandidate> best;
  std::vector<int> best_left;
  for (auto i = iv.begin; i + 1 < iv.end; ++i) {
    ++left[sorted_labels[i]];
    if (sorted_values[i] == sorted_values[i + 1]) continue;
    const int nl = static_cast<int>(i + 1 - iv.begin);
    const int nr = n - nl;
    right = total;
    for (int c = 0; c < n_classes; ++c) right[c] -= left[c];
    double w = (nl * entropy(left, nl) + nr * entropy(right, nr)) / n;
    if (w < best_weighted - 1e-12) {
      best_weighted = w;
      CutCandidate c;
      c.pos = i + 1;
      c.cut = 0.5 * (sorted_values[i] + sorted_values[i + 1]);
      c.iv = iv;
      best = c;
      best_left = left;
    }
  }
  if (!best) return std::nullopt;

  const int nl = static_cast<int>(best->pos - iv.begin);
  const int nr = n - nl;
  right = total;
  for (int c = 0; c < n_classes; ++c) right[c] -= best_left[c];
  const double el = entropy(best_left, nl), er = entropy(right, nr);
  const double gain = ent - best_weighted;
  const int k = distinct_classes(total);
  const int k1 = distinct_classes(best_left);
  const int k2 = distinct_classes(right);
  const double delta =
      std::log2(std::pow(3.0, k) - 2.0) - (k * ent - k1 * el - k2 * er);
  const double threshold = (std::log2(n - 1.0) + delta) / n;
  if (!(gain > threshold)) return std::nullopt;
  best->gain = gain;
  return best;
}

}  // namespace

std::vector<double> entropy_bin(std::span<const double> values,
                                std::span<const Label> labels, int max_bins) {
  if (values.size() != labels.size())
    throw std::invalid_argument("entropy_bin: values and labels differ in length");
  if (max_bins < 2) throw std::invalid_argument("entropy_bin: max_bins < 2");
  if (values.empty()) return {};

  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](auto a, auto b) { return values[a] < values[b]; });
  std::vector<double> v(values.size());
  std::vector<int> l(values.size());
  int n_classes = 0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    v[i] = values[order[i]];
    l[i] = labels[order[i]];
    if (l[i] < 0) throw std::invalid_argument("entropy_bin: negative label");
    n_classes = std::max(n_classes, l[i] + 1);
  }

  // Best-first refinement: the accepted split with the highest gain is
  // applied first until max_bins is reached or MDL rejects every interval.
  std::priority_queue<CutCandidate, std::vector<CutCandidate>, CandidateOrder>
      queue;
  auto push = [&](Interval iv) {
    if (auto c = best_mdl_cut(v, l, n_classes, iv)) queue.push(*c);
  };
  push({0, v.size()});
  std::vector<double> cuts;
  while (!queue.empty() && static_cast<int>(cuts.size()) + 1 < max_bins) {
    auto c = queue.top();
    queue.pop();
    cuts.push_back(c.cut);
    push({c.iv.begin, c.pos});
    push({c.pos, c.iv.end});
  }
  std::sort(cuts.begin(), cuts.end());
  return cuts;
}

void discretize(Dataset& data, std::span<const Label> labels, int max_bins) {
  if (labels.size() != data.rows.size())
    throw std::invalid_argument("discretize: label count mismatch");
  std::vector<double> column(data.rows.size());
  for (std::size_t j = 0; j < data.schema.size(); ++j) {
    auto& f = data.schema[j];
    if (!f.numeric()) continue;
    for (std::size_t i = 0; i < data.rows.size(); ++i) column[i] = data.rows[i][j];
    f.cuts = entropy_bin(column, labels, max_bins);
  }
}

SplitAssignment split(std::size_t n, std::uint64_t seed) {
  if (n < 5) throw std::invalid_argument("split: need at least 5 rows");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(seed);
  for (std::size_t i = n - 1; i > 0; --i)
    std::swap(perm[i], perm[uniform_index(rng, i + 1)]);
  const auto n_train = static_cast<std::size_t>(std::floor(0.6 * n + 0.5));
  const auto n_valid = static_cast<std::size_t>(std::floor(0.2 * n + 0.5));
  SplitAssignment s;
  s.train_idx.assign(perm.begin(), perm.begin() + n_train);
  s.valid_idx.assign(perm.begin() + n_train, perm.begin() + n_train + n_valid);
  s.score_idx.assign(perm.begin() + n_train + n_valid, perm.end());
  return s;
}

SplitAssignment split(const Dataset& data, std::uint64_t seed) {
  return split(data.row_count(), seed);
}

}  // namespace rulex
