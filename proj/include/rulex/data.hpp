#ifndef RULEX_DATA_HPP
#define RULEX_DATA_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rulex {

/// Error raised while reading or validating tabular input.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class FeatureKind { Numeric, Categorical };

/// Class labels are indices into an ordered label list owned by the oracle.
using Label = int;

/// A raw instance. Numeric features hold the value itself, categorical
/// features hold the index of the value in FeatureSchema::categories.
using RawRow = std::vector<double>;

/// A discretized instance: bin index (numeric) or category index.
using CodedRow = std::vector<int>;

struct FeatureSchema {
  std::string name;
  FeatureKind kind = FeatureKind::Numeric;
  std::vector<std::string> categories;  // categorical only
  std::vector<double> cuts;             // numeric only, strictly increasing

  bool operator==(const FeatureSchema&) const = default;

  bool numeric() const { return kind == FeatureKind::Numeric; }

  /// Number of distinct codes this feature can take after discretization.
  int domain_size() const {
    return numeric() ? static_cast<int>(cuts.size()) + 1
                     : static_cast<int>(categories.size());
  }

  /// Bin of a numeric value; intervals are [lo, hi) with the last one closed.
  int bin_of(double value) const;

  /// Code of a raw value for this feature.
  int code_of(double raw) const {
    return numeric() ? bin_of(raw) : static_cast<int>(raw);
  }

  /// "lo <= name < hi" style description of a numeric bin.
  std::string interval_label(int bin) const;

  /// Human readable value for a code (category name or interval).
  std::string code_label(int code) const;

  std::optional<int> category_index(const std::string& value) const;
};

using Schema = std::vector<FeatureSchema>;

void validate_schema(const Schema& schema);

CodedRow encode(const Schema& schema, const RawRow& row);
std::vector<CodedRow> encode(const Schema& schema, std::span<const RawRow> rows);

/// Formats a raw value the way it appears in CSV output.
std::string format_value(const FeatureSchema& feature, double raw);

struct Dataset {
  Schema schema;
  std::vector<RawRow> rows;

  std::size_t row_count() const { return rows.size(); }
  std::size_t feature_count() const { return schema.size(); }

  /// Throws DataError if a row does not conform to the schema.
  void validate() const;

  std::vector<CodedRow> coded() const { return encode(schema, rows); }

  Dataset subset(std::span<const std::size_t> idx) const;
};

using SchemaHints = std::map<std::string, FeatureKind>;

/// Parses a JSON object mapping feature name to "numeric" / "categorical".
SchemaHints load_schema_hints(const std::filesystem::path& path);

/// A dataset as read from disk, optionally with a separated target column
/// (ground truth, used only to train the built-in black boxes).
struct LoadedTable {
  Dataset data;
  std::vector<std::string> target;  // empty when no target column
  std::string target_name;
};

LoadedTable load_csv(const std::filesystem::path& path,
                     const SchemaHints& hints = {},
                     const std::string& target_column = {});

LoadedTable parse_csv(const std::string& text, const SchemaHints& hints = {},
                      const std::string& target_column = {});

/// Rows of `text` typed against an existing schema (no new categories).
std::vector<RawRow> parse_rows(const std::string& text, const Schema& schema,
                               bool header = true);

/// Supervised entropy discretization with the Fayyad-Irani MDL stop.
/// Returns strictly increasing cut points; empty means a single bin.
std::vector<double> entropy_bin(std::span<const double> values,
                                 std::span<const Label> labels,
                                 int max_bins = 4);

/// Fills the cuts of every numeric feature of `data` from the given labels.
void discretize(Dataset& data, std::span<const Label> labels,
                int max_bins = 4);

struct SplitAssignment {
  std::vector<std::size_t> train_idx;
  std::vector<std::size_t> valid_idx;
  std::vector<std::size_t> score_idx;
};

/// Seeded permutation followed by a contiguous 60/20/20 partition.
SplitAssignment split(const Dataset& data, std::uint64_t seed);
SplitAssignment split(std::size_t row_count, std::uint64_t seed);

}  // namespace rulex

#endif  // RULEX_DATA_HPP
