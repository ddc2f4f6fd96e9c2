#ifndef RULEX_ROBUSTNESS_HPP
#define RULEX_ROBUSTNESS_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rulex/data.hpp"
#include "rulex/evaluation.hpp"
#include "rulex/oracle.hpp"

namespace rulex {

enum class ShiftKind { Bootstrap, Marginal, Uniform };

std::string to_string(ShiftKind kind);

struct ShiftMethod {
  ShiftKind kind = ShiftKind::Bootstrap;
  int partitions = 10;
  double fraction = 0.10;  // partition size relative to the source
  std::uint64_t seed = 0;

  void validate() const;
};

/// The three shift generators with the default 10 x 10% partitioning.
std::vector<ShiftMethod> standard_shift_methods(std::uint64_t seed);

/// Synthetic partitions drawn from `source` (raw rows, schema order).
///   bootstrap: rows resampled with replacement
///   marginal:  each feature drawn independently from its empirical values
///   uniform:   numeric uniform on [min, max], categorical uniform over the
///              observed values
/// Each partition holds ceil(fraction * |source|) rows.
std::vector<std::vector<RawRow>> perturb(const ShiftMethod& method, const Schema& schema,
                                         std::span<const RawRow> source);

struct ShiftScore {
  std::string approach;
  ShiftKind kind = ShiftKind::Bootstrap;
  double mean = 0;
  double stddev = 0;  // population standard deviation over partitions
  std::vector<double> partition_scores;
};

struct RobustnessReport {
  std::vector<ShiftScore> cells;

  const ShiftScore* find(const std::string& approach, ShiftKind kind) const;
};

/// Set-Score of `interp` against oracle labels on every partition of every
/// method. `schema` supplies the cut points used to discretize generated rows.
RobustnessReport uncertainty_analysis(const Interpretation& interp, const Schema& schema,
                                      ModelOracle& oracle, std::span<const RawRow> score_rows,
                                      std::span<const ShiftMethod> methods,
                                      const std::string& approach = "interpretation");

struct AugmentedData {
  std::vector<RawRow> rows;
  std::vector<Label> labels;
  std::size_t original_rows = 0;
};

/// Appends oracle-labeled marginal and uniform samples (one partition each,
/// of the given fractions) to the training rows. The oracle is only queried.
AugmentedData augment(const Schema& schema, std::span<const RawRow> train_rows,
                      std::span<const Label> train_labels, ModelOracle& oracle,
                      double marginal_fraction, double uniform_fraction,
                      std::uint64_t seed);

}  // namespace rulex

#endif  // RULEX_ROBUSTNESS_HPP
