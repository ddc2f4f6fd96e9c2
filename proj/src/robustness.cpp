#include "rulex/robustness.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

#include "rulex/random.hpp"

namespace rulex {

std::string to_string(ShiftKind kind) {
  switch (kind) {
    case ShiftKind::Bootstrap: return "bootstrap";
    case ShiftKind::Marginal: return "marginal";
    case ShiftKind::Uniform: return "uniform";
  }
  return "unknown";
}

void ShiftMethod::validate() const {
  if (partitions < 1) throw std::invalid_argument("ShiftMethod: partitions must be >= 1");
  if (!(fraction > 0 && fraction <= 1))
    throw std::invalid_argument("ShiftMethod: fraction must be in (0,1]");
}

std::vector<ShiftMethod> standard_shift_methods(std::uint64_t seed) {
  return {{ShiftKind::Bootstrap, 10, 0.10, derive_seed(seed, "shift/bootstrap")},
          {ShiftKind::Marginal, 10, 0.10, derive_seed(seed, "shift/marginal")},
          {ShiftKind::Uniform, 10, 0.10, derive_seed(seed, "shift/uniform")}};
}

namespace {

std::size_t partition_size(double fraction, std::size_t n) {
  return static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
}

/// Per-feature sampling state for the marginal and uniform generators.
struct FeatureSampler {
  std::vector<double> values;    // marginal: every observed value
  std::vector<double> distinct;  // uniform categorical: observed values
  double lo = 0, hi = 0;         // uniform numeric range
  bool numeric = true;
};

std::vector<FeatureSampler> samplers(const Schema& schema, std::span<const RawRow> source) {
  std::vector<FeatureSampler> out(schema.size());
  for (std::size_t j = 0; j < schema.size(); ++j) {
    auto& s = out[j];
    s.numeric = schema[j].numeric();
    s.values.reserve(source.size());
    for (const auto& r : source) s.values.push_back(r[j]);
    std::set<double> d(s.values.begin(), s.values.end());
    s.distinct.assign(d.begin(), d.end());
    s.lo = s.distinct.front();
    s.hi = s.distinct.back();
  }
  return out;
}

RawRow draw(ShiftKind kind, const std::vector<FeatureSampler>& fs, Rng& rng) {
  RawRow row(fs.size());
  for (std::size_t j = 0; j < fs.size(); ++j) {
    const auto& s = fs[j];
    if (kind == ShiftKind::Marginal) {
      row[j] = s.values[uniform_index(rng, s.values.size())];
    } else if (s.numeric) {
      row[j] = s.lo + uniform_unit(rng) * (s.hi - s.lo);
    } else {
      row[j] = s.distinct[uniform_index(rng, s.distinct.size())];
    }
  }
  return row;
}

}  // namespace

std::vector<std::vector<RawRow>> perturb(const ShiftMethod& method, const Schema& schema,
                                         std::span<const RawRow> source) {
  method.validate();
  if (source.empty()) throw std::invalid_argument("perturb: empty source");
  const auto size = partition_size(method.fraction, source.size());
  std::vector<FeatureSampler> fs;
  if (method.kind != ShiftKind::Bootstrap) fs = samplers(schema, source);

  std::vector<std::vector<RawRow>> out(static_cast<std::size_t>(method.partitions));
  for (std::size_t p = 0; p < out.size(); ++p) {
    Rng rng(derive_seed(method.seed, "partition", p));
    auto& part = out[p];
    part.reserve(size);
    for (std::size_t i = 0; i < size; ++i) {
      if (method.kind == ShiftKind::Bootstrap)
        part.push_back(source[uniform_index(rng, source.size())]);
      else
        part.push_back(draw(method.kind, fs, rng));
    }
  }
  return out;
}

const ShiftScore* RobustnessReport::find(const std::string& approach, ShiftKind kind) const {
  for (const auto& c : cells)
    if (c.approach == approach && c.kind == kind) return &c;
  return nullptr;
}

RobustnessReport uncertainty_analysis(const Interpretation& interp, const Schema& schema,
                                      ModelOracle& oracle, std::span<const RawRow> score_rows,
                                      std::span<const ShiftMethod> methods,
                                      const std::string& approach) {
  RobustnessReport report;
  for (const auto& method : methods) {
    auto parts = perturb(method, schema, score_rows);
    ShiftScore cell;
    cell.approach = approach;
    cell.kind = method.kind;
    for (std::size_t p = 0; p < parts.size(); ++p) {
      std::vector<Label> labels;
      try {
        labels = oracle.predict_batch(parts[p]);
      } catch (const OracleError& e) {
        throw OracleError(to_string(method.kind) + " partition " + std::to_string(p) + ": " +
                          e.what());
      }
      auto coded = encode(schema, parts[p]);
      cell.partition_scores.push_back(set_score(interp, coded, labels));
    }
    const double n = static_cast<double>(cell.partition_scores.size());
    cell.mean = std::accumulate(cell.partition_scores.begin(), cell.partition_scores.end(), 0.0) / n;
    double var = 0;
    for (double s : cell.partition_scores) var += (s - cell.mean) * (s - cell.mean);
    cell.stddev = std::sqrt(var / n);
    report.cells.push_back(std::move(cell));
  }
  return report;
}

AugmentedData augment(const Schema& schema, std::span<const RawRow> train_rows,
                      std::span<const Label> train_labels, ModelOracle& oracle,
                      double marginal_fraction, double uniform_fraction,
                      std::uint64_t seed) {
  if (train_rows.size() != train_labels.size())
    throw std::invalid_argument("augment: rows and labels differ in length");
  AugmentedData out;
  out.rows.assign(train_rows.begin(), train_rows.end());
  out.labels.assign(train_labels.begin(), train_labels.end());
  out.original_rows = train_rows.size();

  auto add = [&](ShiftKind kind, double fraction) {
    if (fraction <= 0) return;
    ShiftMethod m{kind, 1, fraction, derive_seed(seed, "augment/" + to_string(kind))};
    auto part = perturb(m, schema, train_rows).front();
    auto labels = oracle.predict_batch(part);
    out.rows.insert(out.rows.end(), part.begin(), part.end());
    out.labels.insert(out.labels.end(), labels.begin(), labels.end());
  };
  add(ShiftKind::Marginal, marginal_fraction);
  add(ShiftKind::Uniform, uniform_fraction);
  return out;
}

}  // namespace rulex
