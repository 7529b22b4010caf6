#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace irmkit {

/// Row-major so that one sample is contiguous; risks and gradients walk rows.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

enum class Organism { Human, Mouse, Synthetic };

std::string_view to_string(Organism organism);
Organism parse_organism(std::string_view text);

/// One data-generating context: samples x features plus targets.
///
/// Targets are binary (irradiated = 1, control = 0) for classification data
/// and real-valued for regression SCM data.
struct Environment {
  std::string id;
  Organism organism = Organism::Synthetic;
  Matrix features;
  Vector labels;
  /// Optional; empty means "s0", "s1", ... when written to disk.
  std::vector<std::string> sample_ids;

  [[nodiscard]] std::size_t n_samples() const { return static_cast<std::size_t>(features.rows()); }
  [[nodiscard]] std::size_t n_features() const { return static_cast<std::size_t>(features.cols()); }
};

/// Which preprocessing steps produced a dataset, with named counters
/// (dropped genes per table, intersection size, ...).
struct Provenance {
  std::vector<std::string> steps;
  std::map<std::string, std::int64_t> counters;
};

/// Gene-aligned collection of environments sharing one feature space.
struct MultiEnvDataset {
  std::vector<Environment> environments;
  std::vector<std::string> gene_ids;
  Provenance provenance;

  [[nodiscard]] std::size_t n_features() const { return gene_ids.size(); }
  [[nodiscard]] std::size_t total_samples() const;
};

/// Throws ValidationError on an empty environment, a label/row count mismatch
/// or a non-finite value. With `binary_labels`, labels must be exactly 0 or 1.
void validate(const Environment& env, bool binary_labels = false);

/// Environment checks plus: identical feature counts, unique gene ids and at
/// least `min_environments` environments.
void validate(const MultiEnvDataset& data, std::size_t min_environments = 1,
              bool binary_labels = false);

/// Copy of `env` restricted to `rows` (in the given order).
Environment select_rows(const Environment& env, const std::vector<std::size_t>& rows);

/// Copy of `data` keeping only the given feature columns (in the given order).
MultiEnvDataset select_features(const MultiEnvDataset& data, const std::vector<std::size_t>& columns);

/// FNV-1a over ids, labels and the bit patterns of every value, as 16 hex digits.
std::string content_hash(const MultiEnvDataset& data);

}  // namespace irmkit
