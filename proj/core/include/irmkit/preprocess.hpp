#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "irmkit/dataset.hpp"

namespace irmkit {

/// One experiment's samples x genes matrix as read from disk.
struct ExpressionTable {
  std::string experiment_id;
  Organism organism = Organism::Human;
  std::vector<std::string> gene_ids;
  std::vector<std::string> sample_ids;
  Matrix values;
  std::vector<int> labels;
  /// True once gene ids are human ids: always for human tables, after
  /// apply_homologue_map for mouse tables.
  bool human_gene_space = false;
};

void validate(const ExpressionTable& table);

struct TableMetadata {
  std::string experiment_id;
  Organism organism = Organism::Human;
  std::string label_column = "label";
};

/// Expression CSV: `sample_id,<label_column>,<gene>...`, one sample per row,
/// labels 0 or 1, decimal-point numbers.
ExpressionTable parse_expression_table(std::istream& in, const TableMetadata& meta);
ExpressionTable load_expression_table(const std::filesystem::path& path, const TableMetadata& meta);

/// One-to-one mouse -> human gene id association.
struct HomologueMap {
  std::map<std::string, std::string> mouse_to_human;
  /// Rows dropped because their mouse or human id took part in a collision.
  std::size_t removed_rows = 0;

  [[nodiscard]] std::size_t size() const { return mouse_to_human.size(); }
};

/// Two tab-separated columns with header `mouse_gene_id<TAB>human_gene_id`.
/// Exact duplicate rows count once; every row of a one-to-many or
/// many-to-one group is removed.
HomologueMap parse_homologue_map(std::istream& in);
HomologueMap load_homologue_map(const std::filesystem::path& path);

struct MappedTable {
  ExpressionTable table;
  std::size_t dropped_genes = 0;
};

/// Renames mouse gene columns to their human homologues and drops unmapped
/// columns. Requires a mouse table; throws when no gene survives.
MappedTable apply_homologue_map(const ExpressionTable& table, const HomologueMap& map);

/// Human tables unchanged, mouse tables through apply_homologue_map.
/// Mouse tables without a map are a ValidationError.
MappedTable to_human_gene_space(const ExpressionTable& table, const HomologueMap* map);

/// One environment per table (same order, id = experiment id) over the
/// lexicographically sorted intersection of gene ids.
MultiEnvDataset merge_to_multienv(std::span<const ExpressionTable> tables);

/// Keeps the k genes with largest sample variance over all rows of all
/// environments (ties: smaller gene id wins). Survivors keep their order.
MultiEnvDataset variance_filter(const MultiEnvDataset& data, std::size_t k);

/// Per environment, per gene: (x - mean) / sd with the n-1 denominator.
/// Constant columns become zeros.
MultiEnvDataset z_normalize(const MultiEnvDataset& data);

/// Sample variance of every gene over all environments' rows concatenated.
std::vector<double> combined_variances(const MultiEnvDataset& data);

struct PreprocessOptions {
  std::size_t top_genes = 1000;
};

/// load -> homologue map -> merge -> variance filter -> z-normalize, with
/// per-table dropped-gene counts and the intersection size in provenance.
MultiEnvDataset run_preprocess(std::span<const ExpressionTable> tables, const HomologueMap* map,
                               const PreprocessOptions& options);

}  // namespace irmkit
