#include "irmkit/preprocess.hpp"

#include <algorithm>
#include <istream>
#include <numeric>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "irmkit/error.hpp"
#include "text.hpp"

namespace irmkit {

void validate(const ExpressionTable& t) {
  const auto rows = static_cast<std::size_t>(t.values.rows());
  const auto cols = static_cast<std::size_t>(t.values.cols());
  if (t.gene_ids.size() != cols || t.sample_ids.size() != rows || t.labels.size() != rows) {
    throw ValidationError("table '" + t.experiment_id + "' has inconsistent dimensions");
  }
  std::unordered_set<std::string_view> genes;
  for (const auto& g : t.gene_ids) {
    if (!genes.insert(g).second) throw ValidationError("table '" + t.experiment_id + "': duplicate gene '" + g + "'");
  }
  std::unordered_set<std::string_view> samples;
  for (const auto& s : t.sample_ids) {
    if (!samples.insert(s).second) {
      throw ValidationError("table '" + t.experiment_id + "': duplicate sample id '" + s + "'");
    }
  }
  for (int label : t.labels) {
    if (label != 0 && label != 1) throw ValidationError("table '" + t.experiment_id + "': label not in {0,1}");
  }
  if (!t.values.allFinite()) throw ValidationError("table '" + t.experiment_id + "' has non-finite values");
}

ExpressionTable parse_expression_table(std::istream& in, const TableMetadata& meta) {
  const auto lines = detail::read_lines(in);
  const std::string where = "table '" + meta.experiment_id + "'";
  if (lines.empty()) throw ValidationError(where + ": file is empty");
  const auto header = detail::split(lines.front(), ',');
  if (header.size() < 3 || header[0] != "sample_id" || header[1] != meta.label_column) {
    throw ValidationError(where + ": malformed header, expected 'sample_id," + meta.label_column + ",<genes...>'");
  }

  ExpressionTable t;
  t.experiment_id = meta.experiment_id;
  t.organism = meta.organism;
  t.human_gene_space = meta.organism != Organism::Mouse;
  t.gene_ids.assign(header.begin() + 2, header.end());
  std::unordered_set<std::string_view> genes;
  for (const auto& g : t.gene_ids) {
    if (g.empty()) throw ValidationError(where + ": empty gene id in header");
    if (!genes.insert(g).second) throw ValidationError(where + ": duplicate gene column '" + g + "'");
  }

  const auto n_rows = static_cast<Eigen::Index>(lines.size() - 1);
  const auto n_genes = static_cast<Eigen::Index>(t.gene_ids.size());
  if (n_rows == 0) throw ValidationError(where + ": no samples");
  t.values.resize(n_rows, n_genes);
  std::unordered_set<std::string> samples;
  for (Eigen::Index r = 0; r < n_rows; ++r) {
    const auto line_no = std::to_string(r + 2);
    const auto fields = detail::split(lines[static_cast<std::size_t>(r + 1)], ',');
    if (fields.size() != header.size()) {
      throw ValidationError(where + ", line " + line_no + ": expected " + std::to_string(header.size()) +
                            " fields, found " + std::to_string(fields.size()));
    }
    if (fields[0].empty()) throw ValidationError(where + ", line " + line_no + ": empty sample id");
    if (!samples.insert(fields[0]).second) {
      throw ValidationError(where + ", line " + line_no + ": duplicate sample id '" + fields[0] + "'");
    }
    t.sample_ids.push_back(fields[0]);
    if (fields[1] == "0") {
      t.labels.push_back(0);
    } else if (fields[1] == "1") {
      t.labels.push_back(1);
    } else {
      throw ValidationError(where + ", line " + line_no + " (sample '" + fields[0] + "'): unknown label value '" +
                            fields[1] + "'");
    }
    for (Eigen::Index j = 0; j < n_genes; ++j) {
      const auto& cell = fields[static_cast<std::size_t>(j + 2)];
      const auto v = detail::parse_double(cell);
      if (!v) {
        throw ValidationError(where + ", line " + line_no + ", gene '" + t.gene_ids[static_cast<std::size_t>(j)] +
                              "': " + (cell.empty() ? std::string("missing value") : "non-numeric value '" + cell + "'"));
      }
      t.values(r, j) = *v;
    }
  }
  return t;
}

ExpressionTable load_expression_table(const std::filesystem::path& path, const TableMetadata& meta) {
  auto in = detail::open_input(path);
  return parse_expression_table(in, meta);
}

HomologueMap parse_homologue_map(std::istream& in) {
  const auto lines = detail::read_lines(in);
  if (lines.empty()) throw ValidationError("homologue map: file is empty");
  const auto header = detail::split(lines.front(), '\t');
  if (header.size() != 2 || header[0] != "mouse_gene_id" || header[1] != "human_gene_id") {
    throw ValidationError("homologue map: malformed header, expected 'mouse_gene_id<TAB>human_gene_id'");
  }
  std::set<std::pair<std::string, std::string>> pairs;
  std::size_t rows = 0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto fields = detail::split(lines[i], '\t');
    if (fields.size() != 2 || fields[0].empty() || fields[1].empty()) {
      throw ValidationError("homologue map, line " + std::to_string(i + 1) + ": expected two non-empty columns");
    }
    pairs.emplace(fields[0], fields[1]);
    ++rows;
  }
  std::unordered_map<std::string, std::size_t> mouse_uses;
  std::unordered_map<std::string, std::size_t> human_uses;
  for (const auto& [m, h] : pairs) {
    ++mouse_uses[m];
    ++human_uses[h];
  }
  HomologueMap map;
  for (const auto& [m, h] : pairs) {
    if (mouse_uses[m] == 1 && human_uses[h] == 1) {
      map.mouse_to_human.emplace(m, h);
    } else {
      ++map.removed_rows;
    }
  }
  return map;
}

HomologueMap load_homologue_map(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  return parse_homologue_map(in);
}

MappedTable apply_homologue_map(const ExpressionTable& table, const HomologueMap& map) {
  if (table.organism != Organism::Mouse) {
    throw ValidationError("table '" + table.experiment_id + "' is not a mouse table; homologue mapping applies to mouse data only");
  }
  std::vector<Eigen::Index> keep;
  std::vector<std::string> renamed;
  for (std::size_t j = 0; j < table.gene_ids.size(); ++j) {
    if (auto it = map.mouse_to_human.find(table.gene_ids[j]); it != map.mouse_to_human.end()) {
      keep.push_back(static_cast<Eigen::Index>(j));
      renamed.push_back(it->second);
    }
  }
  if (keep.empty()) {
    throw ValidationError("table '" + table.experiment_id + "': no gene has a homologue, zero genes remain");
  }
  MappedTable out;
  out.dropped_genes = table.gene_ids.size() - keep.size();
  out.table = table;
  out.table.gene_ids = std::move(renamed);
  out.table.values.resize(table.values.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j) {
    out.table.values.col(static_cast<Eigen::Index>(j)) = table.values.col(keep[j]);
  }
  out.table.human_gene_space = true;
  return out;
}

MappedTable to_human_gene_space(const ExpressionTable& table, const HomologueMap* map) {
  if (table.organism != Organism::Mouse) return MappedTable{table, 0};
  if (map == nullptr) {
    throw ValidationError("mouse table '" + table.experiment_id + "' needs a homologue map");
  }
  return apply_homologue_map(table, *map);
}

MultiEnvDataset merge_to_multienv(std::span<const ExpressionTable> tables) {
  if (tables.size() < 2) throw ValidationError("merging needs at least two tables");
  std::set<std::string> shared(tables.front().gene_ids.begin(), tables.front().gene_ids.end());
  std::unordered_set<std::string_view> env_ids;
  for (const auto& t : tables) {
    validate(t);
    if (!t.human_gene_space) {
      throw ValidationError("table '" + t.experiment_id + "' is still in mouse gene space; apply the homologue map first");
    }
    if (!env_ids.insert(t.experiment_id).second) {
      throw ValidationError("duplicate experiment id '" + t.experiment_id + "'");
    }
    const std::unordered_set<std::string_view> genes(t.gene_ids.begin(), t.gene_ids.end());
    std::erase_if(shared, [&](const std::string& g) { return !genes.contains(g); });
  }
  if (shared.empty()) throw ValidationError("the input tables share no genes");

  MultiEnvDataset data;
  data.gene_ids.assign(shared.begin(), shared.end());
  for (const auto& t : tables) {
    std::unordered_map<std::string_view, Eigen::Index> column;
    for (std::size_t j = 0; j < t.gene_ids.size(); ++j) column.emplace(t.gene_ids[j], static_cast<Eigen::Index>(j));
    Environment env;
    env.id = t.experiment_id;
    env.organism = t.organism;
    env.sample_ids = t.sample_ids;
    env.labels.resize(static_cast<Eigen::Index>(t.labels.size()));
    for (std::size_t i = 0; i < t.labels.size(); ++i) env.labels[static_cast<Eigen::Index>(i)] = t.labels[i];
    env.features.resize(t.values.rows(), static_cast<Eigen::Index>(data.gene_ids.size()));
    for (std::size_t j = 0; j < data.gene_ids.size(); ++j) {
      env.features.col(static_cast<Eigen::Index>(j)) = t.values.col(column.at(data.gene_ids[j]));
    }
    data.environments.push_back(std::move(env));
  }
  data.provenance.steps.push_back("merge");
  data.provenance.counters["intersection_size"] = static_cast<std::int64_t>(data.gene_ids.size());
  return data;
}

std::vector<double> combined_variances(const MultiEnvDataset& data) {
  const auto p = data.n_features();
  const auto n = data.total_samples();
  std::vector<double> mean(p, 0.0);
  std::vector<double> var(p, 0.0);
  if (n < 2) return var;
  for (const auto& env : data.environments) {
    for (Eigen::Index i = 0; i < env.features.rows(); ++i) {
      for (std::size_t j = 0; j < p; ++j) mean[j] += env.features(i, static_cast<Eigen::Index>(j));
    }
  }
  for (auto& m : mean) m /= static_cast<double>(n);
  for (const auto& env : data.environments) {
    for (Eigen::Index i = 0; i < env.features.rows(); ++i) {
      for (std::size_t j = 0; j < p; ++j) {
        const double d = env.features(i, static_cast<Eigen::Index>(j)) - mean[j];
        var[j] += d * d;
      }
    }
  }
  for (auto& v : var) v /= static_cast<double>(n - 1);
  return var;
}

MultiEnvDataset variance_filter(const MultiEnvDataset& data, std::size_t k) {
  if (k == 0) throw ValidationError("variance filter needs k > 0");
  if (k > data.n_features()) {
    throw ValidationError("variance filter asked for " + std::to_string(k) + " genes but only " +
                          std::to_string(data.n_features()) + " are available");
  }
  const auto var = combined_variances(data);
  std::vector<std::size_t> order(var.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (var[a] != var[b]) return var[a] > var[b];
    return data.gene_ids[a] < data.gene_ids[b];
  });
  order.resize(k);
  std::sort(order.begin(), order.end());
  auto out = select_features(data, order);
  out.provenance.steps.push_back("variance_filter");
  out.provenance.counters["top_genes"] = static_cast<std::int64_t>(k);
  return out;
}

MultiEnvDataset z_normalize(const MultiEnvDataset& data) {
  MultiEnvDataset out = data;
  for (auto& env : out.environments) {
    const auto n = env.features.rows();
    for (Eigen::Index j = 0; j < env.features.cols(); ++j) {
      auto col = env.features.col(j);
      if (n < 2 || col.maxCoeff() == col.minCoeff()) {
        col.setZero();
        continue;
      }
      double mean = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) mean += col[i];
      mean /= static_cast<double>(n);
      double ss = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) ss += (col[i] - mean) * (col[i] - mean);
      const double sd = std::sqrt(ss / static_cast<double>(n - 1));
      for (Eigen::Index i = 0; i < n; ++i) col[i] = (col[i] - mean) / sd;
    }
  }
  out.provenance.steps.push_back("z_normalize");
  return out;
}

MultiEnvDataset run_preprocess(std::span<const ExpressionTable> tables, const HomologueMap* map,
                               const PreprocessOptions& options) {
  std::vector<ExpressionTable> mapped;
  std::map<std::string, std::int64_t> dropped;
  for (const auto& t : tables) {
    auto m = to_human_gene_space(t, map);
    dropped["dropped_genes." + t.experiment_id] = static_cast<std::int64_t>(m.dropped_genes);
    mapped.push_back(std::move(m.table));
  }
  auto merged = merge_to_multienv(mapped);
  merged.provenance.steps.insert(merged.provenance.steps.begin(), {"load", "homologue_map"});
  merged.provenance.counters.insert(dropped.begin(), dropped.end());
  if (map != nullptr) {
    merged.provenance.counters["homologue_pairs"] = static_cast<std::int64_t>(map->size());
    merged.provenance.counters["homologue_rows_removed"] = static_cast<std::int64_t>(map->removed_rows);
  }
  return z_normalize(variance_filter(merged, options.top_genes));
}

}  // namespace irmkit
