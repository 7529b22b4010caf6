#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "irmkit/dataset.hpp"
#include "irmkit/harness.hpp"
#include "irmkit/model.hpp"
#include "irmkit/ranking.hpp"
#include "irmkit/scm.hpp"

namespace irmkit {

// Processed dataset directory:
//   dataset.json   gene ids, environment metadata, provenance
//   env_NNN.csv    sample_id,label,<gene>... per environment
void write_dataset(const MultiEnvDataset& data, const std::filesystem::path& dir);
MultiEnvDataset read_dataset(const std::filesystem::path& dir);

// JSON documents. Parsers reject unknown keys and wrong types with ValidationError.

std::string to_json(const TrainConfig& config);
TrainConfig train_config_from_json(std::string_view text);

std::string to_json(const ScmSpec& spec);
ScmSpec scm_spec_from_json(std::string_view text);

/// A trained model together with the gene ids its weights belong to.
struct ModelFile {
  TrainedModel trained;
  std::vector<std::string> gene_ids;
};

/// Keeps only the last `trace_tail` trace points.
std::string to_json(const ModelFile& model, std::size_t trace_tail = 10);
ModelFile model_from_json(std::string_view text);

/// {"source": ..., "entries": [[gene_id, score], ...]}
std::string to_json(const RankedFeatureList& list);
RankedFeatureList ranking_from_json(std::string_view text);

std::string to_json(const SweepReport& report);
SweepReport sweep_report_from_json(std::string_view text);

std::string read_text_file(const std::filesystem::path& path);
/// Creates parent directories as needed.
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace irmkit
