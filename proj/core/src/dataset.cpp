#include "irmkit/dataset.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <unordered_set>

#include "irmkit/error.hpp"

namespace irmkit {

std::string_view to_string(Organism organism) {
  switch (organism) {
    case Organism::Human: return "human";
    case Organism::Mouse: return "mouse";
    case Organism::Synthetic: return "synthetic";
  }
  return "synthetic";
}

Organism parse_organism(std::string_view text) {
  if (text == "human") return Organism::Human;
  if (text == "mouse") return Organism::Mouse;
  if (text == "synthetic") return Organism::Synthetic;
  throw ValidationError("unknown organism '" + std::string(text) + "'");
}

std::size_t MultiEnvDataset::total_samples() const {
  std::size_t total = 0;
  for (const auto& env : environments) total += env.n_samples();
  return total;
}

void validate(const Environment& env, bool binary_labels) {
  if (env.features.rows() == 0) {
    throw ValidationError("environment '" + env.id + "' has no samples");
  }
  if (env.labels.size() != env.features.rows()) {
    throw ValidationError("environment '" + env.id + "': " + std::to_string(env.labels.size()) +
                          " labels for " + std::to_string(env.features.rows()) + " samples");
  }
  if (!env.sample_ids.empty() && env.sample_ids.size() != env.n_samples()) {
    throw ValidationError("environment '" + env.id + "': sample id count does not match rows");
  }
  if (!env.features.allFinite() || !env.labels.allFinite()) {
    throw ValidationError("environment '" + env.id + "' contains non-finite values");
  }
  if (binary_labels) {
    for (Eigen::Index i = 0; i < env.labels.size(); ++i) {
      if (env.labels[i] != 0.0 && env.labels[i] != 1.0) {
        throw ValidationError("environment '" + env.id + "': label " + std::to_string(env.labels[i]) +
                              " at row " + std::to_string(i) + " is not 0 or 1");
      }
    }
  }
}

void validate(const MultiEnvDataset& data, std::size_t min_environments, bool binary_labels) {
  if (data.environments.size() < min_environments) {
    throw ValidationError("dataset has " + std::to_string(data.environments.size()) +
                          " environments, need at least " + std::to_string(min_environments));
  }
  std::unordered_set<std::string> seen;
  for (const auto& gene : data.gene_ids) {
    if (!seen.insert(gene).second) throw ValidationError("duplicate gene id '" + gene + "'");
  }
  for (const auto& env : data.environments) {
    validate(env, binary_labels);
    if (env.n_features() != data.n_features()) {
      throw ValidationError("environment '" + env.id + "' has " + std::to_string(env.n_features()) +
                            " features, dataset has " + std::to_string(data.n_features()));
    }
  }
}

Environment select_rows(const Environment& env, const std::vector<std::size_t>& rows) {
  Environment out;
  out.id = env.id;
  out.organism = env.organism;
  out.features.resize(static_cast<Eigen::Index>(rows.size()), env.features.cols());
  out.labels.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto src = static_cast<Eigen::Index>(rows[r]);
    const auto dst = static_cast<Eigen::Index>(r);
    out.features.row(dst) = env.features.row(src);
    out.labels[dst] = env.labels[src];
    if (!env.sample_ids.empty()) out.sample_ids.push_back(env.sample_ids[rows[r]]);
  }
  return out;
}

MultiEnvDataset select_features(const MultiEnvDataset& data, const std::vector<std::size_t>& columns) {
  MultiEnvDataset out;
  out.provenance = data.provenance;
  for (auto c : columns) out.gene_ids.push_back(data.gene_ids.at(c));
  for (const auto& env : data.environments) {
    Environment e;
    e.id = env.id;
    e.organism = env.organism;
    e.labels = env.labels;
    e.sample_ids = env.sample_ids;
    e.features.resize(env.features.rows(), static_cast<Eigen::Index>(columns.size()));
    for (std::size_t j = 0; j < columns.size(); ++j) {
      e.features.col(static_cast<Eigen::Index>(j)) = env.features.col(static_cast<Eigen::Index>(columns[j]));
    }
    out.environments.push_back(std::move(e));
  }
  return out;
}

namespace {

class Fnv1a {
 public:
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      state_ ^= p[i];
      state_ *= 0x100000001b3ULL;
    }
  }
  void text(const std::string& s) {
    bytes(s.data(), s.size());
    const char sep = '\0';
    bytes(&sep, 1);
  }
  void number(double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    bytes(&bits, sizeof bits);
  }
  [[nodiscard]] std::uint64_t value() const { return state_; }

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

}  // namespace

std::string content_hash(const MultiEnvDataset& data) {
  Fnv1a h;
  for (const auto& g : data.gene_ids) h.text(g);
  for (const auto& env : data.environments) {
    h.text(env.id);
    h.text(std::string(to_string(env.organism)));
    for (Eigen::Index i = 0; i < env.features.rows(); ++i) {
      h.number(env.labels[i]);
      for (Eigen::Index j = 0; j < env.features.cols(); ++j) h.number(env.features(i, j));
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h.value()));
  return buf;
}

}  // namespace irmkit
