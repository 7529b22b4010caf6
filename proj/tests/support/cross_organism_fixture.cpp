#include "cross_organism_fixture.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>

#include "irmkit/io.hpp"
#include "irmkit/rng.hpp"

#ifndef IRMKIT_SOURCE_DIR
#error "IRMKIT_SOURCE_DIR must be defined"
#endif

namespace irmkit::fixture {

namespace {

constexpr std::size_t kHumanBOffset = 20;

std::string format4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::vector<std::size_t> invariant_indices() { return {101, 102, 103, 104, 106, 107, 108, 109, 111, 112}; }
std::vector<std::size_t> specific_indices() { return {201, 202, 203, 204, 206}; }

}  // namespace

std::string human_gene(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "G%04zu", i);
  return buf;
}

std::string mouse_gene(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "mG%04zu", i);
  return buf;
}

std::vector<std::string> invariant_genes() {
  std::vector<std::string> out;
  for (auto i : invariant_indices()) out.push_back(human_gene(i));
  return out;
}

std::vector<std::string> organism_specific_genes() {
  std::vector<std::string> out;
  for (auto i : specific_indices()) out.push_back(human_gene(i));
  return out;
}

std::filesystem::path bundled_dir() {
  return std::filesystem::path(IRMKIT_SOURCE_DIR) / "data" / "fixtures" / "cross_organism";
}

void write_fixture(const std::filesystem::path& dir, std::uint64_t seed) {
  // Gene-level parameters shared by every experiment (index = homologue index,
  // 0..519 to cover human_b's tail).
  constexpr std::size_t kGeneSpace = kRawGenes + kHumanBOffset;
  Rng gene_rng(seed, 0);
  std::vector<double> base(kGeneSpace);
  std::vector<double> spread(kGeneSpace);
  for (std::size_t g = 0; g < kGeneSpace; ++g) {
    base[g] = 2.0 + 8.0 * gene_rng.uniform();
    const double u = gene_rng.uniform();
    spread[g] = 0.2 + 1.5 * u * u;
  }
  std::vector<double> effect(kGeneSpace, 0.0);
  std::vector<bool> flips(kGeneSpace, false);
  for (auto i : invariant_indices()) {
    spread[i] = 1.5;
    effect[i] = 3.0;
  }
  for (auto i : specific_indices()) {
    spread[i] = 1.5;
    effect[i] = 3.0;
    flips[i] = true;
  }

  const auto& infos = tables();
  for (std::size_t t = 0; t < infos.size(); ++t) {
    const auto& info = infos[t];
    Rng rng(seed, 100 + t);
    const double batch_shift = 3.0 * rng.uniform() - 1.5;
    const double batch_scale = 0.6 + 0.8 * rng.uniform();
    const std::size_t first = info.experiment_id == "human_b" ? kHumanBOffset : 0;

    std::vector<int> labels(info.n_samples);
    for (std::size_t s = 0; s < info.n_samples; ++s) labels[s] = static_cast<int>(s % 2);
    rng.shuffle(std::span<int>(labels));

    std::string csv = "sample_id,label";
    for (std::size_t g = first; g < first + kRawGenes; ++g) csv += "," + (info.mouse ? mouse_gene(g) : human_gene(g));
    csv += "\n";
    for (std::size_t s = 0; s < info.n_samples; ++s) {
      char sid[32];
      std::snprintf(sid, sizeof sid, "%s_s%02zu", info.experiment_id.c_str(), s);
      csv += sid;
      csv += labels[s] ? ",1" : ",0";
      for (std::size_t g = first; g < first + kRawGenes; ++g) {
        const double sign = (flips[g] && info.mouse) ? -1.0 : 1.0;
        const double signal = labels[s] ? sign * effect[g] : 0.0;
        const double v = batch_shift + batch_scale * (base[g] + spread[g] * rng.normal() + signal);
        csv += "," + format4(v);
      }
      csv += "\n";
    }
    write_text_file(dir / (info.experiment_id + ".csv"), csv);
  }

  std::string tsv = "mouse_gene_id\thuman_gene_id\n";
  for (std::size_t i = 0; i < kRawGenes; ++i) {
    if (i % 5 != 0) tsv += mouse_gene(i) + "\t" + human_gene(i) + "\n";
  }
  // Collisions, all removed on load.
  tsv += "mX0001\tG9001\nmX0001\tG9002\nmX0002\tG9003\nmX0003\tG9003\n";
  write_text_file(dir / "homologues.tsv", tsv);
}

}  // namespace irmkit::fixture
