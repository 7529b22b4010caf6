#include <doctest.h>

#include <algorithm>
#include <filesystem>

#include "cross_organism_fixture.hpp"
#include "irmkit/io.hpp"
#include "irmkit/preprocess.hpp"

using namespace irmkit;
namespace fs = std::filesystem;

TEST_CASE("bundled fixture matches its generator") {
  const auto dir = fs::temp_directory_path() / "irmkit_test_fixture";
  fs::remove_all(dir);
  fixture::write_fixture(dir);
  for (const auto& t : fixture::tables()) {
    const auto name = t.experiment_id + ".csv";
    CHECK_MESSAGE(read_text_file(dir / name) == read_text_file(fixture::bundled_dir() / name), name);
  }
  CHECK(read_text_file(dir / "homologues.tsv") == read_text_file(fixture::bundled_dir() / "homologues.tsv"));
}

TEST_CASE("fixture declarations hold") {
  const auto dir = fixture::bundled_dir();
  const auto map = load_homologue_map(dir / "homologues.tsv");
  CHECK(map.size() == fixture::kHomologuePairs);
  CHECK(map.removed_rows == fixture::kHomologueRowsRemoved);
  std::size_t samples = 0;
  for (const auto& t : fixture::tables()) {
    const auto table =
        load_expression_table(dir / (t.experiment_id + ".csv"), {t.experiment_id, t.mouse ? Organism::Mouse : Organism::Human});
    CHECK(table.gene_ids.size() == fixture::kRawGenes);
    CHECK(table.sample_ids.size() == t.n_samples);
    samples += t.n_samples;
    if (t.mouse) CHECK(apply_homologue_map(table, map).dropped_genes == fixture::kMouseDroppedGenes);
  }
  CHECK(samples == fixture::kTotalSamples);
}

TEST_CASE("label-linked genes survive the variance filter") {
  const auto dir = fixture::bundled_dir();
  std::vector<ExpressionTable> tables;
  for (const auto& t : fixture::tables()) {
    tables.push_back(load_expression_table(dir / (t.experiment_id + ".csv"),
                                           {t.experiment_id, t.mouse ? Organism::Mouse : Organism::Human}));
  }
  const auto map = load_homologue_map(dir / "homologues.tsv");
  const auto data = run_preprocess(tables, &map, {fixture::kTopGenes});
  for (const auto& g : fixture::invariant_genes()) {
    CHECK_MESSAGE(std::find(data.gene_ids.begin(), data.gene_ids.end(), g) != data.gene_ids.end(), g);
  }
  for (const auto& g : fixture::organism_specific_genes()) {
    CHECK_MESSAGE(std::find(data.gene_ids.begin(), data.gene_ids.end(), g) != data.gene_ids.end(), g);
  }
}
