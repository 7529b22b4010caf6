#include <doctest.h>

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cli.hpp"
#include "irmkit/io.hpp"
#include "irmkit/ranking.hpp"
#include "irmkit/scm.hpp"

using namespace irmkit;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "irmkit");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("irmkit_test_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void check_error_json(const Result& r, int code) {
  CHECK(r.code == code);
  const auto j = nlohmann::json::parse(r.err);
  CHECK(j.at("exit_code") == code);
  CHECK_FALSE(j.at("error").at("message").get<std::string>().empty());
}

// Writes a small labeled table with genes G0..G(d-1) (prefix "m" for mouse).
void write_table(const fs::path& path, std::size_t n, std::size_t d, bool mouse) {
  std::string csv = "sample_id,label";
  for (std::size_t j = 0; j < d; ++j) csv += std::string(",") + (mouse ? "mG" : "G") + std::to_string(j);
  csv += "\n";
  for (std::size_t i = 0; i < n; ++i) {
    csv += path.stem().string() + "_" + std::to_string(i) + "," + std::to_string(i % 2);
    for (std::size_t j = 0; j < d; ++j) csv += "," + std::to_string(((i * 7 + j * 3) % 11) + 0.5 * (i % 2) * j);
    csv += "\n";
  }
  write_text_file(path, csv);
}

void write_map(const fs::path& path, std::size_t d) {
  std::string tsv = "mouse_gene_id\thuman_gene_id\n";
  for (std::size_t j = 0; j < d; ++j) tsv += "mG" + std::to_string(j) + "\tG" + std::to_string(j) + "\n";
  write_text_file(path, tsv);
}

}  // namespace

TEST_CASE("help and usage errors") {
  CHECK(run({"--help"}).code == 0);
  for (const char* sub : {"synth", "preprocess", "train", "rank", "compare", "sweep", "report"}) {
    const auto r = run({sub, "--help"});
    CHECK(r.code == 0);
    CHECK(r.out.find("--") != std::string::npos);
  }
  const auto sweep_help = run({"sweep", "--help"}).out;
  for (const char* flag : {"--mode", "--data", "--step", "--budget", "--seeds", "--metrics", "--rbo-p", "--workers",
                           "--lambda", "--anneal", "--iters", "--lr", "--out"}) {
    CHECK(sweep_help.find(flag) != std::string::npos);
  }
  check_error_json(run({"train", "--bogus"}), 2);
  check_error_json(run({"frobnicate"}), 2);
  check_error_json(run({}), 2);
}

TEST_CASE("synth validates and is deterministic") {
  const auto dir = scratch("synth");
  write_text_file(dir / "spec.json", R"({"env_scales": [0.2, 0.7, 1.5], "n_samples_per_env": 40})");
  CHECK(run({"synth", "--spec", (dir / "spec.json").string(), "--seed", "3", "--out", (dir / "a").string()}).code == 0);
  CHECK(run({"synth", "--spec", (dir / "spec.json").string(), "--seed", "3", "--out", (dir / "b").string(),
             "--test-out", (dir / "t").string()})
            .code == 0);
  CHECK(read_dataset(dir / "a").environments.size() == 3);
  CHECK(read_text_file(dir / "a" / "dataset.json") == read_text_file(dir / "b" / "dataset.json"));
  CHECK(read_text_file(dir / "a" / "env_002.csv") == read_text_file(dir / "b" / "env_002.csv"));
  CHECK(read_dataset(dir / "t").environments.size() == 1);

  write_text_file(dir / "empty.json", R"({"env_scales": []})");
  check_error_json(run({"synth", "--spec", (dir / "empty.json").string(), "--out", (dir / "c").string()}), 2);
  check_error_json(run({"synth", "--spec", (dir / "nope.json").string(), "--out", (dir / "c").string()}), 1);
}

TEST_CASE("train, rank and compare") {
  const auto dir = scratch("train");
  write_text_file(dir / "spec.json",
                  R"({"n_causal": 30, "n_spurious": 30, "task": "classification", "n_samples_per_env": 200})");
  REQUIRE(run({"synth", "--spec", (dir / "spec.json").string(), "--out", (dir / "data").string()}).code == 0);

  const std::vector<std::string> common{"--data", (dir / "data").string(), "--iters", "200", "--anneal", "50"};
  auto train_args = [&](const std::string& out, std::vector<std::string> extra, const std::string& lr = "0.05") {
    std::vector<std::string> a{"train"};
    a.insert(a.end(), common.begin(), common.end());
    a.insert(a.end(), extra.begin(), extra.end());
    a.push_back("--lr");
    a.push_back(lr);
    a.push_back("--out");
    a.push_back((dir / out).string());
    return a;
  };
  REQUIRE(run(train_args("irm.json", {})).code == 0);
  REQUIRE(run(train_args("irm2.json", {})).code == 0);
  CHECK(read_text_file(dir / "irm.json") == read_text_file(dir / "irm2.json"));

  REQUIRE(run({"rank", "--model", (dir / "irm.json").string(), "--out", (dir / "irm_rank.json").string()}).code == 0);
  const auto compared = run({"compare", (dir / "irm_rank.json").string(), (dir / "irm_rank.json").string()});
  REQUIRE(compared.code == 0);
  const auto metrics = nlohmann::json::parse(compared.out);
  for (const char* m : {"top10", "top50", "rbo", "tau"}) CHECK(metrics.at(m).get<double>() == 1.0);

  // --lambda 0 gives the ERM pipeline.
  REQUIRE(run(train_args("erm.json", {"--lambda", "0"})).code == 0);
  const auto ranked = run({"rank", "--model", (dir / "erm.json").string(), "--source", "erm"});
  REQUIRE(ranked.code == 0);
  TrainConfig c;
  c.total_iters = 200;
  c.anneal_iters = 50;
  c.learning_rate = 0.05;
  const auto data = read_dataset(dir / "data");
  const auto expected = rank_features(train_erm(data, c).model, data.gene_ids, "erm");
  CHECK(ranking_from_json(ranked.out).ids() == expected.ids());
  CHECK(nlohmann::json::parse(ranked.out) == nlohmann::json::parse(to_json(expected)));

  check_error_json(run(train_args("bad.json", {}, "-1")), 2);
  check_error_json(run(train_args("bad.json", {"--loss", "squared"}, "1e3")), 3);
  check_error_json(run(train_args("bad.json", {"--lr", "0.1"})), 2);  // flag given twice
  check_error_json(run({"rank", "--model", (dir / "missing.json").string()}), 1);
  check_error_json(run({"compare", (dir / "irm_rank.json").string(), (dir / "irm_rank.json").string(), "--rbo-p", "2"}),
                   2);
}

TEST_CASE("preprocess and sweep preconditions") {
  const auto dir = scratch("sweep");
  write_table(dir / "h1.csv", 2, 6, false);
  write_table(dir / "h2.csv", 6, 6, false);
  write_table(dir / "m1.csv", 6, 6, true);
  write_map(dir / "map.tsv", 6);
  const std::vector<std::string> inputs{"--human", (dir / "h1.csv").string(), "--human", (dir / "h2.csv").string(),
                                        "--mouse", (dir / "m1.csv").string()};
  auto prep = [&](std::vector<std::string> extra) {
    std::vector<std::string> a{"preprocess"};
    a.insert(a.end(), inputs.begin(), inputs.end());
    a.insert(a.end(), extra.begin(), extra.end());
    return run(a);
  };
  check_error_json(prep({"--top-genes", "4", "--out", (dir / "p").string()}), 2);
  check_error_json(prep({"--homologues", (dir / "none.tsv").string(), "--top-genes", "4", "--out",
                         (dir / "p").string()}),
                   1);
  check_error_json(prep({"--homologues", (dir / "map.tsv").string(), "--top-genes", "40", "--out",
                         (dir / "p").string()}),
                   2);
  REQUIRE(prep({"--homologues", (dir / "map.tsv").string(), "--top-genes", "4", "--out", (dir / "p").string()}).code ==
          0);
  const auto data = read_dataset(dir / "p");
  CHECK(data.n_features() == 4);
  CHECK(data.environments.size() == 3);
  CHECK(data.provenance.counters.at("dropped_genes.m1") == 0);

  const auto r = run({"sweep", "--mode", "substitute", "--data", (dir / "p").string(), "--step", "1", "--metrics",
                      "rbo", "--iters", "10", "--anneal", "0", "--out", (dir / "r.json").string()});
  check_error_json(r, 2);
  CHECK(r.err.find("h1") != std::string::npos);
  check_error_json(run({"sweep", "--mode", "augment", "--data", (dir / "p").string(), "--step", "2", "--out",
                        (dir / "r.json").string()}),
                   2);  // top10 needs 10 genes

  const std::vector<std::string> ok{"sweep", "--mode", "augment", "--data", (dir / "p").string(), "--step", "3",
                                    "--metrics", "rbo,tau", "--seeds", "0,1", "--iters", "30", "--anneal", "5",
                                    "--lr", "0.01"};
  auto with_out = [&](std::vector<std::string> a, const std::string& out) {
    a.push_back("--out");
    a.push_back((dir / out).string());
    return a;
  };
  REQUIRE(run(with_out(ok, "r1.json")).code == 0);
  auto parallel = with_out(ok, "r2.json");
  parallel.push_back("--workers");
  parallel.push_back("3");
  REQUIRE(run(parallel).code == 0);
  CHECK(read_text_file(dir / "r1.json") == read_text_file(dir / "r2.json"));

  REQUIRE(run({"report", "--in", (dir / "r1.json").string(), "--out", (dir / "heat").string(), "--svg"}).code == 0);
  CHECK(fs::exists(dir / "heat" / "rbo.csv"));
  CHECK(fs::exists(dir / "heat" / "tau_ci_high.csv"));
  CHECK(fs::exists(dir / "heat" / "tau.svg"));
}
