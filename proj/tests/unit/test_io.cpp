#include <doctest.h>

#include <filesystem>

#include "irmkit/error.hpp"
#include "irmkit/io.hpp"
#include "irmkit/scm.hpp"

using namespace irmkit;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("irmkit_test_io_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("datasets round-trip bit-exactly") {
  ScmSpec spec;
  spec.n_samples_per_env = 50;
  auto data = generate_scm_dataset(spec, 4);
  data.provenance.steps = {"synth"};
  data.provenance.counters["x"] = 7;
  data.environments[0].organism = Organism::Human;
  const auto dir = scratch("dataset");
  write_dataset(data, dir);
  CHECK(fs::exists(dir / "dataset.json"));
  CHECK(fs::exists(dir / "env_000.csv"));
  const auto back = read_dataset(dir);
  CHECK(content_hash(back) == content_hash(data));
  CHECK(back.environments[0].organism == Organism::Human);
  CHECK(back.environments[1].id == "sigma=1");
  CHECK(back.provenance.steps == data.provenance.steps);
  CHECK(back.provenance.counters.at("x") == 7);
  CHECK_THROWS_AS(read_dataset(scratch("missing")), IoError);

  write_text_file(dir / "dataset.json", "{\"format\": \"irmkit.dataset\"}");
  CHECK_THROWS_AS(read_dataset(dir), ValidationError);
  write_text_file(dir / "dataset.json", "{not json");
  CHECK_THROWS_AS(read_dataset(dir), ValidationError);
}

TEST_CASE("train config JSON") {
  TrainConfig c;
  c.loss_kind = LossKind::Squared;
  c.lambda_final = 250.5;
  c.seed = 12345678901234ULL;
  c.w0 = -2.0;
  const auto back = train_config_from_json(to_json(c));
  CHECK(back.loss_kind == LossKind::Squared);
  CHECK(back.lambda_final == 250.5);
  CHECK(back.seed == 12345678901234ULL);
  CHECK(back.w0 == -2.0);
  CHECK(train_config_from_json("{\"lambda\": 3}").total_iters == TrainConfig{}.total_iters);
  CHECK_THROWS_AS(train_config_from_json("{\"lamda\": 3}"), ValidationError);
  CHECK_THROWS_AS(train_config_from_json("{\"lambda\": \"big\"}"), ValidationError);
  CHECK_THROWS_AS(train_config_from_json("{\"lambda\": -1}"), ValidationError);
  CHECK_THROWS_AS(train_config_from_json("[]"), ValidationError);
}

TEST_CASE("SCM spec JSON") {
  ScmSpec s;
  s.task = ScmTask::Classification;
  s.env_scales = {0.2, 0.5, 3.0};
  s.causal_weights = {2.0};
  const auto back = scm_spec_from_json(to_json(s));
  CHECK(back.task == ScmTask::Classification);
  CHECK(back.env_scales == s.env_scales);
  CHECK(back.causal_weights == s.causal_weights);
  CHECK_THROWS_AS(scm_spec_from_json("{\"env_scales\": []}"), ValidationError);
  CHECK_THROWS_AS(scm_spec_from_json("{\"scales\": [1, 2]}"), ValidationError);
}

TEST_CASE("model and ranking JSON") {
  ModelFile m;
  m.trained.model = LinearModel::zeros(2);
  m.trained.model.theta << 0.1, -3.0;
  m.trained.model.bias = 0.25;
  m.trained.config.total_iters = 20;
  m.trained.config.anneal_iters = 5;
  for (int i = 0; i < 20; ++i) m.trained.trace.push_back({i, 1.0 / (i + 1), 0.0});
  m.gene_ids = {"a", "b"};
  const auto back = model_from_json(to_json(m, 5));
  CHECK(back.trained.model.theta == m.trained.model.theta);
  CHECK(back.trained.model.bias == 0.25);
  CHECK(back.gene_ids == m.gene_ids);
  CHECK(back.trained.config.total_iters == 20);
  REQUIRE(back.trained.trace.size() == 5);
  CHECK(back.trained.trace.front().iteration == 15);

  const auto list = rank_features(m.trained.model, m.gene_ids, "m");
  const auto rl = ranking_from_json(to_json(list));
  CHECK(rl.ids() == std::vector<std::string>{"b", "a"});
  CHECK(rl.source == "m");
  CHECK_THROWS_AS(ranking_from_json("{\"source\": \"x\", \"entries\": [[\"a\", 1], [\"b\", 2]]}"), ValidationError);
  CHECK_THROWS_AS(model_from_json("{\"gene_ids\": [\"a\"], \"theta\": [1, 2], \"bias\": 0, \"w0\": 1}"),
                  ValidationError);
}
