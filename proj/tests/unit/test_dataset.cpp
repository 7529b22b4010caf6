#include <doctest.h>

#include <cmath>
#include <limits>

#include "irmkit/dataset.hpp"
#include "irmkit/error.hpp"

using namespace irmkit;

namespace {

Environment env(std::string id, Matrix x, Vector y) {
  Environment e;
  e.id = std::move(id);
  e.features = std::move(x);
  e.labels = std::move(y);
  return e;
}

MultiEnvDataset two_envs() {
  MultiEnvDataset d;
  Matrix a(2, 2);
  a << 1, 2, 3, 4;
  Matrix b(3, 2);
  b << 5, 6, 7, 8, 9, 10;
  d.environments.push_back(env("a", a, Vector::Map(std::vector<double>{0, 1}.data(), 2)));
  d.environments.push_back(env("b", b, Vector::Map(std::vector<double>{1, 1, 0}.data(), 3)));
  d.gene_ids = {"g1", "g2"};
  return d;
}

}  // namespace

TEST_CASE("organism names round-trip") {
  for (auto o : {Organism::Human, Organism::Mouse, Organism::Synthetic}) CHECK(parse_organism(to_string(o)) == o);
  CHECK_THROWS_AS(parse_organism("rat"), ValidationError);
}

TEST_CASE("validate catches malformed environments") {
  auto d = two_envs();
  CHECK_NOTHROW(validate(d, 2, true));
  CHECK_THROWS_AS(validate(d, 3), ValidationError);

  auto bad = d;
  bad.environments[0].labels[0] = 0.5;
  CHECK_NOTHROW(validate(bad));
  CHECK_THROWS_AS(validate(bad, 1, true), ValidationError);

  bad = d;
  bad.environments[1].features(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(validate(bad), ValidationError);

  bad = d;
  bad.gene_ids = {"g1", "g1"};
  CHECK_THROWS_AS(validate(bad), ValidationError);

  bad = d;
  bad.environments[1].features = Matrix::Zero(3, 3);
  CHECK_THROWS_AS(validate(bad), ValidationError);

  bad = d;
  bad.environments[0].labels = Vector::Zero(3);
  CHECK_THROWS_AS(validate(bad), ValidationError);
}

TEST_CASE("row and feature selection") {
  const auto d = two_envs();
  const auto e = select_rows(d.environments[1], {2, 0});
  CHECK(e.features(0, 0) == 9);
  CHECK(e.features(1, 1) == 6);
  CHECK(e.labels[0] == 0);
  CHECK(d.total_samples() == 5);

  const auto s = select_features(d, {1});
  CHECK(s.gene_ids == std::vector<std::string>{"g2"});
  CHECK(s.environments[1].features(2, 0) == 10);
}

TEST_CASE("content hash is stable and sensitive") {
  const auto d = two_envs();
  const auto h = content_hash(d);
  CHECK(h.size() == 16);
  CHECK(h == content_hash(two_envs()));
  auto e = d;
  e.environments[0].features(0, 0) = std::nextafter(1.0, 2.0);
  CHECK(content_hash(e) != h);
  e = d;
  e.gene_ids[0] = "g0";
  CHECK(content_hash(e) != h);
}
