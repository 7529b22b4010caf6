#include <doctest.h>

#include <algorithm>
#include <map>

#include "irmkit/error.hpp"
#include "irmkit/ranking.hpp"
#include "irmkit/rng.hpp"
#include "oracles.hpp"

using namespace irmkit;

namespace {

using Ids = std::vector<std::string>;

Ids letters(std::string s) {
  Ids out;
  for (char c : s) out.emplace_back(1, c);
  return out;
}

Ids random_list(Rng& rng, std::size_t universe, std::size_t n) {
  Ids all;
  for (std::size_t i = 0; i < universe; ++i) all.push_back("g" + std::to_string(i));
  rng.shuffle(std::span<std::string>(all));
  all.resize(n);
  return all;
}

}  // namespace

TEST_CASE("ranking orders by magnitude with id tie-break") {
  LinearModel m = LinearModel::zeros(4);
  m.theta << 0.5, -2.0, 0.5, 1.0;
  const Ids genes{"b", "x", "a", "c"};
  const auto r = rank_features(m, genes, "run");
  CHECK(r.ids() == Ids{"x", "c", "a", "b"});
  CHECK(r.entries[0].score == 2.0);
  CHECK(r.source == "run");
  CHECK_NOTHROW(validate(r));
  CHECK_THROWS_AS(rank_features(m, Ids{"a"}), ValidationError);
}

TEST_CASE("ranked list validation") {
  RankedFeatureList r;
  r.entries = {{"a", 2.0}, {"b", 1.0}};
  CHECK_NOTHROW(validate(r));
  r.entries = {{"a", 1.0}, {"b", 2.0}};
  CHECK_THROWS_AS(validate(r), ValidationError);
  r.entries = {{"a", 1.0}, {"a", 0.5}};
  CHECK_THROWS_AS(validate(r), ValidationError);
  r.entries = {{"a", -1.0}};
  CHECK_THROWS_AS(validate(r), ValidationError);
}

TEST_CASE("worked metric examples") {
  const auto a = letters("abcd");
  const auto b = letters("abdc");
  CHECK(top_k_overlap(a, b, 2) == 1.0);
  CHECK(top_k_overlap(letters("abcd"), letters("cdab"), 2) == 0.0);
  CHECK(top_k_overlap(letters("abcd"), letters("baef"), 3) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(rbo_ext(letters("ab"), letters("cd"), 0.5) == 0.0);
  CHECK(kendall_tau(a, b) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(kendall_tau(letters("abc"), letters("bac")) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(kendall_tau(letters("abc"), letters("cba")) == -1.0);
  // A_1 = 1, A_2 = 1/2, A_3 = 2/3 at p = 0.5.
  const double expected = 0.5 * (1.0 + 0.5 * 0.5 + 0.25 * (2.0 / 3.0)) + 0.125 * (2.0 / 3.0);
  CHECK(rbo_ext(letters("abc"), letters("acd"), 0.5) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(rbo_ext(letters("ab"), letters("ba"), 0.5) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(rbo_ext(letters("abc"), letters("acb"), 0.5) == doctest::Approx(0.875).epsilon(1e-12));
  CHECK(kendall_tau(letters("abc"), letters("acb")) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("identity and disjointness bounds") {
  Rng rng(1);
  for (int i = 0; i < 20; ++i) {
    const auto a = random_list(rng, 80, 60);
    CHECK(rbo_ext(a, a, 0.9) == 1.0);
    CHECK(kendall_tau(a, a) == 1.0);
    CHECK(top_k_overlap(a, a, 50) == 1.0);
  }
  CHECK(rbo_ext(letters("abc"), letters("xyz"), 0.9) == 0.0);
  CHECK(top_k_overlap(letters("abc"), letters("xyz"), 3) == 0.0);
}

TEST_CASE("metrics match brute-force oracles on random lists") {
  Rng rng(2);
  for (int i = 0; i < 300; ++i) {
    const std::size_t na = 2 + rng.below(40);
    const std::size_t nb = 2 + rng.below(40);
    const auto a = random_list(rng, 50, na);
    const auto b = random_list(rng, 50, nb);
    for (double p : {0.5, 0.9, 0.98}) {
      CHECK(std::abs(rbo_ext(a, b, p) - oracle::rbo_ext(a, b, p)) < 1e-12);
    }
    const std::size_t k = 1 + rng.below(std::min(na, nb));
    CHECK(top_k_overlap(a, b, k) == oracle::top_k(a, b, k));
    std::size_t shared = 0;
    for (const auto& x : a) shared += static_cast<std::size_t>(std::count(b.begin(), b.end(), x));
    if (shared >= 2) {
      CHECK(std::abs(kendall_tau(a, b) - oracle::kendall_tau(a, b)) < 1e-12);
    } else {
      CHECK_THROWS_AS(kendall_tau(a, b), ValidationError);
    }
  }
}

TEST_CASE("metrics are symmetric and invariant to relabeling") {
  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    const auto a = random_list(rng, 30, 20);
    const auto b = random_list(rng, 30, 20);
    CHECK(rbo_ext(a, b, 0.9) == doctest::Approx(rbo_ext(b, a, 0.9)).epsilon(1e-14));
    CHECK(kendall_tau(a, b) == doctest::Approx(kendall_tau(b, a)).epsilon(1e-14));
    std::map<std::string, std::string> rename;
    for (int j = 0; j < 30; ++j) rename["g" + std::to_string(j)] = "z" + std::to_string(29 - j) + "_";
    Ids ra, rb;
    for (const auto& x : a) ra.push_back(rename[x]);
    for (const auto& x : b) rb.push_back(rename[x]);
    CHECK(rbo_ext(ra, rb, 0.9) == rbo_ext(a, b, 0.9));
    CHECK(kendall_tau(ra, rb) == kendall_tau(a, b));
    CHECK(top_k_overlap(ra, rb, 10) == top_k_overlap(a, b, 10));
  }
}

TEST_CASE("metric argument errors") {
  const auto a = letters("abc");
  CHECK_THROWS_AS(top_k_overlap(a, a, 4), ValidationError);
  CHECK_THROWS_AS(top_k_overlap(a, a, 0), ValidationError);
  CHECK_THROWS_AS(rbo_ext(a, a, 1.0), ValidationError);
  CHECK_THROWS_AS(rbo_ext(a, a, 0.0), ValidationError);
  CHECK_THROWS_AS(rbo_ext(Ids{}, a, 0.9), ValidationError);
  CHECK_THROWS_AS(kendall_tau(letters("ab"), letters("bc")), ValidationError);
  for (auto m : kAllMetrics) CHECK(parse_metric(to_string(m)) == m);
  CHECK_THROWS_AS(parse_metric("jaccard"), ValidationError);
  CHECK(metric_floor(Metric::KendallTau) == -1.0);
  CHECK(metric_floor(Metric::RboExt) == 0.0);
}
