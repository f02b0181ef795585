#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "../support/fixtures.hpp"
#include "../support/oracles.hpp"
#include "urbanfuse/aggregation.hpp"

using namespace urbanfuse;
using fixture::error_kind;

namespace {

std::vector<FeatureVector> random_set(Rng& rng, std::size_t n, std::size_t d) {
  std::vector<FeatureVector> set;
  for (std::size_t i = 0; i < n; ++i) set.push_back(fixture::random_feature(rng, d));
  return set;
}

std::vector<std::vector<float>> raw(const std::vector<FeatureVector>& set) {
  std::vector<std::vector<float>> out;
  for (const auto& f : set) out.push_back(f.values);
  return out;
}

}  // namespace

TEST_SUITE("aggregation") {

TEST_CASE("hand-computed pooling") {
  const std::vector<FeatureVector> set{{{0.0f, 2.0f}}, {{2.0f, 0.0f}}};
  CHECK(aggregate(set).values == std::vector<double>{1.0, 1.0});
  CHECK(aggregate(set, Pooling::max).values == std::vector<double>{2.0, 2.0});
  const std::vector<FeatureVector> one{{{-3.0f, 0.5f}}};
  CHECK(aggregate(one).values == std::vector<double>{-3.0, 0.5});
  CHECK(aggregate(one, Pooling::max).values == std::vector<double>{-3.0, 0.5});
}

TEST_CASE("agrees with the two-loop oracle") {
  Rng rng(21);
  for (int trial = 0; trial < 300; ++trial) {
    const auto set = random_set(rng, 1 + rng.below(12), 1 + rng.below(40));
    for (bool use_max : {false, true}) {
      const auto got = aggregate(set, use_max ? Pooling::max : Pooling::avg).values;
      const auto want = oracle::aggregate_two_loop(raw(set), use_max);
      for (std::size_t j = 0; j < got.size(); ++j) REQUIRE(std::abs(got[j] - want[j]) <= 1e-6);
    }
  }
}

TEST_CASE("permutation invariance") {
  Rng rng(22);
  for (int trial = 0; trial < 100; ++trial) {
    auto set = random_set(rng, 2 + rng.below(8), 16);
    const auto avg = aggregate(set).values;
    const auto mx = aggregate(set, Pooling::max).values;
    rng.shuffle(std::span(set));
    const auto avg2 = aggregate(set).values;
    const auto mx2 = aggregate(set, Pooling::max).values;
    for (std::size_t j = 0; j < avg.size(); ++j) {
      CHECK(std::abs(avg[j] - avg2[j]) <= 1e-5);
      CHECK(mx[j] == mx2[j]);
    }
  }
}

TEST_CASE("max dominates mean") {
  Rng rng(23);
  const auto set = random_set(rng, 5, 10);
  const auto avg = aggregate(set).values;
  const auto mx = aggregate(set, Pooling::max).values;
  for (std::size_t j = 0; j < avg.size(); ++j) CHECK(mx[j] >= avg[j]);
}

TEST_CASE("errors") {
  CHECK(error_kind([] { aggregate({}); }) == ErrorKind::data);
  const std::vector<FeatureVector> ragged{{{1.0f}}, {{1.0f, 2.0f}}};
  CHECK(error_kind([&] { aggregate(ragged); }) == ErrorKind::dimension);
  CHECK(parse_pooling("avg") == Pooling::avg);
  CHECK(parse_pooling("max") == Pooling::max);
  CHECK(error_kind([] { parse_pooling("sum"); }) == ErrorKind::invalid_argument);
  CHECK(std::string(to_string(Pooling::max)) == "max");
}

}
