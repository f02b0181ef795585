#include <doctest.h>

#include <cmath>

#include "../support/fixtures.hpp"
#include "../support/oracles.hpp"
#include "urbanfuse/retrieval.hpp"

using namespace urbanfuse;
using fixture::error_kind;

namespace {

Eigen::MatrixXd gaussian(Rng& rng, Eigen::Index r, Eigen::Index c) {
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = rng.normal();
  }
  return m;
}

struct World {
  Eigen::MatrixXd ground, overhead;
  std::vector<std::size_t> labels;
  std::vector<std::string> ids;
  EmbeddingModel embedding;
  RetrievalIndex index;
};

// Classes share a latent center across both views, so retrieval is informative.
World make_world(std::uint64_t seed, std::size_t k = 4, std::size_t per_class = 20, double power = 2.0) {
  Rng rng(seed);
  const Eigen::Index d1 = 12, d2 = 10;
  const Eigen::MatrixXd centers = 2.0 * gaussian(rng, static_cast<Eigen::Index>(k), 4);
  const Eigen::MatrixXd a1 = gaussian(rng, 4, d1), a2 = gaussian(rng, 4, d2);
  const auto n = static_cast<Eigen::Index>(k * per_class);
  World w{Eigen::MatrixXd(n, d1), Eigen::MatrixXd(n, d2), {}, {}, {}, {}};
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::size_t y = static_cast<std::size_t>(i) % k;
    const Eigen::RowVectorXd z = centers.row(static_cast<Eigen::Index>(y)) + 0.4 * gaussian(rng, 1, 4);
    w.ground.row(i) = z * a1 + 0.3 * gaussian(rng, 1, d1);
    w.overhead.row(i) = z * a2 + 0.3 * gaussian(rng, 1, d2);
    w.labels.push_back(y);
    w.ids.push_back("o" + std::to_string(i));
  }
  CcaParams p;
  p.pca_fraction = 0.5;
  p.embedding_fraction = 0.3;
  p.power = power;
  w.embedding = fit_embedding(w.ground, w.overhead, w.labels, k, p);
  w.index = build_index(w.embedding, w.ground, w.ids, w.labels, power);
  return w;
}

FeatureVector to_feature(const Eigen::VectorXd& v) {
  FeatureVector f;
  for (Eigen::Index i = 0; i < v.size(); ++i) f.values.push_back(static_cast<float>(v(i)));
  return f;
}

RetrievalIndex hand_index(const Eigen::MatrixXd& rows) {
  RetrievalIndex index;
  index.rows = rows;
  index.norms = rows.rowwise().norm();
  index.scaling = Eigen::VectorXd::Ones(rows.cols());
  index.ground_features = Eigen::MatrixXd::Zero(rows.rows(), 1);
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    index.object_ids.push_back("r" + std::to_string(i));
    index.labels.push_back(static_cast<std::size_t>(i));
  }
  return index;
}

}  // namespace

TEST_SUITE("retrieval") {

TEST_CASE("index rows are ground projections scaled by eigenvalue powers") {
  const auto w = make_world(61);
  const Eigen::MatrixXd expect = project(w.embedding, View::ground, w.ground);
  for (Eigen::Index j = 0; j < expect.cols(); ++j) {
    const double d = std::pow(w.embedding.eigenvalues(j), 2.0);
    CHECK(w.index.scaling(j) == doctest::Approx(d).epsilon(1e-14));
    CHECK((w.index.rows.col(j) - d * expect.col(j)).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + d));
  }
  const auto flat = build_index(w.embedding, w.ground, w.ids, w.labels, 0.0);
  CHECK(flat.scaling.isOnes());
}

TEST_CASE("ranking matches the double-loop oracle") {
  const auto w = make_world(62);
  const auto rows = oracle::from_eigen(w.index.rows);
  Rng rng(63);
  for (int trial = 0; trial < 30; ++trial) {
    const Eigen::VectorXd q = gaussian(rng, w.index.rows.cols(), 1).col(0);
    const auto got = query_scaled(w.index, q, 10);
    const auto want = oracle::knn_double_loop(rows, oracle::from_eigen(q), 10);
    REQUIRE(got.neighbors.size() == 10);
    for (std::size_t i = 0; i < 10; ++i) {
      CHECK(got.neighbors[i].row == want[i].row);
      CHECK(std::abs(got.neighbors[i].similarity - want[i].similarity) <= 1e-12);
      CHECK(got.neighbors[i].object_id == w.ids[want[i].row]);
    }
  }
}

TEST_CASE("overhead query equals the projected scaled query") {
  const auto w = make_world(64);
  const Eigen::VectorXd raw = w.overhead.row(5).transpose();
  const auto f = to_feature(raw);
  Eigen::MatrixXd one(1, raw.size());
  for (Eigen::Index j = 0; j < raw.size(); ++j) one(0, j) = f.values[static_cast<std::size_t>(j)];
  const Eigen::VectorXd q = scaled_overhead_projection(w.index, w.embedding, one).row(0).transpose();
  const auto a = query(w.index, w.embedding, f, 5);
  const auto b = query_scaled(w.index, q, 5);
  for (std::size_t i = 0; i < 5; ++i) CHECK(a.neighbors[i].row == b.neighbors[i].row);
}

TEST_CASE("ties go to the lowest row") {
  Eigen::MatrixXd rows(4, 2);
  rows << 0, 1, 2, 0, 1, 0, 0, 3;
  const auto index = hand_index(rows);
  Eigen::VectorXd q(2);
  q << 1, 0;
  const auto r = query_scaled(index, q, 4);
  CHECK(r.neighbors[0].row == 1);
  CHECK(r.neighbors[1].row == 2);
  CHECK(r.neighbors[2].row == 0);
  CHECK(r.neighbors[3].row == 3);
}

TEST_CASE("zero-norm query scores every row zero") {
  Eigen::MatrixXd rows(3, 2);
  rows << 1, 0, 0, 1, 1, 1;
  const auto index = hand_index(rows);
  const auto r = query_scaled(index, Eigen::VectorXd::Zero(2), 3);
  CHECK(r.zero_norm_query);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(r.neighbors[i].row == i);
    CHECK(r.neighbors[i].similarity == 0.0);
  }
}

TEST_CASE("zero-norm index rows never outrank positive matches") {
  Eigen::MatrixXd rows(3, 2);
  rows << 0, 0, -1, 0, 1, 0.1;
  const auto index = hand_index(rows);
  Eigen::VectorXd q(2);
  q << 1, 0;
  const auto r = query_scaled(index, q, 3);
  CHECK(r.neighbors[0].row == 2);
  CHECK(r.neighbors[1].row == 0);
  CHECK(r.neighbors[1].similarity == 0.0);
  CHECK(r.neighbors[2].similarity == doctest::Approx(-1.0));
}

TEST_CASE("ranking ignores query scale") {
  const auto w = make_world(65);
  Rng rng(66);
  const Eigen::VectorXd q = gaussian(rng, w.index.rows.cols(), 1).col(0);
  const auto a = query_scaled(w.index, q, 8);
  const auto b = query_scaled(w.index, 1e6 * q, 8);
  for (std::size_t i = 0; i < 8; ++i) {
    CHECK(a.neighbors[i].row == b.neighbors[i].row);
    CHECK(a.neighbors[i].similarity == doctest::Approx(b.neighbors[i].similarity).epsilon(1e-12));
  }
}

TEST_CASE("k larger than the index returns every row") {
  Eigen::MatrixXd rows(2, 2);
  rows << 1, 0, 0, 1;
  const auto index = hand_index(rows);
  CHECK(query_scaled(index, Eigen::VectorXd::Ones(2), 10).neighbors.size() == 2);
  CHECK(error_kind([&] { query_scaled(index, Eigen::VectorXd::Ones(2), 0); }) == ErrorKind::invalid_argument);
  CHECK(error_kind([&] { query_scaled(index, Eigen::VectorXd::Ones(3), 1); }) == ErrorKind::dimension);
}

TEST_CASE("missing-modality prediction substitutes neighbor ground features") {
  const auto w = make_world(67);
  const auto fusion = init_model(FusionMode::multimodal, 4, 12, 10, 3);
  const auto f = to_feature(w.overhead.row(7).transpose());
  for (std::size_t k : {1u, 3u}) {
    const auto got = predict_missing(fusion, w.embedding, w.index, f, k);
    const auto hits = query(w.index, w.embedding, f, k);
    REQUIRE(got.retrieved.size() == k);
    AggregatedFeature mean{std::vector<double>(12, 0.0), Pooling::avg};
    for (std::size_t i = 0; i < k; ++i) {
      CHECK(got.retrieved[i] == hits.neighbors[i].object_id);
      for (Eigen::Index j = 0; j < 12; ++j) {
        mean.values[static_cast<std::size_t>(j)] += w.ground(static_cast<Eigen::Index>(hits.neighbors[i].row), j);
      }
    }
    for (auto& v : mean.values) v /= static_cast<double>(k);
    const auto want = predict(fusion, &f, &mean);
    CHECK(got.prediction.label == want.label);
    CHECK((got.prediction.probabilities - want.probabilities).cwiseAbs().maxCoeff() <= 1e-12);
  }
  const auto overhead_model = init_model(FusionMode::overhead_only, 4, 12, 10, 3);
  CHECK(error_kind([&] { predict_missing(overhead_model, w.embedding, w.index, f); }) ==
        ErrorKind::invalid_argument);
  const auto wrong_dim = init_model(FusionMode::multimodal, 4, 11, 10, 3);
  CHECK(error_kind([&] { predict_missing(wrong_dim, w.embedding, w.index, f); }) == ErrorKind::dimension);
}

TEST_CASE("coherence curve is monotone and matches a manual count") {
  const auto w = make_world(68);
  const auto curve = label_coherence_curve(w.index, w.embedding, w.overhead, w.labels, 10);
  REQUIRE(curve.hit_rate.size() == 10);
  for (std::size_t k = 1; k < 10; ++k) {
    CHECK(curve.hit_rate[k] >= curve.hit_rate[k - 1]);
    CHECK(curve.mean_correct[k] >= curve.mean_correct[k - 1]);
  }
  std::size_t top1 = 0, correct5 = 0;
  for (Eigen::Index q = 0; q < w.overhead.rows(); ++q) {
    const auto r = query(w.index, w.embedding, to_feature(w.overhead.row(q).transpose()), 5);
    top1 += r.neighbors[0].label == w.labels[static_cast<std::size_t>(q)];
    for (const auto& nb : r.neighbors) correct5 += nb.label == w.labels[static_cast<std::size_t>(q)];
  }
  const double n = static_cast<double>(w.labels.size());
  CHECK(curve.hit_rate[0] == doctest::Approx(top1 / n));
  CHECK(curve.mean_correct[0] == doctest::Approx(top1 / n));
  CHECK(curve.mean_correct[4] == doctest::Approx(correct5 / n));
  CHECK(curve.hit_rate[0] > 0.5);

  CHECK(label_coherence_curve(w.index, w.embedding, w.overhead, w.labels, 1000).hit_rate.size() ==
        w.index.size());
  CHECK(error_kind([&] {
    label_coherence_curve(w.index, w.embedding, w.overhead.topRows(3), w.labels, 5);
  }) == ErrorKind::dimension);
}

TEST_CASE("index construction errors") {
  const auto w = make_world(69);
  CHECK(error_kind([&] { build_index(w.embedding, w.ground, {"a"}, w.labels, 1.0); }) == ErrorKind::dimension);
  CHECK(error_kind([&] { build_index(w.embedding, w.ground, w.ids, w.labels, -1.0); }) ==
        ErrorKind::invalid_argument);
  CHECK(error_kind([&] { build_index(EmbeddingModel{}, w.ground, w.ids, w.labels, 1.0); }) == ErrorKind::state);
}

}
