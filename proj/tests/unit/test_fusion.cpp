#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "../support/fixtures.hpp"
#include "../support/oracles.hpp"
#include "urbanfuse/binary_io.hpp"
#include "urbanfuse/fusion.hpp"

using namespace urbanfuse;
using fixture::error_kind;

namespace {

Eigen::MatrixXd random_matrix(Rng& rng, Eigen::Index r, Eigen::Index c, double scale = 1.0) {
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = scale * rng.normal();
  }
  return m;
}

std::vector<std::size_t> random_labels(Rng& rng, std::size_t n, std::size_t k) {
  std::vector<std::size_t> y(n);
  for (auto& v : y) v = rng.below(k);
  return y;
}

double batch_loss(const FusionModel& m, const Eigen::MatrixXd& x, std::span<const std::size_t> y) {
  const Eigen::MatrixXd scores = (x * m.weights.transpose()).rowwise() + m.bias.transpose();
  return cross_entropy_loss(scores, y);
}

// Two separable classes in 4-D: the class decides the sign of the first coordinate.
std::vector<TrainingSample> separable(Rng& rng, std::size_t n) {
  std::vector<TrainingSample> out;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t y = i % 2;
    Eigen::VectorXd x(4);
    x << (y == 0 ? 2.0 : -2.0) + 0.3 * rng.normal(), rng.normal(), rng.normal(), rng.normal();
    out.push_back({x, y});
  }
  return out;
}

}  // namespace

TEST_SUITE("fusion") {

TEST_CASE("zero weights give loss ln K") {
  for (std::size_t k : {2u, 5u, 16u}) {
    const auto m = make_model(FusionMode::multimodal, k, 3, 2);
    Rng rng(k);
    const auto x = random_matrix(rng, 7, 5);
    const auto y = random_labels(rng, 7, k);
    CHECK(std::abs(batch_loss(m, x, y) - std::log(static_cast<double>(k))) <= 1e-12);
  }
  const auto m = make_model(FusionMode::overhead_only, 16, 0, 4);
  const Eigen::MatrixXd x = Eigen::MatrixXd::Ones(1, 4);
  const std::size_t y[] = {3};
  CHECK(batch_loss(m, x, y) == doctest::Approx(2.7725887).epsilon(1e-7));
}

TEST_CASE("cross-entropy matches the naive formula") {
  Rng rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t k = 2 + rng.below(10), n = 1 + rng.below(6);
    const auto scores = random_matrix(rng, static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k), 3.0);
    const auto y = random_labels(rng, n, k);
    double want = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      want += oracle::naive_cross_entropy(oracle::from_eigen(Eigen::VectorXd(scores.row(i).transpose())), y[i]);
    }
    want /= static_cast<double>(n);
    CHECK(std::abs(cross_entropy_loss(scores, y) - want) <= 1e-6);
  }
}

TEST_CASE("loss stays finite for huge scores") {
  Eigen::MatrixXd s(1, 3);
  s << 1000.0, -1000.0, 999.0;
  const std::size_t y[] = {1};
  const double loss = cross_entropy_loss(s, y);
  CHECK(std::isfinite(loss));
  CHECK(loss == doctest::Approx(2000.0 + std::log1p(std::exp(-1.0))).epsilon(1e-12));
}

TEST_CASE("softmax is normalized and shift invariant") {
  Rng rng(32);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::VectorXd s = random_matrix(rng, 6, 1, 5.0).col(0);
    const Eigen::VectorXd p = softmax(s);
    CHECK(p.sum() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK((p.array() >= 0.0).all());
    const Eigen::VectorXd q = softmax((s.array() + 123.25).matrix());
    CHECK((p - q).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("forward matches the two-loop affine map") {
  const auto m = init_model(FusionMode::multimodal, 4, 3, 5, 9);
  Rng rng(33);
  const Eigen::VectorXd x = random_matrix(rng, 8, 1).col(0);
  const auto got = forward(m, x);
  const auto want = oracle::affine(oracle::from_eigen(m.weights), oracle::from_eigen(x), oracle::from_eigen(m.bias));
  for (int i = 0; i < 4; ++i) CHECK(got(i) == doctest::Approx(want[i]).epsilon(1e-13));
}

TEST_CASE("analytic gradient matches central differences") {
  Rng rng(34);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t k = 2 + rng.below(5), d = 1 + rng.below(6), n = 1 + rng.below(5);
    auto m = make_model(FusionMode::overhead_only, k, 0, d);
    m.weights = random_matrix(rng, static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(d));
    m.bias = random_matrix(rng, static_cast<Eigen::Index>(k), 1).col(0);
    const auto x = random_matrix(rng, static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    const auto y = random_labels(rng, n, k);
    const auto g = loss_gradient(m, x, y);
    CHECK(g.loss == doctest::Approx(batch_loss(m, x, y)).epsilon(1e-12));
    const double h = 1e-6;
    for (Eigen::Index r = 0; r < m.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.weights.cols(); ++c) {
        auto p = m, q = m;
        p.weights(r, c) += h;
        q.weights(r, c) -= h;
        const double fd = (batch_loss(p, x, y) - batch_loss(q, x, y)) / (2 * h);
        REQUIRE(std::abs(fd - g.weights(r, c)) <= 1e-4 * std::max(1.0, std::abs(fd)));
      }
      auto p = m, q = m;
      p.bias(r) += h;
      q.bias(r) -= h;
      const double fd = (batch_loss(p, x, y) - batch_loss(q, x, y)) / (2 * h);
      REQUIRE(std::abs(fd - g.bias(r)) <= 1e-4 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST_CASE("prediction ties go to the lowest class") {
  Eigen::VectorXd s(4);
  s << 1.0, 3.0, 3.0, 0.0;
  CHECK(predict_scores(s).label == 1);
  const auto m = make_model(FusionMode::overhead_only, 3, 0, 2);
  const FeatureVector oh{{1.0f, 2.0f}};
  const auto p = predict(m, &oh, nullptr);
  CHECK(p.label == 0);
  CHECK(p.probabilities(2) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("input assembly is [ground | overhead]") {
  const auto m = make_model(FusionMode::multimodal, 2, 2, 3);
  const FeatureVector oh{{7.0f, 8.0f, 9.0f}};
  const AggregatedFeature g{{1.0, 2.0}, Pooling::avg};
  const Eigen::VectorXd x = assemble_input(m, &oh, &g);
  CHECK(x.size() == 5);
  CHECK(x(0) == 1.0);
  CHECK(x(2) == 7.0);
  CHECK(error_kind([&] { assemble_input(m, &oh, nullptr); }) == ErrorKind::data);
  CHECK(error_kind([&] { assemble_input(m, nullptr, &g); }) == ErrorKind::data);
  const AggregatedFeature wrong{{1.0}, Pooling::avg};
  CHECK(error_kind([&] { assemble_input(m, &oh, &wrong); }) == ErrorKind::dimension);

  const auto ground_only = make_model(FusionMode::ground_only, 2, 2, 3);
  CHECK(assemble_input(ground_only, nullptr, &g).size() == 2);
  CHECK(error_kind([] { make_model(FusionMode::ground_only, 2, 0, 3); }) == ErrorKind::dimension);
  CHECK(error_kind([] { make_model(FusionMode::multimodal, 1, 2, 3); }) == ErrorKind::invalid_argument);
}

TEST_CASE("mode names") {
  CHECK(parse_mode("multimodal") == FusionMode::multimodal);
  CHECK(parse_mode("overhead") == FusionMode::overhead_only);
  CHECK(parse_mode("ground") == FusionMode::ground_only);
  CHECK(error_kind([] { parse_mode("both"); }) == ErrorKind::invalid_argument);
  CHECK(std::string(to_string(FusionMode::ground_only)) == "ground");
}

TEST_CASE("initialization bounds and determinism") {
  const auto a = init_model(FusionMode::multimodal, 16, 40, 60, 5);
  const auto b = init_model(FusionMode::multimodal, 16, 40, 60, 5);
  const auto c = init_model(FusionMode::multimodal, 16, 40, 60, 6);
  CHECK(a.weights == b.weights);
  CHECK(a.weights != c.weights);
  CHECK(a.bias.isZero());
  CHECK(a.weights.cwiseAbs().maxCoeff() <= 1.0 / std::sqrt(100.0));
  CHECK(a.weights.cwiseAbs().maxCoeff() > 0.09);
}

TEST_CASE("learning-rate schedule") {
  TrainConfig cfg;
  CHECK(learning_rate(cfg, 0) == 0.001);
  CHECK(learning_rate(cfg, 9) == 0.001);
  CHECK(learning_rate(cfg, 10) == doctest::Approx(1e-4).epsilon(1e-15));
  CHECK(learning_rate(cfg, 25) == doctest::Approx(1e-5).epsilon(1e-15));
  CHECK(cfg.epochs == 50);
  CHECK(cfg.batch_size == 4);
  CHECK(cfg.momentum == 0.9);
}

TEST_CASE("zero epochs leave the model unchanged") {
  Rng rng(35);
  const auto samples = separable(rng, 10);
  const auto m = init_model(FusionMode::overhead_only, 2, 0, 4, 1);
  TrainConfig cfg;
  cfg.epochs = 0;
  const auto r = train(m, samples, cfg);
  CHECK(r.model.weights == m.weights);
  CHECK(r.loss_trace.empty());
}

TEST_CASE("one full-batch step without momentum is plain gradient descent") {
  Rng rng(36);
  const auto samples = separable(rng, 6);
  const auto m = init_model(FusionMode::overhead_only, 2, 0, 4, 2);
  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.batch_size = 6;
  cfg.momentum = 0.0;
  cfg.lr0 = 0.5;
  Eigen::MatrixXd x(6, 4);
  std::vector<std::size_t> y;
  for (int i = 0; i < 6; ++i) {
    x.row(i) = samples[i].input.transpose();
    y.push_back(samples[i].label);
  }
  const auto g = loss_gradient(m, x, y);
  const auto r = train(m, samples, cfg);
  CHECK((r.model.weights - (m.weights - 0.5 * g.weights)).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(r.loss_trace.at(0) == doctest::Approx(g.loss).epsilon(1e-12));
}

TEST_CASE("the last partial batch takes a step") {
  // Five identical samples with batch 4: two updates happen, the second on one sample.
  Eigen::VectorXd x(3);
  x << 1.0, -2.0, 0.5;
  const std::vector<TrainingSample> samples(5, TrainingSample{x, 1});
  auto m = make_model(FusionMode::overhead_only, 3, 0, 3);
  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.lr0 = 0.1;
  cfg.momentum = 0.5;
  const auto r = train(m, samples, cfg);

  Eigen::MatrixXd one(1, 3);
  one.row(0) = x.transpose();
  const std::size_t y[] = {1};
  auto expect = m;
  const auto g1 = loss_gradient(expect, one, y);
  Eigen::MatrixXd v = -0.1 * g1.weights;
  Eigen::VectorXd vb = -0.1 * g1.bias;
  expect.weights += v;
  expect.bias += vb;
  const auto g2 = loss_gradient(expect, one, y);
  v = 0.5 * v - 0.1 * g2.weights;
  vb = 0.5 * vb - 0.1 * g2.bias;
  expect.weights += v;
  expect.bias += vb;
  CHECK((r.model.weights - expect.weights).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((r.model.bias - expect.bias).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("training separable data reaches full accuracy and is reproducible") {
  Rng rng(37);
  const auto samples = separable(rng, 40);
  const auto m = init_model(FusionMode::overhead_only, 2, 0, 4, 3);
  TrainConfig cfg;
  cfg.seed = 3;
  const auto r = train(m, samples, cfg);
  REQUIRE(r.loss_trace.size() == 50);
  CHECK(r.loss_trace.back() < r.loss_trace.front());
  std::size_t correct = 0;
  for (const auto& s : samples) correct += predict_scores(forward(r.model, s.input)).label == s.label;
  CHECK(correct == samples.size());
  const auto again = train(m, samples, cfg);
  CHECK(again.model.weights == r.model.weights);
  CHECK(again.loss_trace == r.loss_trace);
}

TEST_CASE("training rejects bad input") {
  Rng rng(38);
  const auto samples = separable(rng, 4);
  auto m = make_model(FusionMode::overhead_only, 2, 0, 4);
  TrainConfig cfg;
  cfg.batch_size = 0;
  CHECK(error_kind([&] { train(m, samples, cfg); }) == ErrorKind::invalid_argument);
  cfg = {};
  CHECK(error_kind([&] { train(m, std::span<const TrainingSample>{}, cfg); }) == ErrorKind::data);
  auto wrong = make_model(FusionMode::overhead_only, 2, 0, 5);
  CHECK(error_kind([&] { train(wrong, samples, cfg); }) == ErrorKind::dimension);
  auto poisoned = samples;
  poisoned[1].input(0) = std::numeric_limits<double>::quiet_NaN();
  CHECK(error_kind([&] { train(m, poisoned, cfg); }) == ErrorKind::numeric);
}

TEST_CASE("dataset training skips objects without the needed modality") {
  fixture::TempDir dir;
  const auto m = load_manifest(fixture::write_tiny_dataset(
      dir.path(), {"a", "b"},
      {{"a0", "a", 2}, {"a1", "a", 0}, {"a2", "a", 1}, {"b0", "b", 0}, {"b1", "b", 3}, {"b2", "b", 1}},
      3, 2));
  const std::vector<std::size_t> all{0, 1, 2, 3, 4, 5};
  const auto mm = make_model(FusionMode::multimodal, 2, 3, 2);
  const auto oh = make_model(FusionMode::overhead_only, 2, 3, 2);
  CHECK(make_samples(mm, m, all, Pooling::avg).size() == 4);
  CHECK(make_samples(oh, m, all, Pooling::avg).size() == 6);

  SplitAssignment split;
  for (const auto& r : m.records) split.object_ids.push_back(r.object_id);
  split.subsets = {Subset::test, Subset::train, Subset::test, Subset::train, Subset::test, Subset::test};
  CHECK(error_kind([&] { train(mm, m, split, TrainConfig{}, Pooling::avg); }) == ErrorKind::data);
  CHECK(train(oh, m, split, TrainConfig{}, Pooling::avg).loss_trace.size() == 50);
}

TEST_CASE("checkpoint round trip is bit exact") {
  fixture::TempDir dir;
  auto m = init_model(FusionMode::ground_only, 5, 7, 3, 11);
  m.bias(2) = -0.125;
  save_checkpoint(m, dir / "m.mmck");
  const auto back = load_checkpoint(dir / "m.mmck");
  CHECK(back.mode == m.mode);
  CHECK(back.num_classes == 5);
  CHECK(back.d_gsv == 7);
  CHECK(back.d_oh == 3);
  CHECK(back.weights == m.weights);
  CHECK(back.bias == m.bias);

  CHECK(error_kind([&] { load_checkpoint(dir / "none.mmck"); }) == ErrorKind::io);
  std::vector<NamedArray> other{{"x", {1}, {1.0}}};
  write_container(dir / "other.mmck", other);
  CHECK(error_kind([&] { load_checkpoint(dir / "other.mmck"); }) == ErrorKind::format);
}

}
