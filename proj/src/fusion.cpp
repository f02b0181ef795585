#include "urbanfuse/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "array_codec.hpp"
#include "urbanfuse/binary_io.hpp"
#include "urbanfuse/error.hpp"
#include "urbanfuse/rng.hpp"

namespace urbanfuse {

const char* to_string(FusionMode mode) {
  switch (mode) {
    case FusionMode::overhead_only: return "overhead";
    case FusionMode::ground_only: return "ground";
    case FusionMode::multimodal: return "multimodal";
  }
  return "?";
}

FusionMode parse_mode(std::string_view text) {
  if (text == "overhead") return FusionMode::overhead_only;
  if (text == "ground") return FusionMode::ground_only;
  if (text == "multimodal") return FusionMode::multimodal;
  throw Error(ErrorKind::invalid_argument,
              "unknown mode '" + std::string(text) + "' (overhead|ground|multimodal)");
}

bool needs_ground(FusionMode mode) { return mode != FusionMode::overhead_only; }
bool needs_overhead(FusionMode mode) { return mode != FusionMode::ground_only; }

std::size_t FusionModel::input_dim() const {
  return (needs_ground(mode) ? d_gsv : 0) + (needs_overhead(mode) ? d_oh : 0);
}

FusionModel make_model(FusionMode mode, std::size_t num_classes, std::size_t d_gsv,
                       std::size_t d_oh) {
  if (num_classes < 2) throw Error(ErrorKind::invalid_argument, "need at least 2 classes");
  FusionModel m;
  m.mode = mode;
  m.num_classes = num_classes;
  m.d_gsv = d_gsv;
  m.d_oh = d_oh;
  if (m.input_dim() == 0 || (needs_ground(mode) && d_gsv == 0) ||
      (needs_overhead(mode) && d_oh == 0)) {
    throw Error(ErrorKind::dimension, std::string("mode '") + to_string(mode) +
                                          "' needs a nonzero dimension for each of its modalities");
  }
  m.weights = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(num_classes),
                                    static_cast<Eigen::Index>(m.input_dim()));
  m.bias = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(num_classes));
  return m;
}

FusionModel init_model(FusionMode mode, std::size_t num_classes, std::size_t d_gsv,
                       std::size_t d_oh, std::uint64_t seed) {
  FusionModel m = make_model(mode, num_classes, d_gsv, d_oh);
  const double bound = 1.0 / std::sqrt(static_cast<double>(m.input_dim()));
  Rng rng(seed);
  for (Eigen::Index r = 0; r < m.weights.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.weights.cols(); ++c) m.weights(r, c) = rng.uniform(-bound, bound);
  }
  return m;
}

Eigen::VectorXd assemble_input(const FusionModel& model, const FeatureVector* overhead,
                               const AggregatedFeature* ground) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(model.input_dim()));
  Eigen::Index at = 0;
  if (needs_ground(model.mode)) {
    if (!ground) throw Error(ErrorKind::data, "model needs the ground-view modality");
    if (ground->dim() != model.d_gsv) {
      throw Error(ErrorKind::dimension, "ground feature dim " + std::to_string(ground->dim()) +
                                            ", model expects " + std::to_string(model.d_gsv));
    }
    for (double v : ground->values) x(at++) = v;
  }
  if (needs_overhead(model.mode)) {
    if (!overhead) throw Error(ErrorKind::data, "model needs the overhead modality");
    if (overhead->dim() != model.d_oh) {
      throw Error(ErrorKind::dimension, "overhead feature dim " + std::to_string(overhead->dim()) +
                                            ", model expects " + std::to_string(model.d_oh));
    }
    for (float v : overhead->values) x(at++) = v;
  }
  return x;
}

Eigen::VectorXd forward(const FusionModel& model, const Eigen::VectorXd& input) {
  if (static_cast<std::size_t>(input.size()) != model.input_dim()) {
    throw Error(ErrorKind::dimension, "input dim " + std::to_string(input.size()) +
                                          ", model expects " + std::to_string(model.input_dim()));
  }
  return model.weights * input + model.bias;
}

Eigen::VectorXd forward(const FusionModel& model, const FeatureVector* overhead,
                        const AggregatedFeature* ground) {
  return forward(model, assemble_input(model, overhead, ground));
}

Eigen::VectorXd softmax(const Eigen::VectorXd& scores) {
  const double shift = scores.maxCoeff();
  Eigen::VectorXd e = (scores.array() - shift).exp().matrix();
  return e / e.sum();
}

namespace {

double log_sum_exp(const Eigen::VectorXd& s) {
  const double m = s.maxCoeff();
  return m + std::log((s.array() - m).exp().sum());
}

void check_batch(const Eigen::MatrixXd& scores, std::span<const std::size_t> labels) {
  if (scores.rows() == 0) throw Error(ErrorKind::invalid_argument, "empty batch");
  if (static_cast<std::size_t>(scores.rows()) != labels.size()) {
    throw Error(ErrorKind::dimension, "scores and labels disagree on batch size");
  }
  if (!scores.allFinite()) throw Error(ErrorKind::numeric, "non-finite scores");
  for (auto l : labels) {
    if (l >= static_cast<std::size_t>(scores.cols())) {
      throw Error(ErrorKind::invalid_argument, "label " + std::to_string(l) + " out of range");
    }
  }
}

}  // namespace

double cross_entropy_loss(const Eigen::MatrixXd& scores, std::span<const std::size_t> labels) {
  check_batch(scores, labels);
  double total = 0.0;
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    const Eigen::VectorXd row = scores.row(i).transpose();
    total += -row(static_cast<Eigen::Index>(labels[i])) + log_sum_exp(row);
  }
  return total / static_cast<double>(scores.rows());
}

LossGradient loss_gradient(const FusionModel& model, const Eigen::MatrixXd& inputs,
                           std::span<const std::size_t> labels) {
  if (static_cast<std::size_t>(inputs.cols()) != model.input_dim()) {
    throw Error(ErrorKind::dimension, "batch inputs have the wrong dimension");
  }
  const Eigen::MatrixXd scores = (inputs * model.weights.transpose()).rowwise() +
                                 model.bias.transpose();
  LossGradient g;
  g.loss = cross_entropy_loss(scores, labels);

  // d loss / d scores = (softmax - onehot) / batch
  const double inv_batch = 1.0 / static_cast<double>(inputs.rows());
  Eigen::MatrixXd delta(scores.rows(), scores.cols());
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    delta.row(i) = softmax(scores.row(i).transpose()).transpose();
    delta(i, static_cast<Eigen::Index>(labels[static_cast<std::size_t>(i)])) -= 1.0;
  }
  delta *= inv_batch;
  g.weights = delta.transpose() * inputs;
  g.bias = delta.colwise().sum().transpose();
  return g;
}

Prediction predict_scores(const Eigen::VectorXd& scores) {
  if (!scores.allFinite()) throw Error(ErrorKind::numeric, "non-finite scores");
  Prediction p;
  p.probabilities = softmax(scores);
  Eigen::Index best = 0;
  for (Eigen::Index k = 1; k < scores.size(); ++k) {
    if (scores(k) > scores(best)) best = k;
  }
  p.label = static_cast<std::size_t>(best);
  return p;
}

Prediction predict(const FusionModel& model, const FeatureVector* overhead,
                   const AggregatedFeature* ground) {
  return predict_scores(forward(model, overhead, ground));
}

double learning_rate(const TrainConfig& config, std::size_t epoch) {
  const auto steps = config.lr_decay_every == 0 ? 0 : epoch / config.lr_decay_every;
  return config.lr0 / std::pow(config.lr_decay_factor, static_cast<double>(steps));
}

TrainResult train(FusionModel model, std::span<const TrainingSample> samples,
                  const TrainConfig& config) {
  if (config.batch_size == 0) throw Error(ErrorKind::invalid_argument, "batch size must be positive");
  if (!(config.lr0 > 0.0) || !(config.lr_decay_factor > 0.0) || config.momentum < 0.0) {
    throw Error(ErrorKind::invalid_argument,
                "learning rate and decay factor must be positive, momentum non-negative");
  }
  TrainResult result;
  if (config.epochs == 0) {
    result.model = std::move(model);
    return result;
  }
  if (samples.empty()) throw Error(ErrorKind::data, "no training samples");
  for (const auto& s : samples) {
    if (static_cast<std::size_t>(s.input.size()) != model.input_dim()) {
      throw Error(ErrorKind::dimension, "training sample has the wrong input dimension");
    }
    if (s.label >= model.num_classes) throw Error(ErrorKind::data, "training label out of range");
  }

  Eigen::MatrixXd vel_w = Eigen::MatrixXd::Zero(model.weights.rows(), model.weights.cols());
  Eigen::VectorXd vel_b = Eigen::VectorXd::Zero(model.bias.size());
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(config.seed);

  const auto dim = static_cast<Eigen::Index>(model.input_dim());
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const double lr = learning_rate(config, epoch);
    rng.shuffle(std::span(order));
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      Eigen::MatrixXd batch(static_cast<Eigen::Index>(end - start), dim);
      std::vector<std::size_t> labels;
      for (std::size_t i = start; i < end; ++i) {
        batch.row(static_cast<Eigen::Index>(i - start)) = samples[order[i]].input.transpose();
        labels.push_back(samples[order[i]].label);
      }
      const LossGradient g = loss_gradient(model, batch, labels);
      epoch_loss += g.loss * static_cast<double>(end - start);
      vel_w = config.momentum * vel_w - lr * g.weights;
      vel_b = config.momentum * vel_b - lr * g.bias;
      model.weights += vel_w;
      model.bias += vel_b;
    }
    epoch_loss /= static_cast<double>(order.size());
    if (!std::isfinite(epoch_loss) || !model.weights.allFinite()) {
      throw Error(ErrorKind::numeric, "training diverged at epoch " + std::to_string(epoch));
    }
    result.loss_trace.push_back(epoch_loss);
  }
  result.model = std::move(model);
  return result;
}

std::vector<TrainingSample> make_samples(const FusionModel& model, const DatasetManifest& manifest,
                                         std::span<const std::size_t> indices, Pooling pooling) {
  std::vector<TrainingSample> samples;
  for (auto i : indices) {
    const auto& rec = manifest.records.at(i);
    if (needs_ground(model.mode) && !rec.has_ground()) continue;
    TrainingSample s;
    s.label = rec.label;
    if (needs_ground(model.mode)) {
      const AggregatedFeature g = aggregate(rec.ground_views, pooling);
      s.input = assemble_input(model, &rec.overhead, &g);
    } else {
      s.input = assemble_input(model, &rec.overhead, nullptr);
    }
    samples.push_back(std::move(s));
  }
  return samples;
}

TrainResult train(FusionModel model, const DatasetManifest& manifest,
                  const SplitAssignment& split, const TrainConfig& config, Pooling pooling) {
  const auto indices = subset_indices(manifest, split, Subset::train);
  const auto samples = make_samples(model, manifest, indices, pooling);
  if (samples.empty() && config.epochs > 0) {
    throw Error(ErrorKind::data, std::string("no usable training objects for mode '") +
                                     to_string(model.mode) + "'");
  }
  return train(std::move(model), samples, config);
}

// -- Checkpoints --------------------------------------------------------------


void save_checkpoint(const FusionModel& model, const std::filesystem::path& path) {
  std::vector<NamedArray> arrays;
  arrays.push_back({"mode", {1}, {static_cast<double>(model.mode)}});
  arrays.push_back({"shape", {3},
                    {static_cast<double>(model.num_classes), static_cast<double>(model.d_gsv),
                     static_cast<double>(model.d_oh)}});
  arrays.push_back(detail::encode_matrix("weights", model.weights));
  arrays.push_back(detail::encode_vector("bias", model.bias));
  write_container(path, arrays);
}

FusionModel load_checkpoint(const std::filesystem::path& path) {
  const auto arrays = read_container(path);
  const std::string src = path.string();
  const auto& mode = require_array(arrays, "mode", src);
  const auto& shape = require_array(arrays, "shape", src);
  const auto& weights = require_array(arrays, "weights", src);
  const auto& bias = require_array(arrays, "bias", src);
  if (mode.data.size() != 1 || shape.data.size() != 3) {
    throw Error(ErrorKind::format, src + ": malformed mode/shape arrays");
  }
  const double tag = mode.data[0];
  if (tag != 0.0 && tag != 1.0 && tag != 2.0) throw Error(ErrorKind::format, src + ": unknown mode tag");
  FusionModel m = make_model(static_cast<FusionMode>(static_cast<int>(tag)),
                             static_cast<std::size_t>(shape.data[0]),
                             static_cast<std::size_t>(shape.data[1]),
                             static_cast<std::size_t>(shape.data[2]));
  if (weights.dims.size() != 2 || weights.dims[0] != m.weights.rows() ||
      weights.dims[1] != m.weights.cols()) {
    throw Error(ErrorKind::dimension, src + ": weight matrix does not match the declared mode and dims");
  }
  if (bias.dims.size() != 1 || bias.dims[0] != m.bias.size()) {
    throw Error(ErrorKind::dimension, src + ": bias does not match the declared class count");
  }
  m.weights = detail::decode_matrix(weights, src);
  m.bias = detail::decode_vector(bias, src);
  if (!m.weights.allFinite() || !m.bias.allFinite()) {
    throw Error(ErrorKind::numeric, src + ": non-finite parameters");
  }
  return m;
}

}  // namespace urbanfuse
