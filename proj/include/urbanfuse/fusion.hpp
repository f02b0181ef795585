#ifndef URBANFUSE_FUSION_HPP
#define URBANFUSE_FUSION_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "urbanfuse/aggregation.hpp"
#include "urbanfuse/dataset.hpp"

namespace urbanfuse {

enum class FusionMode : std::uint8_t { overhead_only = 0, ground_only = 1, multimodal = 2 };

const char* to_string(FusionMode mode);
/// Accepts "overhead", "ground" or "multimodal".
FusionMode parse_mode(std::string_view text);

bool needs_ground(FusionMode mode);
bool needs_overhead(FusionMode mode);

/// Linear decision head over the selected modalities.
///
/// Multimodal input is the concatenation [ground | overhead].
struct FusionModel {
  FusionMode mode = FusionMode::multimodal;
  std::size_t num_classes = 0;
  std::size_t d_gsv = 0;
  std::size_t d_oh = 0;
  Eigen::MatrixXd weights;  // num_classes x input_dim
  Eigen::VectorXd bias;     // num_classes

  std::size_t input_dim() const;
};

/// All-zero parameters.
FusionModel make_model(FusionMode mode, std::size_t num_classes, std::size_t d_gsv,
                       std::size_t d_oh);

/// Zero bias; weights uniform in [-1/sqrt(d_in), 1/sqrt(d_in)] drawn from `seed`.
FusionModel init_model(FusionMode mode, std::size_t num_classes, std::size_t d_gsv,
                       std::size_t d_oh, std::uint64_t seed);

/// Builds the head's input vector; throws if a required modality is absent or
/// has the wrong dimension. Unused modalities are ignored.
Eigen::VectorXd assemble_input(const FusionModel& model, const FeatureVector* overhead,
                               const AggregatedFeature* ground);

/// Raw class scores W x + b.
Eigen::VectorXd forward(const FusionModel& model, const Eigen::VectorXd& input);
Eigen::VectorXd forward(const FusionModel& model, const FeatureVector* overhead,
                        const AggregatedFeature* ground);

Eigen::VectorXd softmax(const Eigen::VectorXd& scores);

/// Mean over rows of -s_true + logsumexp(s), with max subtraction.
/// `scores` is batch x num_classes.
double cross_entropy_loss(const Eigen::MatrixXd& scores, std::span<const std::size_t> labels);

struct LossGradient {
  double loss = 0.0;
  Eigen::MatrixXd weights;
  Eigen::VectorXd bias;
};

/// Batch-mean cross-entropy and its gradient. `inputs` is batch x input_dim.
LossGradient loss_gradient(const FusionModel& model, const Eigen::MatrixXd& inputs,
                           std::span<const std::size_t> labels);

struct Prediction {
  std::size_t label = 0;  // argmax; ties go to the lowest class index
  Eigen::VectorXd probabilities;
};

Prediction predict_scores(const Eigen::VectorXd& scores);
Prediction predict(const FusionModel& model, const FeatureVector* overhead,
                   const AggregatedFeature* ground);

struct TrainConfig {
  std::size_t epochs = 50;
  std::size_t batch_size = 4;
  double lr0 = 0.001;
  double lr_decay_factor = 10.0;
  std::size_t lr_decay_every = 10;
  double momentum = 0.9;
  std::uint64_t seed = 0;
};

/// lr0 / decay_factor^floor(epoch / decay_every), epochs counted from 0.
double learning_rate(const TrainConfig& config, std::size_t epoch);

struct TrainingSample {
  Eigen::VectorXd input;
  std::size_t label = 0;
};

struct TrainResult {
  FusionModel model;
  std::vector<double> loss_trace;  // mean training loss per epoch
};

/// Mini-batch SGD with momentum (v <- m v - lr g; w <- w + v).
///
/// Samples are reshuffled each epoch from a generator seeded with
/// config.seed; the final partial batch is kept.
TrainResult train(FusionModel model, std::span<const TrainingSample> samples,
                  const TrainConfig& config);

/// Builds one sample per listed record, skipping records that lack a modality
/// the model needs.
std::vector<TrainingSample> make_samples(const FusionModel& model, const DatasetManifest& manifest,
                                         std::span<const std::size_t> indices, Pooling pooling);

/// Trains on the split's train objects; throws ErrorKind::data when no
/// object carries the modalities the mode needs.
TrainResult train(FusionModel model, const DatasetManifest& manifest,
                  const SplitAssignment& split, const TrainConfig& config, Pooling pooling);

void save_checkpoint(const FusionModel& model, const std::filesystem::path& path);
FusionModel load_checkpoint(const std::filesystem::path& path);

}  // namespace urbanfuse

#endif
