#ifndef URBANFUSE_SWEEP_HPP
#define URBANFUSE_SWEEP_HPP

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "urbanfuse/aggregation.hpp"
#include "urbanfuse/dataset.hpp"
#include "urbanfuse/embedding.hpp"

namespace urbanfuse {

/// Train/test matrices for nearest-neighbor-label retrieval accuracy.
struct RetrievalData {
  Eigen::MatrixXd train_ground;    // aggregated, train objects with both modalities
  Eigen::MatrixXd train_overhead;
  std::vector<std::size_t> train_labels;
  std::vector<std::string> train_ids;
  Eigen::MatrixXd test_overhead;   // every test object
  std::vector<std::size_t> test_labels;
  std::size_t num_classes = 0;
};

RetrievalData make_retrieval_data(const DatasetManifest& manifest, const SplitAssignment& split,
                                  Pooling pooling);

/// Percent of test objects whose nearest training ground-view projection
/// (cosine on D-scaled projections) carries the correct label.
double nearest_neighbor_accuracy(const RetrievalData& data, const CcaParams& params);

enum class SweepParameter { pca_fraction, embedding_fraction, power };

const char* to_string(SweepParameter parameter);
/// Accepts "pca-frac", "demb-frac" or "power".
SweepParameter parse_sweep_parameter(std::string_view text);

struct SweepPoint {
  double value = 0.0;
  double accuracy = 0.0;  // percent
};

/// Refits the embedding once per value, with the other hyperparameters held at `base`.
std::vector<SweepPoint> sensitivity_sweep(const RetrievalData& data, SweepParameter parameter,
                                          std::span<const double> values,
                                          const CcaParams& base = {});

}  // namespace urbanfuse

#endif
