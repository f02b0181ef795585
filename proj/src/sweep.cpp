#include "urbanfuse/sweep.hpp"

#include <string>

#include "urbanfuse/error.hpp"
#include "urbanfuse/pipeline.hpp"
#include "urbanfuse/retrieval.hpp"

namespace urbanfuse {

RetrievalData make_retrieval_data(const DatasetManifest& manifest, const SplitAssignment& split,
                                  Pooling pooling) {
  const auto train = with_ground(manifest, subset_indices(manifest, split, Subset::train));
  const auto test = subset_indices(manifest, split, Subset::test);
  if (train.size() < 2) throw Error(ErrorKind::data, "need at least 2 training objects with ground views");
  if (test.empty()) throw Error(ErrorKind::data, "split has no test objects");
  RetrievalData d;
  d.train_ground = ground_matrix(manifest, train, pooling);
  d.train_overhead = overhead_matrix(manifest, train);
  d.train_labels = labels_of(manifest, train);
  d.train_ids = ids_of(manifest, train);
  d.test_overhead = overhead_matrix(manifest, test);
  d.test_labels = labels_of(manifest, test);
  d.num_classes = manifest.num_classes();
  return d;
}

double nearest_neighbor_accuracy(const RetrievalData& data, const CcaParams& params) {
  const EmbeddingModel model = fit_embedding(data.train_ground, data.train_overhead,
                                             data.train_labels, data.num_classes, params);
  const RetrievalIndex index =
      build_index(model, data.train_ground, data.train_ids, data.train_labels, params.power);
  const CoherenceCurve curve =
      label_coherence_curve(index, model, data.test_overhead, data.test_labels, 1);
  return 100.0 * curve.hit_rate.front();
}

const char* to_string(SweepParameter parameter) {
  switch (parameter) {
    case SweepParameter::pca_fraction: return "pca-frac";
    case SweepParameter::embedding_fraction: return "demb-frac";
    case SweepParameter::power: return "power";
  }
  return "?";
}

SweepParameter parse_sweep_parameter(std::string_view text) {
  if (text == "pca-frac") return SweepParameter::pca_fraction;
  if (text == "demb-frac") return SweepParameter::embedding_fraction;
  if (text == "power") return SweepParameter::power;
  throw Error(ErrorKind::invalid_argument,
              "unknown sweep parameter '" + std::string(text) + "' (pca-frac|demb-frac|power)");
}

std::vector<SweepPoint> sensitivity_sweep(const RetrievalData& data, SweepParameter parameter,
                                          std::span<const double> values, const CcaParams& base) {
  std::vector<SweepPoint> points;
  for (double v : values) {
    CcaParams p = base;
    switch (parameter) {
      case SweepParameter::pca_fraction: p.pca_fraction = v; break;
      case SweepParameter::embedding_fraction: p.embedding_fraction = v; break;
      case SweepParameter::power: p.power = v; break;
    }
    points.push_back({v, nearest_neighbor_accuracy(data, p)});
  }
  return points;
}

}  // namespace urbanfuse
