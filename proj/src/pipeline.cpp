#include "urbanfuse/pipeline.hpp"

#include "urbanfuse/error.hpp"

namespace urbanfuse {

std::vector<std::size_t> with_ground(const DatasetManifest& manifest,
                                     std::span<const std::size_t> indices) {
  std::vector<std::size_t> out;
  for (auto i : indices) {
    if (manifest.records.at(i).has_ground()) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> labels_of(const DatasetManifest& manifest,
                                   std::span<const std::size_t> indices) {
  std::vector<std::size_t> out;
  for (auto i : indices) out.push_back(manifest.records.at(i).label);
  return out;
}

std::vector<std::string> ids_of(const DatasetManifest& manifest,
                                std::span<const std::size_t> indices) {
  std::vector<std::string> out;
  for (auto i : indices) out.push_back(manifest.records.at(i).object_id);
  return out;
}

Eigen::MatrixXd overhead_matrix(const DatasetManifest& manifest, std::span<const std::size_t> indices) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(indices.size()), static_cast<Eigen::Index>(manifest.d_oh));
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const auto& v = manifest.records.at(indices[r]).overhead.values;
    for (std::size_t j = 0; j < v.size(); ++j) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = v[j];
  }
  return m;
}

Eigen::MatrixXd ground_matrix(const DatasetManifest& manifest, std::span<const std::size_t> indices,
                              Pooling pooling) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(indices.size()), static_cast<Eigen::Index>(manifest.d_gsv));
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const auto g = aggregate(manifest.records.at(indices[r]).ground_views, pooling);
    for (std::size_t j = 0; j < g.dim(); ++j) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = g.values[j];
  }
  return m;
}

EmbeddingModel fit_embedding(const DatasetManifest& manifest, const SplitAssignment& split,
                             Pooling pooling, const CcaParams& params, CcaSolution* diagnostics) {
  const auto train = with_ground(manifest, subset_indices(manifest, split, Subset::train));
  if (train.size() < 2) {
    throw Error(ErrorKind::data, "embedding needs at least 2 training objects with both modalities");
  }
  return fit_embedding(ground_matrix(manifest, train, pooling), overhead_matrix(manifest, train),
                       labels_of(manifest, train), manifest.num_classes(), params, diagnostics);
}

RetrievalIndex build_index(const EmbeddingModel& embedding, const DatasetManifest& manifest,
                           const SplitAssignment& split, Pooling pooling, double power) {
  const auto train = with_ground(manifest, subset_indices(manifest, split, Subset::train));
  if (train.empty()) throw Error(ErrorKind::data, "no training objects with ground views to index");
  return build_index(embedding, ground_matrix(manifest, train, pooling), ids_of(manifest, train),
                     labels_of(manifest, train), power);
}

}  // namespace urbanfuse
