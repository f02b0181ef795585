#ifndef URBANFUSE_PIPELINE_HPP
#define URBANFUSE_PIPELINE_HPP

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "urbanfuse/aggregation.hpp"
#include "urbanfuse/dataset.hpp"
#include "urbanfuse/embedding.hpp"
#include "urbanfuse/retrieval.hpp"

// Glue between the dataset records and the matrix-level embedding/retrieval API.
namespace urbanfuse {

std::vector<std::size_t> with_ground(const DatasetManifest& manifest,
                                     std::span<const std::size_t> indices);
std::vector<std::size_t> labels_of(const DatasetManifest& manifest,
                                   std::span<const std::size_t> indices);
std::vector<std::string> ids_of(const DatasetManifest& manifest,
                                std::span<const std::size_t> indices);

Eigen::MatrixXd overhead_matrix(const DatasetManifest& manifest, std::span<const std::size_t> indices);
/// Aggregated ground features; every listed record must have ground views.
Eigen::MatrixXd ground_matrix(const DatasetManifest& manifest, std::span<const std::size_t> indices,
                              Pooling pooling);

/// Fits on the split's train objects that carry both modalities.
EmbeddingModel fit_embedding(const DatasetManifest& manifest, const SplitAssignment& split,
                             Pooling pooling, const CcaParams& params,
                             CcaSolution* diagnostics = nullptr);

/// Index over the split's train objects that carry ground views.
RetrievalIndex build_index(const EmbeddingModel& embedding, const DatasetManifest& manifest,
                           const SplitAssignment& split, Pooling pooling, double power);

}  // namespace urbanfuse

#endif
