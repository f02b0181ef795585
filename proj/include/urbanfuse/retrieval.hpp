#ifndef URBANFUSE_RETRIEVAL_HPP
#define URBANFUSE_RETRIEVAL_HPP

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "urbanfuse/aggregation.hpp"
#include "urbanfuse/dataset.hpp"
#include "urbanfuse/embedding.hpp"
#include "urbanfuse/fusion.hpp"

namespace urbanfuse {

/// Training ground-view projections X_1 W_1 D, with D = diag(lambda^p).
struct RetrievalIndex {
  Eigen::MatrixXd rows;             // N_train x d_emb, already scaled by D
  Eigen::VectorXd norms;            // L2 norm of each row
  Eigen::VectorXd scaling;          // diagonal of D
  Eigen::MatrixXd ground_features;  // raw aggregated ground features, N_train x d_gsv
  std::vector<std::string> object_ids;
  std::vector<std::size_t> labels;
  double power = 0.0;

  std::size_t size() const { return object_ids.size(); }
};

/// D = diag(eigenvalues^power).
Eigen::VectorXd eigenvalue_scaling(const EmbeddingModel& embedding, double power);

RetrievalIndex build_index(const EmbeddingModel& embedding, const Eigen::MatrixXd& ground_features,
                           std::vector<std::string> object_ids, std::vector<std::size_t> labels,
                           double power);

struct Neighbor {
  std::size_t row = 0;  // position in the index
  std::string object_id;
  std::size_t label = 0;
  double similarity = 0.0;
};

struct QueryResult {
  std::vector<Neighbor> neighbors;  // descending similarity, ties by lowest row
  bool zero_norm_query = false;     // every similarity is defined as 0
};

/// Ranks index rows by cosine similarity against an already projected and
/// scaled query (X_2* W_2 D).
QueryResult query_scaled(const RetrievalIndex& index, const Eigen::VectorXd& scaled_query,
                         std::size_t k);

/// Projects an overhead feature through the embedding, scales by D and ranks.
QueryResult query(const RetrievalIndex& index, const EmbeddingModel& embedding,
                  const FeatureVector& overhead, std::size_t k);

/// Overhead rows projected and scaled, M x d_emb.
Eigen::MatrixXd scaled_overhead_projection(const RetrievalIndex& index,
                                           const EmbeddingModel& embedding,
                                           const Eigen::MatrixXd& overhead_rows);

struct MissingPrediction {
  Prediction prediction;
  std::vector<std::string> retrieved;  // object ids of the substituted neighbors
  bool zero_norm_query = false;
};

/// Missing-modality prediction: retrieves k training neighbors, substitutes
/// the mean of their aggregated ground features and runs the multimodal head.
MissingPrediction predict_missing(const FusionModel& fusion, const EmbeddingModel& embedding,
                                  const RetrievalIndex& index, const FeatureVector& overhead,
                                  std::size_t k = 1);

struct CoherenceCurve {
  std::vector<double> hit_rate;      // [k-1]: share of queries with a correct-class neighbor in top k
  std::vector<double> mean_correct;  // [k-1]: mean number of correct-class neighbors in top k
};

CoherenceCurve label_coherence_curve(const RetrievalIndex& index, const EmbeddingModel& embedding,
                                     const Eigen::MatrixXd& overhead_rows,
                                     std::span<const std::size_t> labels, std::size_t k_max);

}  // namespace urbanfuse

#endif
