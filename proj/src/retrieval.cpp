#include "urbanfuse/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "urbanfuse/error.hpp"

namespace urbanfuse {

Eigen::VectorXd eigenvalue_scaling(const EmbeddingModel& embedding, double power) {
  if (!(power >= 0.0)) throw Error(ErrorKind::invalid_argument, "power must be >= 0");
  if (!embedding.fitted()) throw Error(ErrorKind::state, "embedding model is not fitted");
  Eigen::VectorXd d(embedding.eigenvalues.size());
  for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = std::pow(embedding.eigenvalues(i), power);
  if (!d.allFinite()) throw Error(ErrorKind::numeric, "eigenvalue scaling overflowed");
  return d;
}

RetrievalIndex build_index(const EmbeddingModel& embedding, const Eigen::MatrixXd& ground_features,
                           std::vector<std::string> object_ids, std::vector<std::size_t> labels,
                           double power) {
  if (ground_features.rows() == 0) throw Error(ErrorKind::data, "cannot build an empty retrieval index");
  if (object_ids.size() != static_cast<std::size_t>(ground_features.rows()) ||
      labels.size() != object_ids.size()) {
    throw Error(ErrorKind::dimension, "index rows, ids and labels must align");
  }
  RetrievalIndex index;
  index.power = power;
  index.scaling = eigenvalue_scaling(embedding, power);
  index.rows = project(embedding, View::ground, ground_features) * index.scaling.asDiagonal();
  if (!index.rows.allFinite()) throw Error(ErrorKind::numeric, "non-finite index rows");
  index.norms = index.rows.rowwise().norm();
  index.ground_features = ground_features;
  index.object_ids = std::move(object_ids);
  index.labels = std::move(labels);
  return index;
}

QueryResult query_scaled(const RetrievalIndex& index, const Eigen::VectorXd& scaled_query,
                         std::size_t k) {
  if (k == 0) throw Error(ErrorKind::invalid_argument, "k must be at least 1");
  if (scaled_query.size() != index.rows.cols()) {
    throw Error(ErrorKind::dimension, "query dimension disagrees with the index");
  }
  QueryResult result;
  const double qnorm = scaled_query.norm();
  result.zero_norm_query = !(qnorm > 0.0);

  const auto n = index.size();
  Eigen::VectorXd sims = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  if (!result.zero_norm_query) {
    const Eigen::VectorXd dots = index.rows * scaled_query;
    for (Eigen::Index i = 0; i < sims.size(); ++i) {
      if (index.norms(i) > 0.0) sims(i) = dots(i) / (index.norms(i) * qnorm);
    }
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto take = std::min(k, n);
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      const double sa = sims(static_cast<Eigen::Index>(a));
                      const double sb = sims(static_cast<Eigen::Index>(b));
                      return sa != sb ? sa > sb : a < b;
                    });
  for (std::size_t i = 0; i < take; ++i) {
    const auto r = order[i];
    result.neighbors.push_back(
        {r, index.object_ids[r], index.labels[r], sims(static_cast<Eigen::Index>(r))});
  }
  return result;
}

Eigen::MatrixXd scaled_overhead_projection(const RetrievalIndex& index,
                                           const EmbeddingModel& embedding,
                                           const Eigen::MatrixXd& overhead_rows) {
  if (index.scaling.size() != static_cast<Eigen::Index>(embedding.dim())) {
    throw Error(ErrorKind::dimension, "index was built from a different embedding");
  }
  return project(embedding, View::overhead, overhead_rows) * index.scaling.asDiagonal();
}

QueryResult query(const RetrievalIndex& index, const EmbeddingModel& embedding,
                  const FeatureVector& overhead, std::size_t k) {
  Eigen::MatrixXd row(1, static_cast<Eigen::Index>(overhead.dim()));
  for (std::size_t j = 0; j < overhead.dim(); ++j) row(0, static_cast<Eigen::Index>(j)) = overhead.values[j];
  const Eigen::MatrixXd q = scaled_overhead_projection(index, embedding, row);
  return query_scaled(index, q.row(0).transpose(), k);
}

MissingPrediction predict_missing(const FusionModel& fusion, const EmbeddingModel& embedding,
                                  const RetrievalIndex& index, const FeatureVector& overhead,
                                  std::size_t k) {
  if (fusion.mode != FusionMode::multimodal) {
    throw Error(ErrorKind::invalid_argument, "missing-modality prediction needs a multimodal model");
  }
  if (static_cast<std::size_t>(index.ground_features.cols()) != fusion.d_gsv) {
    throw Error(ErrorKind::dimension, "index ground features disagree with the model's d_gsv");
  }
  const QueryResult hits = query(index, embedding, overhead, k);
  MissingPrediction out;
  out.zero_norm_query = hits.zero_norm_query;

  Eigen::VectorXd mean = Eigen::VectorXd::Zero(index.ground_features.cols());
  for (const auto& nb : hits.neighbors) {
    mean += index.ground_features.row(static_cast<Eigen::Index>(nb.row)).transpose();
    out.retrieved.push_back(nb.object_id);
  }
  mean /= static_cast<double>(hits.neighbors.size());

  AggregatedFeature substitute;
  substitute.values.assign(mean.data(), mean.data() + mean.size());
  out.prediction = predict(fusion, &overhead, &substitute);
  return out;
}

CoherenceCurve label_coherence_curve(const RetrievalIndex& index, const EmbeddingModel& embedding,
                                     const Eigen::MatrixXd& overhead_rows,
                                     std::span<const std::size_t> labels, std::size_t k_max) {
  if (static_cast<std::size_t>(overhead_rows.rows()) != labels.size()) {
    throw Error(ErrorKind::dimension, "queries and labels must align");
  }
  if (labels.empty()) throw Error(ErrorKind::data, "no queries for the coherence curve");
  k_max = std::min(k_max, index.size());
  const Eigen::MatrixXd queries = scaled_overhead_projection(index, embedding, overhead_rows);

  std::vector<std::size_t> hits(k_max, 0), correct(k_max, 0);
  for (Eigen::Index q = 0; q < queries.rows(); ++q) {
    const auto result = query_scaled(index, queries.row(q).transpose(), k_max);
    std::size_t running = 0;
    for (std::size_t k = 0; k < k_max; ++k) {
      if (result.neighbors[k].label == labels[static_cast<std::size_t>(q)]) ++running;
      correct[k] += running;
      if (running > 0) ++hits[k];
    }
  }
  CoherenceCurve curve;
  const double n = static_cast<double>(labels.size());
  for (std::size_t k = 0; k < k_max; ++k) {
    curve.hit_rate.push_back(static_cast<double>(hits[k]) / n);
    curve.mean_correct.push_back(static_cast<double>(correct[k]) / n);
  }
  return curve;
}

}  // namespace urbanfuse
