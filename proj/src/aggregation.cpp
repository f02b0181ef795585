#include "urbanfuse/aggregation.hpp"

#include <algorithm>
#include <string>

#include "urbanfuse/error.hpp"

namespace urbanfuse {

const char* to_string(Pooling pooling) { return pooling == Pooling::avg ? "avg" : "max"; }

Pooling parse_pooling(std::string_view text) {
  if (text == "avg") return Pooling::avg;
  if (text == "max") return Pooling::max;
  throw Error(ErrorKind::invalid_argument, "unknown pooling '" + std::string(text) + "' (avg|max)");
}

AggregatedFeature aggregate(std::span<const FeatureVector> features, Pooling pooling) {
  if (features.empty()) {
    throw Error(ErrorKind::data, "cannot aggregate an empty ground-view set (missing modality)");
  }
  const std::size_t dim = features.front().dim();
  AggregatedFeature out;
  out.pooling = pooling;
  out.values.assign(features.front().values.begin(), features.front().values.end());
  for (std::size_t i = 1; i < features.size(); ++i) {
    const auto& v = features[i].values;
    if (v.size() != dim) {
      throw Error(ErrorKind::dimension, "ground-view " + std::to_string(i) + " has dim " +
                                            std::to_string(v.size()) + ", expected " +
                                            std::to_string(dim));
    }
    if (pooling == Pooling::max) {
      for (std::size_t j = 0; j < dim; ++j) out.values[j] = std::max(out.values[j], double{v[j]});
    } else {
      for (std::size_t j = 0; j < dim; ++j) out.values[j] += v[j];
    }
  }
  if (pooling == Pooling::avg) {
    const double n = static_cast<double>(features.size());
    for (auto& x : out.values) x /= n;
  }
  return out;
}

}  // namespace urbanfuse
