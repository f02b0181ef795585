#ifndef URBANFUSE_AGGREGATION_HPP
#define URBANFUSE_AGGREGATION_HPP

#include <span>
#include <string_view>
#include <vector>

#include "urbanfuse/dataset.hpp"

namespace urbanfuse {

enum class Pooling { avg, max };

const char* to_string(Pooling pooling);
/// Accepts "avg" or "max"; throws ErrorKind::invalid_argument otherwise.
Pooling parse_pooling(std::string_view text);

struct AggregatedFeature {
  std::vector<double> values;
  Pooling pooling = Pooling::avg;

  std::size_t dim() const { return values.size(); }
};

/// Elementwise max or mean over a set of ground-view features.
///
/// The mean accumulates in double, in input order, and divides by the set
/// size. An empty set is the missing-modality case and throws
/// ErrorKind::data; callers route such objects to retrieval instead.
AggregatedFeature aggregate(std::span<const FeatureVector> features, Pooling pooling = Pooling::avg);

}  // namespace urbanfuse

#endif
