#ifndef URBANFUSE_TESTS_FIXTURES_HPP
#define URBANFUSE_TESTS_FIXTURES_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "scratch.hpp"
#include "urbanfuse/dataset.hpp"
#include "urbanfuse/error.hpp"
#include "urbanfuse/rng.hpp"

namespace fixture {

// Kind of the urbanfuse::Error thrown by fn, or nullopt when nothing is thrown.
template <class F>
std::optional<urbanfuse::ErrorKind> error_kind(F&& fn) {
  try {
    fn();
  } catch (const urbanfuse::Error& e) {
    return e.kind();
  }
  return std::nullopt;
}

// what() of the urbanfuse::Error thrown by fn, or "" when nothing is thrown.
template <class F>
std::string error_message(F&& fn) {
  try {
    fn();
  } catch (const urbanfuse::Error& e) {
    return e.what();
  }
  return "";
}

inline urbanfuse::FeatureVector random_feature(urbanfuse::Rng& rng, std::size_t dim) {
  urbanfuse::FeatureVector f;
  for (std::size_t i = 0; i < dim; ++i) f.values.push_back(static_cast<float>(rng.normal()));
  return f;
}

struct TinyObject {
  std::string id;
  std::string label;
  std::size_t ground_views;
};

// Writes random feature files, vocab.txt and manifest.tsv for the listed objects.
inline fs::path write_tiny_dataset(const fs::path& dir, const std::vector<std::string>& classes,
                                   const std::vector<TinyObject>& objects, std::size_t d_gsv,
                                   std::size_t d_oh, std::uint64_t seed = 7) {
  urbanfuse::Rng rng(seed);
  fs::create_directories(dir / "feat");
  urbanfuse::LabelVocabulary(classes).save(dir / "vocab.txt");
  std::vector<urbanfuse::ManifestEntry> entries;
  for (const auto& o : objects) {
    urbanfuse::ManifestEntry e{o.id, o.label, "feat/" + o.id + "_oh.mmlu", {}};
    const urbanfuse::FeatureVector oh = random_feature(rng, d_oh);
    urbanfuse::write_feature_file(std::span(&oh, 1), dir / e.overhead_path);
    if (o.ground_views > 0) {
      std::vector<urbanfuse::FeatureVector> views;
      for (std::size_t v = 0; v < o.ground_views; ++v) views.push_back(random_feature(rng, d_gsv));
      e.ground_paths.push_back("feat/" + o.id + "_gsv.mmlu");
      urbanfuse::write_feature_file(views, dir / e.ground_paths.back());
    }
    entries.push_back(std::move(e));
  }
  urbanfuse::write_manifest(dir / "manifest.tsv", entries, d_gsv, d_oh);
  return dir / "manifest.tsv";
}

}  // namespace fixture

#endif
