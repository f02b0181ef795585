#ifndef URBANFUSE_DATASET_HPP
#define URBANFUSE_DATASET_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace urbanfuse {

/// One extractor output: an overhead descriptor or a single ground-view descriptor.
struct FeatureVector {
  std::vector<float> values;

  std::size_t dim() const { return values.size(); }
  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

/// Ordered, unique class names; a label is the position in this list.
class LabelVocabulary {
 public:
  LabelVocabulary() = default;
  /// Throws ErrorKind::data on duplicates, empty names, or fewer than two classes.
  explicit LabelVocabulary(std::vector<std::string> names);

  static LabelVocabulary load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  std::size_t size() const { return names_.size(); }
  const std::string& name(std::size_t label) const { return names_.at(label); }
  const std::vector<std::string>& names() const { return names_; }
  std::optional<std::size_t> index_of(std::string_view name) const;

 private:
  std::vector<std::string> names_;
};

struct UrbanObjectRecord {
  std::string object_id;
  std::size_t label = 0;
  FeatureVector overhead;
  std::vector<FeatureVector> ground_views;  // empty marks the missing-modality case

  // Source files, resolved to absolute or manifest-relative form as written.
  std::string overhead_path;
  std::vector<std::string> ground_paths;

  bool has_ground() const { return !ground_views.empty(); }
};

struct DatasetManifest {
  std::vector<UrbanObjectRecord> records;
  LabelVocabulary vocabulary;
  std::size_t d_gsv = 0;  // 0 when no record carries ground views and none is declared
  std::size_t d_oh = 0;

  std::size_t num_classes() const { return vocabulary.size(); }
  std::optional<std::size_t> find(std::string_view object_id) const;
};

// -- Feature files ("MMLU") ---------------------------------------------------
//
// Little-endian: magic "MMLU", u32 version (1), u32 dim, u32 count, then
// count*dim IEEE-754 f32 values in row-major order.

inline constexpr std::string_view kFeatureMagic = "MMLU";
inline constexpr std::uint32_t kFeatureVersion = 1;
inline constexpr std::size_t kFeatureHeaderBytes = 16;

std::vector<std::uint8_t> encode_features(std::span<const FeatureVector> vectors);
std::vector<FeatureVector> decode_features(std::span<const std::uint8_t> bytes,
                                           const std::string& source);

void write_feature_file(std::span<const FeatureVector> vectors, const std::filesystem::path& path);
std::vector<FeatureVector> read_feature_file(const std::filesystem::path& path);

// -- Manifest -----------------------------------------------------------------
//
// UTF-8 text, one record per line, tab separated:
//   object_id <TAB> class_name <TAB> overhead_path <TAB> ground_path;ground_path;...
// An empty fourth field marks a record without ground views. Lines starting
// with '#' are comments, except the dimension declarations "#d_gsv=N" and
// "#d_oh=N". Relative paths resolve against the manifest's directory.

struct ManifestEntry {
  std::string object_id;
  std::string class_name;
  std::string overhead_path;
  std::vector<std::string> ground_paths;
};

void write_manifest(const std::filesystem::path& path, std::span<const ManifestEntry> entries,
                    std::size_t d_gsv, std::size_t d_oh);

/// Default vocabulary location: "vocab.txt" next to the manifest.
std::filesystem::path default_vocabulary_path(const std::filesystem::path& manifest_path);

DatasetManifest load_manifest(const std::filesystem::path& manifest_path,
                              const std::filesystem::path& vocabulary_path);
DatasetManifest load_manifest(const std::filesystem::path& manifest_path);

// -- Splits -------------------------------------------------------------------

enum class Subset : std::uint8_t { train, test };

struct SplitAssignment {
  std::uint64_t seed = 0;
  std::vector<std::string> object_ids;  // manifest order
  std::vector<Subset> subsets;          // aligned with object_ids

  Subset subset_of(std::string_view object_id) const;
  std::size_t count(Subset subset) const;
  friend bool operator==(const SplitAssignment&, const SplitAssignment&) = default;
};

/// Per class, keeps max(1, floor(train_fraction * n_c)) randomly chosen objects for training.
SplitAssignment stratified_split(const DatasetManifest& manifest, std::uint64_t seed,
                                 double train_fraction = 0.8);

/// Text format: "#seed=N" line, then "object_id<TAB>train|test" per object.
void write_split(const SplitAssignment& split, const std::filesystem::path& path);
/// Validates that the split covers exactly the manifest's objects.
SplitAssignment read_split(const std::filesystem::path& path, const DatasetManifest& manifest);

/// Indices into manifest.records of the objects in `subset`, in manifest order.
std::vector<std::size_t> subset_indices(const DatasetManifest& manifest,
                                        const SplitAssignment& split, Subset subset);

}  // namespace urbanfuse

#endif
