#ifndef URBANFUSE_SYNTH_HPP
#define URBANFUSE_SYNTH_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "urbanfuse/dataset.hpp"

namespace urbanfuse {

/// Synthetic multimodal dataset with controllable cross-view structure.
///
/// Each class k owns `subtypes_per_class` shared latent centers mu_{k,s} and one
/// exclusive center nu_{k,v} per view. An object of class k picks a subtype s
/// uniformly and draws
///   z_shared = shared_signal * mu_{k,s} + shared_nuisance * e  (common to both views)
///   z_v      = exclusive_v  * nu_{k,v} + noise_sigma * e_v
/// and every feature vector of view v is A_v [z_shared; z_v] + feature_noise * noise_sigma * e'
/// with a fixed random mixing matrix A_v. Ground-view sets draw a fresh e' per picture.
struct SynthConfig {
  std::size_t num_classes = 16;
  std::size_t objects_per_class = 40;
  std::size_t d_gsv = 128;
  std::size_t d_oh = 128;
  std::size_t latent_dim = 8;
  std::size_t subtypes_per_class = 3;
  std::size_t min_views = 1;
  std::size_t max_views = 6;
  double shared_signal = 1.5;
  double exclusive_gsv = 0.8;
  double exclusive_oh = 1.0;
  double shared_nuisance = 0.5;
  double noise_sigma = 1.0;
  double feature_noise = 1.5;
  double missing_ground_fraction = 0.0;
  std::uint64_t seed = 1;

  /// Throws ErrorKind::invalid_argument for infeasible settings.
  void validate() const;
};

/// In-memory dataset; record feature paths are left empty.
DatasetManifest generate_dataset(const SynthConfig& config);

/// Writes manifest.tsv, vocab.txt and features/*.mmlu under `out_dir` and
/// returns the manifest as loaded back from disk.
DatasetManifest generate(const SynthConfig& config, const std::filesystem::path& out_dir);

/// The 16 landuse class names for K = 16, otherwise "class_00", "class_01", ...
std::vector<std::string> synth_class_names(std::size_t num_classes);

}  // namespace urbanfuse

#endif
