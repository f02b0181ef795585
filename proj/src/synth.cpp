#include "urbanfuse/synth.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>

#include <Eigen/Dense>

#include "urbanfuse/error.hpp"
#include "urbanfuse/rng.hpp"

namespace urbanfuse {

namespace {

Eigen::MatrixXd gaussian(Rng& rng, Eigen::Index rows, Eigen::Index cols, double scale) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = scale * rng.normal();
  }
  return m;
}

Eigen::VectorXd gaussian(Rng& rng, Eigen::Index n, double scale) {
  return gaussian(rng, n, 1, scale).col(0);
}

FeatureVector to_feature(const Eigen::VectorXd& v) {
  FeatureVector f;
  f.values.resize(static_cast<std::size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) f.values[static_cast<std::size_t>(i)] = static_cast<float>(v(i));
  return f;
}

}  // namespace

void SynthConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::invalid_argument, "synth: " + what); };
  if (num_classes < 2) fail("need at least 2 classes");
  if (objects_per_class < 2) fail("need at least 2 objects per class");
  if (d_gsv < 2 || d_oh < 2 || latent_dim < 1) fail("dimensions must be >= 2");
  if (subtypes_per_class < 1) fail("need at least 1 subtype per class");
  if (min_views < 1 || max_views < min_views) fail("views range must satisfy 1 <= min <= max");
  auto unit = [](double x) { return x >= 0.0 && x <= 1.0; };
  if (!unit(missing_ground_fraction)) fail("missing_ground_fraction must lie in [0, 1]");
  if (!(shared_signal >= 0.0) || !(exclusive_gsv >= 0.0) || !(exclusive_oh >= 0.0) ||
      !(noise_sigma >= 0.0) || !(shared_nuisance >= 0.0) || !(feature_noise >= 0.0)) {
    fail("signal and noise levels must be non-negative");
  }
}

std::vector<std::string> synth_class_names(std::size_t num_classes) {
  static const char* kLanduse[16] = {"educational", "hospital", "religious", "shop",
                                     "cemetery", "forest", "park", "heritage",
                                     "sports", "government", "post_office", "parking",
                                     "fuel", "marina", "hotel", "industrial"};
  std::vector<std::string> names;
  for (std::size_t k = 0; k < num_classes; ++k) {
    if (num_classes == 16) {
      names.emplace_back(kLanduse[k]);
    } else {
      char buf[32];
      std::snprintf(buf, sizeof buf, "class_%02zu", k);
      names.emplace_back(buf);
    }
  }
  return names;
}

DatasetManifest generate_dataset(const SynthConfig& config) {
  config.validate();
  Rng rng(config.seed);
  const auto L = static_cast<Eigen::Index>(config.latent_dim);
  const auto K = static_cast<Eigen::Index>(config.num_classes);
  const double mix_scale = 1.0 / std::sqrt(2.0 * static_cast<double>(L));

  const Eigen::MatrixXd mix_gsv = gaussian(rng, static_cast<Eigen::Index>(config.d_gsv), 2 * L, mix_scale);
  const Eigen::MatrixXd mix_oh = gaussian(rng, static_cast<Eigen::Index>(config.d_oh), 2 * L, mix_scale);
  const auto S = static_cast<Eigen::Index>(config.subtypes_per_class);
  const Eigen::MatrixXd shared_centers = gaussian(rng, K * S, L, 1.0);
  const Eigen::MatrixXd gsv_centers = gaussian(rng, K, L, 1.0);
  const Eigen::MatrixXd oh_centers = gaussian(rng, K, L, 1.0);

  const std::size_t total = config.num_classes * config.objects_per_class;
  const auto n_missing = static_cast<std::size_t>(
      std::llround(config.missing_ground_fraction * static_cast<double>(total)));
  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(std::span(order));
  std::vector<bool> missing(total, false);
  for (std::size_t i = 0; i < n_missing; ++i) missing[order[i]] = true;

  DatasetManifest m;
  m.vocabulary = LabelVocabulary(synth_class_names(config.num_classes));
  m.d_gsv = config.d_gsv;
  m.d_oh = config.d_oh;
  const double sigma = config.noise_sigma;
  const double feat_sigma = config.noise_sigma * config.feature_noise;

  for (std::size_t n = 0; n < total; ++n) {
    const auto k = static_cast<Eigen::Index>(n / config.objects_per_class);
    UrbanObjectRecord rec;
    char id[32];
    std::snprintf(id, sizeof id, "obj_%05zu", n);
    rec.object_id = id;
    rec.label = static_cast<std::size_t>(k);

    const auto subtype = static_cast<Eigen::Index>(rng.below(config.subtypes_per_class));
    const Eigen::VectorXd z_shared =
        config.shared_signal * shared_centers.row(k * S + subtype).transpose() +
        gaussian(rng, L, config.shared_nuisance);
    Eigen::VectorXd latent_oh(2 * L), latent_gsv(2 * L);
    latent_oh << z_shared, config.exclusive_oh * oh_centers.row(k).transpose() + gaussian(rng, L, sigma);
    latent_gsv << z_shared, config.exclusive_gsv * gsv_centers.row(k).transpose() + gaussian(rng, L, sigma);

    rec.overhead = to_feature(mix_oh * latent_oh +
                              gaussian(rng, static_cast<Eigen::Index>(config.d_oh), feat_sigma));
    const std::size_t n_views =
        config.min_views + rng.below(config.max_views - config.min_views + 1);
    if (!missing[n]) {
      const Eigen::VectorXd clean = mix_gsv * latent_gsv;
      for (std::size_t v = 0; v < n_views; ++v) {
        rec.ground_views.push_back(
            to_feature(clean + gaussian(rng, static_cast<Eigen::Index>(config.d_gsv), feat_sigma)));
      }
    }
    m.records.push_back(std::move(rec));
  }
  return m;
}

DatasetManifest generate(const SynthConfig& config, const std::filesystem::path& out_dir) {
  DatasetManifest m = generate_dataset(config);
  std::filesystem::create_directories(out_dir / "features");
  std::vector<ManifestEntry> entries;
  for (const auto& rec : m.records) {
    ManifestEntry e;
    e.object_id = rec.object_id;
    e.class_name = m.vocabulary.name(rec.label);
    e.overhead_path = "features/" + rec.object_id + "_oh.mmlu";
    write_feature_file(std::span(&rec.overhead, 1), out_dir / e.overhead_path);
    if (rec.has_ground()) {
      e.ground_paths.push_back("features/" + rec.object_id + "_gsv.mmlu");
      write_feature_file(rec.ground_views, out_dir / e.ground_paths.back());
    }
    entries.push_back(std::move(e));
  }
  m.vocabulary.save(out_dir / "vocab.txt");
  write_manifest(out_dir / "manifest.tsv", entries, config.d_gsv, config.d_oh);
  return load_manifest(out_dir / "manifest.tsv", out_dir / "vocab.txt");
}

}  // namespace urbanfuse
