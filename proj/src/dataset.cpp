#include "urbanfuse/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "urbanfuse/binary_io.hpp"
#include "urbanfuse/error.hpp"
#include "urbanfuse/rng.hpp"

namespace urbanfuse {

namespace {

std::vector<std::string> split_on(std::string_view text, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.emplace_back(text.substr(start));
      return parts;
    }
    parts.emplace_back(text.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

std::size_t parse_size(std::string_view text, const std::string& where) {
  std::size_t value = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw Error(ErrorKind::format, where + ": expected a non-negative integer, got '" +
                                       std::string(text) + "'");
  }
  return value;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

}  // namespace

// -- Vocabulary ---------------------------------------------------------------

LabelVocabulary::LabelVocabulary(std::vector<std::string> names) : names_(std::move(names)) {
  if (names_.size() < 2) {
    throw Error(ErrorKind::data, "vocabulary needs at least 2 classes, got " +
                                     std::to_string(names_.size()));
  }
  std::unordered_set<std::string> seen;
  for (const auto& n : names_) {
    if (n.empty()) throw Error(ErrorKind::data, "vocabulary contains an empty class name");
    if (!seen.insert(n).second) throw Error(ErrorKind::data, "duplicate class name '" + n + "'");
  }
}

LabelVocabulary LabelVocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open vocabulary " + path.string());
  std::vector<std::string> names;
  std::string line;
  while (std::getline(in, line)) {
    line = strip_cr(std::move(line));
    if (line.empty()) continue;
    names.push_back(line);
  }
  return LabelVocabulary(std::move(names));
}

void LabelVocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "cannot create " + path.string());
  for (const auto& n : names_) out << n << '\n';
  if (!out) throw Error(ErrorKind::io, "write failed: " + path.string());
}

std::optional<std::size_t> LabelVocabulary::index_of(std::string_view name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - names_.begin());
}

std::optional<std::size_t> DatasetManifest::find(std::string_view object_id) const {
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].object_id == object_id) return i;
  }
  return std::nullopt;
}

// -- Feature files ------------------------------------------------------------

std::vector<std::uint8_t> encode_features(std::span<const FeatureVector> vectors) {
  const std::size_t dim = vectors.empty() ? 0 : vectors.front().dim();
  for (const auto& v : vectors) {
    if (v.dim() != dim) {
      throw Error(ErrorKind::dimension, "feature vectors must share one dimension (" +
                                            std::to_string(dim) + " vs " +
                                            std::to_string(v.dim()) + ")");
    }
    for (float x : v.values) {
      if (!std::isfinite(x)) throw Error(ErrorKind::numeric, "refusing to write non-finite feature");
    }
  }
  if (!vectors.empty() && dim == 0) throw Error(ErrorKind::dimension, "feature dimension must be >= 1");
  ByteWriter w;
  w.put_bytes(kFeatureMagic);
  w.put_u32(kFeatureVersion);
  w.put_u32(static_cast<std::uint32_t>(dim));
  w.put_u32(static_cast<std::uint32_t>(vectors.size()));
  for (const auto& v : vectors) {
    for (float x : v.values) w.put_f32(x);
  }
  return w.bytes();
}

std::vector<FeatureVector> decode_features(std::span<const std::uint8_t> bytes,
                                           const std::string& source) {
  ByteReader r(bytes, source);
  if (bytes.size() < 4 || r.get_bytes(4) != kFeatureMagic) {
    throw Error(ErrorKind::format, source + ": bad magic (expected MMLU)");
  }
  const auto version = r.get_u32();
  if (version != kFeatureVersion) {
    throw Error(ErrorKind::format, source + ": unsupported version " + std::to_string(version));
  }
  const std::size_t dim = r.get_u32();
  const std::size_t count = r.get_u32();
  if (count > 0 && dim == 0) throw Error(ErrorKind::format, source + ": zero dimension");
  if (count * dim > r.remaining() / 4) {
    throw Error(ErrorKind::format, source + ": truncated payload (expected " +
                                       std::to_string(count * dim * 4) + " bytes, found " +
                                       std::to_string(r.remaining()) + ")");
  }
  if (r.remaining() != count * dim * 4) {
    throw Error(ErrorKind::format, source + ": trailing bytes after payload");
  }
  std::vector<FeatureVector> vectors(count);
  for (std::size_t i = 0; i < count; ++i) {
    vectors[i].values.resize(dim);
    for (auto& x : vectors[i].values) {
      x = r.get_f32();
      if (!std::isfinite(x)) {
        throw Error(ErrorKind::numeric,
                    source + ": non-finite value in vector " + std::to_string(i));
      }
    }
  }
  return vectors;
}

void write_feature_file(std::span<const FeatureVector> vectors, const std::filesystem::path& path) {
  write_file_bytes(path, encode_features(vectors));
}

std::vector<FeatureVector> read_feature_file(const std::filesystem::path& path) {
  return decode_features(read_file_bytes(path), path.string());
}

// -- Manifest -----------------------------------------------------------------

void write_manifest(const std::filesystem::path& path, std::span<const ManifestEntry> entries,
                    std::size_t d_gsv, std::size_t d_oh) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "cannot create " + path.string());
  out << "#d_gsv=" << d_gsv << '\n' << "#d_oh=" << d_oh << '\n';
  for (const auto& e : entries) {
    out << e.object_id << '\t' << e.class_name << '\t' << e.overhead_path << '\t';
    for (std::size_t i = 0; i < e.ground_paths.size(); ++i) {
      if (i) out << ';';
      out << e.ground_paths[i];
    }
    out << '\n';
  }
  if (!out) throw Error(ErrorKind::io, "write failed: " + path.string());
}

std::filesystem::path default_vocabulary_path(const std::filesystem::path& manifest_path) {
  return manifest_path.parent_path() / "vocab.txt";
}

DatasetManifest load_manifest(const std::filesystem::path& manifest_path) {
  return load_manifest(manifest_path, default_vocabulary_path(manifest_path));
}

DatasetManifest load_manifest(const std::filesystem::path& manifest_path,
                              const std::filesystem::path& vocabulary_path) {
  std::ifstream in(manifest_path);
  if (!in) throw Error(ErrorKind::io, "cannot open manifest " + manifest_path.string());
  DatasetManifest manifest;
  manifest.vocabulary = LabelVocabulary::load(vocabulary_path);
  const auto base = manifest_path.parent_path();

  std::optional<std::size_t> declared_gsv, declared_oh;
  std::unordered_set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(std::move(line));
    const std::string where = manifest_path.string() + ":" + std::to_string(line_no);
    if (line.empty()) continue;
    if (line.front() == '#') {
      if (line.starts_with("#d_gsv=")) declared_gsv = parse_size(line.substr(7), where);
      if (line.starts_with("#d_oh=")) declared_oh = parse_size(line.substr(6), where);
      continue;
    }
    auto fields = split_on(line, '\t');
    if (fields.size() == 3) fields.emplace_back();
    if (fields.size() != 4) {
      throw Error(ErrorKind::format, where + ": malformed line, expected 4 tab-separated fields, got " +
                                         std::to_string(fields.size()));
    }
    if (fields[0].empty()) throw Error(ErrorKind::format, where + ": empty object id");
    if (fields[2].empty()) throw Error(ErrorKind::format, where + ": empty overhead path");

    UrbanObjectRecord rec;
    rec.object_id = fields[0];
    if (!ids.insert(rec.object_id).second) {
      throw Error(ErrorKind::data, where + ": duplicate object id '" + rec.object_id + "'");
    }
    const auto label = manifest.vocabulary.index_of(fields[1]);
    if (!label) {
      throw Error(ErrorKind::data, where + ": unknown label '" + fields[1] + "' for object '" +
                                       rec.object_id + "'");
    }
    rec.label = *label;

    rec.overhead_path = fields[2];
    auto overhead = read_feature_file(resolve(base, fields[2]));
    if (overhead.size() != 1) {
      throw Error(ErrorKind::data, where + ": overhead file of object '" + rec.object_id +
                                       "' must hold exactly one vector, found " +
                                       std::to_string(overhead.size()));
    }
    rec.overhead = std::move(overhead.front());

    if (!fields[3].empty()) {
      for (auto& p : split_on(fields[3], ';')) {
        if (p.empty()) throw Error(ErrorKind::format, where + ": empty ground-view path");
        auto views = read_feature_file(resolve(base, p));
        for (auto& v : views) rec.ground_views.push_back(std::move(v));
        rec.ground_paths.push_back(std::move(p));
      }
    }
    manifest.records.push_back(std::move(rec));
  }

  // Declared dims win; otherwise the first record carrying a modality fixes it.
  std::optional<std::size_t> d_oh = declared_oh, d_gsv = declared_gsv;
  for (const auto& rec : manifest.records) {
    if (!d_oh) d_oh = rec.overhead.dim();
    if (rec.overhead.dim() != *d_oh) {
      throw Error(ErrorKind::dimension, "object '" + rec.object_id + "': overhead dim " +
                                            std::to_string(rec.overhead.dim()) +
                                            " but dataset declares d_oh = " + std::to_string(*d_oh));
    }
    for (const auto& g : rec.ground_views) {
      if (!d_gsv) d_gsv = g.dim();
      if (g.dim() != *d_gsv) {
        throw Error(ErrorKind::dimension, "object '" + rec.object_id + "': ground-view dim " +
                                              std::to_string(g.dim()) +
                                              " but dataset declares d_gsv = " +
                                              std::to_string(*d_gsv));
      }
    }
  }
  manifest.d_oh = d_oh.value_or(0);
  manifest.d_gsv = d_gsv.value_or(0);
  return manifest;
}

// -- Splits -------------------------------------------------------------------

Subset SplitAssignment::subset_of(std::string_view object_id) const {
  for (std::size_t i = 0; i < object_ids.size(); ++i) {
    if (object_ids[i] == object_id) return subsets[i];
  }
  throw Error(ErrorKind::data, "object '" + std::string(object_id) + "' is not in the split");
}

std::size_t SplitAssignment::count(Subset subset) const {
  return static_cast<std::size_t>(std::count(subsets.begin(), subsets.end(), subset));
}

SplitAssignment stratified_split(const DatasetManifest& manifest, std::uint64_t seed,
                                 double train_fraction) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw Error(ErrorKind::invalid_argument, "train fraction must lie in (0, 1)");
  }
  std::vector<std::vector<std::size_t>> by_class(manifest.num_classes());
  for (std::size_t i = 0; i < manifest.records.size(); ++i) {
    by_class.at(manifest.records[i].label).push_back(i);
  }

  SplitAssignment split;
  split.seed = seed;
  split.subsets.assign(manifest.records.size(), Subset::test);
  for (const auto& rec : manifest.records) split.object_ids.push_back(rec.object_id);

  Rng rng(seed);
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    auto& members = by_class[c];
    if (members.empty()) continue;
    if (members.size() < 2) {
      throw Error(ErrorKind::data, "class '" + manifest.vocabulary.name(c) +
                                       "' has fewer than 2 objects; cannot split");
    }
    rng.shuffle(std::span(members));
    const double target = train_fraction * static_cast<double>(members.size());
    const auto n_train = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(target + 1e-9)));
    for (std::size_t j = 0; j < n_train; ++j) split.subsets[members[j]] = Subset::train;
  }
  return split;
}

void write_split(const SplitAssignment& split, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "cannot create " + path.string());
  out << "#seed=" << split.seed << '\n';
  for (std::size_t i = 0; i < split.object_ids.size(); ++i) {
    out << split.object_ids[i] << '\t' << (split.subsets[i] == Subset::train ? "train" : "test")
        << '\n';
  }
  if (!out) throw Error(ErrorKind::io, "write failed: " + path.string());
}

SplitAssignment read_split(const std::filesystem::path& path, const DatasetManifest& manifest) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open split " + path.string());
  std::unordered_map<std::string, Subset> assigned;
  std::uint64_t seed = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(std::move(line));
    const std::string where = path.string() + ":" + std::to_string(line_no);
    if (line.empty()) continue;
    if (line.front() == '#') {
      if (line.starts_with("#seed=")) seed = parse_size(line.substr(6), where);
      continue;
    }
    const auto fields = split_on(line, '\t');
    if (fields.size() != 2 || (fields[1] != "train" && fields[1] != "test")) {
      throw Error(ErrorKind::format, where + ": malformed line, expected 'object_id<TAB>train|test'");
    }
    if (!assigned.emplace(fields[0], fields[1] == "train" ? Subset::train : Subset::test).second) {
      throw Error(ErrorKind::data, where + ": object '" + fields[0] + "' assigned twice");
    }
  }
  SplitAssignment split;
  split.seed = seed;
  for (const auto& rec : manifest.records) {
    auto it = assigned.find(rec.object_id);
    if (it == assigned.end()) {
      throw Error(ErrorKind::data, "split " + path.string() + " does not assign object '" +
                                       rec.object_id + "'");
    }
    split.object_ids.push_back(rec.object_id);
    split.subsets.push_back(it->second);
    assigned.erase(it);
  }
  if (!assigned.empty()) {
    throw Error(ErrorKind::data, "split " + path.string() + " names object '" +
                                     assigned.begin()->first + "' absent from the manifest");
  }
  return split;
}

std::vector<std::size_t> subset_indices(const DatasetManifest& manifest,
                                        const SplitAssignment& split, Subset subset) {
  if (split.object_ids.size() != manifest.records.size()) {
    throw Error(ErrorKind::data, "split and manifest disagree on the number of objects");
  }
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < manifest.records.size(); ++i) {
    if (split.object_ids[i] != manifest.records[i].object_id) {
      throw Error(ErrorKind::data, "split is not aligned with the manifest at object '" +
                                       manifest.records[i].object_id + "'");
    }
    if (split.subsets[i] == subset) out.push_back(i);
  }
  return out;
}

}  // namespace urbanfuse
