#include "urbanfuse/urbanfuse.h"

#include <cstring>
#include <exception>
#include <new>
#include <string>
#include <utility>
#include <vector>

#include "urbanfuse/aggregation.hpp"
#include "urbanfuse/dataset.hpp"
#include "urbanfuse/embedding.hpp"
#include "urbanfuse/error.hpp"
#include "urbanfuse/evaluation.hpp"
#include "urbanfuse/fusion.hpp"
#include "urbanfuse/pipeline.hpp"
#include "urbanfuse/retrieval.hpp"
#include "urbanfuse/sweep.hpp"
#include "urbanfuse/synth.hpp"

namespace uf = urbanfuse;

struct uf_vocab {
  uf::LabelVocabulary vocab;
};

struct uf_dataset {
  uf::DatasetManifest manifest;
  uf_vocab vocab;
};

struct uf_split {
  uf::SplitAssignment split;
};

struct uf_model {
  uf::FusionModel model;
  std::vector<double> trace;
};

struct uf_embedding {
  uf::EmbeddingModel embedding;
};

struct uf_index {
  uf::RetrievalIndex index;
};

struct uf_report {
  uf::EvaluationReport report;
};

struct uf_summary {
  uf::ReportSummary summary;
};

namespace {

thread_local std::string last_error;

uf_status status_of(uf::ErrorKind kind) {
  switch (kind) {
    case uf::ErrorKind::invalid_argument: return UF_ERR_INVALID_ARGUMENT;
    case uf::ErrorKind::io: return UF_ERR_IO;
    case uf::ErrorKind::format: return UF_ERR_FORMAT;
    case uf::ErrorKind::dimension: return UF_ERR_DIMENSION;
    case uf::ErrorKind::data: return UF_ERR_DATA;
    case uf::ErrorKind::numeric: return UF_ERR_NUMERIC;
    case uf::ErrorKind::state: return UF_ERR_STATE;
  }
  return UF_ERR_INTERNAL;
}

template <class F>
uf_status guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return UF_OK;
  } catch (const uf::Error& e) {
    last_error = e.what();
    return status_of(e.kind());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return UF_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return UF_ERR_INTERNAL;
  } catch (...) {
    last_error = "unknown failure";
    return UF_ERR_INTERNAL;
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw uf::Error(uf::ErrorKind::invalid_argument, what);
}

uf::Pooling pooling_of(uf_pooling p) {
  switch (p) {
    case UF_POOL_AVG: return uf::Pooling::avg;
    case UF_POOL_MAX: return uf::Pooling::max;
  }
  throw uf::Error(uf::ErrorKind::invalid_argument, "unknown pooling");
}

uf::FusionMode mode_of(uf_mode m) {
  switch (m) {
    case UF_MODE_OVERHEAD: return uf::FusionMode::overhead_only;
    case UF_MODE_GROUND: return uf::FusionMode::ground_only;
    case UF_MODE_MULTIMODAL: return uf::FusionMode::multimodal;
  }
  throw uf::Error(uf::ErrorKind::invalid_argument, "unknown mode");
}

uf::SweepParameter sweep_of(uf_sweep_param p) {
  switch (p) {
    case UF_SWEEP_PCA_FRACTION: return uf::SweepParameter::pca_fraction;
    case UF_SWEEP_EMBEDDING_FRACTION: return uf::SweepParameter::embedding_fraction;
    case UF_SWEEP_POWER: return uf::SweepParameter::power;
  }
  throw uf::Error(uf::ErrorKind::invalid_argument, "unknown sweep parameter");
}

uf::CcaParams cca_of(const uf_cca_params& p) {
  uf::CcaParams out;
  out.pca_fraction = p.pca_fraction;
  out.embedding_fraction = p.embedding_fraction;
  out.power = p.power;
  out.eta = p.eta;
  return out;
}

uf::TrainConfig train_of(const uf_train_config& c) {
  uf::TrainConfig out;
  out.epochs = c.epochs;
  out.batch_size = c.batch_size;
  out.lr0 = c.lr0;
  out.lr_decay_factor = c.lr_decay_factor;
  out.lr_decay_every = c.lr_decay_every;
  out.momentum = c.momentum;
  out.seed = c.seed;
  return out;
}

const uf::UrbanObjectRecord& record_at(const uf_dataset* ds, std::size_t index) {
  require(ds != nullptr, "null dataset");
  if (index >= ds->manifest.records.size()) {
    throw uf::Error(uf::ErrorKind::invalid_argument,
                    "object index " + std::to_string(index) + " out of range");
  }
  return ds->manifest.records[index];
}

uf::FeatureVector feature_from(const float* data, std::size_t dim) {
  require(data != nullptr, "null feature pointer");
  return uf::FeatureVector{std::vector<float>(data, data + dim)};
}

void emit_prediction(const uf::Prediction& p, size_t* label, double* probabilities) {
  *label = p.label;
  if (probabilities != nullptr) {
    for (Eigen::Index i = 0; i < p.probabilities.size(); ++i) probabilities[i] = p.probabilities[i];
  }
}

void emit_neighbors(const uf_index* index, const uf::QueryResult& r, uf_neighbor* out,
                    size_t* n_out, int* zero_norm) {
  for (std::size_t i = 0; i < r.neighbors.size(); ++i) {
    const auto& n = r.neighbors[i];
    out[i] = uf_neighbor{n.row, index->index.object_ids[n.row].c_str(), n.label, n.similarity};
  }
  *n_out = r.neighbors.size();
  if (zero_norm != nullptr) *zero_norm = r.zero_norm_query ? 1 : 0;
}

std::vector<std::string> names_of(const uf_vocab* vocab, std::size_t k) {
  if (vocab != nullptr) return vocab->vocab.names();
  std::vector<std::string> names;
  for (std::size_t i = 0; i < k; ++i) names.push_back(std::to_string(i));
  return names;
}

template <class T>
void store(T** out, T value) {
  *out = new T(std::move(value));
}

}  // namespace

extern "C" {

const char* uf_version(void) { return "1.0.0"; }

const char* uf_status_string(uf_status status) {
  switch (status) {
    case UF_OK: return "ok";
    case UF_ERR_INVALID_ARGUMENT: return "invalid argument";
    case UF_ERR_IO: return "i/o error";
    case UF_ERR_FORMAT: return "format error";
    case UF_ERR_DIMENSION: return "dimension mismatch";
    case UF_ERR_DATA: return "data error";
    case UF_ERR_NUMERIC: return "numeric failure";
    case UF_ERR_STATE: return "invalid state";
    case UF_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* uf_last_error(void) { return last_error.c_str(); }

uf_status uf_parse_mode(const char* text, uf_mode* out) {
  return guarded([&] {
    require(text != nullptr && out != nullptr, "null argument");
    *out = static_cast<uf_mode>(uf::parse_mode(text));
  });
}

uf_status uf_parse_pooling(const char* text, uf_pooling* out) {
  return guarded([&] {
    require(text != nullptr && out != nullptr, "null argument");
    *out = uf::parse_pooling(text) == uf::Pooling::avg ? UF_POOL_AVG : UF_POOL_MAX;
  });
}

uf_status uf_parse_sweep_param(const char* text, uf_sweep_param* out) {
  return guarded([&] {
    require(text != nullptr && out != nullptr, "null argument");
    switch (uf::parse_sweep_parameter(text)) {
      case uf::SweepParameter::pca_fraction: *out = UF_SWEEP_PCA_FRACTION; break;
      case uf::SweepParameter::embedding_fraction: *out = UF_SWEEP_EMBEDDING_FRACTION; break;
      case uf::SweepParameter::power: *out = UF_SWEEP_POWER; break;
    }
  });
}

const char* uf_mode_name(uf_mode mode) {
  switch (mode) {
    case UF_MODE_OVERHEAD:
    case UF_MODE_GROUND:
    case UF_MODE_MULTIMODAL: return uf::to_string(mode_of(mode));
  }
  return "unknown";
}

const char* uf_pooling_name(uf_pooling pooling) {
  return pooling == UF_POOL_MAX ? "max" : pooling == UF_POOL_AVG ? "avg" : "unknown";
}

const char* uf_sweep_param_name(uf_sweep_param param) {
  switch (param) {
    case UF_SWEEP_PCA_FRACTION:
    case UF_SWEEP_EMBEDDING_FRACTION:
    case UF_SWEEP_POWER: return uf::to_string(sweep_of(param));
  }
  return "unknown";
}

uf_status uf_format_number(double value, char* buffer, size_t size) {
  return guarded([&] {
    require(buffer != nullptr, "null buffer");
    const std::string text = uf::format_number(value);
    require(text.size() < size, "buffer too small");
    std::memcpy(buffer, text.c_str(), text.size() + 1);
  });
}

// ---- synthetic data --------------------------------------------------------

void uf_synth_config_default(uf_synth_config* config) {
  if (config == nullptr) return;
  const uf::SynthConfig d;
  *config = uf_synth_config{d.num_classes,     d.objects_per_class, d.d_gsv,
                            d.d_oh,            d.latent_dim,        d.subtypes_per_class,
                            d.min_views,       d.max_views,         d.shared_signal,
                            d.exclusive_gsv,   d.exclusive_oh,      d.shared_nuisance,
                            d.noise_sigma,     d.feature_noise,     d.missing_ground_fraction,
                            d.seed};
}

uf_status uf_synth_generate(const uf_synth_config* config, const char* out_dir, uf_dataset** out) {
  return guarded([&] {
    require(config != nullptr && out_dir != nullptr, "null argument");
    uf::SynthConfig c;
    c.num_classes = config->num_classes;
    c.objects_per_class = config->objects_per_class;
    c.d_gsv = config->d_gsv;
    c.d_oh = config->d_oh;
    c.latent_dim = config->latent_dim;
    c.subtypes_per_class = config->subtypes_per_class;
    c.min_views = config->min_views;
    c.max_views = config->max_views;
    c.shared_signal = config->shared_signal;
    c.exclusive_gsv = config->exclusive_gsv;
    c.exclusive_oh = config->exclusive_oh;
    c.shared_nuisance = config->shared_nuisance;
    c.noise_sigma = config->noise_sigma;
    c.feature_noise = config->feature_noise;
    c.missing_ground_fraction = config->missing_ground_fraction;
    c.seed = config->seed;
    auto manifest = uf::generate(c, out_dir);
    if (out != nullptr) {
      uf_vocab vocab{manifest.vocabulary};
      store(out, uf_dataset{std::move(manifest), std::move(vocab)});
    }
  });
}

// ---- vocabulary and dataset -------------------------------------------------

uf_status uf_vocab_load(const char* path, uf_vocab** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    store(out, uf_vocab{uf::LabelVocabulary::load(path)});
  });
}

void uf_vocab_free(uf_vocab* vocab) { delete vocab; }

size_t uf_vocab_size(const uf_vocab* vocab) { return vocab ? vocab->vocab.size() : 0; }

uf_status uf_vocab_name(const uf_vocab* vocab, size_t label, const char** out) {
  return guarded([&] {
    require(vocab != nullptr && out != nullptr, "null argument");
    require(label < vocab->vocab.size(), "label out of range");
    *out = vocab->vocab.name(label).c_str();
  });
}

uf_status uf_vocab_index_of(const uf_vocab* vocab, const char* name, size_t* out) {
  return guarded([&] {
    require(vocab != nullptr && name != nullptr && out != nullptr, "null argument");
    const auto index = vocab->vocab.index_of(name);
    if (!index) throw uf::Error(uf::ErrorKind::data, std::string("unknown class '") + name + "'");
    *out = *index;
  });
}

uf_status uf_dataset_load(const char* manifest_path, const char* vocab_path, uf_dataset** out) {
  return guarded([&] {
    require(manifest_path != nullptr && out != nullptr, "null argument");
    auto manifest = vocab_path != nullptr ? uf::load_manifest(manifest_path, vocab_path)
                                          : uf::load_manifest(manifest_path);
    uf_vocab vocab{manifest.vocabulary};
    store(out, uf_dataset{std::move(manifest), std::move(vocab)});
  });
}

void uf_dataset_free(uf_dataset* dataset) { delete dataset; }

size_t uf_dataset_size(const uf_dataset* dataset) {
  return dataset ? dataset->manifest.records.size() : 0;
}

size_t uf_dataset_num_classes(const uf_dataset* dataset) {
  return dataset ? dataset->manifest.num_classes() : 0;
}

size_t uf_dataset_d_gsv(const uf_dataset* dataset) { return dataset ? dataset->manifest.d_gsv : 0; }

size_t uf_dataset_d_oh(const uf_dataset* dataset) { return dataset ? dataset->manifest.d_oh : 0; }

const uf_vocab* uf_dataset_vocab(const uf_dataset* dataset) {
  return dataset ? &dataset->vocab : nullptr;
}

uf_status uf_dataset_object_id(const uf_dataset* dataset, size_t index, const char** out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    *out = record_at(dataset, index).object_id.c_str();
  });
}

uf_status uf_dataset_label(const uf_dataset* dataset, size_t index, size_t* out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    *out = record_at(dataset, index).label;
  });
}

uf_status uf_dataset_ground_views(const uf_dataset* dataset, size_t index, size_t* out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    *out = record_at(dataset, index).ground_views.size();
  });
}

uf_status uf_dataset_find(const uf_dataset* dataset, const char* object_id, size_t* out) {
  return guarded([&] {
    require(dataset != nullptr && object_id != nullptr && out != nullptr, "null argument");
    const auto index = dataset->manifest.find(object_id);
    if (!index) {
      throw uf::Error(uf::ErrorKind::data, std::string("unknown object '") + object_id + "'");
    }
    *out = *index;
  });
}

// ---- splits -------------------------------------------------------------------

uf_status uf_split_stratified(const uf_dataset* dataset, uint64_t seed, double train_fraction,
                              uf_split** out) {
  return guarded([&] {
    require(dataset != nullptr && out != nullptr, "null argument");
    store(out, uf_split{uf::stratified_split(dataset->manifest, seed, train_fraction)});
  });
}

uf_status uf_split_load(const uf_dataset* dataset, const char* path, uf_split** out) {
  return guarded([&] {
    require(dataset != nullptr && path != nullptr && out != nullptr, "null argument");
    store(out, uf_split{uf::read_split(path, dataset->manifest)});
  });
}

uf_status uf_split_save(const uf_split* split, const char* path) {
  return guarded([&] {
    require(split != nullptr && path != nullptr, "null argument");
    uf::write_split(split->split, path);
  });
}

void uf_split_free(uf_split* split) { delete split; }

uint64_t uf_split_seed(const uf_split* split) { return split ? split->split.seed : 0; }

size_t uf_split_count(const uf_split* split, uf_subset subset) {
  if (split == nullptr) return 0;
  return split->split.count(subset == UF_TRAIN ? uf::Subset::train : uf::Subset::test);
}

uf_status uf_split_subset(const uf_split* split, size_t index, uf_subset* out) {
  return guarded([&] {
    require(split != nullptr && out != nullptr, "null argument");
    require(index < split->split.subsets.size(), "object index out of range");
    *out = split->split.subsets[index] == uf::Subset::train ? UF_TRAIN : UF_TEST;
  });
}

// ---- fusion head ----------------------------------------------------------------

void uf_train_config_default(uf_train_config* config) {
  if (config == nullptr) return;
  const uf::TrainConfig d;
  *config = uf_train_config{d.epochs,         d.batch_size, d.lr0,  d.lr_decay_factor,
                            d.lr_decay_every, d.momentum,   d.seed};
}

double uf_learning_rate(const uf_train_config* config, size_t epoch) {
  return config ? uf::learning_rate(train_of(*config), epoch) : 0.0;
}

uf_status uf_model_train(const uf_dataset* dataset, const uf_split* split, uf_mode mode,
                         uf_pooling pooling, const uf_train_config* config, uf_model** out) {
  return guarded([&] {
    require(dataset != nullptr && split != nullptr && config != nullptr && out != nullptr,
            "null argument");
    const auto& m = dataset->manifest;
    auto model = uf::init_model(mode_of(mode), m.num_classes(), m.d_gsv, m.d_oh, config->seed);
    auto result = uf::train(std::move(model), m, split->split, train_of(*config), pooling_of(pooling));
    store(out, uf_model{std::move(result.model), std::move(result.loss_trace)});
  });
}

uf_status uf_model_save(const uf_model* model, const char* path) {
  return guarded([&] {
    require(model != nullptr && path != nullptr, "null argument");
    uf::save_checkpoint(model->model, path);
  });
}

uf_status uf_model_load(const char* path, uf_model** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    store(out, uf_model{uf::load_checkpoint(path), {}});
  });
}

void uf_model_free(uf_model* model) { delete model; }

uf_mode uf_model_mode(const uf_model* model) {
  return model ? static_cast<uf_mode>(model->model.mode) : UF_MODE_MULTIMODAL;
}

size_t uf_model_num_classes(const uf_model* model) { return model ? model->model.num_classes : 0; }

size_t uf_model_loss_trace(const uf_model* model, const double** out) {
  if (model == nullptr) return 0;
  if (out != nullptr) *out = model->trace.data();
  return model->trace.size();
}

uf_status uf_model_predict_object(const uf_model* model, const uf_dataset* dataset, size_t index,
                                  uf_pooling pooling, size_t* label, double* probabilities) {
  return guarded([&] {
    require(model != nullptr && label != nullptr, "null argument");
    const auto& record = record_at(dataset, index);
    const auto& fm = model->model;
    uf::AggregatedFeature ground;
    if (uf::needs_ground(fm.mode)) {
      if (!record.has_ground()) {
        throw uf::Error(uf::ErrorKind::data,
                        "object '" + record.object_id + "' has no ground views");
      }
      ground = uf::aggregate(record.ground_views, pooling_of(pooling));
    }
    const auto p = uf::predict(fm, &record.overhead, uf::needs_ground(fm.mode) ? &ground : nullptr);
    emit_prediction(p, label, probabilities);
  });
}

uf_status uf_model_predict(const uf_model* model, const float* overhead, size_t d_oh,
                           const float* ground, size_t n_views, size_t d_gsv, uf_pooling pooling,
                           size_t* label, double* probabilities) {
  return guarded([&] {
    require(model != nullptr && label != nullptr, "null argument");
    const auto& fm = model->model;
    uf::FeatureVector oh;
    if (uf::needs_overhead(fm.mode)) oh = feature_from(overhead, d_oh);
    uf::AggregatedFeature agg;
    if (uf::needs_ground(fm.mode)) {
      require(ground != nullptr || n_views == 0, "null ground pointer");
      std::vector<uf::FeatureVector> views;
      for (std::size_t v = 0; v < n_views; ++v) views.push_back(feature_from(ground + v * d_gsv, d_gsv));
      agg = uf::aggregate(views, pooling_of(pooling));
    }
    const auto p = uf::predict(fm, uf::needs_overhead(fm.mode) ? &oh : nullptr,
                               uf::needs_ground(fm.mode) ? &agg : nullptr);
    emit_prediction(p, label, probabilities);
  });
}

// ---- embedding and retrieval ------------------------------------------------------

void uf_cca_params_default(uf_cca_params* params) {
  if (params == nullptr) return;
  const uf::CcaParams d;
  *params = uf_cca_params{d.pca_fraction, d.embedding_fraction, d.power, d.eta};
}

uf_status uf_embedding_fit(const uf_dataset* dataset, const uf_split* split, uf_pooling pooling,
                           const uf_cca_params* params, uf_embedding** out) {
  return guarded([&] {
    require(dataset != nullptr && split != nullptr && params != nullptr && out != nullptr,
            "null argument");
    store(out, uf_embedding{uf::fit_embedding(dataset->manifest, split->split, pooling_of(pooling),
                                              cca_of(*params))});
  });
}

uf_status uf_embedding_save(const uf_embedding* embedding, const char* path) {
  return guarded([&] {
    require(embedding != nullptr && path != nullptr, "null argument");
    uf::save_embedding(embedding->embedding, path);
  });
}

uf_status uf_embedding_load(const char* path, uf_embedding** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    store(out, uf_embedding{uf::load_embedding(path)});
  });
}

void uf_embedding_free(uf_embedding* embedding) { delete embedding; }

size_t uf_embedding_dim(const uf_embedding* embedding) {
  return embedding ? embedding->embedding.dim() : 0;
}

void uf_embedding_params(const uf_embedding* embedding, uf_cca_params* out) {
  if (embedding == nullptr || out == nullptr) return;
  const auto& p = embedding->embedding.params;
  *out = uf_cca_params{p.pca_fraction, p.embedding_fraction, p.power, p.eta};
}

size_t uf_embedding_eigenvalues(const uf_embedding* embedding, double* out, size_t n) {
  if (embedding == nullptr || out == nullptr) return 0;
  const auto& ev = embedding->embedding.eigenvalues;
  const std::size_t m = std::min<std::size_t>(n, static_cast<std::size_t>(ev.size()));
  for (std::size_t i = 0; i < m; ++i) out[i] = ev[static_cast<Eigen::Index>(i)];
  return m;
}

uf_status uf_index_build(const uf_embedding* embedding, const uf_dataset* dataset,
                         const uf_split* split, uf_pooling pooling, double power, uf_index** out) {
  return guarded([&] {
    require(embedding != nullptr && dataset != nullptr && split != nullptr && out != nullptr,
            "null argument");
    store(out, uf_index{uf::build_index(embedding->embedding, dataset->manifest, split->split,
                                        pooling_of(pooling), power)});
  });
}

void uf_index_free(uf_index* index) { delete index; }

size_t uf_index_size(const uf_index* index) { return index ? index->index.size() : 0; }

uf_status uf_index_query(const uf_index* index, const uf_embedding* embedding,
                         const float* overhead, size_t d_oh, size_t k, uf_neighbor* out,
                         size_t* n_out, int* zero_norm_query) {
  return guarded([&] {
    require(index != nullptr && embedding != nullptr && n_out != nullptr, "null argument");
    require(out != nullptr || k == 0, "null output buffer");
    const auto r = uf::query(index->index, embedding->embedding, feature_from(overhead, d_oh), k);
    emit_neighbors(index, r, out, n_out, zero_norm_query);
  });
}

uf_status uf_index_query_object(const uf_index* index, const uf_embedding* embedding,
                                const uf_dataset* dataset, size_t object, size_t k,
                                uf_neighbor* out, size_t* n_out, int* zero_norm_query) {
  return guarded([&] {
    require(index != nullptr && embedding != nullptr && n_out != nullptr, "null argument");
    require(out != nullptr || k == 0, "null output buffer");
    const auto& record = record_at(dataset, object);
    const auto r = uf::query(index->index, embedding->embedding, record.overhead, k);
    emit_neighbors(index, r, out, n_out, zero_norm_query);
  });
}

uf_status uf_predict_missing(const uf_model* model, const uf_embedding* embedding,
                             const uf_index* index, const float* overhead, size_t d_oh, size_t k,
                             size_t* label, double* probabilities, int* zero_norm_query) {
  return guarded([&] {
    require(model != nullptr && embedding != nullptr && index != nullptr && label != nullptr,
            "null argument");
    const auto r = uf::predict_missing(model->model, embedding->embedding, index->index,
                                       feature_from(overhead, d_oh), k);
    emit_prediction(r.prediction, label, probabilities);
    if (zero_norm_query != nullptr) *zero_norm_query = r.zero_norm_query ? 1 : 0;
  });
}

uf_status uf_predict_missing_object(const uf_model* model, const uf_embedding* embedding,
                                    const uf_index* index, const uf_dataset* dataset,
                                    size_t object, size_t k, size_t* label, double* probabilities,
                                    int* zero_norm_query) {
  return guarded([&] {
    require(model != nullptr && embedding != nullptr && index != nullptr && label != nullptr,
            "null argument");
    const auto& record = record_at(dataset, object);
    const auto r = uf::predict_missing(model->model, embedding->embedding, index->index,
                                       record.overhead, k);
    emit_prediction(r.prediction, label, probabilities);
    if (zero_norm_query != nullptr) *zero_norm_query = r.zero_norm_query ? 1 : 0;
  });
}

uf_status uf_label_coherence(const uf_index* index, const uf_embedding* embedding,
                             const uf_dataset* dataset, const uf_split* split, size_t k_max,
                             double* hit_rate, double* mean_correct, size_t* n_out) {
  return guarded([&] {
    require(index != nullptr && embedding != nullptr && dataset != nullptr && split != nullptr &&
                n_out != nullptr,
            "null argument");
    const auto test = uf::subset_indices(dataset->manifest, split->split, uf::Subset::test);
    const auto curve = uf::label_coherence_curve(index->index, embedding->embedding,
                                                 uf::overhead_matrix(dataset->manifest, test),
                                                 uf::labels_of(dataset->manifest, test), k_max);
    for (std::size_t i = 0; i < curve.hit_rate.size(); ++i) {
      if (hit_rate != nullptr) hit_rate[i] = curve.hit_rate[i];
      if (mean_correct != nullptr) mean_correct[i] = curve.mean_correct[i];
    }
    *n_out = curve.hit_rate.size();
  });
}

uf_status uf_sweep(const uf_dataset* dataset, const uf_split* split, uf_pooling pooling,
                   const uf_cca_params* base, uf_sweep_param param, const double* values,
                   size_t n_values, double* accuracies) {
  return guarded([&] {
    require(dataset != nullptr && split != nullptr && base != nullptr, "null argument");
    require((values != nullptr && accuracies != nullptr) || n_values == 0, "null buffer");
    const auto data = uf::make_retrieval_data(dataset->manifest, split->split, pooling_of(pooling));
    const auto points = uf::sensitivity_sweep(data, sweep_of(param),
                                              std::span<const double>(values, n_values),
                                              cca_of(*base));
    for (std::size_t i = 0; i < points.size(); ++i) accuracies[i] = points[i].accuracy;
  });
}

// ---- evaluation ----------------------------------------------------------------------

uf_status uf_evaluate(const size_t* predictions, const size_t* truth, size_t n,
                      size_t num_classes, uf_report** out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    require((predictions != nullptr && truth != nullptr) || n == 0, "null label buffer");
    store(out, uf_report{uf::evaluate(std::span<const std::size_t>(predictions, n),
                                      std::span<const std::size_t>(truth, n), num_classes)});
  });
}

void uf_report_free(uf_report* report) { delete report; }

double uf_report_oa(const uf_report* report) { return report ? report->report.oa : 0.0; }

double uf_report_aa(const uf_report* report) { return report ? report->report.aa : 0.0; }

size_t uf_report_count(const uf_report* report) { return report ? report->report.n_eval : 0; }

int uf_report_producer_accuracy(const uf_report* report, size_t label, double* out) {
  if (report == nullptr || label >= report->report.producer_accuracy.size()) return 0;
  const auto& pa = report->report.producer_accuracy[label];
  if (!pa) return 0;
  if (out != nullptr) *out = *pa;
  return 1;
}

uint64_t uf_report_confusion(const uf_report* report, size_t truth, size_t predicted) {
  if (report == nullptr) return 0;
  const auto& c = report->report.confusion;
  if (truth >= c.num_classes() || predicted >= c.num_classes()) return 0;
  return c.at(truth, predicted);
}

uf_status uf_report_write_csv(const uf_report* report, const char* path) {
  return guarded([&] {
    require(report != nullptr && path != nullptr, "null argument");
    uf::write_report_csv(report->report, path);
  });
}

uf_status uf_report_write_text(const uf_report* report, const uf_vocab* vocab, const char* path) {
  return guarded([&] {
    require(report != nullptr && path != nullptr, "null argument");
    const auto names = names_of(vocab, report->report.confusion.num_classes());
    uf::write_report_text(report->report, names, path);
  });
}

uf_status uf_report_write_confusion(const uf_report* report, const uf_vocab* vocab,
                                    const char* path) {
  return guarded([&] {
    require(report != nullptr && path != nullptr, "null argument");
    const auto names = names_of(vocab, report->report.confusion.num_classes());
    uf::write_confusion_csv(report->report.confusion.row_normalized(), names, path);
  });
}

uf_status uf_summary_average(const uf_report* const* reports, size_t n, uf_summary** out) {
  return guarded([&] {
    require(out != nullptr && (reports != nullptr || n == 0), "null argument");
    std::vector<uf::EvaluationReport> copies;
    for (std::size_t i = 0; i < n; ++i) {
      require(reports[i] != nullptr, "null report");
      copies.push_back(reports[i]->report);
    }
    store(out, uf_summary{uf::average_reports(copies)});
  });
}

void uf_summary_free(uf_summary* summary) { delete summary; }

size_t uf_summary_splits(const uf_summary* summary) { return summary ? summary->summary.splits : 0; }

void uf_summary_oa(const uf_summary* summary, double* mean, double* std) {
  if (summary == nullptr) return;
  if (mean != nullptr) *mean = summary->summary.oa.mean;
  if (std != nullptr) *std = summary->summary.oa.std;
}

void uf_summary_aa(const uf_summary* summary, double* mean, double* std) {
  if (summary == nullptr) return;
  if (mean != nullptr) *mean = summary->summary.aa.mean;
  if (std != nullptr) *std = summary->summary.aa.std;
}

uf_status uf_summary_write_csv(const uf_summary* summary, const char* path) {
  return guarded([&] {
    require(summary != nullptr && path != nullptr, "null argument");
    uf::write_summary_csv(summary->summary, path);
  });
}

uf_status uf_summary_write_text(const uf_summary* summary, const uf_vocab* vocab,
                                const char* path) {
  return guarded([&] {
    require(summary != nullptr && path != nullptr, "null argument");
    const auto names = names_of(vocab, summary->summary.num_classes);
    uf::write_summary_text(summary->summary, names, path);
  });
}

uf_status uf_summary_write_confusion(const uf_summary* summary, const uf_vocab* vocab,
                                     const char* path) {
  return guarded([&] {
    require(summary != nullptr && path != nullptr, "null argument");
    const auto names = names_of(vocab, summary->summary.num_classes);
    uf::write_confusion_csv(summary->summary.confusion_percent, names, path);
  });
}

}  // extern "C"
