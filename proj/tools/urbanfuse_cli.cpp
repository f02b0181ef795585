// urbanfuse command-line tool. Every command writes into the --out run
// directory and echoes its resolved settings to config.txt there.

#include <CLI11.hpp>

#include <cerrno>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "urbanfuse/urbanfuse.h"

namespace fs = std::filesystem;

namespace {

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check(uf_status status) {
  if (status != UF_OK) throw Failure(uf_last_error());
}

template <class T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};

using Dataset = std::unique_ptr<uf_dataset, Deleter<uf_dataset, uf_dataset_free>>;
using Split = std::unique_ptr<uf_split, Deleter<uf_split, uf_split_free>>;
using Model = std::unique_ptr<uf_model, Deleter<uf_model, uf_model_free>>;
using Embedding = std::unique_ptr<uf_embedding, Deleter<uf_embedding, uf_embedding_free>>;
using Index = std::unique_ptr<uf_index, Deleter<uf_index, uf_index_free>>;
using Report = std::unique_ptr<uf_report, Deleter<uf_report, uf_report_free>>;
using Summary = std::unique_ptr<uf_summary, Deleter<uf_summary, uf_summary_free>>;
using Vocab = std::unique_ptr<uf_vocab, Deleter<uf_vocab, uf_vocab_free>>;

struct Key {
  std::string name;
  std::string fallback;
  std::string help;
};

class Run;
using Handler = void (*)(Run&);

struct Command {
  std::string name;
  std::string help;
  std::vector<Key> keys;
  Handler handler;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string num(double v) {
  char buf[40];
  check(uf_format_number(v, buf, sizeof buf));
  return buf;
}

class Run {
 public:
  Run(const Command& command) : command_(command) {
    for (const auto& key : command.keys) values_[key.name] = key.fallback;
  }

  const Command& command() const { return command_; }

  bool known(const std::string& key) const { return values_.count(key) > 0; }
  void set(const std::string& key, const std::string& value) { values_.at(key) = value; }

  bool has(const std::string& key) const { return !values_.at(key).empty(); }
  const std::string& text(const std::string& key) const { return values_.at(key); }

  const std::string& required(const std::string& key) const {
    if (!has(key)) throw Failure("--" + key + " is required");
    return text(key);
  }

  std::uint64_t integer(const std::string& key) const {
    const auto& s = required(key);
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      throw Failure("--" + key + ": expected a non-negative integer, got '" + s + "'");
    }
    return v;
  }

  double real(const std::string& key) const { return parse_real(key, required(key)); }

  std::vector<double> reals(const std::string& key) const {
    std::vector<double> out;
    for (const auto& item : split_list(required(key))) out.push_back(parse_real(key, item));
    if (out.empty()) throw Failure("--" + key + " lists no values");
    return out;
  }

  fs::path out_dir() const { return fs::path(required("out")); }

  void load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Failure("cannot open config file " + path);
    std::string line;
    for (std::size_t n = 1; std::getline(in, line); ++n) {
      const std::string where = path + ":" + std::to_string(n);
      line = trim(line);
      if (line.empty() || line[0] == '#') continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw Failure(where + ": expected 'key = value'");
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (key == "command") {
        if (value != command_.name) {
          throw Failure(where + ": config is for command '" + value + "', not '" +
                        command_.name + "'");
        }
        continue;
      }
      if (!known(key)) throw Failure(where + ": unknown key '" + key + "'");
      set(key, value);
    }
  }

  void write_echo() const {
    fs::create_directories(out_dir());
    std::ofstream out(out_dir() / "config.txt", std::ios::trunc);
    if (!out) throw Failure("cannot write " + (out_dir() / "config.txt").string());
    out << "command = " << command_.name << '\n';
    for (const auto& key : command_.keys) out << key.name << " = " << values_.at(key.name) << '\n';
  }

 private:
  static double parse_real(const std::string& key, const std::string& s) {
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE) {
      throw Failure("--" + key + ": expected a number, got '" + s + "'");
    }
    return v;
  }

  const Command& command_;
  std::map<std::string, std::string> values_;
};

// ---- shared loading -------------------------------------------------------

Dataset load_dataset(const Run& run) {
  uf_dataset* ds = nullptr;
  const std::string vocab = run.text("vocab");
  check(uf_dataset_load(run.required("manifest").c_str(), vocab.empty() ? nullptr : vocab.c_str(),
                        &ds));
  return Dataset(ds);
}

Split load_split(const Run& run, const uf_dataset* ds) {
  uf_split* split = nullptr;
  if (run.has("split")) {
    check(uf_split_load(ds, run.text("split").c_str(), &split));
  } else {
    check(uf_split_stratified(ds, run.integer("seed"), 0.8, &split));
  }
  return Split(split);
}

uf_pooling pooling(const Run& run) {
  uf_pooling p;
  check(uf_parse_pooling(run.required("pooling").c_str(), &p));
  return p;
}

uf_cca_params cca_params(const Run& run) {
  uf_cca_params p;
  p.pca_fraction = run.real("pca-frac");
  p.embedding_fraction = run.real("demb-frac");
  p.power = run.real("power");
  p.eta = run.real("eta");
  return p;
}

Model load_model(const Run& run) {
  uf_model* m = nullptr;
  check(uf_model_load(run.required("model").c_str(), &m));
  return Model(m);
}

Embedding load_embedding(const Run& run) {
  uf_embedding* e = nullptr;
  check(uf_embedding_load(run.required("embedding").c_str(), &e));
  return Embedding(e);
}

// The embedding's stored exponent applies unless --power or the config set one.
double resolve_power(Run& run, const uf_embedding* emb) {
  if (!run.has("power")) {
    uf_cca_params p;
    uf_embedding_params(emb, &p);
    run.set("power", num(p.power));
  }
  return run.real("power");
}

std::string id_of(const uf_dataset* ds, std::size_t i) {
  const char* id = nullptr;
  check(uf_dataset_object_id(ds, i, &id));
  return id;
}

std::size_t label_of(const uf_dataset* ds, std::size_t i) {
  std::size_t label = 0;
  check(uf_dataset_label(ds, i, &label));
  return label;
}

std::string class_name(const uf_vocab* vocab, std::size_t label) {
  const char* name = nullptr;
  check(uf_vocab_name(vocab, label, &name));
  return name;
}

bool is_test(const uf_split* split, std::size_t i) {
  uf_subset s;
  check(uf_split_subset(split, i, &s));
  return s == UF_TEST;
}

std::ofstream open_csv(const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Failure("cannot write " + path.string());
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") != std::string::npos) {
    throw Failure("value '" + s + "' cannot be written to CSV unquoted");
  }
  return s;
}

struct Predictions {
  std::vector<std::string> ids;
  std::vector<std::size_t> truth;
  std::vector<std::size_t> predicted;
};

void write_predictions(const Predictions& p, const uf_vocab* vocab, const fs::path& path) {
  auto out = open_csv(path);
  out << "object_id,truth,predicted\n";
  for (std::size_t i = 0; i < p.ids.size(); ++i) {
    out << csv_field(p.ids[i]) << ',' << csv_field(class_name(vocab, p.truth[i])) << ','
        << csv_field(class_name(vocab, p.predicted[i])) << '\n';
  }
}

Predictions read_predictions(const std::string& path, const uf_vocab* vocab) {
  std::ifstream in(path);
  if (!in) throw Failure("cannot open predictions file " + path);
  Predictions p;
  std::string line;
  std::getline(in, line);
  if (trim(line) != "object_id,truth,predicted") {
    throw Failure(path + ":1: expected header 'object_id,truth,predicted'");
  }
  for (std::size_t n = 2; std::getline(in, line); ++n) {
    line = trim(line);
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::istringstream row(line);
    for (std::string item; std::getline(row, item, ',');) f.push_back(trim(item));
    if (f.size() != 3) throw Failure(path + ":" + std::to_string(n) + ": expected 3 fields");
    std::size_t t = 0, q = 0;
    if (uf_vocab_index_of(vocab, f[1].c_str(), &t) != UF_OK ||
        uf_vocab_index_of(vocab, f[2].c_str(), &q) != UF_OK) {
      throw Failure(path + ":" + std::to_string(n) + ": " + uf_last_error());
    }
    p.ids.push_back(f[0]);
    p.truth.push_back(t);
    p.predicted.push_back(q);
  }
  return p;
}

Report evaluate(const Predictions& p, std::size_t k) {
  uf_report* r = nullptr;
  check(uf_evaluate(p.predicted.data(), p.truth.data(), p.predicted.size(), k, &r));
  return Report(r);
}

void write_report(const uf_report* report, const uf_vocab* vocab, const fs::path& dir) {
  check(uf_report_write_csv(report, (dir / "report.csv").string().c_str()));
  check(uf_report_write_text(report, vocab, (dir / "report.txt").string().c_str()));
  check(uf_report_write_confusion(report, vocab, (dir / "confusion.csv").string().c_str()));
  std::cout << "n_eval = " << uf_report_count(report) << "\noa = " << num(uf_report_oa(report))
            << "\naa = " << num(uf_report_aa(report)) << '\n';
}

// ---- commands ---------------------------------------------------------------

void cmd_synth(Run& run) {
  uf_synth_config c;
  uf_synth_config_default(&c);
  c.num_classes = run.integer("classes");
  c.objects_per_class = run.integer("objects-per-class");
  c.d_gsv = run.integer("d-gsv");
  c.d_oh = run.integer("d-oh");
  c.latent_dim = run.integer("latent-dim");
  c.subtypes_per_class = run.integer("subtypes");
  c.min_views = run.integer("min-views");
  c.max_views = run.integer("max-views");
  c.shared_signal = run.real("shared-signal");
  c.exclusive_gsv = run.real("exclusive-gsv");
  c.exclusive_oh = run.real("exclusive-oh");
  c.shared_nuisance = run.real("shared-nuisance");
  c.noise_sigma = run.real("noise-sigma");
  c.feature_noise = run.real("feature-noise");
  c.missing_ground_fraction = run.real("missing-ground");
  c.seed = run.integer("seed");
  uf_dataset* ds = nullptr;
  check(uf_synth_generate(&c, run.out_dir().string().c_str(), &ds));
  Dataset owned(ds);
  run.write_echo();
  std::cout << "objects = " << uf_dataset_size(ds) << "\nclasses = " << uf_dataset_num_classes(ds)
            << '\n';
}

void cmd_split(Run& run) {
  auto ds = load_dataset(run);
  uf_split* s = nullptr;
  check(uf_split_stratified(ds.get(), run.integer("seed"), 0.8, &s));
  Split split(s);
  run.write_echo();
  check(uf_split_save(s, (run.out_dir() / "split.tsv").string().c_str()));
  std::cout << "train = " << uf_split_count(s, UF_TRAIN) << "\ntest = " << uf_split_count(s, UF_TEST)
            << '\n';
}

void cmd_train(Run& run) {
  auto ds = load_dataset(run);
  auto split = load_split(run, ds.get());
  uf_mode mode;
  check(uf_parse_mode(run.required("mode").c_str(), &mode));
  uf_train_config cfg;
  uf_train_config_default(&cfg);
  cfg.epochs = run.integer("epochs");
  cfg.batch_size = run.integer("batch");
  cfg.lr0 = run.real("lr");
  cfg.momentum = run.real("momentum");
  cfg.seed = run.integer("seed");
  uf_model* m = nullptr;
  check(uf_model_train(ds.get(), split.get(), mode, pooling(run), &cfg, &m));
  Model model(m);
  run.write_echo();
  check(uf_model_save(m, (run.out_dir() / "model.mmck").string().c_str()));
  const double* trace = nullptr;
  const std::size_t n = uf_model_loss_trace(m, &trace);
  auto out = open_csv(run.out_dir() / "trace.csv");
  out << "epoch,learning_rate,loss\n";
  for (std::size_t e = 0; e < n; ++e) {
    out << e << ',' << num(uf_learning_rate(&cfg, e)) << ',' << num(trace[e]) << '\n';
  }
  if (n > 0) std::cout << "final_loss = " << num(trace[n - 1]) << '\n';
}

void cmd_predict(Run& run) {
  auto ds = load_dataset(run);
  auto split = load_split(run, ds.get());
  auto model = load_model(run);
  const uf_pooling pool = pooling(run);
  const uf_vocab* vocab = uf_dataset_vocab(ds.get());
  Predictions p;
  std::size_t skipped = 0;
  for (std::size_t i = 0; i < uf_dataset_size(ds.get()); ++i) {
    if (!is_test(split.get(), i)) continue;
    std::size_t label = 0;
    const uf_status st = uf_model_predict_object(model.get(), ds.get(), i, pool, &label, nullptr);
    if (st == UF_ERR_DATA) {
      ++skipped;
      continue;
    }
    check(st);
    p.ids.push_back(id_of(ds.get(), i));
    p.truth.push_back(label_of(ds.get(), i));
    p.predicted.push_back(label);
  }
  run.write_echo();
  write_predictions(p, vocab, run.out_dir() / "predictions.csv");
  auto report = evaluate(p, uf_dataset_num_classes(ds.get()));
  write_report(report.get(), vocab, run.out_dir());
  if (skipped > 0) std::cout << "skipped_missing_modality = " << skipped << '\n';
}

void cmd_eval(Run& run) {
  Vocab own_vocab;
  Dataset ds;
  const uf_vocab* vocab = nullptr;
  if (run.has("vocab")) {
    uf_vocab* v = nullptr;
    check(uf_vocab_load(run.text("vocab").c_str(), &v));
    own_vocab.reset(v);
    vocab = v;
  } else if (run.has("manifest")) {
    ds = load_dataset(run);
    vocab = uf_dataset_vocab(ds.get());
  } else {
    throw Failure("eval needs --vocab or --manifest");
  }
  const auto files = split_list(run.required("predictions"));
  if (files.empty()) throw Failure("--predictions lists no files");
  std::vector<Report> reports;
  for (const auto& f : files) reports.push_back(evaluate(read_predictions(f, vocab), uf_vocab_size(vocab)));
  run.write_echo();
  const fs::path dir = run.out_dir();
  if (reports.size() == 1) {
    write_report(reports[0].get(), vocab, dir);
    return;
  }
  std::vector<const uf_report*> raw;
  for (const auto& r : reports) raw.push_back(r.get());
  uf_summary* s = nullptr;
  check(uf_summary_average(raw.data(), raw.size(), &s));
  Summary summary(s);
  check(uf_summary_write_csv(s, (dir / "report.csv").string().c_str()));
  check(uf_summary_write_text(s, vocab, (dir / "report.txt").string().c_str()));
  check(uf_summary_write_confusion(s, vocab, (dir / "confusion.csv").string().c_str()));
  double mean = 0, sd = 0;
  uf_summary_oa(s, &mean, &sd);
  std::cout << "splits = " << uf_summary_splits(s) << "\noa = " << num(mean) << " +- " << num(sd);
  uf_summary_aa(s, &mean, &sd);
  std::cout << "\naa = " << num(mean) << " +- " << num(sd) << '\n';
}

void cmd_fit_embedding(Run& run) {
  auto ds = load_dataset(run);
  auto split = load_split(run, ds.get());
  const uf_cca_params params = cca_params(run);
  uf_embedding* e = nullptr;
  check(uf_embedding_fit(ds.get(), split.get(), pooling(run), &params, &e));
  Embedding emb(e);
  run.write_echo();
  check(uf_embedding_save(e, (run.out_dir() / "embedding.mmck").string().c_str()));
  std::vector<double> ev(uf_embedding_dim(e));
  uf_embedding_eigenvalues(e, ev.data(), ev.size());
  auto out = open_csv(run.out_dir() / "eigenvalues.csv");
  out << "index,eigenvalue\n";
  for (std::size_t i = 0; i < ev.size(); ++i) out << i << ',' << num(ev[i]) << '\n';
  std::cout << "d_emb = " << ev.size() << '\n';
}

void cmd_retrieve(Run& run) {
  auto ds = load_dataset(run);
  auto split = load_split(run, ds.get());
  auto emb = load_embedding(run);
  const double power = resolve_power(run, emb.get());
  const std::size_t k = run.integer("k");
  uf_index* ix = nullptr;
  check(uf_index_build(emb.get(), ds.get(), split.get(), pooling(run), power, &ix));
  Index index(ix);
  run.write_echo();
  const uf_vocab* vocab = uf_dataset_vocab(ds.get());
  auto out = open_csv(run.out_dir() / "retrieval.csv");
  out << "query_id,query_label,rank,neighbor_id,neighbor_label,similarity\n";
  std::vector<uf_neighbor> hits(k);
  for (std::size_t i = 0; i < uf_dataset_size(ds.get()); ++i) {
    if (!is_test(split.get(), i)) continue;
    std::size_t n = 0;
    check(uf_index_query_object(ix, emb.get(), ds.get(), i, k, hits.data(), &n, nullptr));
    const std::string qid = csv_field(id_of(ds.get(), i));
    const std::string qlabel = csv_field(class_name(vocab, label_of(ds.get(), i)));
    for (std::size_t r = 0; r < n; ++r) {
      out << qid << ',' << qlabel << ',' << r + 1 << ',' << csv_field(hits[r].object_id) << ','
          << csv_field(class_name(vocab, hits[r].label)) << ',' << num(hits[r].similarity) << '\n';
    }
  }
  std::vector<double> hit(k), correct(k);
  std::size_t n = 0;
  check(uf_label_coherence(ix, emb.get(), ds.get(), split.get(), k, hit.data(), correct.data(), &n));
  auto coh = open_csv(run.out_dir() / "coherence.csv");
  coh << "k,hit_rate,mean_correct\n";
  for (std::size_t i = 0; i < n; ++i) coh << i + 1 << ',' << num(hit[i]) << ',' << num(correct[i]) << '\n';
  if (n > 0) std::cout << "top1_coherence = " << num(hit[0]) << '\n';
}

void cmd_predict_missing(Run& run) {
  auto ds = load_dataset(run);
  auto split = load_split(run, ds.get());
  auto model = load_model(run);
  auto emb = load_embedding(run);
  const double power = resolve_power(run, emb.get());
  const std::size_t k = run.integer("k");
  uf_index* ix = nullptr;
  check(uf_index_build(emb.get(), ds.get(), split.get(), pooling(run), power, &ix));
  Index index(ix);
  const uf_vocab* vocab = uf_dataset_vocab(ds.get());
  Predictions p;
  for (std::size_t i = 0; i < uf_dataset_size(ds.get()); ++i) {
    if (!is_test(split.get(), i)) continue;
    std::size_t label = 0;
    check(uf_predict_missing_object(model.get(), emb.get(), ix, ds.get(), i, k, &label, nullptr,
                                    nullptr));
    p.ids.push_back(id_of(ds.get(), i));
    p.truth.push_back(label_of(ds.get(), i));
    p.predicted.push_back(label);
  }
  run.write_echo();
  write_predictions(p, vocab, run.out_dir() / "predictions.csv");
  auto report = evaluate(p, uf_dataset_num_classes(ds.get()));
  write_report(report.get(), vocab, run.out_dir());
}

void cmd_sweep(Run& run) {
  auto ds = load_dataset(run);
  auto split = load_split(run, ds.get());
  uf_sweep_param param;
  check(uf_parse_sweep_param(run.required("param").c_str(), &param));
  const auto values = run.reals("values");
  const uf_cca_params base = cca_params(run);
  std::vector<double> acc(values.size());
  check(uf_sweep(ds.get(), split.get(), pooling(run), &base, param, values.data(), values.size(),
                 acc.data()));
  run.write_echo();
  auto out = open_csv(run.out_dir() / "sweep.csv");
  out << "parameter,value,accuracy\n";
  for (std::size_t i = 0; i < values.size(); ++i) {
    out << uf_sweep_param_name(param) << ',' << num(values[i]) << ',' << num(acc[i]) << '\n';
    std::cout << uf_sweep_param_name(param) << " = " << num(values[i]) << ": " << num(acc[i]) << '\n';
  }
}

std::string count(std::size_t v) { return std::to_string(v); }

std::vector<Command> commands() {
  uf_synth_config sc;
  uf_synth_config_default(&sc);
  uf_train_config tc;
  uf_train_config_default(&tc);
  uf_cca_params cp;
  uf_cca_params_default(&cp);

  const Key manifest{"manifest", "", "dataset manifest (.tsv)"};
  const Key vocab{"vocab", "", "class vocabulary; defaults to vocab.txt next to the manifest"};
  const Key split{"split", "", "split file; without it a stratified split is drawn from --seed"};
  const Key seed{"seed", "1", "random seed"};
  const Key pool{"pooling", "avg", "ground-view pooling: avg or max"};
  const Key out{"out", "", "run directory"};
  const Key pca{"pca-frac", num(cp.pca_fraction), "fraction of PCA dimensions kept per view"};
  const Key demb{"demb-frac", num(cp.embedding_fraction), "embedding dimension as a fraction of d1 + d2 + K"};
  const Key eta{"eta", num(cp.eta), "CCA regularization"};
  const Key k{"k", "1", "number of retrieved neighbors"};
  const Key model{"model", "", "fusion checkpoint (.mmck)"};
  const Key embedding{"embedding", "", "embedding checkpoint (.mmck)"};

  return {
      {"synth",
       "generate a synthetic dataset",
       {{"classes", count(sc.num_classes), "number of classes"},
        {"objects-per-class", count(sc.objects_per_class), "objects per class"},
        {"d-gsv", count(sc.d_gsv), "ground feature dimension"},
        {"d-oh", count(sc.d_oh), "overhead feature dimension"},
        {"latent-dim", count(sc.latent_dim), "latent dimension per factor"},
        {"subtypes", count(sc.subtypes_per_class), "shared latent centers per class"},
        {"min-views", count(sc.min_views), "fewest ground views per object"},
        {"max-views", count(sc.max_views), "most ground views per object"},
        {"shared-signal", num(sc.shared_signal), "scale of the shared class centers"},
        {"exclusive-gsv", num(sc.exclusive_gsv), "scale of the ground-only class centers"},
        {"exclusive-oh", num(sc.exclusive_oh), "scale of the overhead-only class centers"},
        {"shared-nuisance", num(sc.shared_nuisance), "per-object noise on the shared latent"},
        {"noise-sigma", num(sc.noise_sigma), "latent noise"},
        {"feature-noise", num(sc.feature_noise), "feature noise relative to noise-sigma"},
        {"missing-ground", num(sc.missing_ground_fraction), "fraction of objects without ground views"},
        seed,
        out},
       cmd_synth},
      {"split", "draw a stratified 80/20 split", {manifest, vocab, seed, out}, cmd_split},
      {"train",
       "train a fusion head",
       {manifest, vocab, split, seed, {"mode", "multimodal", "overhead, ground or multimodal"}, pool,
        {"epochs", count(tc.epochs), "training epochs"},
        {"lr", num(tc.lr0), "initial learning rate"},
        {"batch", count(tc.batch_size), "mini-batch size"},
        {"momentum", num(tc.momentum), "SGD momentum"},
        out},
       cmd_train},
      {"predict",
       "classify the test objects with a trained head",
       {manifest, vocab, split, seed, model, pool, out},
       cmd_predict},
      {"eval",
       "score one or more prediction files",
       {manifest, vocab, {"predictions", "", "predictions.csv; repeat to average over splits"}, out},
       cmd_eval},
      {"fit-embedding",
       "fit the three-view embedding",
       {manifest, vocab, split, seed, pool, pca, demb, {"power", num(cp.power), "eigenvalue exponent p"}, eta,
        out},
       cmd_fit_embedding},
      {"retrieve",
       "retrieve training ground views for the test objects",
       {manifest, vocab, split, seed, pool, embedding,
        {"power", "", "eigenvalue exponent p; defaults to the embedding's"}, k, out},
       cmd_retrieve},
      {"predict-missing",
       "classify test objects from overhead features and retrieved ground views",
       {manifest, vocab, split, seed, pool, model, embedding,
        {"power", "", "eigenvalue exponent p; defaults to the embedding's"}, k, out},
       cmd_predict_missing},
      {"sweep",
       "nearest-neighbor label accuracy over one embedding hyperparameter",
       {manifest, vocab, split, seed, pool, pca, demb, {"power", num(cp.power), "eigenvalue exponent p"}, eta,
        {"param", "", "pca-frac, demb-frac or power"},
        {"values", "", "comma-separated values"},
        out},
       cmd_sweep},
  };
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Command> table = commands();

  CLI::App app{"urbanfuse: multimodal urban object classification"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(uf_version()));

  struct Bound {
    CLI::App* sub;
    std::string config;
    std::map<std::string, std::string> flags;
    std::vector<std::string> predictions;
  };
  std::vector<Bound> bound(table.size());
  for (std::size_t c = 0; c < table.size(); ++c) {
    auto& b = bound[c];
    b.sub = app.add_subcommand(table[c].name, table[c].help);
    b.sub->add_option("--config", b.config, "key = value settings file; flags take precedence");
    for (const auto& key : table[c].keys) {
      if (key.name == "predictions") {
        b.sub->add_option("--predictions", b.predictions, key.help)->delimiter(',');
        continue;
      }
      std::string help = key.help;
      if (!key.fallback.empty()) help += " [" + key.fallback + "]";
      b.sub->add_option("--" + key.name, b.flags[key.name], help);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  for (std::size_t c = 0; c < table.size(); ++c) {
    auto& b = bound[c];
    if (!b.sub->parsed()) continue;
    try {
      Run run(table[c]);
      if (!b.config.empty()) run.load_config(b.config);
      for (const auto& key : table[c].keys) {
        if (b.sub->count("--" + key.name) == 0) continue;
        if (key.name == "predictions") {
          std::string joined;
          for (const auto& p : b.predictions) joined += (joined.empty() ? "" : ",") + p;
          run.set(key.name, joined);
        } else {
          run.set(key.name, b.flags[key.name]);
        }
      }
      table[c].handler(run);
      return 0;
    } catch (const std::exception& e) {
      std::cerr << "urbanfuse " << table[c].name << ": error: " << e.what() << '\n';
      return 1;
    }
  }
  return 1;
}
