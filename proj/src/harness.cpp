#include "xsslab/harness.hpp"

#include <chrono>
#include <ctime>
#include <stdexcept>

#include "xsslab/analysis.hpp"
#include "xsslab/obfuscator.hpp"
#include "xsslab/rng.hpp"
#include "xsslab/vectorizer.hpp"

namespace xsslab {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string_view experiment_id_name(ExperimentId id) {
  switch (id) {
    case ExperimentId::exp1_clean_clean: return "exp1_clean_clean";
    case ExperimentId::exp2_clean_obf: return "exp2_clean_obf";
    case ExperimentId::exp3_aug_obf: return "exp3_aug_obf";
  }
  return "?";
}

std::optional<ExperimentId> parse_experiment_id(std::string_view name) {
  if (name == "exp1" || name == "exp1_clean_clean") return ExperimentId::exp1_clean_clean;
  if (name == "exp2" || name == "exp2_clean_obf") return ExperimentId::exp2_clean_obf;
  if (name == "exp3" || name == "exp3_aug_obf") return ExperimentId::exp3_aug_obf;
  return std::nullopt;
}

namespace {

constexpr std::array<ModelKind, 4> kReportedModels = {
    ModelKind::decision_tree, ModelKind::random_forest, ModelKind::logistic_regression,
    ModelKind::linear_svm};

std::string_view format_name(IngestFormat format) {
  switch (format) {
    case IngestFormat::csv: return "csv";
    case IngestFormat::jsonl: return "jsonl";
    case IngestFormat::plain_lines: return "plain_lines";
  }
  return "?";
}

IngestFormat parse_format(std::string_view name) {
  if (name == "csv") return IngestFormat::csv;
  if (name == "jsonl") return IngestFormat::jsonl;
  if (name == "plain_lines") return IngestFormat::plain_lines;
  throw std::runtime_error("config: unknown ingest format '" + std::string(name) + "'");
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

ExperimentConfig default_experiment_config() {
  ExperimentConfig config;
  config.sources.push_back({"data/corpus.jsonl", IngestFormat::jsonl, LabelPolicy{}});
  return config;
}

void apply_master_seed(ExperimentConfig& config, uint64_t seed) {
  config.master_seed = seed;
  config.split.seed = seed;
  config.models.seed = seed;
}

ExperimentConfig experiment_config_from_json(const json& doc) {
  ExperimentConfig config = default_experiment_config();
  if (!doc.is_object()) throw std::runtime_error("config: top-level JSON object expected");

  if (auto it = doc.find("experiment"); it != doc.end()) {
    auto id = parse_experiment_id(it->get<std::string>());
    if (!id) throw std::runtime_error("config: unknown experiment id");
    config.id = *id;
  }
  if (auto it = doc.find("sources"); it != doc.end()) {
    config.sources.clear();
    for (const auto& s : *it) {
      IngestSource src;
      src.path = s.at("path").get<std::string>();
      src.format = parse_format(s.value("format", "jsonl"));
      if (s.contains("fixed_label")) {
        auto label = parse_label(s.at("fixed_label").get<std::string>());
        if (!label) throw std::runtime_error("config: bad fixed_label");
        src.policy.fixed = label;
      }
      src.policy.text_column = s.value("text_column", "text");
      src.policy.label_column = s.value("label_column", "label");
      config.sources.push_back(std::move(src));
    }
  }
  if (auto it = doc.find("split"); it != doc.end()) {
    config.split.train_fraction = it->value("train_fraction", config.split.train_fraction);
    config.split.seed = it->value("seed", config.split.seed);
  }
  if (auto it = doc.find("filters"); it != doc.end()) {
    config.filters.min_length = it->value("min_length", config.filters.min_length);
    config.filters.min_printable_ratio =
        it->value("min_printable_ratio", config.filters.min_printable_ratio);
  }
  if (auto it = doc.find("obfuscation_weights"); it != doc.end()) {
    auto w = it->get<std::vector<double>>();
    if (w.size() != 4) throw std::runtime_error("config: obfuscation_weights needs 4 entries");
    std::copy(w.begin(), w.end(), config.obf_weights.begin());
  }
  if (auto it = doc.find("synth"); it != doc.end()) {
    config.synth.temperature = it->value("temperature", config.synth.temperature);
    config.synth.max_chain = it->value("max_chain", config.synth.max_chain);
    config.synth.allow_invalid = it->value("allow_invalid", config.synth.allow_invalid);
    if (auto rates = it->find("mutation_rates"); rates != it->end()) {
      config.synth.whitespace_jitter_rate =
          rates->value("whitespace_jitter", config.synth.whitespace_jitter_rate);
      config.synth.junk_char_insert_rate =
          rates->value("junk_char_insert", config.synth.junk_char_insert_rate);
      config.synth.encoding_swap_rate =
          rates->value("encoding_swap", config.synth.encoding_swap_rate);
    }
  }
  if (auto it = doc.find("models"); it != doc.end()) {
    config.models.seed = it->value("seed", config.models.seed);
    if (auto t = it->find("tree"); t != it->end()) {
      config.models.tree.max_depth = t->value("max_depth", config.models.tree.max_depth);
      config.models.tree.min_samples_split =
          t->value("min_samples_split", config.models.tree.min_samples_split);
    }
    if (auto f = it->find("forest"); f != it->end()) {
      config.models.forest.n_trees = f->value("n_trees", config.models.forest.n_trees);
      config.models.forest.bootstrap = f->value("bootstrap", config.models.forest.bootstrap);
      const std::string sub = f->value("feature_subsample", std::string("sqrt"));
      if (sub == "sqrt") config.models.forest.feature_subsample_sqrt = true;
      else if (sub == "all") config.models.forest.feature_subsample_sqrt = false;
      else throw std::runtime_error("config: feature_subsample must be 'sqrt' or 'all'");
    }
    if (auto l = it->find("logreg"); l != it->end()) {
      config.models.logreg.learning_rate =
          l->value("learning_rate", config.models.logreg.learning_rate);
      config.models.logreg.epochs = l->value("epochs", config.models.logreg.epochs);
      config.models.logreg.l2 = l->value("l2", config.models.logreg.l2);
      config.models.logreg.batch_size = l->value("batch_size", config.models.logreg.batch_size);
    }
    if (auto s = it->find("svm"); s != it->end()) {
      config.models.svm.learning_rate = s->value("learning_rate", config.models.svm.learning_rate);
      config.models.svm.epochs = s->value("epochs", config.models.svm.epochs);
      config.models.svm.l2 = s->value("l2", config.models.svm.l2);
    }
  }
  config.master_seed = doc.value("master_seed", config.master_seed);
  return config;
}

ordered_json experiment_config_to_json(const ExperimentConfig& config) {
  ordered_json sources = ordered_json::array();
  for (const auto& s : config.sources) {
    ordered_json src;
    src["path"] = s.path;
    src["format"] = std::string(format_name(s.format));
    if (s.policy.fixed) src["fixed_label"] = std::string(label_name(*s.policy.fixed));
    src["text_column"] = s.policy.text_column;
    src["label_column"] = s.policy.label_column;
    sources.push_back(std::move(src));
  }
  ordered_json doc;
  doc["experiment"] = std::string(experiment_id_name(config.id));
  doc["sources"] = std::move(sources);
  doc["split"] = {{"train_fraction", config.split.train_fraction}, {"seed", config.split.seed}};
  doc["filters"] = {{"min_length", config.filters.min_length},
                    {"min_printable_ratio", config.filters.min_printable_ratio}};
  doc["obfuscation_weights"] = config.obf_weights;
  doc["synth"] = {
      {"temperature", config.synth.temperature},
      {"max_chain", config.synth.max_chain},
      {"mutation_rates",
       {{"whitespace_jitter", config.synth.whitespace_jitter_rate},
        {"junk_char_insert", config.synth.junk_char_insert_rate},
        {"encoding_swap", config.synth.encoding_swap_rate}}},
      {"allow_invalid", config.synth.allow_invalid}};
  doc["models"] = {
      {"seed", config.models.seed},
      {"tree",
       {{"max_depth", config.models.tree.max_depth},
        {"min_samples_split", config.models.tree.min_samples_split}}},
      {"forest",
       {{"n_trees", config.models.forest.n_trees},
        {"feature_subsample", config.models.forest.feature_subsample_sqrt ? "sqrt" : "all"},
        {"bootstrap", config.models.forest.bootstrap}}},
      {"logreg",
       {{"learning_rate", config.models.logreg.learning_rate},
        {"epochs", config.models.logreg.epochs},
        {"l2", config.models.logreg.l2},
        {"batch_size", config.models.logreg.batch_size}}},
      {"svm",
       {{"learning_rate", config.models.svm.learning_rate},
        {"epochs", config.models.svm.epochs},
        {"l2", config.models.svm.l2}}}};
  doc["master_seed"] = config.master_seed;
  return doc;
}

namespace {

ordered_json metrics_to_json(const Metrics& m) {
  ordered_json doc;
  doc["accuracy"] = m.accuracy;
  doc["precision"] = m.precision;
  doc["recall"] = m.recall;
  doc["f1"] = m.f1;
  doc["confusion"] = {{"tp", m.confusion.tp},
                      {"fp", m.confusion.fp},
                      {"fn", m.confusion.fn},
                      {"tn", m.confusion.tn}};
  return doc;
}

Metrics metrics_from_json(const json& doc) {
  Metrics m;
  m.accuracy = doc.at("accuracy").get<double>();
  m.precision = doc.at("precision").get<double>();
  m.recall = doc.at("recall").get<double>();
  m.f1 = doc.at("f1").get<double>();
  const json& c = doc.at("confusion");
  m.confusion = {c.at("tp").get<uint64_t>(), c.at("fp").get<uint64_t>(),
                 c.at("fn").get<uint64_t>(), c.at("tn").get<uint64_t>()};
  return m;
}

std::vector<Label> labels_of(const Corpus& corpus) {
  std::vector<Label> y;
  y.reserve(corpus.samples.size());
  for (const auto& s : corpus.samples) y.push_back(s.label);
  return y;
}

}  // namespace

Report run_experiment(const ExperimentConfig& config) {
  Report report;
  report.experiment = std::string(experiment_id_name(config.id));
  report.tool_version = std::string(kToolVersion);
  report.timestamp = utc_timestamp();
  report.config_echo = experiment_config_to_json(config);

  // Ingest and preprocess.
  Corpus raw;
  size_t raw_total = 0, skipped = 0;
  for (const auto& src : config.sources) {
    IngestResult r = ingest(src.path, src.format, src.policy);
    raw_total += r.corpus.samples.size() + r.skipped;
    skipped += r.skipped;
    for (auto& s : r.corpus.samples) raw.samples.push_back(std::move(s));
  }
  size_t dropped_empty = 0, filtered = 0;
  Corpus corpus = normalize_corpus(std::move(raw), &dropped_empty);
  corpus = apply_filters(std::move(corpus), config.filters, &filtered);
  DedupStats dedup_stats;
  corpus = dedup(corpus, &dedup_stats);

  auto [train_corpus, test_corpus] = split(corpus, config.split);

  // Independent random streams derived from the master seed.
  const uint64_t obf_master = mix_seed(config.master_seed, 1);
  const uint64_t synth_master = mix_seed(config.master_seed, 2);
  const uint64_t baseline_master = mix_seed(config.master_seed, 3);

  // Obfuscated test set: every xss sample replaced by a single-technique
  // draw, benign samples untouched.
  Corpus obf_test;
  std::map<std::string, size_t> recipe_histogram;
  size_t replaced = 0;
  const bool needs_obf_test = config.id != ExperimentId::exp1_clean_clean;
  if (needs_obf_test) {
    obf_test.normalized = test_corpus.normalized;
    obf_test.dedup_applied = false;
    obf_test.samples.reserve(test_corpus.samples.size());
    for (size_t i = 0; i < test_corpus.samples.size(); ++i) {
      const Payload& s = test_corpus.samples[i];
      if (s.label != Label::xss) {
        obf_test.samples.push_back(s);
        continue;
      }
      ObfuscationDraw draw =
          obfuscate_random(s.text, config.obf_weights, derive_seed(obf_master, i));
      ++recipe_histogram[std::string(obf_step_name(draw.recipe.steps[0]))];
      ++replaced;
      obf_test.samples.push_back({std::move(draw.text), Label::xss, "obfuscated"});
    }
  }

  // Training corpus: clean, or clean + synthesized xss variants for exp3.
  Corpus training = train_corpus;
  size_t synth_added = 0, synth_possibly_invalid = 0;
  if (config.id == ExperimentId::exp3_aug_obf) {
    SynthCorpusStats stats;
    Corpus synth_out = synthesize_corpus(train_corpus, config.synth, synth_master, &stats);
    synth_possibly_invalid = stats.possibly_invalid;
    for (auto& s : synth_out.samples) {
      if (s.origin == "synth") {
        training.samples.push_back(std::move(s));
        ++synth_added;
      }
    }
    training.dedup_applied = false;

    // Complexity section: synthesized variants vs single-technique baselines
    // of the same training samples.
    Corpus synth_only, baseline_only;
    for (size_t i = 0; i < train_corpus.samples.size(); ++i) {
      const Payload& s = train_corpus.samples[i];
      if (s.label != Label::xss) continue;
      ObfuscationDraw draw =
          obfuscate_random(s.text, config.obf_weights, derive_seed(baseline_master, i));
      baseline_only.samples.push_back({std::move(draw.text), Label::xss, "obfuscated"});
    }
    for (size_t i = train_corpus.samples.size(); i < training.samples.size(); ++i) {
      synth_only.samples.push_back(training.samples[i]);
    }
    if (!baseline_only.samples.empty() && !synth_only.samples.empty()) {
      const EntropyReport er = entropy_uplift(baseline_only, synth_only);
      ordered_json entropy;
      entropy["basis"] = "raw bytes, log base 2";
      entropy["mean_single_transform"] = er.mean_a;
      entropy["mean_synth"] = er.mean_b;
      entropy["uplift_percent"] = er.uplift_defined ? ordered_json(er.uplift_percent)
                                                    : ordered_json(nullptr);
      report.entropy = std::move(entropy);
    }
  }

  const Corpus& eval_corpus = needs_obf_test ? obf_test : test_corpus;

  const Vocabulary vocab = fit(training);
  const std::vector<CountVector> X_train = transform_corpus(training, vocab);
  const std::vector<Label> y_train = labels_of(training);
  const std::vector<CountVector> X_test = transform_corpus(eval_corpus, vocab);
  const std::vector<Label> y_test = labels_of(eval_corpus);

  for (ModelKind kind : kReportedModels) {
    TrainedModel model = train(kind, X_train, y_train, config.models);
    const Metrics metrics = evaluate(predict(model, X_test), y_test);
    report.models.emplace(std::string(model_kind_name(kind)), metrics);
  }

  ordered_json corpus_stats;
  corpus_stats["raw_records"] = raw_total;
  corpus_stats["skipped_records"] = skipped;
  corpus_stats["dropped_empty"] = dropped_empty;
  corpus_stats["filtered_out"] = filtered;
  corpus_stats["duplicates_removed"] = dedup_stats.removed;
  corpus_stats["label_conflicts"] = dedup_stats.label_conflicts;
  corpus_stats["total"] = corpus.samples.size();
  corpus_stats["benign"] = corpus.count(Label::benign);
  corpus_stats["xss"] = corpus.count(Label::xss);
  corpus_stats["train"] = train_corpus.samples.size();
  corpus_stats["test"] = test_corpus.samples.size();
  corpus_stats["training_after_augmentation"] = training.samples.size();
  corpus_stats["vocab_size"] = vocab.size();
  report.corpus_stats = std::move(corpus_stats);

  if (needs_obf_test) {
    ordered_json obf;
    obf["replaced"] = replaced;
    obf["recipes"] = recipe_histogram;
    report.obfuscation = std::move(obf);
  }
  if (config.id == ExperimentId::exp3_aug_obf) {
    ordered_json synth;
    synth["added"] = synth_added;
    synth["possibly_invalid"] = synth_possibly_invalid;
    report.synth_stats = std::move(synth);
  }
  return report;
}

std::string report_to_json(const Report& report) {
  ordered_json doc;
  doc["experiment"] = report.experiment;
  doc["tool_version"] = report.tool_version;
  doc["timestamp"] = report.timestamp;
  doc["config"] = report.config_echo;
  doc["corpus"] = report.corpus_stats;
  doc["obfuscation"] = report.obfuscation;
  doc["synth"] = report.synth_stats;
  doc["entropy"] = report.entropy;
  ordered_json models;
  for (const auto& [name, metrics] : report.models) models[name] = metrics_to_json(metrics);
  doc["models"] = std::move(models);
  return doc.dump(2);
}

Report report_from_json(const std::string& text) {
  const json doc = json::parse(text);
  Report report;
  report.experiment = doc.at("experiment").get<std::string>();
  report.tool_version = doc.value("tool_version", "");
  report.timestamp = doc.value("timestamp", "");
  report.config_echo = doc.value("config", json(nullptr));
  report.corpus_stats = doc.value("corpus", json(nullptr));
  report.obfuscation = doc.value("obfuscation", json(nullptr));
  report.synth_stats = doc.value("synth", json(nullptr));
  report.entropy = doc.value("entropy", json(nullptr));
  for (const auto& [name, metrics] : doc.at("models").items()) {
    report.models.emplace(name, metrics_from_json(metrics));
  }
  return report;
}

nlohmann::ordered_json compare_reports(const Report& before, const Report& after) {
  if (before.models.size() != after.models.size()) {
    throw std::invalid_argument("compare_reports: model sets differ");
  }
  for (const auto& [name, _] : before.models) {
    if (!after.models.count(name)) {
      throw std::invalid_argument("compare_reports: model sets differ");
    }
  }

  ordered_json doc;
  doc["before"] = before.experiment;
  doc["after"] = after.experiment;
  ordered_json models;
  for (const auto& [name, mb] : before.models) {
    const Metrics& ma = after.models.at(name);
    auto delta_of = [](double b, double a) {
      ordered_json d;
      d["before"] = b;
      d["after"] = a;
      d["delta"] = a - b;
      d["direction"] = a > b ? "up" : (a < b ? "down" : "flat");
      return d;
    };
    ordered_json m;
    m["accuracy"] = delta_of(mb.accuracy, ma.accuracy);
    m["precision"] = delta_of(mb.precision, ma.precision);
    m["recall"] = delta_of(mb.recall, ma.recall);
    m["f1"] = delta_of(mb.f1, ma.f1);
    models[name] = std::move(m);
  }
  doc["models"] = std::move(models);
  return doc;
}

}  // namespace xsslab
