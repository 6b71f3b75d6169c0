// Command-line front end for the XSS obfuscation robustness lab.
//
// Pipeline subcommands: ingest, split, obfuscate, synth, train, eval,
// entropy, equiv, experiment, compare. Exit codes: 0 ok, 1 usage/config,
// 2 I/O, 3 data/validation.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "xsslab/analysis.hpp"
#include "xsslab/corpus.hpp"
#include "xsslab/encoding.hpp"
#include "xsslab/harness.hpp"
#include "xsslab/models.hpp"
#include "xsslab/obfuscator.hpp"
#include "xsslab/rng.hpp"
#include "xsslab/synth.hpp"
#include "xsslab/vectorizer.hpp"

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;
constexpr int kExitData = 3;

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in.is_open()) throw IoError("cannot open input file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out.is_open()) throw IoError("cannot open output file: " + path);
  out << content;
}

void emit(const std::string& out_path, const std::string& content) {
  if (out_path.empty()) {
    std::cout << content;
    if (content.empty() || content.back() != '\n') std::cout << '\n';
  } else {
    std::string padded = content;
    if (padded.empty() || padded.back() != '\n') padded.push_back('\n');
    write_file(out_path, padded);
  }
}

xsslab::IngestFormat parse_format_flag(const std::string& name) {
  if (name == "csv") return xsslab::IngestFormat::csv;
  if (name == "jsonl") return xsslab::IngestFormat::jsonl;
  if (name == "plain_lines" || name == "plain") return xsslab::IngestFormat::plain_lines;
  throw CLI::ValidationError("--format", "must be csv, jsonl or plain_lines");
}

xsslab::Corpus load_jsonl_corpus(const std::string& path) {
  auto result = xsslab::ingest(path, xsslab::IngestFormat::jsonl, xsslab::LabelPolicy{});
  for (const auto& msg : result.diagnostics) std::cerr << "warning: " << msg << '\n';
  return std::move(result.corpus);
}

json parse_record(const std::string& line, const std::string& path, size_t line_no) {
  json record = json::parse(line, nullptr, false);
  if (record.is_discarded() || !record.is_object() || !record.contains("text") ||
      !record.at("text").is_string()) {
    throw std::runtime_error(path + ":" + std::to_string(line_no) +
                             ": record needs a 'text' string field");
  }
  return record;
}

ordered_json recipe_to_json(const xsslab::ObfuscationRecipe& recipe) {
  ordered_json steps = ordered_json::array();
  for (auto step : recipe.steps) steps.push_back(std::string(xsslab::obf_step_name(step)));
  return steps;
}

int run_ingest(const std::vector<std::string>& paths, const std::string& format,
               const std::string& fixed_label, const std::string& text_column,
               const std::string& label_column, bool no_normalize, bool no_dedup, bool no_filter,
               size_t min_length, double min_printable, const std::string& out_path) {
  xsslab::LabelPolicy policy;
  policy.text_column = text_column;
  policy.label_column = label_column;
  if (!fixed_label.empty()) {
    auto label = xsslab::parse_label(fixed_label);
    if (!label) throw std::runtime_error("unknown label value '" + fixed_label + "'");
    policy.fixed = label;
  }

  xsslab::Corpus corpus;
  size_t skipped = 0;
  for (const auto& path : paths) {
    auto result = xsslab::ingest(path, parse_format_flag(format), policy);
    for (const auto& msg : result.diagnostics) std::cerr << "warning: " << msg << '\n';
    skipped += result.skipped;
    for (auto& s : result.corpus.samples) corpus.samples.push_back(std::move(s));
  }

  size_t dropped_empty = 0, filtered = 0;
  xsslab::DedupStats dedup_stats;
  if (!no_normalize) corpus = xsslab::normalize_corpus(std::move(corpus), &dropped_empty);
  if (!no_filter) {
    corpus = xsslab::apply_filters(std::move(corpus), {min_length, min_printable}, &filtered);
  }
  if (!no_dedup) corpus = xsslab::dedup(corpus, &dedup_stats);

  std::ostringstream lines;
  for (const auto& s : corpus.samples) lines << xsslab::payload_to_jsonl(s) << '\n';
  emit(out_path, lines.str());

  std::cerr << "[ingest] kept " << corpus.samples.size() << " samples ("
            << corpus.count(xsslab::Label::benign) << " benign, "
            << corpus.count(xsslab::Label::xss) << " xss); skipped " << skipped
            << ", dropped empty " << dropped_empty << ", filtered " << filtered
            << ", duplicates " << dedup_stats.removed << " (label conflicts "
            << dedup_stats.label_conflicts << ")\n";
  return 0;
}

int run_split(const std::string& in_path, double fraction, uint64_t seed,
              const std::string& train_out, const std::string& test_out) {
  xsslab::Corpus corpus = load_jsonl_corpus(in_path);
  corpus.normalized = true;  // pipeline order: ingest already normalized
  corpus = xsslab::dedup(corpus);
  auto [train, test] = xsslab::split(corpus, {fraction, seed});
  xsslab::write_jsonl(train_out, train);
  xsslab::write_jsonl(test_out, test);
  std::cerr << "[split] " << train.samples.size() << " train / " << test.samples.size()
            << " test (seed " << seed << ")\n";
  return 0;
}

int run_obfuscate(const std::string& in_path, const std::string& out_path,
                  std::vector<double> weights, uint64_t seed, bool xss_only) {
  if (weights.empty()) weights = {0.25, 0.25, 0.25, 0.25};
  if (weights.size() != 4) throw std::runtime_error("--weights needs exactly 4 values");
  std::array<double, 4> w;
  std::copy(weights.begin(), weights.end(), w.begin());

  std::ifstream in(in_path, std::ios::binary);
  if (!in.is_open()) throw IoError("cannot open input file: " + in_path);
  std::ostringstream out;
  std::string line;
  size_t line_no = 0, processed = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json record = parse_record(line, in_path, line_no);
    const bool is_xss = record.value("label", "xss") == "xss";
    if (xss_only && !is_xss) {
      out << record.dump() << '\n';
      continue;
    }
    const uint64_t record_seed = xsslab::derive_seed(seed, line_no - 1);
    auto draw = xsslab::obfuscate_random(record.at("text").get<std::string>(), w, record_seed);
    record["obf_text"] = draw.text;
    record["recipe"] = recipe_to_json(draw.recipe);
    record["seed"] = record_seed;
    out << record.dump() << '\n';
    ++processed;
  }
  emit(out_path, out.str());
  std::cerr << "[obfuscate] transformed " << processed << " records\n";
  return 0;
}

int run_synth(const std::string& in_path, const std::string& out_path,
              const xsslab::SynthConfig& config, uint64_t seed, bool xss_only) {
  std::ifstream in(in_path, std::ios::binary);
  if (!in.is_open()) throw IoError("cannot open input file: " + in_path);
  std::ostringstream out;
  std::string line;
  size_t line_no = 0, processed = 0, invalid = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json record = parse_record(line, in_path, line_no);
    const bool is_xss = record.value("label", "xss") == "xss";
    if (xss_only && !is_xss) {
      out << record.dump() << '\n';
      continue;
    }
    const uint64_t record_seed = xsslab::derive_seed(seed, line_no - 1);
    auto result = xsslab::synthesize(record.at("text").get<std::string>(), config, record_seed);
    record["obf_text"] = result.text;
    record["recipe"] = recipe_to_json(result.recipe);
    record["seed"] = record_seed;
    record["validity"] = std::string(xsslab::validity_name(result.validity));
    if (result.validity == xsslab::Validity::possibly_invalid) ++invalid;
    out << record.dump() << '\n';
    ++processed;
  }
  emit(out_path, out.str());
  std::cerr << "[synth] transformed " << processed << " records (" << invalid
            << " possibly invalid)\n";
  return 0;
}

int run_train(const std::string& model_name, const std::string& in_path,
              const std::string& vocab_out, const std::string& model_out,
              const xsslab::TrainConfig& config) {
  auto kind = xsslab::parse_model_kind(model_name);
  if (!kind) throw std::runtime_error("unknown model kind '" + model_name + "'");

  xsslab::Corpus train_corpus = load_jsonl_corpus(in_path);
  const xsslab::Vocabulary vocab = xsslab::fit(train_corpus);
  const auto X = xsslab::transform_corpus(train_corpus, vocab);
  std::vector<xsslab::Label> y;
  for (const auto& s : train_corpus.samples) y.push_back(s.label);

  const xsslab::TrainedModel model = xsslab::train(*kind, X, y, config);
  xsslab::save_vocabulary(vocab_out, vocab);
  xsslab::save_model(model_out, model, xsslab::vocabulary_hash(vocab));
  std::cerr << "[train] " << xsslab::model_kind_name(*kind) << " on " << X.size()
            << " samples, vocab " << vocab.size() << " -> " << model_out << '\n';
  return 0;
}

int run_eval(const std::string& model_path, const std::string& vocab_path,
             const std::string& in_path, const std::string& out_path) {
  uint64_t bound_hash = 0;
  const xsslab::TrainedModel model = xsslab::load_model(model_path, &bound_hash);
  const xsslab::Vocabulary vocab = xsslab::load_vocabulary(vocab_path);
  if (xsslab::vocabulary_hash(vocab) != bound_hash) {
    throw std::runtime_error("model was trained against a different vocabulary file");
  }

  xsslab::Corpus test_corpus = load_jsonl_corpus(in_path);
  const auto X = xsslab::transform_corpus(test_corpus, vocab);
  std::vector<xsslab::Label> y;
  for (const auto& s : test_corpus.samples) y.push_back(s.label);

  const xsslab::Metrics m = xsslab::evaluate(xsslab::predict(model, X), y);
  ordered_json doc;
  doc["model"] = std::string(xsslab::model_kind_name(model.kind));
  doc["samples"] = X.size();
  doc["accuracy"] = m.accuracy;
  doc["precision"] = m.precision;
  doc["recall"] = m.recall;
  doc["f1"] = m.f1;
  doc["confusion"] = {{"tp", m.confusion.tp},
                      {"fp", m.confusion.fp},
                      {"fn", m.confusion.fn},
                      {"tn", m.confusion.tn}};
  emit(out_path, doc.dump(2));
  return 0;
}

int run_entropy(const std::string& a_path, const std::string& b_path,
                const std::string& out_path) {
  const xsslab::Corpus a = load_jsonl_corpus(a_path);
  const xsslab::Corpus b = load_jsonl_corpus(b_path);
  const xsslab::EntropyReport report = xsslab::entropy_uplift(a, b);
  emit(out_path, xsslab::entropy_report_to_json(report));
  return 0;
}

int run_equiv(const std::string& in_path, const std::string& out_path) {
  std::ifstream in(in_path, std::ios::binary);
  if (!in.is_open()) throw IoError("cannot open input file: " + in_path);

  ordered_json pairs = ordered_json::array();
  std::map<std::string, size_t> counts;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json record = parse_record(line, in_path, line_no);
    if (!record.contains("obf_text") || !record.at("obf_text").is_string()) {
      throw std::runtime_error(in_path + ":" + std::to_string(line_no) +
                               ": record needs an 'obf_text' string field");
    }
    const auto verdict = xsslab::check_equivalence(record.at("text").get<std::string>(),
                                                   record.at("obf_text").get<std::string>());
    const std::string name(xsslab::equivalence_name(verdict));
    ++counts[name];
    pairs.push_back({{"line", line_no}, {"verdict", name}});
  }
  ordered_json doc;
  doc["pairs"] = std::move(pairs);
  doc["summary"] = counts;
  emit(out_path, doc.dump(2));
  return 0;
}

int run_experiment_cmd(const std::string& id_name, const std::string& config_path,
                       std::optional<uint64_t> seed, const std::string& out_path) {
  auto id = xsslab::parse_experiment_id(id_name);
  if (!id) throw std::runtime_error("unknown experiment '" + id_name + "'");

  xsslab::ExperimentConfig config;
  if (!config_path.empty()) {
    config = xsslab::experiment_config_from_json(json::parse(read_file(config_path)));
  } else {
    config = xsslab::default_experiment_config();
  }
  config.id = *id;
  if (seed) xsslab::apply_master_seed(config, *seed);

  const xsslab::Report report = xsslab::run_experiment(config);
  emit(out_path, xsslab::report_to_json(report));

  for (const auto& [name, m] : report.models) {
    std::cerr << "[" << report.experiment << "] " << name << ": accuracy " << m.accuracy
              << ", precision " << m.precision << ", recall " << m.recall << ", f1 " << m.f1
              << '\n';
  }
  return 0;
}

int run_compare(const std::string& before_path, const std::string& after_path,
                const std::string& out_path) {
  const xsslab::Report before = xsslab::report_from_json(read_file(before_path));
  const xsslab::Report after = xsslab::report_from_json(read_file(after_path));
  emit(out_path, xsslab::compare_reports(before, after).dump(2));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"XSS obfuscation robustness lab"};
  app.require_subcommand(1);

  std::string out_path;
  uint64_t seed = 42;
  std::string config_path;

  // ingest
  auto* ingest_cmd = app.add_subcommand("ingest", "read raw sources into canonical JSONL");
  std::vector<std::string> ingest_paths;
  std::string ingest_format = "jsonl", fixed_label, text_column = "text", label_column = "label";
  bool no_normalize = false, no_dedup = false, no_filter = false;
  size_t min_length = 8;
  double min_printable = 0.9;
  ingest_cmd->add_option("paths", ingest_paths, "input files")->required();
  ingest_cmd->add_option("--format", ingest_format, "csv | jsonl | plain_lines");
  ingest_cmd->add_option("--label", fixed_label, "fixed label for every record");
  ingest_cmd->add_option("--text-column", text_column, "CSV/JSONL text column");
  ingest_cmd->add_option("--label-column", label_column, "CSV/JSONL label column");
  ingest_cmd->add_flag("--no-normalize", no_normalize, "skip normalization");
  ingest_cmd->add_flag("--no-dedup", no_dedup, "skip deduplication");
  ingest_cmd->add_flag("--no-filter", no_filter, "skip length/printable filters");
  ingest_cmd->add_option("--min-length", min_length, "minimum normalized length");
  ingest_cmd->add_option("--min-printable", min_printable, "minimum printable ratio");
  ingest_cmd->add_option("--out", out_path, "output path (default stdout)");

  // split
  auto* split_cmd = app.add_subcommand("split", "deterministic train/test split");
  std::string split_in, train_out = "train.jsonl", test_out = "test.jsonl";
  double train_fraction = 0.8;
  split_cmd->add_option("--in", split_in, "preprocessed JSONL corpus")->required();
  split_cmd->add_option("--train-fraction", train_fraction, "fraction in (0,1)");
  split_cmd->add_option("--seed", seed, "shuffle seed");
  split_cmd->add_option("--train-out", train_out, "train output path");
  split_cmd->add_option("--test-out", test_out, "test output path");

  // obfuscate
  auto* obf_cmd = app.add_subcommand("obfuscate", "apply one random technique per record");
  std::string obf_in;
  std::vector<double> obf_weights;
  bool xss_only = false;
  obf_cmd->add_option("--in", obf_in, "JSONL input")->required();
  obf_cmd->add_option("--weights", obf_weights,
                      "selection weights: js_rewrite base64 uri split")
      ->expected(4);
  obf_cmd->add_option("--seed", seed, "master seed");
  obf_cmd->add_flag("--xss-only", xss_only, "pass benign records through unchanged");
  obf_cmd->add_option("--out", out_path, "output path (default stdout)");

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "temperature-controlled obfuscation synthesis");
  std::string synth_in;
  xsslab::SynthConfig synth_config;
  synth_cmd->add_option("--in", synth_in, "JSONL input")->required();
  synth_cmd->add_option("--temperature", synth_config.temperature, "sampling temperature");
  synth_cmd->add_option("--max-chain", synth_config.max_chain, "maximum transform chain length");
  synth_cmd->add_option("--seed", seed, "master seed");
  synth_cmd->add_flag("--allow-invalid,!--no-allow-invalid", synth_config.allow_invalid,
                      "let high-temperature mutations break syntax (default on)");
  synth_cmd->add_option("--ws-rate", synth_config.whitespace_jitter_rate,
                        "whitespace jitter rate");
  synth_cmd->add_option("--junk-rate", synth_config.junk_char_insert_rate,
                        "junk insertion rate");
  synth_cmd->add_option("--swap-rate", synth_config.encoding_swap_rate, "encoding swap rate");
  synth_cmd->add_flag("--xss-only", xss_only, "pass benign records through unchanged");
  synth_cmd->add_option("--out", out_path, "output path (default stdout)");

  // train
  auto* train_cmd = app.add_subcommand("train", "fit a vocabulary and train one model");
  std::string model_name, train_in, vocab_out = "vocab.json", model_out = "model.json";
  xsslab::TrainConfig train_config;
  std::string feature_subsample = "sqrt";
  bool no_bootstrap = false;
  train_cmd->add_option("--model", model_name, "dt | rf | lr | svm")->required();
  train_cmd->add_option("--in", train_in, "training JSONL")->required();
  train_cmd->add_option("--vocab-out", vocab_out, "vocabulary output path");
  train_cmd->add_option("--model-out", model_out, "model output path");
  train_cmd->add_option("--seed", seed, "training seed");
  train_cmd->add_option("--max-depth", train_config.tree.max_depth, "tree depth limit");
  train_cmd->add_option("--min-samples-split", train_config.tree.min_samples_split,
                        "minimum node size to split");
  train_cmd->add_option("--n-trees", train_config.forest.n_trees, "forest size");
  train_cmd->add_option("--feature-subsample", feature_subsample, "sqrt | all");
  train_cmd->add_flag("--no-bootstrap", no_bootstrap, "train trees on the full sample");
  train_cmd->add_option("--lr", train_config.logreg.learning_rate,
                        "learning rate (logreg; svm uses --svm-lr)");
  train_cmd->add_option("--svm-lr", train_config.svm.learning_rate, "svm learning rate");
  train_cmd->add_option("--epochs", train_config.logreg.epochs, "logreg epochs");
  train_cmd->add_option("--svm-epochs", train_config.svm.epochs, "svm epochs");
  train_cmd->add_option("--l2", train_config.logreg.l2, "logreg l2");
  train_cmd->add_option("--svm-l2", train_config.svm.l2, "svm l2");
  train_cmd->add_option("--batch-size", train_config.logreg.batch_size, "logreg batch size");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a saved model on a JSONL corpus");
  std::string eval_model, eval_vocab, eval_in;
  eval_cmd->add_option("--model", eval_model, "model JSON path")->required();
  eval_cmd->add_option("--vocab", eval_vocab, "vocabulary JSON path")->required();
  eval_cmd->add_option("--in", eval_in, "test JSONL")->required();
  eval_cmd->add_option("--out", out_path, "output path (default stdout)");

  // entropy
  auto* entropy_cmd = app.add_subcommand("entropy", "mean entropy uplift of corpus b over a");
  std::string entropy_a, entropy_b;
  entropy_cmd->add_option("--a", entropy_a, "baseline JSONL corpus")->required();
  entropy_cmd->add_option("--b", entropy_b, "comparison JSONL corpus")->required();
  entropy_cmd->add_option("--out", out_path, "output path (default stdout)");

  // equiv
  auto* equiv_cmd = app.add_subcommand("equiv", "semantic equivalence verdicts for pairs");
  std::string equiv_in;
  equiv_cmd->add_option("--in", equiv_in, "JSONL with text and obf_text fields")->required();
  equiv_cmd->add_option("--out", out_path, "output path (default stdout)");

  // experiment
  auto* exp_cmd = app.add_subcommand("experiment", "run exp1 | exp2 | exp3 end to end");
  std::string experiment_name;
  bool seed_set = false;
  exp_cmd->add_option("id", experiment_name, "exp1 | exp2 | exp3")->required();
  exp_cmd->add_option("--config", config_path, "experiment config JSON");
  exp_cmd->add_option("--seed", seed, "master seed override")->each([&](const std::string&) {
    seed_set = true;
  });
  exp_cmd->add_option("--out", out_path, "report path (default stdout)");

  // compare
  auto* compare_cmd = app.add_subcommand("compare", "per-model metric deltas of two reports");
  std::string before_path, after_path;
  compare_cmd->add_option("--before", before_path, "baseline report")->required();
  compare_cmd->add_option("--after", after_path, "comparison report")->required();
  compare_cmd->add_option("--out", out_path, "output path (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingest_cmd) {
      return run_ingest(ingest_paths, ingest_format, fixed_label, text_column, label_column,
                        no_normalize, no_dedup, no_filter, min_length, min_printable, out_path);
    }
    if (*split_cmd) return run_split(split_in, train_fraction, seed, train_out, test_out);
    if (*obf_cmd) return run_obfuscate(obf_in, out_path, obf_weights, seed, xss_only);
    if (*synth_cmd) return run_synth(synth_in, out_path, synth_config, seed, xss_only);
    if (*train_cmd) {
      train_config.seed = seed;
      train_config.forest.bootstrap = !no_bootstrap;
      if (feature_subsample == "sqrt") train_config.forest.feature_subsample_sqrt = true;
      else if (feature_subsample == "all") train_config.forest.feature_subsample_sqrt = false;
      else throw std::runtime_error("--feature-subsample must be 'sqrt' or 'all'");
      return run_train(model_name, train_in, vocab_out, model_out, train_config);
    }
    if (*eval_cmd) return run_eval(eval_model, eval_vocab, eval_in, out_path);
    if (*entropy_cmd) return run_entropy(entropy_a, entropy_b, out_path);
    if (*equiv_cmd) return run_equiv(equiv_in, out_path);
    if (*exp_cmd) {
      return run_experiment_cmd(experiment_name, config_path,
                                seed_set ? std::optional<uint64_t>(seed) : std::nullopt, out_path);
    }
    if (*compare_cmd) return run_compare(before_path, after_path, out_path);
  } catch (const IoError& e) {
    std::cerr << "error (io): " << e.what() << '\n';
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error (validation): " << e.what() << '\n';
    return kExitData;
  } catch (const json::exception& e) {
    std::cerr << "error (data): " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    const std::string msg = e.what();
    const bool io = msg.find("cannot open") != std::string::npos;
    std::cerr << "error (" << (io ? "io" : "data") << "): " << msg << '\n';
    return io ? kExitIo : kExitData;
  }
  return kExitUsage;
}
