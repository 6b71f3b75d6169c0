#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "xsslab/corpus.hpp"
#include "xsslab/models.hpp"
#include "xsslab/synth.hpp"

namespace xsslab {

inline constexpr std::string_view kToolVersion = "0.1.0";

enum class ExperimentId { exp1_clean_clean, exp2_clean_obf, exp3_aug_obf };

std::string_view experiment_id_name(ExperimentId id);
std::optional<ExperimentId> parse_experiment_id(std::string_view name);

struct IngestSource {
  std::string path;
  IngestFormat format = IngestFormat::jsonl;
  LabelPolicy policy;
};

// Everything a run needs; the echo of this config inside a report is enough
// to reproduce the run bit-exactly.
struct ExperimentConfig {
  ExperimentId id = ExperimentId::exp1_clean_clean;
  std::vector<IngestSource> sources;
  SplitSpec split;
  FilterConfig filters;
  std::array<double, 4> obf_weights = {0.25, 0.25, 0.25, 0.25};
  SynthConfig synth;
  TrainConfig models;
  uint64_t master_seed = 42;
};

ExperimentConfig default_experiment_config();

// Partial override: any field present in the JSON replaces the default.
ExperimentConfig experiment_config_from_json(const nlohmann::json& doc);
nlohmann::ordered_json experiment_config_to_json(const ExperimentConfig& config);

// Sets every seed field from one master value.
void apply_master_seed(ExperimentConfig& config, uint64_t seed);

struct Report {
  std::string experiment;
  std::string tool_version;
  std::string timestamp;
  nlohmann::ordered_json config_echo;
  nlohmann::ordered_json corpus_stats;
  nlohmann::ordered_json obfuscation;  // exp2/exp3 only, else null
  nlohmann::ordered_json synth_stats;  // exp3 only, else null
  nlohmann::ordered_json entropy;      // exp3 only, else null
  std::map<std::string, Metrics> models;
};

std::string report_to_json(const Report& report);
Report report_from_json(const std::string& text);

// exp1: train and test on the clean split. exp2: train clean, test with
// every xss test sample replaced by an obfuscate_random draw. exp3: training
// set augmented with synthesize_corpus output, tested as exp2.
Report run_experiment(const ExperimentConfig& config);

// Per-model metric deltas, sign-tagged. Throws when the model sets differ.
nlohmann::ordered_json compare_reports(const Report& before, const Report& after);

}  // namespace xsslab
