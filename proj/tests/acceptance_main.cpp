// Acceptance suite for the obfuscation robustness lab.
//
// Nine gates, one PASS/FAIL line each, nonzero exit if any gate fails.
// Gate runtime limits are enforced alongside the checks themselves.
// Usage: acceptance [corpus.jsonl]   (default: data/corpus.jsonl)

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "xsslab/analysis.hpp"
#include "xsslab/corpus.hpp"
#include "xsslab/harness.hpp"
#include "xsslab/models.hpp"
#include "xsslab/obfuscator.hpp"
#include "xsslab/rng.hpp"
#include "xsslab/synth.hpp"

using namespace xsslab;
using json = nlohmann::json;

namespace {

std::string g_corpus_path = "data/corpus.jsonl";
int g_failures = 0;

struct GateTimer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

void report(int gate, const char* name, bool ok, double elapsed, double budget,
            const std::string& detail) {
  const bool in_budget = elapsed < budget;
  const bool pass = ok && in_budget;
  if (!pass) ++g_failures;
  std::printf("%s: criterion %d (%s) — %s [%.2fs, budget %.0fs]\n", pass ? "PASS" : "FAIL", gate,
              name, detail.c_str(), elapsed, budget);
  if (!ok) std::printf("      checks failed: %s\n", detail.c_str());
  if (!in_budget) std::printf("      over runtime budget\n");
  std::fflush(stdout);
}

Corpus load_desk_corpus() {
  auto result = ingest(g_corpus_path, IngestFormat::jsonl, LabelPolicy{});
  Corpus corpus = normalize_corpus(std::move(result.corpus));
  corpus = apply_filters(std::move(corpus), FilterConfig{});
  return dedup(corpus);
}

ExperimentConfig desk_config(ExperimentId id) {
  ExperimentConfig config = default_experiment_config();
  config.id = id;
  config.sources[0].path = g_corpus_path;
  return config;
}

// ---- criterion 1: exact unit identities ----
void gate1() {
  GateTimer timer;
  bool ok = true;
  std::string detail;

  ok &= std::abs(shannon_entropy("aaaa") - 0.0) < 1e-9;
  ok &= std::abs(shannon_entropy("ab") - 1.0) < 1e-9;
  ok &= std::abs(shannon_entropy("abcd") - 2.0) < 1e-9;
  if (!ok) detail += "entropy identities broken; ";

  Rng rng(1);
  bool metrics_ok = true;
  for (int i = 0; i < 1000; ++i) {
    Confusion c{rng.below(100), rng.below(100), rng.below(100), rng.below(100)};
    if (c.tp + c.fp + c.fn + c.tn == 0) c.tn = 1;
    const Metrics m = metrics_from_confusion(c);
    const double total = static_cast<double>(c.tp + c.fp + c.fn + c.tn);
    metrics_ok &= std::abs(m.accuracy - (double)(c.tp + c.tn) / total) < 1e-12;
    const double p = c.tp + c.fp > 0 ? (double)c.tp / (double)(c.tp + c.fp) : 0.0;
    const double r = c.tp + c.fn > 0 ? (double)c.tp / (double)(c.tp + c.fn) : 0.0;
    metrics_ok &= std::abs(m.precision - p) < 1e-12;
    metrics_ok &= std::abs(m.recall - r) < 1e-12;
    const double f1 = p + r > 0 ? 2 * p * r / (p + r) : 0.0;
    metrics_ok &= std::abs(m.f1 - f1) < 1e-12;
  }
  if (!metrics_ok) detail += "metric formulas broken; ";
  ok &= metrics_ok;

  const bool split_ok = static_cast<size_t>(std::floor(19359 * 0.8)) == 15487;
  if (!split_ok) detail += "split arithmetic broken; ";
  ok &= split_ok;

  if (detail.empty()) {
    detail = "entropy identities, 1000 random confusion matrices, floor(19359*0.8)=15487";
  }
  report(1, "unit identities", ok, timer.seconds(), 1.0, detail);
}

// ---- criterion 2: round-trip equivalence ----
void gate2() {
  GateTimer timer;
  const Corpus corpus = load_desk_corpus();

  std::vector<std::string> js_payloads;
  for (const auto& s : corpus.samples) {
    if (s.label == Label::xss &&
        detect_context(s.text).kind == ContextKind::js_expression) {
      js_payloads.push_back(s.text);
    }
  }

  // Every recipe over the reversible transforms up to depth 3.
  const std::array<ObfStep, 3> reversible = {ObfStep::base64_wrap, ObfStep::uri_wrap,
                                             ObfStep::string_split};
  std::vector<std::vector<ObfStep>> recipes;
  for (ObfStep a : reversible) {
    recipes.push_back({a});
    for (ObfStep b : reversible) {
      recipes.push_back({a, b});
      for (ObfStep c : reversible) recipes.push_back({a, b, c});
    }
  }

  size_t equivalent = 0, total = 0;
  for (size_t i = 0; i < js_payloads.size(); ++i) {
    for (size_t r = 0; r < recipes.size(); ++r) {
      ObfuscationRecipe recipe{recipes[r], derive_seed(2025, i * 100 + r)};
      ++total;
      if (check_equivalence(js_payloads[i], obfuscate(js_payloads[i], recipe)) ==
          Equivalence::equivalent) {
        ++equivalent;
      }
    }
  }

  size_t alpha = 0, alpha_total = 0;
  for (size_t i = 0; i < js_payloads.size(); ++i) {
    for (uint64_t seed : {11ull, 12ull}) {
      ++alpha_total;
      if (check_equivalence(js_payloads[i],
                            js_rewrite(js_payloads[i], derive_seed(seed, i))) ==
          Equivalence::alpha_equivalent) {
        ++alpha;
      }
    }
  }

  const bool ok = equivalent == total && alpha == alpha_total && total > 0;
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "%zu/%zu reversible recipes equivalent, %zu/%zu rewrites alpha-equivalent over "
                "%zu pure-JS payloads",
                equivalent, total, alpha, alpha_total, js_payloads.size());
  report(2, "round-trip equivalence", ok, timer.seconds(), 30.0, buf);
}

// Shared experiment results for gates 3-5.
Report g_exp1, g_exp2, g_exp3;

// ---- criterion 3: clean-train / clean-test ----
void gate3() {
  GateTimer timer;
  g_exp1 = run_experiment(desk_config(ExperimentId::exp1_clean_clean));
  bool ok = true;
  std::string detail;
  for (const auto& [name, m] : g_exp1.models) {
    if (m.accuracy < 0.95 || m.f1 < 0.93) {
      ok = false;
      detail += name + " below gate; ";
    }
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%s acc=%.3f f1=%.3f ", name.c_str(), m.accuracy, m.f1);
    detail += buf;
  }
  report(3, "exp1 clean baseline: accuracy >= 0.95, f1 >= 0.93", ok, timer.seconds(), 180.0,
         detail);
}

// ---- criterion 4: clean-train / obfuscated-test collapse ----
void gate4() {
  GateTimer timer;
  g_exp2 = run_experiment(desk_config(ExperimentId::exp2_clean_obf));
  bool ok = true;
  std::string detail;

  for (const char* name : {"logistic_regression", "linear_svm"}) {
    const double drop = g_exp1.models.at(name).recall - g_exp2.models.at(name).recall;
    char buf[80];
    std::snprintf(buf, sizeof(buf), "%s recall drop=%.3f ", name, drop);
    detail += buf;
    if (drop < 0.25) {
      ok = false;
      detail += "(below 0.25) ";
    }
  }
  for (const auto& [name, m] : g_exp2.models) {
    if (m.precision < 0.90) {
      ok = false;
      detail += name + " precision below 0.90; ";
    }
    if (g_exp1.models.at(name).accuracy <= m.accuracy) {
      ok = false;
      detail += name + " accuracy did not drop; ";
    }
  }
  report(4, "exp2 collapse: LR/SVM recall -0.25, precision stays >= 0.90", ok, timer.seconds(),
         180.0, detail);
}

// ---- criterion 5: augmented-training recovery ----
void gate5() {
  GateTimer timer;
  g_exp3 = run_experiment(desk_config(ExperimentId::exp3_aug_obf));
  bool ok = true;
  std::string detail;

  const Metrics& rf = g_exp3.models.at("random_forest");
  char buf[96];
  std::snprintf(buf, sizeof(buf), "rf recall=%.3f acc=%.3f ", rf.recall, rf.accuracy);
  detail += buf;
  if (rf.recall < 0.90 || rf.accuracy < 0.95) {
    ok = false;
    detail += "(rf below gate) ";
  }
  for (const auto& [name, m] : g_exp3.models) {
    const double before = g_exp2.models.at(name).recall;
    if (!(m.recall > before)) {
      ok = false;
      detail += name + " recall did not recover; ";
    } else {
      std::snprintf(buf, sizeof(buf), "%s +%.3f ", name.c_str(), m.recall - before);
      detail += buf;
    }
  }
  report(5, "exp3 recovery: rf recall >= 0.90 and acc >= 0.95, all recalls up", ok,
         timer.seconds(), 300.0, detail);
}

// ---- criterion 6: entropy uplift of synthesized obfuscations ----
void gate6() {
  GateTimer timer;
  const Corpus corpus = load_desk_corpus();
  Corpus xss;
  xss.normalized = true;
  for (const auto& s : corpus.samples) {
    if (s.label == Label::xss) xss.samples.push_back(s);
  }

  Corpus baseline;
  for (size_t i = 0; i < xss.samples.size(); ++i) {
    auto draw = obfuscate_random(xss.samples[i].text, {0.25, 0.25, 0.25, 0.25},
                                 derive_seed(606, i));
    baseline.samples.push_back({std::move(draw.text), Label::xss, "obfuscated"});
  }

  SynthConfig synth_config;  // defaults: temperature 1.5
  Corpus synth_out = synthesize_corpus(xss, synth_config, 607);
  Corpus synth_only;
  for (auto& s : synth_out.samples) {
    if (s.origin == "synth") synth_only.samples.push_back(std::move(s));
  }

  const EntropyReport er = entropy_uplift(baseline, synth_only);
  const bool ok = er.uplift_defined && er.uplift_percent >= 15.0;
  char buf[144];
  std::snprintf(buf, sizeof(buf),
                "uplift=%.1f%% (gate 15%%, reported reference 28.1%%), mean %.3f -> %.3f bits "
                "over %zu samples",
                er.uplift_percent, er.mean_a, er.mean_b, xss.samples.size());
  report(6, "synth entropy uplift at temperature 1.5", ok, timer.seconds(), 30.0, buf);
}

// ---- criterion 7: end-to-end determinism ----
void gate7() {
  GateTimer timer;
  bool ok = true;
  std::string detail;
  for (ExperimentId id : {ExperimentId::exp2_clean_obf, ExperimentId::exp3_aug_obf}) {
    const ExperimentConfig config = desk_config(id);
    json a = json::parse(report_to_json(run_experiment(config)));
    json b = json::parse(report_to_json(run_experiment(config)));
    a.erase("timestamp");
    b.erase("timestamp");
    if (a.dump() != b.dump()) {
      ok = false;
      detail += std::string(experiment_id_name(id)) + " not reproducible; ";
    }
  }
  if (detail.empty()) detail = "exp2 and exp3 reports byte-identical minus timestamp";
  report(7, "determinism under fixed config and seed", ok, timer.seconds(), 300.0, detail);
}

// ---- criterion 8: logistic gradient vs finite differences ----
void gate8() {
  GateTimer timer;
  Rng rng(808);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const uint32_t dim = 2 + static_cast<uint32_t>(rng.below(19));   // <= 20
    const size_t n = 3 + rng.below(48);                              // <= 50
    std::vector<CountVector> X;
    std::vector<Label> y;
    for (size_t i = 0; i < n; ++i) {
      CountVector v;
      v.dimension = dim;
      for (uint32_t f = 0; f < dim; ++f) {
        if (rng.chance(0.45)) v.entries.push_back({f, 1 + (uint32_t)rng.below(4)});
      }
      X.push_back(std::move(v));
      y.push_back(rng.chance(0.5) ? Label::xss : Label::benign);
    }
    LinearModel m;
    m.weights.resize(dim);
    for (auto& w : m.weights) w = rng.next_real() - 0.5;
    m.bias = rng.next_real() - 0.5;
    const double l2 = 1e-3;

    std::vector<double> grad;
    double grad_b = 0;
    logreg_gradient(m, X, y, l2, grad, grad_b);

    const double h = 1e-5;
    for (uint32_t f = 0; f < dim; ++f) {
      LinearModel up = m, down = m;
      up.weights[f] += h;
      down.weights[f] -= h;
      const double fd = (logreg_loss(up, X, y, l2) - logreg_loss(down, X, y, l2)) / (2 * h);
      worst = std::max(worst, std::abs(fd - grad[f]) / std::max(1e-8, std::abs(grad[f])));
    }
    LinearModel up = m, down = m;
    up.bias += h;
    down.bias -= h;
    const double fd_b = (logreg_loss(up, X, y, l2) - logreg_loss(down, X, y, l2)) / (2 * h);
    worst = std::max(worst, std::abs(fd_b - grad_b) / std::max(1e-8, std::abs(grad_b)));
  }
  const bool ok = worst < 1e-5;
  char buf[96];
  std::snprintf(buf, sizeof(buf), "worst relative error %.2e over 100 instances", worst);
  report(8, "logistic gradient matches finite differences", ok, timer.seconds(), 60.0, buf);
}

// ---- criterion 9: forest degeneracy oracle ----
void gate9() {
  GateTimer timer;
  Rng rng(909);
  TrainConfig config;
  config.forest.n_trees = 1;
  config.forest.bootstrap = false;
  config.forest.feature_subsample_sqrt = false;

  size_t agreeing = 0;
  const size_t datasets = 50;
  for (size_t trial = 0; trial < datasets; ++trial) {
    const uint32_t dim = 2 + static_cast<uint32_t>(rng.below(10));
    const size_t n = 6 + rng.below(50);
    std::vector<CountVector> X;
    std::vector<Label> y;
    for (size_t i = 0; i < n; ++i) {
      CountVector v;
      v.dimension = dim;
      for (uint32_t f = 0; f < dim; ++f) {
        if (rng.chance(0.4)) v.entries.push_back({f, 1 + (uint32_t)rng.below(5)});
      }
      X.push_back(std::move(v));
      y.push_back(rng.chance(0.5) ? Label::xss : Label::benign);
    }
    y[0] = Label::benign;
    y[n - 1] = Label::xss;

    const TrainedModel tree = train(ModelKind::decision_tree, X, y, config);
    const TrainedModel forest = train(ModelKind::random_forest, X, y, config);

    std::vector<CountVector> probes = X;
    for (int i = 0; i < 40; ++i) {
      CountVector v;
      v.dimension = dim;
      for (uint32_t f = 0; f < dim; ++f) {
        if (rng.chance(0.4)) v.entries.push_back({f, 1 + (uint32_t)rng.below(5)});
      }
      probes.push_back(std::move(v));
    }
    if (predict(tree, probes) == predict(forest, probes)) ++agreeing;
  }
  const bool ok = agreeing == datasets;
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%zu/%zu datasets prediction-identical", agreeing, datasets);
  report(9, "single-tree forest equals the decision tree", ok, timer.seconds(), 60.0, buf);
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1) g_corpus_path = argv[1];

  try {
    gate1();
    gate2();
    gate3();
    gate4();
    gate5();
    gate6();
    gate7();
    gate8();
    gate9();
  } catch (const std::exception& e) {
    std::printf("FAIL: acceptance aborted — %s\n", e.what());
    return 2;
  }

  if (g_failures > 0) {
    std::printf("\n%d criterion(s) FAILED\n", g_failures);
    return 1;
  }
  std::printf("\nAll 9 acceptance criteria PASSED\n");
  return 0;
}
