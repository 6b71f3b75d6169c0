#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "xsslab/corpus.hpp"
#include "xsslab/vectorizer.hpp"

namespace xsslab {

enum class ModelKind { decision_tree, random_forest, logistic_regression, linear_svm };

std::string_view model_kind_name(ModelKind kind);
std::optional<ModelKind> parse_model_kind(std::string_view name);

struct TreeConfig {
  int max_depth = 40;
  int min_samples_split = 2;
};

struct ForestConfig {
  int n_trees = 100;
  bool feature_subsample_sqrt = true;  // false: consider all features at each split
  bool bootstrap = true;
};

struct LogRegConfig {
  double learning_rate = 0.1;
  int epochs = 50;
  double l2 = 1e-4;
  int batch_size = 32;
};

struct SvmConfig {
  double learning_rate = 0.01;
  int epochs = 50;
  double l2 = 1e-4;
};

struct TrainConfig {
  uint64_t seed = 42;
  TreeConfig tree;
  ForestConfig forest;
  LogRegConfig logreg;
  SvmConfig svm;
};

// feature < 0 marks a leaf carrying `leaf`; otherwise samples with
// count[feature] <= threshold go left.
struct TreeNode {
  int32_t feature = -1;
  double threshold = 0.0;
  uint32_t left = 0;
  uint32_t right = 0;
  Label leaf = Label::benign;
};

struct DecisionTreeModel {
  std::vector<TreeNode> nodes;
};

struct ForestModel {
  std::vector<DecisionTreeModel> trees;
};

struct LinearModel {
  std::vector<double> weights;
  double bias = 0.0;
};

struct TrainedModel {
  ModelKind kind = ModelKind::decision_tree;
  uint32_t vocab_size = 0;
  std::variant<DecisionTreeModel, ForestModel, LinearModel> parameters;
};

// Greedy Gini tree, bootstrap/sqrt-feature forest with majority vote,
// mini-batch logistic regression, subgradient linear SVM. Deterministic in
// (data, config, seed). Throws on empty data, a single-class training set or
// inconsistent dimensions.
TrainedModel train(ModelKind kind, const std::vector<CountVector>& X, const std::vector<Label>& y,
                   const TrainConfig& config);

Label predict_one(const TrainedModel& model, const CountVector& x);
std::vector<Label> predict(const TrainedModel& model, const std::vector<CountVector>& X);

struct Confusion {
  uint64_t tp = 0, fp = 0, fn = 0, tn = 0;
};

struct Metrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  Confusion confusion;
};

// Positive class is xss. Precision/recall are 0 when their denominator is 0,
// f1 is 0 when precision + recall is 0.
Metrics metrics_from_confusion(const Confusion& c);
Metrics evaluate(const std::vector<Label>& pred, const std::vector<Label>& truth);

// Loss/gradient/objective helpers, exposed so tests can check the analytic
// gradient against finite differences and watch the hinge objective trend.
double logreg_loss(const LinearModel& m, const std::vector<CountVector>& X,
                   const std::vector<Label>& y, double l2);
void logreg_gradient(const LinearModel& m, const std::vector<CountVector>& X,
                     const std::vector<Label>& y, double l2, std::vector<double>& grad_w,
                     double& grad_b);
double svm_objective(const LinearModel& m, const std::vector<CountVector>& X,
                     const std::vector<Label>& y, double l2);

// Versioned JSON envelope {version, kind, vocab_size, vocab_hash, parameters}.
std::string model_to_json(const TrainedModel& model, uint64_t vocab_hash);
TrainedModel model_from_json(const std::string& text, uint64_t* vocab_hash = nullptr);
void save_model(const std::string& path, const TrainedModel& model, uint64_t vocab_hash);
TrainedModel load_model(const std::string& path, uint64_t* vocab_hash = nullptr);

}  // namespace xsslab
