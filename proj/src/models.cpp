#include "xsslab/models.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

#include "xsslab/rng.hpp"

namespace xsslab {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string_view model_kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::decision_tree: return "decision_tree";
    case ModelKind::random_forest: return "random_forest";
    case ModelKind::logistic_regression: return "logistic_regression";
    case ModelKind::linear_svm: return "linear_svm";
  }
  return "?";
}

std::optional<ModelKind> parse_model_kind(std::string_view name) {
  if (name == "decision_tree" || name == "dt") return ModelKind::decision_tree;
  if (name == "random_forest" || name == "rf") return ModelKind::random_forest;
  if (name == "logistic_regression" || name == "lr") return ModelKind::logistic_regression;
  if (name == "linear_svm" || name == "svm") return ModelKind::linear_svm;
  return std::nullopt;
}

namespace {

void check_training_input(const std::vector<CountVector>& X, const std::vector<Label>& y) {
  if (X.empty() || X.size() != y.size()) {
    throw std::invalid_argument("train: need equally many non-empty X and y");
  }
  const uint32_t dim = X[0].dimension;
  for (const auto& x : X) {
    if (x.dimension != dim) throw std::invalid_argument("train: inconsistent vector dimensions");
  }
  bool has_benign = false, has_xss = false;
  for (Label l : y) (l == Label::xss ? has_xss : has_benign) = true;
  if (!has_benign || !has_xss) {
    throw std::runtime_error("train: both classes must be present in the training set");
  }
}

// Column-major view of the data: per feature, the samples with a nonzero
// count. Tree building scans candidate columns instead of every sample.
struct ColumnIndex {
  std::vector<std::vector<std::pair<uint32_t, uint32_t>>> columns;  // feature -> (sample, count)

  ColumnIndex(const std::vector<CountVector>& X, uint32_t dim) : columns(dim) {
    for (uint32_t i = 0; i < X.size(); ++i) {
      for (const auto& [f, c] : X[i].entries) columns[f].push_back({i, c});
    }
  }
};

double gini_from_counts(uint64_t n_benign, uint64_t n_xss) {
  const double n = static_cast<double>(n_benign + n_xss);
  if (n == 0.0) return 0.0;
  const double pb = static_cast<double>(n_benign) / n;
  const double px = static_cast<double>(n_xss) / n;
  return 1.0 - pb * pb - px * px;
}

Label majority_label(uint64_t n_benign, uint64_t n_xss) {
  return n_xss >= n_benign ? Label::xss : Label::benign;  // tie goes to xss
}

struct ValueBucket {
  uint32_t value;
  uint64_t n_benign = 0;
  uint64_t n_xss = 0;
};

class TreeBuilder {
 public:
  TreeBuilder(const std::vector<CountVector>& X, const std::vector<Label>& y,
              const ColumnIndex& columns, const TreeConfig& config, Rng* feature_rng,
              size_t n_candidate_features)
      : X_(X), y_(y), columns_(columns), config_(config), feature_rng_(feature_rng),
        n_candidates_(n_candidate_features), weight_(X.size(), 0) {}

  DecisionTreeModel build(std::vector<uint32_t> sample_ids) {
    DecisionTreeModel model;
    build_node(std::move(sample_ids), 0, model);
    return model;
  }

 private:
  struct Split {
    int32_t feature = -1;
    double threshold = 0.0;
    double weighted_impurity = 0.0;
  };

  uint32_t build_node(std::vector<uint32_t> ids, int depth, DecisionTreeModel& model) {
    uint64_t n_benign = 0, n_xss = 0;
    for (uint32_t id : ids) (y_[id] == Label::xss ? n_xss : n_benign)++;

    const uint32_t node_index = static_cast<uint32_t>(model.nodes.size());
    model.nodes.push_back({});

    const bool pure = n_benign == 0 || n_xss == 0;
    const bool too_deep = depth >= config_.max_depth;
    const bool too_small = ids.size() < static_cast<size_t>(config_.min_samples_split);
    Split best;
    if (!pure && !too_deep && !too_small) {
      best = find_best_split(ids, n_benign, n_xss);
    }

    if (best.feature < 0) {
      model.nodes[node_index].feature = -1;
      model.nodes[node_index].leaf = majority_label(n_benign, n_xss);
      return node_index;
    }

    std::vector<uint32_t> left_ids, right_ids;
    left_ids.reserve(ids.size());
    right_ids.reserve(ids.size());
    for (uint32_t id : ids) {
      const double v = X_[id].at(static_cast<uint32_t>(best.feature));
      (v <= best.threshold ? left_ids : right_ids).push_back(id);
    }
    ids.clear();
    ids.shrink_to_fit();

    const uint32_t left = build_node(std::move(left_ids), depth + 1, model);
    const uint32_t right = build_node(std::move(right_ids), depth + 1, model);
    TreeNode& node = model.nodes[node_index];
    node.feature = best.feature;
    node.threshold = best.threshold;
    node.left = left;
    node.right = right;
    return node_index;
  }

  Split find_best_split(const std::vector<uint32_t>& ids, uint64_t n_benign, uint64_t n_xss) {
    const double parent_impurity = gini_from_counts(n_benign, n_xss);
    const uint64_t total = n_benign + n_xss;

    for (uint32_t id : ids) ++weight_[id];

    std::vector<uint32_t> candidates = candidate_features();

    Split best;
    best.weighted_impurity = parent_impurity - 1e-12;  // require strict reduction
    std::vector<ValueBucket> buckets;

    for (uint32_t f : candidates) {
      buckets.clear();
      uint64_t nz_benign = 0, nz_xss = 0;
      for (const auto& [sid, count] : columns_.columns[f]) {
        const uint32_t w = weight_[sid];
        if (w == 0) continue;
        auto it = std::find_if(buckets.begin(), buckets.end(),
                               [&](const ValueBucket& b) { return b.value == count; });
        if (it == buckets.end()) {
          buckets.push_back({count, 0, 0});
          it = buckets.end() - 1;
        }
        if (y_[sid] == Label::xss) {
          it->n_xss += w;
          nz_xss += w;
        } else {
          it->n_benign += w;
          nz_benign += w;
        }
      }
      const uint64_t zero_benign = n_benign - nz_benign;
      const uint64_t zero_xss = n_xss - nz_xss;
      if (zero_benign + zero_xss > 0) buckets.push_back({0, zero_benign, zero_xss});
      if (buckets.size() < 2) continue;

      std::sort(buckets.begin(), buckets.end(),
                [](const ValueBucket& a, const ValueBucket& b) { return a.value < b.value; });

      uint64_t left_benign = 0, left_xss = 0;
      for (size_t j = 0; j + 1 < buckets.size(); ++j) {
        left_benign += buckets[j].n_benign;
        left_xss += buckets[j].n_xss;
        const uint64_t right_benign = n_benign - left_benign;
        const uint64_t right_xss = n_xss - left_xss;
        const double n_left = static_cast<double>(left_benign + left_xss);
        const double n_right = static_cast<double>(right_benign + right_xss);
        const double weighted =
            (n_left * gini_from_counts(left_benign, left_xss) +
             n_right * gini_from_counts(right_benign, right_xss)) /
            static_cast<double>(total);
        // Ascending feature and threshold iteration makes strict '<' pick the
        // canonical (impurity, feature, threshold) minimum.
        if (weighted < best.weighted_impurity) {
          best.weighted_impurity = weighted;
          best.feature = static_cast<int32_t>(f);
          best.threshold =
              (static_cast<double>(buckets[j].value) + static_cast<double>(buckets[j + 1].value)) /
              2.0;
        }
      }
    }

    for (uint32_t id : ids) weight_[id] = 0;
    return best;
  }

  std::vector<uint32_t> candidate_features() {
    const uint32_t dim = static_cast<uint32_t>(columns_.columns.size());
    if (!feature_rng_ || n_candidates_ >= dim) {
      std::vector<uint32_t> all(dim);
      for (uint32_t f = 0; f < dim; ++f) all[f] = f;
      return all;
    }
    // Partial Fisher-Yates draw of n_candidates_ distinct features.
    std::vector<uint32_t> pool(dim);
    for (uint32_t f = 0; f < dim; ++f) pool[f] = f;
    std::vector<uint32_t> picked;
    picked.reserve(n_candidates_);
    for (size_t i = 0; i < n_candidates_; ++i) {
      const size_t j = i + feature_rng_->below(dim - i);
      std::swap(pool[i], pool[j]);
      picked.push_back(pool[i]);
    }
    std::sort(picked.begin(), picked.end());
    return picked;
  }

  const std::vector<CountVector>& X_;
  const std::vector<Label>& y_;
  const ColumnIndex& columns_;
  const TreeConfig& config_;
  Rng* feature_rng_;
  size_t n_candidates_;
  std::vector<uint32_t> weight_;
};

std::vector<uint32_t> all_sample_ids(size_t n) {
  std::vector<uint32_t> ids(n);
  for (size_t i = 0; i < n; ++i) ids[i] = static_cast<uint32_t>(i);
  return ids;
}

DecisionTreeModel train_tree(const std::vector<CountVector>& X, const std::vector<Label>& y,
                             const ColumnIndex& columns, const TreeConfig& config) {
  TreeBuilder builder(X, y, columns, config, nullptr, columns.columns.size());
  return builder.build(all_sample_ids(X.size()));
}

ForestModel train_forest(const std::vector<CountVector>& X, const std::vector<Label>& y,
                         const ColumnIndex& columns, const TrainConfig& config) {
  const uint32_t dim = X[0].dimension;
  const size_t n_candidates =
      config.forest.feature_subsample_sqrt
          ? std::max<size_t>(1, static_cast<size_t>(std::sqrt(static_cast<double>(dim))))
          : dim;

  ForestModel forest;
  forest.trees.resize(static_cast<size_t>(config.forest.n_trees));

  auto build_one = [&](size_t t) {
    Rng rng(derive_seed(config.seed, t));
    std::vector<uint32_t> ids;
    if (config.forest.bootstrap) {
      ids.reserve(X.size());
      for (size_t i = 0; i < X.size(); ++i) {
        ids.push_back(static_cast<uint32_t>(rng.below(X.size())));
      }
    } else {
      ids = all_sample_ids(X.size());
    }
    Rng* feature_rng = n_candidates < dim ? &rng : nullptr;
    TreeBuilder builder(X, y, columns, config.tree, feature_rng, n_candidates);
    forest.trees[t] = builder.build(std::move(ids));
  };

  // Trees are independent; per-tree seeds make the result identical no
  // matter how the work is scheduled.
  const size_t n_workers =
      std::min<size_t>(std::max(1u, std::thread::hardware_concurrency()), forest.trees.size());
  if (n_workers <= 1) {
    for (size_t t = 0; t < forest.trees.size(); ++t) build_one(t);
  } else {
    std::vector<std::thread> workers;
    workers.reserve(n_workers);
    for (size_t w = 0; w < n_workers; ++w) {
      workers.emplace_back([&, w] {
        for (size_t t = w; t < forest.trees.size(); t += n_workers) build_one(t);
      });
    }
    for (auto& th : workers) th.join();
  }
  return forest;
}

double sparse_dot(const LinearModel& m, const CountVector& x) {
  double z = m.bias;
  for (const auto& [f, c] : x.entries) z += m.weights[f] * static_cast<double>(c);
  return z;
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

LinearModel train_logreg(const std::vector<CountVector>& X, const std::vector<Label>& y,
                         const LogRegConfig& config, uint64_t seed) {
  if (config.learning_rate <= 0 || config.epochs < 1 || config.batch_size < 1 || config.l2 < 0) {
    throw std::invalid_argument("logistic_regression: invalid hyperparameters");
  }
  const size_t n = X.size();
  const uint32_t dim = X[0].dimension;
  LinearModel m;
  m.weights.assign(dim, 0.0);

  Rng rng(seed);
  std::vector<uint32_t> order = all_sample_ids(n);
  std::vector<double> grad(dim, 0.0);
  std::vector<uint32_t> touched;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (size_t i = n - 1; i > 0; --i) {
      const size_t j = rng.below(i + 1);
      std::swap(order[i], order[j]);
    }
    for (size_t start = 0; start < n; start += static_cast<size_t>(config.batch_size)) {
      const size_t stop = std::min(n, start + static_cast<size_t>(config.batch_size));
      const double batch = static_cast<double>(stop - start);
      touched.clear();
      double grad_bias = 0.0;
      for (size_t k = start; k < stop; ++k) {
        const CountVector& x = X[order[k]];
        const double target = y[order[k]] == Label::xss ? 1.0 : 0.0;
        const double delta = sigmoid(sparse_dot(m, x)) - target;
        for (const auto& [f, c] : x.entries) {
          if (grad[f] == 0.0) touched.push_back(f);
          grad[f] += delta * static_cast<double>(c);
        }
        grad_bias += delta;
      }
      const double shrink = 1.0 - config.learning_rate * config.l2;
      for (double& w : m.weights) w *= shrink;
      for (uint32_t f : touched) {
        m.weights[f] -= config.learning_rate * grad[f] / batch;
        grad[f] = 0.0;
      }
      m.bias -= config.learning_rate * grad_bias / batch;
    }
  }
  return m;
}

LinearModel train_svm(const std::vector<CountVector>& X, const std::vector<Label>& y,
                      const SvmConfig& config, uint64_t seed) {
  if (config.learning_rate <= 0 || config.epochs < 1 || config.l2 < 0) {
    throw std::invalid_argument("linear_svm: invalid hyperparameters");
  }
  const size_t n = X.size();
  const uint32_t dim = X[0].dimension;

  // w is kept as scale * v so the per-step L2 shrink stays O(nnz).
  std::vector<double> v(dim, 0.0);
  double scale = 1.0;
  double bias = 0.0;

  Rng rng(seed);
  std::vector<uint32_t> order = all_sample_ids(n);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (size_t i = n - 1; i > 0; --i) {
      const size_t j = rng.below(i + 1);
      std::swap(order[i], order[j]);
    }
    for (uint32_t idx : order) {
      const CountVector& x = X[idx];
      const double target = y[idx] == Label::xss ? 1.0 : -1.0;
      double z = bias;
      for (const auto& [f, c] : x.entries) z += scale * v[f] * static_cast<double>(c);

      scale *= 1.0 - config.learning_rate * config.l2;
      if (scale < 1e-9) {  // fold the scale back in before it degenerates
        for (double& w : v) w *= scale;
        scale = 1.0;
      }
      if (target * z < 1.0) {
        for (const auto& [f, c] : x.entries) {
          v[f] += config.learning_rate * target * static_cast<double>(c) / scale;
        }
        bias += config.learning_rate * target;
      }
    }
  }

  LinearModel m;
  m.weights.resize(dim);
  for (uint32_t f = 0; f < dim; ++f) m.weights[f] = scale * v[f];
  m.bias = bias;
  return m;
}

Label tree_predict(const DecisionTreeModel& tree, const CountVector& x) {
  uint32_t node = 0;
  for (;;) {
    const TreeNode& t = tree.nodes[node];
    if (t.feature < 0) return t.leaf;
    node = x.at(static_cast<uint32_t>(t.feature)) <= t.threshold ? t.left : t.right;
  }
}

}  // namespace

TrainedModel train(ModelKind kind, const std::vector<CountVector>& X, const std::vector<Label>& y,
                   const TrainConfig& config) {
  check_training_input(X, y);

  TrainedModel model;
  model.kind = kind;
  model.vocab_size = X[0].dimension;

  switch (kind) {
    case ModelKind::decision_tree: {
      ColumnIndex columns(X, X[0].dimension);
      model.parameters = train_tree(X, y, columns, config.tree);
      break;
    }
    case ModelKind::random_forest: {
      if (config.forest.n_trees < 1) throw std::invalid_argument("random_forest: n_trees >= 1");
      ColumnIndex columns(X, X[0].dimension);
      model.parameters = train_forest(X, y, columns, config);
      break;
    }
    case ModelKind::logistic_regression:
      model.parameters = train_logreg(X, y, config.logreg, config.seed);
      break;
    case ModelKind::linear_svm:
      model.parameters = train_svm(X, y, config.svm, config.seed);
      break;
  }
  return model;
}

Label predict_one(const TrainedModel& model, const CountVector& x) {
  if (x.dimension != model.vocab_size) {
    throw std::invalid_argument("predict: vector dimension does not match the model");
  }
  switch (model.kind) {
    case ModelKind::decision_tree:
      return tree_predict(std::get<DecisionTreeModel>(model.parameters), x);
    case ModelKind::random_forest: {
      const auto& forest = std::get<ForestModel>(model.parameters);
      size_t xss_votes = 0;
      for (const auto& tree : forest.trees) {
        if (tree_predict(tree, x) == Label::xss) ++xss_votes;
      }
      return 2 * xss_votes >= forest.trees.size() ? Label::xss : Label::benign;  // tie -> xss
    }
    case ModelKind::logistic_regression: {
      const auto& m = std::get<LinearModel>(model.parameters);
      return sigmoid(sparse_dot(m, x)) >= 0.5 ? Label::xss : Label::benign;
    }
    case ModelKind::linear_svm: {
      const auto& m = std::get<LinearModel>(model.parameters);
      return sparse_dot(m, x) >= 0.0 ? Label::xss : Label::benign;
    }
  }
  throw std::logic_error("unhandled model kind");
}

std::vector<Label> predict(const TrainedModel& model, const std::vector<CountVector>& X) {
  std::vector<Label> out;
  out.reserve(X.size());
  for (const auto& x : X) out.push_back(predict_one(model, x));
  return out;
}

Metrics metrics_from_confusion(const Confusion& c) {
  Metrics m;
  m.confusion = c;
  const double tp = static_cast<double>(c.tp);
  const double fp = static_cast<double>(c.fp);
  const double fn = static_cast<double>(c.fn);
  const double tn = static_cast<double>(c.tn);
  const double total = tp + fp + fn + tn;
  m.accuracy = total > 0 ? (tp + tn) / total : 0.0;
  m.precision = (tp + fp) > 0 ? tp / (tp + fp) : 0.0;
  m.recall = (tp + fn) > 0 ? tp / (tp + fn) : 0.0;
  m.f1 = (m.precision + m.recall) > 0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
                                      : 0.0;
  return m;
}

Metrics evaluate(const std::vector<Label>& pred, const std::vector<Label>& truth) {
  if (pred.size() != truth.size()) throw std::invalid_argument("evaluate: length mismatch");
  if (pred.empty()) throw std::invalid_argument("evaluate: empty prediction list");
  Confusion c;
  for (size_t i = 0; i < pred.size(); ++i) {
    const bool predicted_xss = pred[i] == Label::xss;
    const bool is_xss = truth[i] == Label::xss;
    if (predicted_xss && is_xss) ++c.tp;
    else if (predicted_xss && !is_xss) ++c.fp;
    else if (!predicted_xss && is_xss) ++c.fn;
    else ++c.tn;
  }
  return metrics_from_confusion(c);
}

double logreg_loss(const LinearModel& m, const std::vector<CountVector>& X,
                   const std::vector<Label>& y, double l2) {
  double loss = 0.0;
  for (size_t i = 0; i < X.size(); ++i) {
    const double z = sparse_dot(m, X[i]);
    const double target = y[i] == Label::xss ? 1.0 : 0.0;
    // log(1 + e^z) - y z, evaluated stably
    loss += std::max(z, 0.0) - target * z + std::log1p(std::exp(-std::abs(z)));
  }
  loss /= static_cast<double>(X.size());
  double reg = 0.0;
  for (double w : m.weights) reg += w * w;
  return loss + 0.5 * l2 * reg;
}

void logreg_gradient(const LinearModel& m, const std::vector<CountVector>& X,
                     const std::vector<Label>& y, double l2, std::vector<double>& grad_w,
                     double& grad_b) {
  grad_w.assign(m.weights.size(), 0.0);
  grad_b = 0.0;
  for (size_t i = 0; i < X.size(); ++i) {
    const double delta = sigmoid(sparse_dot(m, X[i])) - (y[i] == Label::xss ? 1.0 : 0.0);
    for (const auto& [f, c] : X[i].entries) grad_w[f] += delta * static_cast<double>(c);
    grad_b += delta;
  }
  const double n = static_cast<double>(X.size());
  for (size_t f = 0; f < grad_w.size(); ++f) grad_w[f] = grad_w[f] / n + l2 * m.weights[f];
  grad_b /= n;
}

double svm_objective(const LinearModel& m, const std::vector<CountVector>& X,
                     const std::vector<Label>& y, double l2) {
  double loss = 0.0;
  for (size_t i = 0; i < X.size(); ++i) {
    const double target = y[i] == Label::xss ? 1.0 : -1.0;
    loss += std::max(0.0, 1.0 - target * sparse_dot(m, X[i]));
  }
  loss /= static_cast<double>(X.size());
  double reg = 0.0;
  for (double w : m.weights) reg += w * w;
  return loss + 0.5 * l2 * reg;
}

namespace {

ordered_json tree_to_json(const DecisionTreeModel& tree) {
  ordered_json nodes = ordered_json::array();
  for (const auto& n : tree.nodes) {
    if (n.feature < 0) {
      nodes.push_back({{"leaf", std::string(label_name(n.leaf))}});
    } else {
      nodes.push_back(
          {{"f", n.feature}, {"t", n.threshold}, {"l", n.left}, {"r", n.right}});
    }
  }
  return ordered_json{{"nodes", std::move(nodes)}};
}

DecisionTreeModel tree_from_json(const json& doc) {
  DecisionTreeModel tree;
  for (const auto& n : doc.at("nodes")) {
    TreeNode node;
    if (n.contains("leaf")) {
      auto label = parse_label(n.at("leaf").get<std::string>());
      if (!label) throw std::runtime_error("model: bad leaf label");
      node.feature = -1;
      node.leaf = *label;
    } else {
      node.feature = n.at("f").get<int32_t>();
      node.threshold = n.at("t").get<double>();
      node.left = n.at("l").get<uint32_t>();
      node.right = n.at("r").get<uint32_t>();
    }
    tree.nodes.push_back(node);
  }
  // Children must point forward; leaves carry labels. Enough to rule out
  // cycles in a serialized tree.
  for (size_t i = 0; i < tree.nodes.size(); ++i) {
    const TreeNode& n = tree.nodes[i];
    if (n.feature < 0) continue;
    if (n.left <= i || n.right <= i || n.left >= tree.nodes.size() ||
        n.right >= tree.nodes.size()) {
      throw std::runtime_error("model: malformed tree topology");
    }
  }
  return tree;
}

char hex_of(uint64_t v, int shift) { return "0123456789abcdef"[(v >> shift) & 0xf]; }

std::string hash_hex(uint64_t h) {
  std::string out(16, '0');
  for (int i = 0; i < 16; ++i) out[i] = hex_of(h, 60 - 4 * i);
  return out;
}

uint64_t parse_hash_hex(const std::string& s) {
  uint64_t v = 0;
  for (char c : s) {
    v <<= 4;
    if (c >= '0' && c <= '9') v |= static_cast<uint64_t>(c - '0');
    else if (c >= 'a' && c <= 'f') v |= static_cast<uint64_t>(c - 'a' + 10);
    else throw std::runtime_error("model: bad vocab_hash");
  }
  return v;
}

}  // namespace

std::string model_to_json(const TrainedModel& model, uint64_t vocab_hash) {
  ordered_json doc;
  doc["version"] = 1;
  doc["kind"] = std::string(model_kind_name(model.kind));
  doc["vocab_size"] = model.vocab_size;
  doc["vocab_hash"] = hash_hex(vocab_hash);
  switch (model.kind) {
    case ModelKind::decision_tree:
      doc["parameters"] = tree_to_json(std::get<DecisionTreeModel>(model.parameters));
      break;
    case ModelKind::random_forest: {
      ordered_json trees = ordered_json::array();
      for (const auto& tree : std::get<ForestModel>(model.parameters).trees) {
        trees.push_back(tree_to_json(tree));
      }
      doc["parameters"] = ordered_json{{"trees", std::move(trees)}, {"vote", "majority_tie_xss"}};
      break;
    }
    case ModelKind::logistic_regression:
    case ModelKind::linear_svm: {
      const auto& m = std::get<LinearModel>(model.parameters);
      doc["parameters"] = ordered_json{{"weights", m.weights}, {"bias", m.bias}};
      break;
    }
  }
  return doc.dump();
}

TrainedModel model_from_json(const std::string& text, uint64_t* vocab_hash) {
  const json doc = json::parse(text);
  if (doc.value("version", 0) != 1) throw std::runtime_error("model: unsupported version");
  auto kind = parse_model_kind(doc.at("kind").get<std::string>());
  if (!kind) throw std::runtime_error("model: unknown kind");

  TrainedModel model;
  model.kind = *kind;
  model.vocab_size = doc.at("vocab_size").get<uint32_t>();
  if (vocab_hash) *vocab_hash = parse_hash_hex(doc.at("vocab_hash").get<std::string>());

  const json& params = doc.at("parameters");
  switch (*kind) {
    case ModelKind::decision_tree:
      model.parameters = tree_from_json(params);
      break;
    case ModelKind::random_forest: {
      ForestModel forest;
      for (const auto& t : params.at("trees")) forest.trees.push_back(tree_from_json(t));
      if (forest.trees.empty()) throw std::runtime_error("model: forest with no trees");
      model.parameters = std::move(forest);
      break;
    }
    case ModelKind::logistic_regression:
    case ModelKind::linear_svm: {
      LinearModel m;
      m.weights = params.at("weights").get<std::vector<double>>();
      m.bias = params.at("bias").get<double>();
      if (m.weights.size() != model.vocab_size) {
        throw std::runtime_error("model: weight vector does not match vocab_size");
      }
      model.parameters = std::move(m);
      break;
    }
  }
  return model;
}

void save_model(const std::string& path, const TrainedModel& model, uint64_t vocab_hash) {
  std::ofstream out(path, std::ios::binary);
  if (!out.is_open()) throw std::runtime_error("cannot open output file: " + path);
  out << model_to_json(model, vocab_hash) << '\n';
}

TrainedModel load_model(const std::string& path, uint64_t* vocab_hash) {
  std::ifstream in(path, std::ios::binary);
  if (!in.is_open()) throw std::runtime_error("cannot open model file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return model_from_json(buf.str(), vocab_hash);
}

}  // namespace xsslab
