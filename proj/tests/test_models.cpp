#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "xsslab/models.hpp"
#include "xsslab/rng.hpp"

using namespace xsslab;

namespace {

CountVector vec(std::initializer_list<uint32_t> dense) {
  CountVector v;
  v.dimension = static_cast<uint32_t>(dense.size());
  uint32_t i = 0;
  for (uint32_t c : dense) {
    if (c > 0) v.entries.push_back({i, c});
    ++i;
  }
  return v;
}

CountVector random_vec(Rng& rng, uint32_t dim, uint32_t max_count = 4) {
  CountVector v;
  v.dimension = dim;
  for (uint32_t f = 0; f < dim; ++f) {
    if (rng.chance(0.4)) {
      uint32_t c = 1 + static_cast<uint32_t>(rng.below(max_count));
      v.entries.push_back({f, c});
    }
  }
  return v;
}

// Labels drawn from a fixed rule plus both classes guaranteed present.
void random_dataset(Rng& rng, uint32_t dim, size_t n, std::vector<CountVector>& X,
                    std::vector<Label>& y) {
  X.clear();
  y.clear();
  for (size_t i = 0; i < n; ++i) {
    X.push_back(random_vec(rng, dim));
    y.push_back(rng.chance(0.5) ? Label::xss : Label::benign);
  }
  y[0] = Label::benign;
  y[n - 1] = Label::xss;
}

const TrainConfig kDefaultConfig{};

}  // namespace

TEST_CASE("all four model kinds separate a 1-D separable set perfectly") {
  const std::vector<CountVector> X = {vec({0}), vec({0}), vec({5}), vec({5})};
  const std::vector<Label> y = {Label::benign, Label::benign, Label::xss, Label::xss};
  for (ModelKind kind : {ModelKind::decision_tree, ModelKind::random_forest,
                         ModelKind::logistic_regression, ModelKind::linear_svm}) {
    const TrainedModel model = train(kind, X, y, kDefaultConfig);
    const Metrics m = evaluate(predict(model, X), y);
    CHECK(m.accuracy == 1.0);
  }
}

TEST_CASE("a one-tree forest without bootstrap or subsampling equals the tree") {
  Rng rng(71);
  TrainConfig config;
  config.forest.n_trees = 1;
  config.forest.bootstrap = false;
  config.forest.feature_subsample_sqrt = false;
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<CountVector> X;
    std::vector<Label> y;
    random_dataset(rng, 8, 40, X, y);
    const TrainedModel tree = train(ModelKind::decision_tree, X, y, config);
    const TrainedModel forest = train(ModelKind::random_forest, X, y, config);
    std::vector<CountVector> probes;
    for (int i = 0; i < 30; ++i) probes.push_back(random_vec(rng, 8));
    CHECK(predict(tree, probes) == predict(forest, probes));
    CHECK(predict(tree, X) == predict(forest, X));
  }
}

TEST_CASE("an unrestricted tree memorizes consistent training data") {
  Rng rng(73);
  std::vector<CountVector> X;
  std::vector<Label> y;
  // Feature 0 takes a unique value per sample, so a greedy splitter can
  // always isolate any impure node sample by sample.
  for (uint32_t i = 0; i < 30; ++i) {
    CountVector v;
    v.dimension = 6;
    v.entries.push_back({0, i + 1});
    for (uint32_t f = 1; f < 6; ++f) {
      uint32_t c = (i >> f) & 1 ? f + 1 : 0;
      if (c) v.entries.push_back({f, c});
    }
    X.push_back(v);
    y.push_back(rng.chance(0.5) ? Label::xss : Label::benign);
  }
  y[0] = Label::benign;
  y[1] = Label::xss;
  const TrainedModel model = train(ModelKind::decision_tree, X, y, kDefaultConfig);
  CHECK(predict(model, X) == y);
}

TEST_CASE("a forest of identical trees votes like one tree") {
  Rng rng(79);
  std::vector<CountVector> X;
  std::vector<Label> y;
  random_dataset(rng, 6, 30, X, y);
  TrainConfig config;
  config.forest.n_trees = 5;
  config.forest.bootstrap = false;
  config.forest.feature_subsample_sqrt = false;  // every tree sees the same problem
  const TrainedModel forest = train(ModelKind::random_forest, X, y, config);
  const TrainedModel tree = train(ModelKind::decision_tree, X, y, config);
  std::vector<CountVector> probes;
  for (int i = 0; i < 50; ++i) probes.push_back(random_vec(rng, 6));
  CHECK(predict(forest, probes) == predict(tree, probes));
}

TEST_CASE("zero-weight logistic regression sits at 0.5 and breaks toward xss") {
  TrainedModel model;
  model.kind = ModelKind::logistic_regression;
  model.vocab_size = 3;
  model.parameters = LinearModel{{0.0, 0.0, 0.0}, 0.0};
  CHECK(predict_one(model, vec({1, 0, 2})) == Label::xss);
  CHECK(predict_one(model, vec({0, 0, 0})) == Label::xss);
}

TEST_CASE("metrics match hand-computed values") {
  Metrics perfect = metrics_from_confusion({5, 0, 0, 5});
  CHECK(perfect.accuracy == 1.0);
  CHECK(perfect.precision == 1.0);
  CHECK(perfect.recall == 1.0);
  CHECK(perfect.f1 == 1.0);

  Metrics m = metrics_from_confusion({1, 1, 3, 5});
  CHECK(m.precision == doctest::Approx(0.5));
  CHECK(m.recall == doctest::Approx(0.25));
  CHECK(m.f1 == doctest::Approx(1.0 / 3.0));
  CHECK(m.accuracy == doctest::Approx(0.6));
}

TEST_CASE("metric identities hold over random confusion matrices") {
  Rng rng(83);
  for (int i = 0; i < 1000; ++i) {
    Confusion c{rng.below(50), rng.below(50), rng.below(50), rng.below(50)};
    if (c.tp + c.fp + c.fn + c.tn == 0) c.tn = 1;
    const Metrics m = metrics_from_confusion(c);
    const double total = static_cast<double>(c.tp + c.fp + c.fn + c.tn);
    CHECK(m.accuracy == doctest::Approx((double)(c.tp + c.tn) / total));
    if (c.tp + c.fp > 0) {
      CHECK(m.precision == doctest::Approx((double)c.tp / (double)(c.tp + c.fp)));
    } else {
      CHECK(m.precision == 0.0);
    }
    if (c.tp + c.fn > 0) {
      CHECK(m.recall == doctest::Approx((double)c.tp / (double)(c.tp + c.fn)));
    } else {
      CHECK(m.recall == 0.0);
    }
    if (m.precision + m.recall > 0) {
      CHECK(m.f1 ==
            doctest::Approx(2 * m.precision * m.recall / (m.precision + m.recall)));
    } else {
      CHECK(m.f1 == 0.0);
    }
  }
}

TEST_CASE("evaluate counts the confusion with xss positive") {
  const std::vector<Label> truth = {Label::xss, Label::xss, Label::benign, Label::benign};
  const std::vector<Label> pred = {Label::xss, Label::benign, Label::xss, Label::benign};
  const Metrics m = evaluate(pred, truth);
  CHECK(m.confusion.tp == 1);
  CHECK(m.confusion.fn == 1);
  CHECK(m.confusion.fp == 1);
  CHECK(m.confusion.tn == 1);
  CHECK_THROWS_AS(evaluate({Label::xss}, truth), std::invalid_argument);
  CHECK_THROWS_AS(evaluate({}, {}), std::invalid_argument);
}

TEST_CASE("logistic gradient matches central finite differences") {
  Rng rng(89);
  for (int trial = 0; trial < 10; ++trial) {
    const uint32_t dim = 2 + static_cast<uint32_t>(rng.below(8));
    const size_t n = 3 + rng.below(20);
    std::vector<CountVector> X;
    std::vector<Label> y;
    random_dataset(rng, dim, n, X, y);

    LinearModel m;
    m.weights.resize(dim);
    for (auto& w : m.weights) w = rng.next_real() - 0.5;
    m.bias = rng.next_real() - 0.5;
    const double l2 = 1e-3;

    std::vector<double> grad;
    double grad_b = 0;
    logreg_gradient(m, X, y, l2, grad, grad_b);

    const double h = 1e-5;
    double max_rel = 0.0;
    for (uint32_t f = 0; f < dim; ++f) {
      LinearModel up = m, down = m;
      up.weights[f] += h;
      down.weights[f] -= h;
      const double fd = (logreg_loss(up, X, y, l2) - logreg_loss(down, X, y, l2)) / (2 * h);
      const double denom = std::max(1e-8, std::abs(grad[f]));
      max_rel = std::max(max_rel, std::abs(fd - grad[f]) / denom);
    }
    LinearModel up = m, down = m;
    up.bias += h;
    down.bias -= h;
    const double fd_b = (logreg_loss(up, X, y, l2) - logreg_loss(down, X, y, l2)) / (2 * h);
    max_rel = std::max(max_rel, std::abs(fd_b - grad_b) / std::max(1e-8, std::abs(grad_b)));
    CHECK(max_rel < 1e-5);
  }
}

TEST_CASE("svm objective trends down across epochs on a separable toy set") {
  // Same seed means run k's first j epochs replay run j exactly, so training
  // with epochs=1..12 traces one trajectory.
  const std::vector<CountVector> X = {vec({3, 0}), vec({2, 0}), vec({4, 1}),
                                      vec({0, 3}), vec({0, 2}), vec({1, 4})};
  const std::vector<Label> y = {Label::xss, Label::xss, Label::xss,
                                Label::benign, Label::benign, Label::benign};
  TrainConfig config;
  config.seed = 7;
  config.svm.learning_rate = 0.05;
  double previous = svm_objective(LinearModel{{0.0, 0.0}, 0.0}, X, y, config.svm.l2);
  for (int epochs = 1; epochs <= 12; ++epochs) {
    config.svm.epochs = epochs;
    const TrainedModel model = train(ModelKind::linear_svm, X, y, config);
    const double objective =
        svm_objective(std::get<LinearModel>(model.parameters), X, y, config.svm.l2);
    CHECK(objective <= previous + 1e-9);
    previous = objective;
  }
}

TEST_CASE("training is deterministic in data, config and seed") {
  Rng rng(97);
  std::vector<CountVector> X;
  std::vector<Label> y;
  random_dataset(rng, 10, 60, X, y);
  TrainConfig config;
  config.forest.n_trees = 12;
  for (ModelKind kind : {ModelKind::decision_tree, ModelKind::random_forest,
                         ModelKind::logistic_regression, ModelKind::linear_svm}) {
    const TrainedModel a = train(kind, X, y, config);
    const TrainedModel b = train(kind, X, y, config);
    CHECK(model_to_json(a, 1) == model_to_json(b, 1));
  }
}

TEST_CASE("training rejects bad input") {
  const std::vector<CountVector> X = {vec({1}), vec({2})};
  CHECK_THROWS_AS(train(ModelKind::decision_tree, X, {Label::xss, Label::xss}, kDefaultConfig),
                  std::runtime_error);  // single class
  CHECK_THROWS_AS(train(ModelKind::decision_tree, {}, {}, kDefaultConfig), std::invalid_argument);
  CHECK_THROWS_AS(
      train(ModelKind::decision_tree, X, {Label::xss}, kDefaultConfig),
      std::invalid_argument);  // length mismatch

  std::vector<CountVector> mixed = {vec({1}), vec({2, 3})};
  CHECK_THROWS_AS(train(ModelKind::linear_svm, mixed, {Label::xss, Label::benign}, kDefaultConfig),
                  std::invalid_argument);  // dimension mismatch
}

TEST_CASE("predict rejects vectors of the wrong dimension") {
  const std::vector<CountVector> X = {vec({0, 1}), vec({2, 0})};
  const TrainedModel model =
      train(ModelKind::linear_svm, X, {Label::benign, Label::xss}, kDefaultConfig);
  CHECK_THROWS_AS(predict_one(model, vec({1})), std::invalid_argument);
}

TEST_CASE("models round-trip through the JSON envelope") {
  Rng rng(101);
  std::vector<CountVector> X;
  std::vector<Label> y;
  random_dataset(rng, 7, 50, X, y);
  TrainConfig config;
  config.forest.n_trees = 8;

  std::vector<CountVector> probes;
  for (int i = 0; i < 40; ++i) probes.push_back(random_vec(rng, 7));

  for (ModelKind kind : {ModelKind::decision_tree, ModelKind::random_forest,
                         ModelKind::logistic_regression, ModelKind::linear_svm}) {
    const TrainedModel model = train(kind, X, y, config);
    const std::string doc = model_to_json(model, 0xabcdef0123456789ull);
    uint64_t hash = 0;
    const TrainedModel back = model_from_json(doc, &hash);
    CHECK(hash == 0xabcdef0123456789ull);
    CHECK(back.kind == kind);
    CHECK(back.vocab_size == model.vocab_size);
    CHECK(predict(back, probes) == predict(model, probes));
  }
}

TEST_CASE("model_from_json rejects malformed documents") {
  CHECK_THROWS(model_from_json("{}"));
  CHECK_THROWS(model_from_json(R"({"version":1,"kind":"nope","vocab_size":1,"vocab_hash":"00",
                                   "parameters":{}})"));
  // Cyclic/backward tree topology is rejected.
  CHECK_THROWS(model_from_json(
      R"({"version":1,"kind":"decision_tree","vocab_size":1,"vocab_hash":"0000000000000000",
          "parameters":{"nodes":[{"f":0,"t":0.5,"l":0,"r":0}]}})"));
}
