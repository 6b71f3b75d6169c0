#include <doctest.h>

#include <algorithm>

#include "xsslab/corpus.hpp"
#include "xsslab/rng.hpp"
#include "xsslab/vectorizer.hpp"

using namespace xsslab;

namespace {

Corpus corpus_of(std::initializer_list<const char*> texts) {
  Corpus c;
  c.normalized = true;
  for (const char* t : texts) c.samples.push_back({t, Label::benign, "t"});
  return c;
}

std::string random_payloadish(Rng& rng) {
  std::string s;
  const size_t len = rng.below(50);
  for (size_t i = 0; i < len; ++i) {
    const char* alphabet = "abcXYZ019_ <>()='\"%;/";
    s.push_back(alphabet[rng.below(21)]);
  }
  return s;
}

}  // namespace

TEST_CASE("tokenize keeps maximal word runs and drops punctuation") {
  CHECK(tokenize("alert(1)") == std::vector<std::string>{"alert", "1"});
  CHECK(tokenize("<img src=x onerror=alert(1)>") ==
        std::vector<std::string>{"img", "src", "x", "onerror", "alert", "1"});
  CHECK(tokenize("") == std::vector<std::string>{});
  CHECK(tokenize("__proto__ = a_b9") == std::vector<std::string>{"__proto__", "a_b9"});
}

TEST_CASE("tokenize after normalize yields lowercase tokens only") {
  Rng rng(31);
  for (int i = 0; i < 300; ++i) {
    for (const auto& tok : tokenize(normalize(random_payloadish(rng)))) {
      for (char c : tok) {
        CHECK(!(c >= 'A' && c <= 'Z'));
      }
    }
  }
}

TEST_CASE("fit indexes distinct training tokens in lexicographic order") {
  const Vocabulary vocab = fit(corpus_of({"ab ab c"}));
  REQUIRE(vocab.size() == 2);
  CHECK(vocab.tokens[0] == "ab");
  CHECK(vocab.tokens[1] == "c");
  CHECK(vocab.index.at("ab") == 0);
  CHECK(vocab.index.at("c") == 1);

  const Vocabulary two = fit(corpus_of({"zz yy", "aa bb"}));
  CHECK(two.tokens == std::vector<std::string>{"aa", "bb", "yy", "zz"});
}

TEST_CASE("fit on disjoint samples sums distinct token counts") {
  const Vocabulary vocab = fit(corpus_of({"one two three", "four five"}));
  CHECK(vocab.size() == 5);
}

TEST_CASE("fit is deterministic") {
  const auto corpus = corpus_of({"alert 1 onerror", "img src alert"});
  const Vocabulary a = fit(corpus);
  const Vocabulary b = fit(corpus);
  CHECK(a.tokens == b.tokens);
}

TEST_CASE("fit rejects an empty corpus") {
  Corpus empty;
  empty.normalized = true;
  CHECK_THROWS_AS(fit(empty), std::runtime_error);
}

TEST_CASE("transform counts in-vocabulary tokens and drops the rest") {
  const Vocabulary vocab = fit(corpus_of({"ab c"}));

  const CountVector v1 = transform("ab c d", vocab);
  REQUIRE(v1.entries.size() == 2);
  CHECK(v1.at(vocab.index.at("ab")) == 1);
  CHECK(v1.at(vocab.index.at("c")) == 1);

  const CountVector zero = transform("nothing known here", vocab);
  CHECK(zero.entries.empty());
  CHECK(zero.dimension == vocab.size());

  const CountVector twice = transform("ab ab", vocab);
  REQUIRE(twice.entries.size() == 1);
  CHECK(twice.at(vocab.index.at("ab")) == 2);
}

TEST_CASE("transform is pure and its indices are strictly increasing") {
  const Vocabulary vocab = fit(corpus_of({"alpha beta gamma delta"}));
  Rng rng(17);
  for (int i = 0; i < 200; ++i) {
    const std::string text = random_payloadish(rng) + " beta gamma";
    const CountVector a = transform(text, vocab);
    const CountVector b = transform(text, vocab);
    CHECK(a.entries == b.entries);
    for (size_t k = 1; k < a.entries.size(); ++k) {
      CHECK(a.entries[k - 1].first < a.entries[k].first);
      CHECK(a.entries[k].first < a.dimension);
    }
  }
}

TEST_CASE("count sum equals token count for in-vocabulary text") {
  const Vocabulary vocab = fit(corpus_of({"alert img src onerror 1 2 3"}));
  const std::string text = "alert alert img 3 2 1 1";
  CHECK(transform(text, vocab).total_count() == tokenize(text).size());
}

TEST_CASE("fit then transform never drops a training token") {
  Rng rng(23);
  for (int trial = 0; trial < 40; ++trial) {
    Corpus corpus;
    corpus.normalized = true;
    for (int s = 0; s < 6; ++s) corpus.samples.push_back({random_payloadish(rng), Label::xss, "t"});
    bool any_tokens = false;
    for (const auto& s : corpus.samples) any_tokens |= !tokenize(s.text).empty();
    if (!any_tokens) continue;
    const Vocabulary vocab = fit(corpus);
    for (const auto& s : corpus.samples) {
      CHECK(transform(s.text, vocab).total_count() == tokenize(s.text).size());
    }
  }
}

TEST_CASE("vocabulary serialization is canonical and round-trips") {
  const Vocabulary vocab = fit(corpus_of({"zeta alpha omega"}));
  const std::string doc = vocabulary_to_json(vocab);
  CHECK(doc == R"({"version":1,"tokens":["alpha","omega","zeta"]})");
  const Vocabulary back = vocabulary_from_json(doc);
  CHECK(back.tokens == vocab.tokens);
  CHECK(vocabulary_hash(back) == vocabulary_hash(vocab));
}

TEST_CASE("vocabulary_from_json rejects unsorted or unversioned documents") {
  CHECK_THROWS_AS(vocabulary_from_json(R"({"version":1,"tokens":["b","a"]})"), std::runtime_error);
  CHECK_THROWS_AS(vocabulary_from_json(R"({"tokens":["a"]})"), std::runtime_error);
  CHECK_THROWS_AS(vocabulary_from_json(R"({"version":2,"tokens":["a"]})"), std::runtime_error);
}

TEST_CASE("vocabulary hash differs when tokens differ") {
  const Vocabulary a = fit(corpus_of({"one two"}));
  const Vocabulary b = fit(corpus_of({"one three"}));
  CHECK(vocabulary_hash(a) != vocabulary_hash(b));
}
