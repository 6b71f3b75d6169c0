#include "xsslab/vectorizer.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "xsslab/encoding.hpp"

namespace xsslab {

namespace {

bool is_word_byte(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
         c >= 0x80;
}

}  // namespace

uint32_t CountVector::at(uint32_t feature) const {
  auto it = std::lower_bound(entries.begin(), entries.end(), feature,
                             [](const auto& e, uint32_t f) { return e.first < f; });
  if (it != entries.end() && it->first == feature) return it->second;
  return 0;
}

uint64_t CountVector::total_count() const {
  uint64_t total = 0;
  for (const auto& [_, count] : entries) total += count;
  return total;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  size_t i = 0;
  while (i < text.size()) {
    if (!is_word_byte(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    size_t begin = i;
    while (i < text.size() && is_word_byte(static_cast<unsigned char>(text[i]))) ++i;
    tokens.emplace_back(text.substr(begin, i - begin));
  }
  return tokens;
}

Vocabulary fit(const Corpus& train) {
  if (train.samples.empty()) {
    throw std::runtime_error("cannot fit vocabulary on an empty corpus");
  }
  std::set<std::string> distinct;
  for (const auto& s : train.samples) {
    for (auto& tok : tokenize(s.text)) distinct.insert(std::move(tok));
  }
  Vocabulary vocab;
  vocab.tokens.assign(distinct.begin(), distinct.end());  // set iterates in lexicographic order
  vocab.index.reserve(vocab.tokens.size());
  for (uint32_t i = 0; i < vocab.tokens.size(); ++i) vocab.index.emplace(vocab.tokens[i], i);
  return vocab;
}

CountVector transform(std::string_view text, const Vocabulary& vocab) {
  std::map<uint32_t, uint32_t> counts;
  size_t i = 0;
  std::string token;
  while (i < text.size()) {
    if (!is_word_byte(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    size_t begin = i;
    while (i < text.size() && is_word_byte(static_cast<unsigned char>(text[i]))) ++i;
    token.assign(text.substr(begin, i - begin));
    if (auto it = vocab.index.find(token); it != vocab.index.end()) ++counts[it->second];
  }
  CountVector vec;
  vec.dimension = static_cast<uint32_t>(vocab.size());
  vec.entries.assign(counts.begin(), counts.end());
  return vec;
}

std::vector<CountVector> transform_corpus(const Corpus& corpus, const Vocabulary& vocab) {
  std::vector<CountVector> out;
  out.reserve(corpus.samples.size());
  for (const auto& s : corpus.samples) out.push_back(transform(s.text, vocab));
  return out;
}

std::string vocabulary_to_json(const Vocabulary& vocab) {
  nlohmann::ordered_json doc;
  doc["version"] = 1;
  doc["tokens"] = vocab.tokens;
  return doc.dump();
}

Vocabulary vocabulary_from_json(const std::string& text) {
  auto doc = nlohmann::json::parse(text);
  if (!doc.is_object() || doc.value("version", 0) != 1 || !doc.contains("tokens")) {
    throw std::runtime_error("unsupported vocabulary document");
  }
  Vocabulary vocab;
  vocab.tokens = doc.at("tokens").get<std::vector<std::string>>();
  for (size_t i = 1; i < vocab.tokens.size(); ++i) {
    if (!(vocab.tokens[i - 1] < vocab.tokens[i])) {
      throw std::runtime_error("vocabulary tokens must be strictly increasing");
    }
  }
  vocab.index.reserve(vocab.tokens.size());
  for (uint32_t i = 0; i < vocab.tokens.size(); ++i) vocab.index.emplace(vocab.tokens[i], i);
  return vocab;
}

void save_vocabulary(const std::string& path, const Vocabulary& vocab) {
  std::ofstream out(path, std::ios::binary);
  if (!out.is_open()) throw std::runtime_error("cannot open output file: " + path);
  out << vocabulary_to_json(vocab) << '\n';
}

Vocabulary load_vocabulary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in.is_open()) throw std::runtime_error("cannot open vocabulary file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return vocabulary_from_json(buf.str());
}

uint64_t vocabulary_hash(const Vocabulary& vocab) {
  std::string joined;
  for (const auto& tok : vocab.tokens) {
    joined += tok;
    joined.push_back('\n');
  }
  return fnv1a64(joined);
}

}  // namespace xsslab
