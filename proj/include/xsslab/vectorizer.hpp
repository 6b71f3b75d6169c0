#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "xsslab/corpus.hpp"

namespace xsslab {

// Bag-of-words token index. Tokens are stored in lexicographic order so the
// mapping and its serialization are canonical.
struct Vocabulary {
  std::vector<std::string> tokens;                   // index -> token
  std::unordered_map<std::string, uint32_t> index;   // token -> index

  size_t size() const { return tokens.size(); }
};

// Sparse count vector; entries are (index, count) with strictly increasing
// indices and count >= 1.
struct CountVector {
  std::vector<std::pair<uint32_t, uint32_t>> entries;
  uint32_t dimension = 0;

  uint32_t at(uint32_t feature) const;
  uint64_t total_count() const;
};

// Maximal runs of word characters: ASCII letters, digits, underscore, plus
// any byte >= 0x80 (keeps UTF-8 sequences whole). Punctuation is discarded.
std::vector<std::string> tokenize(std::string_view text);

// Vocabulary over the distinct tokens of the training corpus only.
// Throws on an empty corpus.
Vocabulary fit(const Corpus& train);

// Counts of in-vocabulary tokens; out-of-vocabulary tokens are dropped.
CountVector transform(std::string_view text, const Vocabulary& vocab);

std::vector<CountVector> transform_corpus(const Corpus& corpus, const Vocabulary& vocab);

// Versioned JSON: {"version": 1, "tokens": [...]} — index is array position.
std::string vocabulary_to_json(const Vocabulary& vocab);
Vocabulary vocabulary_from_json(const std::string& text);

void save_vocabulary(const std::string& path, const Vocabulary& vocab);
Vocabulary load_vocabulary(const std::string& path);

// Binds models to the vocabulary they were trained against.
uint64_t vocabulary_hash(const Vocabulary& vocab);

}  // namespace xsslab
