#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "xsslab/corpus.hpp"
#include "xsslab/obfuscator.hpp"

namespace xsslab {

// Emulates the generation characteristics of a fine-tuned code model:
// temperature-controlled transform chains plus surface mutations.
struct SynthConfig {
  double temperature = 1.5;
  int max_chain = 10;
  double whitespace_jitter_rate = 0.3;
  double junk_char_insert_rate = 0.3;
  double encoding_swap_rate = 0.2;
  bool allow_invalid = true;
};

enum class Validity { valid, possibly_invalid };

std::string_view validity_name(Validity v);

struct SynthResult {
  std::string text;
  ObfuscationRecipe recipe;
  Validity validity = Validity::valid;
};

// Samples a transform chain of length 1 + Binomial(max_chain-1, min(1, T/2)),
// applies it via the obfuscator, then applies surface mutations at their
// configured rates scaled by temperature. With allow_invalid and T > 1,
// junk insertion may land mid-token and the output is flagged
// possibly_invalid. Pure in (payload, config, seed).
SynthResult synthesize(std::string_view payload, const SynthConfig& config, uint64_t seed);

struct SynthCorpusStats {
  size_t produced = 0;
  size_t possibly_invalid = 0;
};

// Maps every xss sample to a synthesized variant (label kept, origin set to
// "synth"); benign samples pass through unchanged. Per-sample seeds are
// master ^ index. Throws when the corpus has no xss samples.
Corpus synthesize_corpus(const Corpus& corpus, const SynthConfig& config, uint64_t master_seed,
                         SynthCorpusStats* stats = nullptr);

}  // namespace xsslab
