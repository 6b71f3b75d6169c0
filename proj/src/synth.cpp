#include "xsslab/synth.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "xsslab/encoding.hpp"
#include "xsslab/js_lexer.hpp"
#include "xsslab/rng.hpp"

namespace xsslab {

std::string_view validity_name(Validity v) {
  return v == Validity::valid ? "valid" : "possibly_invalid";
}

namespace {

void validate(const SynthConfig& config) {
  if (config.temperature < 0.0) throw std::invalid_argument("synth: temperature must be >= 0");
  if (config.max_chain < 1) throw std::invalid_argument("synth: max_chain must be >= 1");
  for (double rate : {config.whitespace_jitter_rate, config.junk_char_insert_rate,
                      config.encoding_swap_rate}) {
    if (rate < 0.0 || rate > 1.0) throw std::invalid_argument("synth: mutation rate outside [0,1]");
  }
}

double scaled_rate(double rate, double temperature) {
  return std::min(1.0, rate * temperature);
}

// Token-boundary positions within js (both ends included).
std::vector<size_t> token_boundaries(std::string_view js) {
  std::vector<size_t> bounds;
  bounds.push_back(0);
  for (const auto& tok : lex_js(js)) bounds.push_back(tok.end);
  return bounds;
}

// Swaps the outermost eval(atob(..)) <-> eval(decodeURIComponent(..))
// wrapper, keeping the decoded content identical. Returns false when the
// slice is not a swappable wrapper.
bool swap_encoding(std::string& js) {
  const std::string source = js;
  auto toks = significant_tokens(source);
  if (toks.size() != 7) return false;
  if (!toks[0].is(JsTokenKind::identifier, "eval") || !toks[1].is(JsTokenKind::punct, "(") ||
      toks[2].kind != JsTokenKind::identifier || !toks[3].is(JsTokenKind::punct, "(") ||
      toks[4].kind != JsTokenKind::string || !toks[5].is(JsTokenKind::punct, ")") ||
      !toks[6].is(JsTokenKind::punct, ")")) {
    return false;
  }
  const std::string literal = unescape_js_string(string_inner(toks[4]));
  if (toks[2].text == "atob") {
    auto decoded = base64_decode(literal);
    if (!decoded) return false;
    js = "eval(decodeURIComponent('" + percent_encode(*decoded) + "'))";
    return true;
  }
  if (toks[2].text == "decodeURIComponent") {
    auto decoded = percent_decode(literal);
    if (!decoded) return false;
    js = "eval(atob('" + base64_encode(*decoded) + "'))";
    return true;
  }
  return false;
}

}  // namespace

SynthResult synthesize(std::string_view payload, const SynthConfig& config, uint64_t seed) {
  validate(config);
  Rng rng(seed);

  // Chain length: 1 at temperature 0, widening toward max_chain as the
  // temperature rises.
  const double p = std::min(1.0, config.temperature / 2.0);
  int chain_len = 1;
  for (int i = 0; i < config.max_chain - 1; ++i) {
    if (rng.chance(p)) ++chain_len;
  }

  // Chain links come from the three encoding transforms used to fine-tune
  // the emulated generator; identifier rewriting is not part of its output
  // repertoire.
  static constexpr std::array<ObfStep, 3> kChainSteps = {
      ObfStep::base64_wrap, ObfStep::uri_wrap, ObfStep::string_split};

  SynthResult result;
  result.recipe.steps.reserve(static_cast<size_t>(chain_len));
  for (int i = 0; i < chain_len; ++i) {
    result.recipe.steps.push_back(kChainSteps[rng.below(kChainSteps.size())]);
  }
  result.recipe.seed = rng.next_u64();

  ObfuscateDetail detail = obfuscate_detailed(payload, result.recipe);
  if (detail.context.kind == ContextKind::opaque_html) {
    result.text = std::move(detail.text);
    return result;  // no JS slice to mutate
  }

  std::string slice =
      detail.text.substr(detail.out_js_begin, detail.out_js_end - detail.out_js_begin);
  const bool ws_safe = detail.context.ws_safe;
  const bool unsafe_allowed = config.allow_invalid && config.temperature > 1.0;

  if (rng.chance(scaled_rate(config.encoding_swap_rate, config.temperature))) {
    swap_encoding(slice);
  }

  if (ws_safe && rng.chance(scaled_rate(config.whitespace_jitter_rate, config.temperature))) {
    auto bounds = token_boundaries(slice);
    size_t inserts = 1 + rng.below(3);
    std::vector<size_t> positions;
    for (size_t i = 0; i < inserts; ++i) positions.push_back(bounds[rng.below(bounds.size())]);
    std::sort(positions.rbegin(), positions.rend());
    for (size_t pos : positions) slice.insert(pos, rng.chance(0.5) ? "\t" : " ");
  }

  if (rng.chance(scaled_rate(config.junk_char_insert_rate, config.temperature))) {
    auto bounds = token_boundaries(slice);
    size_t inserts = 1 + rng.below(3);
    struct Insertion { size_t pos; const char* text; bool unsafe; };
    std::vector<Insertion> plan;
    for (size_t i = 0; i < inserts; ++i) {
      bool unsafe = unsafe_allowed && rng.chance(0.5);
      size_t pos = unsafe ? rng.below(slice.size() + 1) : bounds[rng.below(bounds.size())];
      const char* junk = "/**/";
      if (ws_safe && rng.chance(0.3)) junk = rng.chance(0.5) ? "\t" : "  ";
      plan.push_back({pos, junk, unsafe});
    }
    std::sort(plan.begin(), plan.end(), [](const Insertion& a, const Insertion& b) {
      return a.pos > b.pos;
    });
    for (const auto& ins : plan) {
      slice.insert(ins.pos, ins.text);
      if (ins.unsafe) result.validity = Validity::possibly_invalid;
    }
  }

  result.text = detail.text.substr(0, detail.out_js_begin) + slice +
                detail.text.substr(detail.out_js_end);
  return result;
}

Corpus synthesize_corpus(const Corpus& corpus, const SynthConfig& config, uint64_t master_seed,
                         SynthCorpusStats* stats) {
  if (corpus.count(Label::xss) == 0) {
    throw std::runtime_error("synthesize_corpus: corpus has no xss samples");
  }
  Corpus out;
  out.normalized = corpus.normalized;
  out.dedup_applied = false;  // synthesized texts are new, uniqueness not re-checked
  out.samples.reserve(corpus.samples.size());
  SynthCorpusStats local;
  for (size_t i = 0; i < corpus.samples.size(); ++i) {
    const Payload& s = corpus.samples[i];
    if (s.label != Label::xss) {
      out.samples.push_back(s);
      continue;
    }
    SynthResult r = synthesize(s.text, config, derive_seed(master_seed, i));
    ++local.produced;
    if (r.validity == Validity::possibly_invalid) ++local.possibly_invalid;
    out.samples.push_back({std::move(r.text), Label::xss, "synth"});
  }
  if (stats) *stats = local;
  return out;
}

}  // namespace xsslab
