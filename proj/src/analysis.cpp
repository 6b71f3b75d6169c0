#include "xsslab/analysis.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "xsslab/encoding.hpp"
#include "xsslab/js_lexer.hpp"
#include "xsslab/obfuscator.hpp"

namespace xsslab {

double shannon_entropy(std::string_view bytes) {
  if (bytes.empty()) return 0.0;
  std::array<uint64_t, 256> counts{};
  for (unsigned char c : bytes) ++counts[c];
  const double n = static_cast<double>(bytes.size());
  double entropy = 0.0;
  for (uint64_t count : counts) {
    if (count == 0) continue;
    const double p = static_cast<double>(count) / n;
    entropy -= p * std::log2(p);
  }
  return entropy;
}

EntropyReport entropy_uplift(const Corpus& corpus_a, const Corpus& corpus_b) {
  if (corpus_a.samples.empty() || corpus_b.samples.empty()) {
    throw std::invalid_argument("entropy_uplift: both corpora must be non-empty");
  }
  EntropyReport report;
  double sum_a = 0.0, sum_b = 0.0;
  for (size_t i = 0; i < corpus_a.samples.size(); ++i) {
    const double h = shannon_entropy(corpus_a.samples[i].text);
    report.per_sample_a.push_back({i, h});
    sum_a += h;
  }
  for (size_t i = 0; i < corpus_b.samples.size(); ++i) {
    const double h = shannon_entropy(corpus_b.samples[i].text);
    report.per_sample_b.push_back({i, h});
    sum_b += h;
  }
  report.mean_a = sum_a / static_cast<double>(corpus_a.samples.size());
  report.mean_b = sum_b / static_cast<double>(corpus_b.samples.size());
  if (report.mean_a > 0.0) {
    report.uplift_percent = 100.0 * (report.mean_b - report.mean_a) / report.mean_a;
    report.uplift_defined = true;
  }
  return report;
}

std::string entropy_report_to_json(const EntropyReport& report) {
  nlohmann::ordered_json doc;
  doc["basis"] = "raw bytes, log base 2";
  doc["mean_a"] = report.mean_a;
  doc["mean_b"] = report.mean_b;
  if (report.uplift_defined) {
    doc["uplift_percent"] = report.uplift_percent;
  } else {
    doc["uplift_percent"] = nullptr;  // undefined: zero-entropy baseline
  }
  auto dump_samples = [](const std::vector<std::pair<size_t, double>>& samples) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& [id, h] : samples) arr.push_back({{"id", id}, {"entropy", h}});
    return arr;
  };
  doc["per_sample_a"] = dump_samples(report.per_sample_a);
  doc["per_sample_b"] = dump_samples(report.per_sample_b);
  return doc.dump();
}

std::string_view equivalence_name(Equivalence e) {
  switch (e) {
    case Equivalence::equivalent: return "equivalent";
    case Equivalence::alpha_equivalent: return "alpha_equivalent";
    case Equivalence::not_equivalent: return "not_equivalent";
    case Equivalence::undecidable: return "undecidable";
  }
  return "?";
}

namespace {

enum class UnwrapStatus { unwrapped, no_wrapper, decode_error };

// One unwrap of an outermost eval wrapper over the whole token stream; an
// optional trailing ';' is tolerated.
UnwrapStatus unwrap_once(const std::string& js, std::string& out, std::string& note) {
  const auto toks = significant_tokens(js);
  size_t n = toks.size();
  if (n > 0 && toks[n - 1].is(JsTokenKind::punct, ";")) --n;
  if (n < 4) return UnwrapStatus::no_wrapper;
  if (!toks[0].is(JsTokenKind::identifier, "eval") || !toks[1].is(JsTokenKind::punct, "(") ||
      !toks[n - 1].is(JsTokenKind::punct, ")")) {
    return UnwrapStatus::no_wrapper;
  }

  // eval(atob('...')) / eval(decodeURIComponent('...'))
  if (n == 7 && toks[2].kind == JsTokenKind::identifier && toks[3].is(JsTokenKind::punct, "(") &&
      toks[4].kind == JsTokenKind::string && toks[5].is(JsTokenKind::punct, ")")) {
    const std::string literal = unescape_js_string(string_inner(toks[4]));
    if (toks[2].text == "atob") {
      auto decoded = base64_decode(literal);
      if (!decoded) {
        note = "malformed base64 inside eval(atob(...))";
        return UnwrapStatus::decode_error;
      }
      out = std::move(*decoded);
      return UnwrapStatus::unwrapped;
    }
    if (toks[2].text == "decodeURIComponent") {
      auto decoded = percent_decode(literal);
      if (!decoded) {
        note = "malformed percent-encoding inside eval(decodeURIComponent(...))";
        return UnwrapStatus::decode_error;
      }
      out = std::move(*decoded);
      return UnwrapStatus::unwrapped;
    }
    return UnwrapStatus::no_wrapper;
  }

  // eval('f1'+'f2'+...): alternating string / '+' between the parens.
  std::string joined;
  bool expect_string = true;
  for (size_t i = 2; i + 1 < n; ++i) {
    if (expect_string) {
      if (toks[i].kind != JsTokenKind::string) return UnwrapStatus::no_wrapper;
      joined += unescape_js_string(string_inner(toks[i]));
    } else if (!toks[i].is(JsTokenKind::punct, "+")) {
      return UnwrapStatus::no_wrapper;
    }
    expect_string = !expect_string;
  }
  if (expect_string) return UnwrapStatus::no_wrapper;  // ended on '+'
  out = std::move(joined);
  return UnwrapStatus::unwrapped;
}

bool is_hex_rename(std::string_view name) {
  if (name.size() < 4 || name.substr(0, 3) != "_0x") return false;
  for (char c : name.substr(3)) {
    if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f') || (c >= 'A' && c <= 'F'))) return false;
  }
  return true;
}

struct ComparableToken {
  JsTokenKind kind;
  std::string text;
};

// Significant tokens with every ";void 0;" / ";void(0);" no-op group removed.
std::vector<ComparableToken> comparable_tokens(const std::string& js) {
  std::vector<ComparableToken> toks;
  for (const auto& t : significant_tokens(js)) toks.push_back({t.kind, std::string(t.text)});

  auto is_punct = [&](size_t i, const char* text) {
    return toks[i].kind == JsTokenKind::punct && toks[i].text == text;
  };
  auto is_void_zero = [&](size_t i, size_t& group_len) {
    if (!is_punct(i, ";")) return false;
    if (i + 3 < toks.size() && toks[i + 1].kind == JsTokenKind::identifier &&
        toks[i + 1].text == "void" && toks[i + 2].kind == JsTokenKind::number &&
        toks[i + 2].text == "0" && is_punct(i + 3, ";")) {
      group_len = 4;
      return true;
    }
    if (i + 5 < toks.size() && toks[i + 1].kind == JsTokenKind::identifier &&
        toks[i + 1].text == "void" && is_punct(i + 2, "(") &&
        toks[i + 3].kind == JsTokenKind::number && toks[i + 3].text == "0" &&
        is_punct(i + 4, ")") && is_punct(i + 5, ";")) {
      group_len = 6;
      return true;
    }
    return false;
  };

  for (bool removed = true; removed;) {
    removed = false;
    for (size_t i = 0; i < toks.size(); ++i) {
      size_t group_len = 0;
      if (is_void_zero(i, group_len)) {
        toks.erase(toks.begin() + static_cast<long>(i),
                   toks.begin() + static_cast<long>(i + group_len));
        removed = true;
        break;
      }
    }
  }
  return toks;
}

}  // namespace

CanonicalAction canonicalize(std::string_view payload) {
  CanonicalAction action;
  const PayloadContext ctx = detect_context(payload);
  if (ctx.kind == ContextKind::opaque_html) {
    action.form = CanonicalForm::opaque;
    action.text = std::string(payload);
    return action;
  }

  std::string current(payload.substr(ctx.js_begin, ctx.js_end - ctx.js_begin));
  for (;;) {
    std::string next;
    std::string note;
    const UnwrapStatus status = unwrap_once(current, next, note);
    if (status == UnwrapStatus::unwrapped) {
      current = std::move(next);
      continue;
    }
    if (status == UnwrapStatus::decode_error) {
      action.form = CanonicalForm::opaque;
      action.text = std::string(payload);
      action.note = std::move(note);
      return action;
    }
    break;
  }
  action.form = CanonicalForm::js;
  action.text = std::move(current);
  return action;
}

Equivalence check_equivalence(std::string_view original, std::string_view obfuscated) {
  const CanonicalAction a = canonicalize(original);
  const CanonicalAction b = canonicalize(obfuscated);
  if (a.form == CanonicalForm::opaque || b.form == CanonicalForm::opaque) {
    return Equivalence::undecidable;
  }
  if (a.text == b.text) return Equivalence::equivalent;

  const auto ta = comparable_tokens(a.text);
  const auto tb = comparable_tokens(b.text);
  if (ta.size() != tb.size()) return Equivalence::not_equivalent;

  std::unordered_map<std::string, std::string> fwd, rev;
  for (size_t i = 0; i < ta.size(); ++i) {
    const ComparableToken& x = ta[i];
    const ComparableToken& y = tb[i];
    if (x.kind != y.kind) return Equivalence::not_equivalent;
    if (x.kind != JsTokenKind::identifier) {
      if (x.text != y.text) return Equivalence::not_equivalent;
      continue;
    }
    // Identifiers: allow a consistent bijection where at least one side is a
    // _0x rename; anything else must match exactly.
    if (x.text != y.text && !is_hex_rename(y.text) && !is_hex_rename(x.text)) {
      return Equivalence::not_equivalent;
    }
    auto [fit, finserted] = fwd.emplace(x.text, y.text);
    if (!finserted && fit->second != y.text) return Equivalence::not_equivalent;
    auto [rit, rinserted] = rev.emplace(y.text, x.text);
    if (!rinserted && rit->second != x.text) return Equivalence::not_equivalent;
  }
  return Equivalence::alpha_equivalent;
}

}  // namespace xsslab
