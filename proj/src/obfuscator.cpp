#include "xsslab/obfuscator.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "xsslab/encoding.hpp"
#include "xsslab/js_lexer.hpp"
#include "xsslab/rng.hpp"

namespace xsslab {

std::string_view obf_step_name(ObfStep step) {
  switch (step) {
    case ObfStep::js_rewrite: return "js_rewrite";
    case ObfStep::base64_wrap: return "base64_wrap";
    case ObfStep::uri_wrap: return "uri_wrap";
    case ObfStep::string_split: return "string_split";
  }
  return "?";
}

std::string_view context_kind_name(ContextKind kind) {
  switch (kind) {
    case ContextKind::js_expression: return "js_expression";
    case ContextKind::html_event_handler: return "html_event_handler";
    case ContextKind::script_body: return "script_body";
    case ContextKind::opaque_html: return "opaque_html";
  }
  return "?";
}

namespace {

char ascii_lower(char c) { return c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : c; }

bool is_ws(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

// Case-insensitive search for needle (given lowercase) in haystack.
size_t ifind(std::string_view haystack, std::string_view needle, size_t from = 0) {
  if (needle.empty() || haystack.size() < needle.size()) return std::string_view::npos;
  for (size_t i = from; i + needle.size() <= haystack.size(); ++i) {
    size_t j = 0;
    while (j < needle.size() && ascii_lower(haystack[i + j]) == needle[j]) ++j;
    if (j == needle.size()) return i;
  }
  return std::string_view::npos;
}

bool find_script_body(std::string_view payload, size_t& begin, size_t& end) {
  size_t open = ifind(payload, "<script");
  if (open == std::string_view::npos) return false;
  size_t after = open + 7;
  if (after < payload.size() && !(payload[after] == '>' || is_ws(payload[after]) || payload[after] == '/')) {
    return false;  // e.g. <scripting...>
  }
  size_t gt = payload.find('>', after);
  if (gt == std::string_view::npos) return false;
  begin = gt + 1;
  size_t close = ifind(payload, "</script", begin);
  end = close == std::string_view::npos ? payload.size() : close;
  return true;
}

bool is_event_attr_name(std::string_view name) {
  if (name.size() < 3) return false;
  if (ascii_lower(name[0]) != 'o' || ascii_lower(name[1]) != 'n') return false;
  for (size_t i = 2; i < name.size(); ++i) {
    char c = ascii_lower(name[i]);
    if (!((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_')) return false;
  }
  return true;
}

// Walks HTML-ish tags looking for an on*= attribute; fills the value range
// and whether it was quoted.
bool find_event_handler(std::string_view payload, size_t& begin, size_t& end, bool& quoted) {
  size_t i = 0;
  const size_t n = payload.size();
  while (i < n) {
    if (payload[i] != '<' || i + 1 >= n || !is_alpha(payload[i + 1])) {
      ++i;
      continue;
    }
    size_t p = i + 1;
    while (p < n && !is_ws(payload[p]) && payload[p] != '>' && payload[p] != '/') ++p;  // tag name
    // attribute loop
    while (p < n && payload[p] != '>') {
      while (p < n && (is_ws(payload[p]) || payload[p] == '/')) ++p;
      if (p >= n || payload[p] == '>') break;
      size_t name_begin = p;
      while (p < n && !is_ws(payload[p]) && payload[p] != '=' && payload[p] != '>' && payload[p] != '/') ++p;
      std::string_view name = payload.substr(name_begin, p - name_begin);
      while (p < n && is_ws(payload[p])) ++p;
      if (p < n && payload[p] == '=') {
        ++p;
        while (p < n && is_ws(payload[p])) ++p;
        size_t val_begin, val_end;
        bool val_quoted = false;
        if (p < n && (payload[p] == '\'' || payload[p] == '"')) {
          char q = payload[p];
          val_begin = p + 1;
          size_t close = payload.find(q, val_begin);
          val_end = close == std::string_view::npos ? n : close;
          p = close == std::string_view::npos ? n : close + 1;
          val_quoted = true;
        } else {
          val_begin = p;
          while (p < n && !is_ws(payload[p]) && payload[p] != '>') ++p;
          val_end = p;
        }
        if (is_event_attr_name(name)) {
          begin = val_begin;
          end = val_end;
          quoted = val_quoted;
          return true;
        }
      }
    }
    i = (p < n) ? p + 1 : n;
  }
  return false;
}

// Blanks the interior of terminated JS string literals with '#' so structure
// scans do not fire on markup carried inside strings. Offsets are preserved;
// ranges found on the masked text apply to the original. Unterminated
// literals (a stray quote in an HTML fragment) are left visible.
std::string mask_string_interiors(std::string_view payload) {
  std::string masked(payload);
  for (const auto& tok : lex_js(payload)) {
    if (tok.kind != JsTokenKind::string || tok.text.size() < 2) continue;
    const char quote = tok.text.front();
    // Re-walk the token to confirm the closing quote is real, not escaped.
    bool terminated = false;
    size_t i = 1;
    while (i < tok.text.size()) {
      if (tok.text[i] == '\\' && i + 1 < tok.text.size()) {
        i += 2;
        continue;
      }
      if (tok.text[i] == quote) {
        terminated = i == tok.text.size() - 1;
        break;
      }
      ++i;
    }
    if (!terminated) continue;
    for (size_t k = tok.begin + 1; k + 1 < tok.end; ++k) masked[k] = '#';
  }
  return masked;
}

// True when the masked payload contains something tag-shaped: '<' directly
// followed by a letter, '/', or '!'.
bool looks_html(std::string_view masked) {
  for (size_t i = 0; i + 1 < masked.size(); ++i) {
    if (masked[i] == '<' &&
        (is_alpha(masked[i + 1]) || masked[i + 1] == '/' || masked[i + 1] == '!')) {
      return true;
    }
  }
  return false;
}

}  // namespace

PayloadContext detect_context(std::string_view payload) {
  const std::string masked = mask_string_interiors(payload);
  PayloadContext ctx;
  size_t begin = 0, end = 0;
  if (find_script_body(masked, begin, end)) {
    ctx.kind = ContextKind::script_body;
    ctx.js_begin = begin;
    ctx.js_end = end;
    ctx.ws_safe = true;
    return ctx;
  }
  bool quoted = false;
  if (find_event_handler(masked, begin, end, quoted)) {
    ctx.kind = ContextKind::html_event_handler;
    ctx.js_begin = begin;
    ctx.js_end = end;
    ctx.ws_safe = quoted;
    return ctx;
  }
  if (!looks_html(masked)) {
    ctx.kind = ContextKind::js_expression;
    ctx.js_begin = 0;
    ctx.js_end = payload.size();
    ctx.ws_safe = true;
    return ctx;
  }
  ctx.kind = ContextKind::opaque_html;
  return ctx;
}

std::string wrap_base64(std::string_view js) {
  return "eval(atob('" + base64_encode(js) + "'))";
}

std::string wrap_uri(std::string_view js) {
  return "eval(decodeURIComponent('" + percent_encode(js) + "'))";
}

std::string split_strings(std::string_view js, uint64_t seed, const SplitConfig& config) {
  if (config.min_parts < 1 || config.max_parts < config.min_parts) {
    throw std::invalid_argument("split_strings: invalid part bounds");
  }
  Rng rng(seed);
  const size_t len = js.size();
  size_t k = static_cast<size_t>(config.min_parts);
  if (config.max_parts > config.min_parts) {
    k += rng.below(static_cast<uint64_t>(config.max_parts - config.min_parts + 1));
  }
  k = std::min<size_t>(k, std::max<size_t>(1, len));

  // k-1 distinct interior split points, ascending.
  std::vector<size_t> cuts;
  if (k > 1) {
    std::unordered_set<size_t> chosen;
    while (chosen.size() < k - 1) chosen.insert(1 + rng.below(len - 1));
    cuts.assign(chosen.begin(), chosen.end());
    std::sort(cuts.begin(), cuts.end());
  }
  cuts.push_back(len);

  std::string out = "eval(";
  size_t prev = 0;
  for (size_t c = 0; c < cuts.size(); ++c) {
    if (c > 0) out.push_back('+');
    out.push_back('\'');
    out += escape_single_quoted(js.substr(prev, cuts[c] - prev));
    out.push_back('\'');
    prev = cuts[c];
  }
  out.push_back(')');
  return out;
}

std::set<std::string> default_rewrite_allowlist() {
  return {
      // reserved words
      "var", "let", "const", "function", "return", "if", "else", "for", "while", "do", "break",
      "continue", "new", "delete", "typeof", "instanceof", "in", "of", "this", "null", "true",
      "false", "undefined", "void", "switch", "case", "default", "try", "catch", "finally",
      "throw", "class", "extends", "super", "import", "export", "yield", "async", "await",
      "static", "get", "set",
      // builtins kept intact so wrappers and common sinks survive
      "alert", "eval", "atob", "btoa", "decodeURIComponent", "encodeURIComponent", "document",
      "window", "fetch", "console", "location", "cookie", "String", "unescape",
  };
}

std::string js_rewrite(std::string_view js, uint64_t seed, const RewriteOptions& options) {
  if (js.empty()) return std::string();

  static const std::set<std::string> kDefaultAllowlist = default_rewrite_allowlist();
  const std::set<std::string>& allow = options.allowlist ? *options.allowlist : kDefaultAllowlist;

  Rng rng(seed);
  const std::vector<JsToken> tokens = lex_js(js);

  // Identifier texts present in the source; fresh names must avoid them so
  // renaming stays a bijection.
  std::unordered_set<std::string> present;
  for (const auto& tok : tokens) {
    if (tok.kind == JsTokenKind::identifier) present.emplace(tok.text);
  }

  auto renameable = [&](size_t idx) {
    const JsToken& tok = tokens[idx];
    if (tok.kind != JsTokenKind::identifier) return false;
    if (allow.count(std::string(tok.text))) return false;
    // Skip property names: an identifier directly after '.'.
    for (size_t k = idx; k-- > 0;) {
      if (tokens[k].kind == JsTokenKind::whitespace || tokens[k].kind == JsTokenKind::comment) continue;
      return !tokens[k].is(JsTokenKind::punct, ".");
    }
    return true;
  };

  // Assign fresh names in order of first occurrence.
  std::unordered_map<std::string, std::string> renames;
  std::unordered_set<std::string> taken;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (!renameable(i)) continue;
    std::string name(tokens[i].text);
    if (renames.count(name)) continue;
    std::string fresh;
    do {
      char buf[8];
      uint64_t v = rng.below(0x10000);
      std::snprintf(buf, sizeof(buf), "%04x", static_cast<unsigned>(v));
      fresh = std::string("_0x") + buf;
    } while (taken.count(fresh) || present.count(fresh));
    taken.insert(fresh);
    renames.emplace(std::move(name), std::move(fresh));
  }

  // Carriers that cannot absorb whitespace (unquoted attribute values) get
  // the paren form of the no-op; both forms are ignored by the
  // alpha-equivalence comparison.
  const std::string_view noop = options.allow_whitespace_jitter ? ";void 0;" : ";void(0);";

  std::string out;
  out.reserve(js.size() + 16);
  long depth = 0;
  for (size_t i = 0; i < tokens.size(); ++i) {
    const JsToken& tok = tokens[i];
    if (tok.kind == JsTokenKind::identifier && renameable(i)) {
      out += renames.at(std::string(tok.text));
    } else {
      out += tok.text;
    }
    if (tok.kind == JsTokenKind::punct) {
      char c = tok.text[0];
      if (c == '(' || c == '[' || c == '{') ++depth;
      if (c == ')' || c == ']' || c == '}') --depth;
      if (c == ';' && depth <= 0 && rng.chance(0.5)) out += noop;
      if (options.allow_whitespace_jitter && (c == ';' || c == ',' || c == ')' || c == '}') &&
          rng.chance(0.2)) {
        out.push_back(' ');
      }
    }
  }
  if (rng.chance(0.5)) out += noop;

  // A rewrite must visibly change a non-empty slice.
  if (out == js) out += noop;
  return out;
}

namespace {

std::string apply_step(ObfStep step, std::string_view js, uint64_t step_seed, bool ws_safe) {
  switch (step) {
    case ObfStep::base64_wrap: return wrap_base64(js);
    case ObfStep::uri_wrap: return wrap_uri(js);
    case ObfStep::string_split: return split_strings(js, step_seed);
    case ObfStep::js_rewrite: {
      RewriteOptions opts;
      opts.allow_whitespace_jitter = ws_safe;
      return js_rewrite(js, step_seed, opts);
    }
  }
  throw std::logic_error("unhandled obfuscation step");
}

}  // namespace

ObfuscateDetail obfuscate_detailed(std::string_view payload, const ObfuscationRecipe& recipe) {
  ObfuscateDetail detail;
  detail.context = detect_context(payload);

  if (detail.context.kind == ContextKind::opaque_html) {
    // No JS slot: string_split fragments the text and rejoins it (identity on
    // the bytes); the other transforms have nothing to target.
    detail.text = std::string(payload);
    detail.out_js_begin = detail.out_js_end = 0;
    return detail;
  }

  const size_t begin = detail.context.js_begin;
  const size_t end = detail.context.js_end;
  std::string current(payload.substr(begin, end - begin));
  for (size_t i = 0; i < recipe.steps.size(); ++i) {
    current = apply_step(recipe.steps[i], current, derive_seed(recipe.seed, i),
                         detail.context.ws_safe);
  }

  detail.text.reserve(payload.size() + current.size());
  detail.text.append(payload.substr(0, begin));
  detail.out_js_begin = detail.text.size();
  detail.text.append(current);
  detail.out_js_end = detail.text.size();
  detail.text.append(payload.substr(end));
  return detail;
}

std::string obfuscate(std::string_view payload, const ObfuscationRecipe& recipe) {
  return obfuscate_detailed(payload, recipe).text;
}

ObfuscationDraw obfuscate_random(std::string_view payload, const std::array<double, 4>& weights,
                                 uint64_t seed) {
  double total = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw std::invalid_argument("obfuscate_random: negative weight");
    total += w;
  }
  if (total <= 0.0) throw std::invalid_argument("obfuscate_random: all-zero weight vector");

  Rng rng(seed);
  const size_t idx = rng.pick_weighted(std::span<const double>(weights.data(), weights.size()));

  ObfuscationDraw draw;
  draw.recipe.steps = {kAllObfSteps[idx]};
  draw.recipe.seed = rng.next_u64();
  draw.text = obfuscate(payload, draw.recipe);
  return draw;
}

}  // namespace xsslab
