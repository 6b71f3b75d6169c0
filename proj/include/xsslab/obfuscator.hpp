#pragma once

#include <array>
#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace xsslab {

enum class ObfStep { js_rewrite, base64_wrap, uri_wrap, string_split };

constexpr std::array<ObfStep, 4> kAllObfSteps = {ObfStep::js_rewrite, ObfStep::base64_wrap,
                                                 ObfStep::uri_wrap, ObfStep::string_split};

std::string_view obf_step_name(ObfStep step);

// Seeded sequence of transforms; provenance for every obfuscated sample.
struct ObfuscationRecipe {
  std::vector<ObfStep> steps;
  uint64_t seed = 0;
};

enum class ContextKind { js_expression, html_event_handler, script_body, opaque_html };

std::string_view context_kind_name(ContextKind kind);

// Where in the payload the JavaScript lives. The js range is meaningful only
// when kind != opaque_html. ws_safe tells whether whitespace can be inserted
// into the slice without breaking the carrier (false for unquoted HTML
// attribute values).
struct PayloadContext {
  ContextKind kind = ContextKind::opaque_html;
  size_t js_begin = 0;
  size_t js_end = 0;
  bool ws_safe = true;
};

// Classifies a payload as a bare JS expression, HTML with an event-handler
// attribute, a <script> body, or opaque HTML. Total; opaque_html is the
// fallback.
PayloadContext detect_context(std::string_view payload);

// eval(atob('<base64 of js>'))
std::string wrap_base64(std::string_view js);

// eval(decodeURIComponent('<percent-encoded js>'))
std::string wrap_uri(std::string_view js);

struct SplitConfig {
  int min_parts = 2;
  int max_parts = 5;
};

// eval('<f1>'+'<f2>'+...): fragments concatenate back to the original, split
// points seeded. Part count is clamped to the string length.
std::string split_strings(std::string_view js, uint64_t seed, const SplitConfig& config = {});

std::set<std::string> default_rewrite_allowlist();

struct RewriteOptions {
  bool allow_whitespace_jitter = true;
  const std::set<std::string>* allowlist = nullptr;  // nullptr -> default allowlist
};

// Token-level rewrite: user identifiers renamed to seeded _0x???? names
// (consistently, bijectively), ";void 0;" no-ops inserted at seeded statement
// boundaries, whitespace jittered. Guaranteed to differ from a non-empty
// input.
std::string js_rewrite(std::string_view js, uint64_t seed, const RewriteOptions& options = {});

struct ObfuscateDetail {
  std::string text;
  PayloadContext context;   // context of the original payload
  size_t out_js_begin = 0;  // slice position within the output text
  size_t out_js_end = 0;
};

// Applies the recipe steps in order to the JS slice; bytes outside the slice
// are preserved verbatim. Opaque HTML passes through unchanged (string_split
// fragments rejoin to the identical text; the other transforms have no JS
// slot to target).
ObfuscateDetail obfuscate_detailed(std::string_view payload, const ObfuscationRecipe& recipe);
std::string obfuscate(std::string_view payload, const ObfuscationRecipe& recipe);

struct ObfuscationDraw {
  std::string text;
  ObfuscationRecipe recipe;
};

// Selects exactly one technique with probability proportional to weights
// (ordered as kAllObfSteps) and applies it. Throws when no weight is
// positive.
ObfuscationDraw obfuscate_random(std::string_view payload, const std::array<double, 4>& weights,
                                 uint64_t seed);

}  // namespace xsslab
