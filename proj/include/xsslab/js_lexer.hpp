#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace xsslab {

// Lightweight JS-ish scanner. It is total: anything it cannot classify comes
// back as a single-character punct token, and an unterminated string or
// comment extends to end of input. Good enough for payload-scale code; not a
// real parser.
enum class JsTokenKind { identifier, number, string, punct, comment, whitespace };

struct JsToken {
  JsTokenKind kind;
  std::string_view text;  // view into the lexed source
  size_t begin = 0;
  size_t end = 0;

  bool is(JsTokenKind k, std::string_view t) const { return kind == k && text == t; }
};

std::vector<JsToken> lex_js(std::string_view source);

// Tokens that carry meaning: everything except whitespace and comments.
std::vector<JsToken> significant_tokens(std::string_view source);

// For a string token, the contents between the quotes (escapes untouched).
std::string_view string_inner(const JsToken& token);

bool is_js_identifier_start(unsigned char c);
bool is_js_identifier_part(unsigned char c);

}  // namespace xsslab
