#include "xsslab/js_lexer.hpp"

namespace xsslab {

bool is_js_identifier_start(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' || c == '$' || c >= 0x80;
}

bool is_js_identifier_part(unsigned char c) {
  return is_js_identifier_start(c) || (c >= '0' && c <= '9');
}

namespace {

bool is_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_digit(unsigned char c) { return c >= '0' && c <= '9'; }

}  // namespace

std::vector<JsToken> lex_js(std::string_view src) {
  std::vector<JsToken> tokens;
  size_t i = 0;
  const size_t n = src.size();

  auto emit = [&](JsTokenKind kind, size_t begin, size_t end) {
    tokens.push_back({kind, src.substr(begin, end - begin), begin, end});
  };

  while (i < n) {
    const size_t begin = i;
    unsigned char c = static_cast<unsigned char>(src[i]);

    if (is_space(c)) {
      while (i < n && is_space(static_cast<unsigned char>(src[i]))) ++i;
      emit(JsTokenKind::whitespace, begin, i);
      continue;
    }

    if (c == '\'' || c == '"' || c == '`') {
      const char quote = src[i];
      ++i;
      while (i < n) {
        if (src[i] == '\\' && i + 1 < n) {
          i += 2;
          continue;
        }
        if (src[i] == quote) {
          ++i;
          break;
        }
        ++i;
      }
      emit(JsTokenKind::string, begin, i);
      continue;
    }

    if (c == '/' && i + 1 < n && src[i + 1] == '*') {
      i += 2;
      while (i + 1 < n && !(src[i] == '*' && src[i + 1] == '/')) ++i;
      i = (i + 1 < n) ? i + 2 : n;
      emit(JsTokenKind::comment, begin, i);
      continue;
    }
    if (c == '/' && i + 1 < n && src[i + 1] == '/') {
      while (i < n && src[i] != '\n') ++i;
      emit(JsTokenKind::comment, begin, i);
      continue;
    }

    if (is_js_identifier_start(c)) {
      while (i < n && is_js_identifier_part(static_cast<unsigned char>(src[i]))) ++i;
      emit(JsTokenKind::identifier, begin, i);
      continue;
    }

    if (is_digit(c)) {
      if (c == '0' && i + 1 < n && (src[i + 1] == 'x' || src[i + 1] == 'X')) {
        i += 2;
        while (i < n && (is_digit(static_cast<unsigned char>(src[i])) ||
                         (src[i] >= 'a' && src[i] <= 'f') || (src[i] >= 'A' && src[i] <= 'F')))
          ++i;
      } else {
        while (i < n && (is_digit(static_cast<unsigned char>(src[i])) || src[i] == '.')) ++i;
      }
      emit(JsTokenKind::number, begin, i);
      continue;
    }

    ++i;
    emit(JsTokenKind::punct, begin, i);
  }
  return tokens;
}

std::vector<JsToken> significant_tokens(std::string_view source) {
  std::vector<JsToken> out;
  for (auto& tok : lex_js(source)) {
    if (tok.kind != JsTokenKind::whitespace && tok.kind != JsTokenKind::comment) {
      out.push_back(tok);
    }
  }
  return out;
}

std::string_view string_inner(const JsToken& token) {
  std::string_view text = token.text;
  if (text.size() >= 2 && (text.front() == '\'' || text.front() == '"' || text.front() == '`') &&
      text.back() == text.front()) {
    return text.substr(1, text.size() - 2);
  }
  // Unterminated literal: drop the opening quote only.
  if (!text.empty() && (text.front() == '\'' || text.front() == '"' || text.front() == '`')) {
    return text.substr(1);
  }
  return text;
}

}  // namespace xsslab
