#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace xsslab {

// Standard base64 with padding.
std::string base64_encode(std::string_view bytes);

// Strict decode: rejects characters outside the alphabet, bad padding and
// truncated input. Unpadded input of valid length is accepted.
std::optional<std::string> base64_decode(std::string_view text);

// Percent-encodes every byte outside the unreserved set
// {A-Z a-z 0-9 - _ . ! ~ * ' ( )}; the single quote is always encoded as %27
// so the result can sit inside a single-quoted JS literal.
std::string percent_encode(std::string_view bytes);

// Strict decode: a '%' must be followed by two hex digits.
std::optional<std::string> percent_decode(std::string_view text);

// Escapes a string for inclusion in a single-quoted JS literal. Backslash and
// quote are escaped; control bytes become \n, \r, \t or \xHH so the literal
// never contains raw whitespace.
std::string escape_single_quoted(std::string_view raw);

// Resolves JS string-literal escapes (\\, \', \", \n, \r, \t, \b, \f, \v,
// \0, \xHH, \uHHHH). Unknown escapes drop the backslash, as JS does.
std::string unescape_js_string(std::string_view escaped);

// FNV-1a 64-bit, used to bind models to vocabulary files.
uint64_t fnv1a64(std::string_view bytes);

}  // namespace xsslab
