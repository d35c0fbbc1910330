#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace dialectqe::textnorm {

// Unicode canonical composition (NFC) of a UTF-8 string.
std::string nfc(std::string_view utf8);

// Strips leading and trailing code points in general categories P* and S*.
std::string strip_edge_punct(std::string_view utf8);

// Splits on Unicode whitespace; empty tokens are never returned.
std::vector<std::string_view> split_whitespace(std::string_view utf8);

// Trims ASCII whitespace from both ends.
std::string_view trim(std::string_view s);

// Replaces ill-formed UTF-8 sequences with U+FFFD. `lossy` is set when a
// replacement happened.
std::string sanitize_utf8(std::string_view bytes, bool& lossy);

}  // namespace dialectqe::textnorm
