#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

namespace lingua_adapt {

/// True when `bytes` is well-formed UTF-8 (no overlongs, no surrogates, <= U+10FFFF).
bool is_valid_utf8(std::string_view bytes);

/// Decodes `bytes` and re-encodes it, replacing every maximal ill-formed
/// subsequence with U+FFFD. `replacements` (if given) is incremented per substitution.
std::string sanitize_utf8(std::string_view bytes, std::size_t* replacements = nullptr);

/// Number of code points in well-formed UTF-8 (ill-formed sequences count once each).
std::size_t count_codepoints(std::string_view utf8);

/// Unicode NFC normalization. Input must be valid UTF-8.
std::string nfc(std::string_view utf8);

/// Appends the UTF-8 encoding of `cp` to `out`.
void append_utf8(std::string& out, char32_t cp);

std::string to_hex(std::string_view bytes);
std::string from_hex(std::string_view hex);

} // namespace lingua_adapt
