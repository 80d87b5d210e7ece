#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace ecpt::text {

/// Byte length of the UTF-8 sequence starting with `lead`. Invalid lead
/// bytes count as a single byte so iteration always advances.
std::size_t utf8_length(unsigned char lead);

/// Splits into code points, each kept as its UTF-8 byte string.
std::vector<std::string_view> utf8_chars(std::string_view s);

/// Decodes to code points; invalid sequences decode byte-by-byte as U+FFFD.
std::u32string utf8_decode(std::string_view s);
std::string utf8_encode(std::u32string_view s);

bool is_space(char c);
std::string_view trim(std::string_view s);
std::string_view rtrim(std::string_view s);

/// Collapses every run of ASCII whitespace to one space and trims the ends.
std::string normalize_whitespace(std::string_view s);

/// Splits on runs of ASCII whitespace.
std::vector<std::string> split_whitespace(std::string_view s);

/// `\n` -> `\\n`, `\t` -> `\\t`, `\\` -> `\\\\`; used by line-oriented files.
std::string escape_line(std::string_view s);
std::string unescape_line(std::string_view s);

std::string ascii_lower(std::string_view s);

}  // namespace ecpt::text
