#ifndef EVT_TEXT_HPP
#define EVT_TEXT_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace evt {

/// Decodes a UTF-8 string into code points. Malformed bytes are passed
/// through as their raw byte value so decoding is total.
std::vector<char32_t> utf8_decode(std::string_view s);

std::string utf8_encode(const std::vector<char32_t>& cps);
std::string utf8_encode(char32_t cp);

/// Lowercases ASCII plus the Latin-1 / Latin Extended-A letters, which
/// covers Italian text. Other code points pass through unchanged.
char32_t lower_codepoint(char32_t c);
std::string lowercase(std::string_view s);

/// Replaces every ASCII decimal digit with '0'.
std::string normalize_digits(std::string_view s);

std::vector<std::string> split(std::string_view s, char sep);

/// Strips trailing '\r', spaces and tabs.
std::string_view rstrip(std::string_view s);

}  // namespace evt

#endif  // EVT_TEXT_HPP
