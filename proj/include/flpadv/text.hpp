#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace flpadv::text {

std::string_view trim(std::string_view s);
std::string to_lower(std::string_view s);

// Trims and replaces every internal whitespace run with one space.
std::string collapse_whitespace(std::string_view s);

// Lower-cased, trimmed, single-spaced. Catalog identity for names.
std::string canonical_name(std::string_view s);

std::vector<std::string> split(std::string_view s, char delimiter);
std::string join(const std::vector<std::string>& parts, std::string_view separator);

bool iequals(std::string_view a, std::string_view b);

// Case-insensitive search for `needle` in `haystack` starting at `from`.
std::size_t ifind(std::string_view haystack, std::string_view needle, std::size_t from = 0);

// Word characters for method-name boundaries: alphanumerics, '-' and '_'.
bool is_word_char(char c);

// True when haystack[pos, pos+len) is not glued to neighbouring word characters.
bool at_word_boundary(std::string_view haystack, std::size_t pos, std::size_t len);

// Shortest decimal representation that parses back to the same double.
std::string format_real(double value);

// Whole-string numeric parsing; surrounding whitespace is ignored.
std::optional<std::int64_t> parse_int(std::string_view s);
std::optional<double> parse_real(std::string_view s);

}  // namespace flpadv::text
