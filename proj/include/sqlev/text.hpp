#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace sqlev {

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);  // ASCII only
bool iequals(std::string_view a, std::string_view b);
bool istarts_with(std::string_view s, std::string_view prefix);
bool icontains(std::string_view haystack, std::string_view needle);

// Lowercased runs of [A-Za-z0-9_], in order of appearance.
std::vector<std::string> tokenize(std::string_view s);

// tokenize() plus splitting of snake_case tokens into their parts.
std::vector<std::string> tokenize_split(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

// Decodes UTF-8 into Unicode scalar values; invalid bytes become U+FFFD.
std::u32string utf8_decode(std::string_view s);

std::uint64_t fnv1a64(std::string_view data);
std::string fnv1a64_hex(std::string_view data);

std::string base64_encode(std::string_view data);
std::string base64_decode(std::string_view data);  // throws DataError on bad input

// Shortest round-trip decimal rendering for doubles.
std::string render_double(double v);

}  // namespace sqlev
