#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace korpusmap::utf8 {

/// Decodes UTF-8 into code points. Invalid sequences decode to U+FFFD.
std::vector<char32_t> decode(std::string_view text);

std::string encode(const std::vector<char32_t>& code_points);

/// Number of code points in text.
std::size_t length(std::string_view text);

/// Prefix of text holding at most max_code_points code points.
std::string_view prefix(std::string_view text, std::size_t max_code_points);

/// Simple (one-to-one) Unicode lowercase mapping.
std::string to_lower(std::string_view text);

std::string_view trim(std::string_view text);

}  // namespace korpusmap::utf8
