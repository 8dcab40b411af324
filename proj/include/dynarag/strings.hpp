#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace dynarag {

std::string_view trim(std::string_view s);
std::string to_lower(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
std::vector<std::string> whitespace_tokens(std::string_view s);
bool starts_with(std::string_view s, std::string_view prefix);
bool ends_with(std::string_view s, std::string_view suffix);

// Shortest round-trip decimal form, locale independent.
std::string format_double(double v);

}  // namespace dynarag
