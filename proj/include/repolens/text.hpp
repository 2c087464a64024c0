#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace repolens {

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
bool starts_with(std::string_view s, std::string_view prefix);
bool ends_with(std::string_view s, std::string_view suffix);

// Literal glob dialect: '*' matches any run, '?' one char, everything else
// (including brackets) is literal. Case-insensitive. POSIX fnmatch would turn
// the default bot pattern "*[bot]*" into a character class, which is not what
// identity screening needs.
bool glob_match(std::string_view pattern, std::string_view text);

std::string url_encode(std::string_view s);

}  // namespace repolens
