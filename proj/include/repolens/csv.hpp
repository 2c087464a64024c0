#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace repolens {

// Minimal RFC-4180 CSV. Fields containing comma, quote, or newline are quoted.
std::string csv_escape(std::string_view field);
std::string csv_join(const std::vector<std::string>& fields);

// Parses a whole document; handles quoted fields and embedded newlines.
std::vector<std::vector<std::string>> csv_parse(std::string_view text);

}  // namespace repolens
