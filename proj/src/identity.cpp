#include "repolens/identity.hpp"

#include "repolens/text.hpp"

namespace repolens {

const std::vector<std::string>& default_bot_patterns() {
  static const std::vector<std::string> patterns = {
      "*[bot]*", "*-bot@*", "*bot@users.noreply.github.com",
      "dependabot*", "renovate*", "greenkeeper*",
  };
  return patterns;
}

AuthorId resolve_identity(const std::string& name, const std::string& email,
                          const AliasMap& alias_map,
                          const std::vector<std::string>& bot_patterns) {
  const std::string norm_email = to_lower(trim(email));
  const std::string norm_name = to_lower(trim(name));
  if (norm_email.empty() && norm_name.empty())
    throw UnidentifiableAuthor("author has neither name nor email");

  std::string key = norm_email;
  if (!key.empty()) {
    auto it = alias_map.find(key);
    if (it != alias_map.end()) key = it->second;
  } else {
    key = norm_name;
  }

  bool bot = false;
  for (const auto& pat : bot_patterns) {
    if (glob_match(pat, name) || glob_match(pat, email)) {
      bot = true;
      break;
    }
  }
  return AuthorId{key, trim(name), bot};
}

AliasMap load_alias_map(const std::string& text) {
  AliasMap map;
  for (const auto& raw : split(text, '\n')) {
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    auto sep = line.find_first_of("=,");
    if (sep == std::string::npos) continue;
    std::string from = to_lower(trim(line.substr(0, sep)));
    std::string to = to_lower(trim(line.substr(sep + 1)));
    if (!from.empty() && !to.empty()) map[from] = to;
  }
  return map;
}

}  // namespace repolens
