#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace repolens {

struct AuthorId {
  std::string canonical_key;  // non-empty, lowercase
  std::string display_name;
  bool is_bot = false;

  friend bool operator==(const AuthorId&, const AuthorId&) = default;
  friend auto operator<=>(const AuthorId& a, const AuthorId& b) {
    return a.canonical_key <=> b.canonical_key;
  }
};

struct UnidentifiableAuthor : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// email -> canonical replacement, keys pre-lowercased at load time.
using AliasMap = std::map<std::string, std::string>;

const std::vector<std::string>& default_bot_patterns();

// canonical_key = alias_map[lower(trim(email))] if present, else
// lower(trim(email)) if non-empty, else lower(trim(name)).
// is_bot if name or email matches any pattern (literal-glob, see text.hpp).
AuthorId resolve_identity(const std::string& name, const std::string& email,
                          const AliasMap& alias_map,
                          const std::vector<std::string>& bot_patterns);

// Plain-text alias file: one "from=to" or "from,to" entry per line, '#' comments.
AliasMap load_alias_map(const std::string& text);

}  // namespace repolens
