#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace vchat {

/// One record of a line-oriented `key<delim> value` document.
struct KvRecord {
  std::vector<std::pair<std::string, std::string>> entries;
  std::size_t first_line = 0;

  std::optional<std::string> get(std::string_view key) const;
};

/// Parses `key<delim> value` lines. Lines starting with '#' and blank lines are
/// skipped; a line holding only `---` starts a new record. Keys and values are
/// trimmed. Throws Error(config) on a line without the delimiter.
std::vector<KvRecord> parse_kv_records(std::string_view text, char delim);

std::string trim(std::string_view text);

} // namespace vchat
