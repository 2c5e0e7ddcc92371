#include "vchat/kv_format.hpp"

#include "vchat/error.hpp"

namespace vchat {

std::string trim(std::string_view text) {
  constexpr std::string_view ws = " \t\r\n\f\v";
  const auto begin = text.find_first_not_of(ws);
  if (begin == std::string_view::npos) return {};
  const auto end = text.find_last_not_of(ws);
  return std::string(text.substr(begin, end - begin + 1));
}

std::optional<std::string> KvRecord::get(std::string_view key) const {
  for (const auto& [k, v] : entries) {
    if (k == key) return v;
  }
  return std::nullopt;
}

std::vector<KvRecord> parse_kv_records(std::string_view text, char delim) {
  std::vector<KvRecord> records;
  KvRecord current;
  std::size_t line_no = 0;
  auto flush = [&] {
    if (!current.entries.empty()) records.push_back(std::move(current));
    current = KvRecord{};
  };

  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const auto line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;

    const auto stripped = trim(line);
    if (stripped.empty() || stripped.front() == '#') continue;
    if (stripped == "---") {
      flush();
      continue;
    }
    const auto split = stripped.find(delim);
    if (split == std::string::npos) {
      throw Error(Errc::config, "line " + std::to_string(line_no) + ": expected key" + std::string(1, delim) + " value");
    }
    if (current.entries.empty()) current.first_line = line_no;
    current.entries.emplace_back(trim(std::string_view(stripped).substr(0, split)),
                                 trim(std::string_view(stripped).substr(split + 1)));
  }
  flush();
  return records;
}

} // namespace vchat
