#include "vchat/filename.hpp"

#include <algorithm>

#include "vchat/error.hpp"

namespace vchat {
namespace {

constexpr std::string_view k_base36 = "0123456789abcdefghijklmnopqrstuvwxyz";

bool is_id_char(char c) noexcept { return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9'); }
bool is_slug_char(char c) noexcept { return is_id_char(c) || c == '-'; }

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(text.substr(start));
      return parts;
    }
    parts.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
}

[[noreturn]] void malformed(std::string_view what, std::string_view text) {
  throw Error(Errc::malformed_name, std::string(what) + ": \"" + std::string(text) + "\"");
}

} // namespace

bool is_valid_id(std::string_view text) noexcept {
  return !text.empty() && std::all_of(text.begin(), text.end(), is_id_char);
}

bool is_valid_slug(std::string_view text) noexcept {
  return !text.empty() && std::all_of(text.begin(), text.end(), is_slug_char);
}

bool is_valid_org(std::string_view text) noexcept { return is_valid_slug(text); }

FileId FileId::parse(std::string_view text) {
  if (!is_valid_id(text)) malformed("invalid file id", text);
  return FileId(std::string(text));
}

WorkspacePath WorkspacePath::parse(std::string_view text) {
  if (text.empty()) malformed("empty path", text);
  if (text.front() == '/') malformed("absolute path", text);
  if (text.find('\\') != std::string_view::npos) malformed("backslash in path", text);
  if (text.find('\0') != std::string_view::npos) malformed("NUL in path", text);

  const auto slash = text.rfind('/');
  if (slash == std::string_view::npos) malformed("path has no directory", text);
  const auto dir = text.substr(0, slash);
  for (auto segment : split(dir, '/')) {
    if (segment.empty() || segment == "." || segment == "..") malformed("bad directory segment", text);
  }
  const auto file = text.substr(slash + 1);
  const auto dot = file.rfind('.');
  if (dot == std::string_view::npos || dot == 0 || dot + 1 == file.size()) {
    malformed("file name needs a stem and an extension", text);
  }
  WorkspacePath path;
  path.directory = std::string(dir);
  path.stem = std::string(file.substr(0, dot));
  path.extension = std::string(file.substr(dot + 1));
  return path;
}

std::optional<WorkspacePath> WorkspacePath::try_parse(std::string_view text) noexcept {
  try {
    return parse(text);
  } catch (...) {
    return std::nullopt;
  }
}

std::string WorkspacePath::str() const { return directory + "/" + stem + "." + extension; }

std::string ChainedName::stem() const {
  return name.str() + "_" + operation + "_" + prev.str() + "_" + org;
}

ParsedName parse_name(const WorkspacePath& path) {
  const auto fields = split(path.stem, '_');
  if (fields.size() == 1) return UploadName{FileId::parse(fields[0])};
  if (fields.size() != 4) malformed("chained name needs exactly four fields", path.stem);
  if (!is_valid_slug(fields[1])) malformed("invalid operation slug", path.stem);
  if (!is_valid_org(fields[3])) malformed("invalid org token", path.stem);
  return ChainedName{FileId::parse(fields[0]), std::string(fields[1]), FileId::parse(fields[2]),
                     std::string(fields[3])};
}

ParsedName parse_name(std::string_view path) { return parse_name(WorkspacePath::parse(path)); }

const FileId& leading_id(const ParsedName& name) noexcept {
  if (const auto* upload = std::get_if<UploadName>(&name)) return upload->id;
  return std::get<ChainedName>(name).name;
}

RandomIdSource::RandomIdSource(std::uint64_t seed, std::size_t length, std::uint64_t draws)
    : seed_(seed), length_(length), engine_(seed) {
  if (length_ == 0) throw Error(Errc::validation, "id length must be positive");
  for (std::uint64_t i = 0; i < draws; ++i) next();
}

std::string RandomIdSource::next() {
  // 12 base-36 digits fit in one 64-bit draw; mt19937_64 output is fixed by
  // the standard, so ids are reproducible across platforms.
  std::string id;
  id.reserve(length_);
  while (id.size() < length_) {
    auto value = engine_();
    for (int i = 0; i < 12 && id.size() < length_; ++i) {
      id.push_back(k_base36[value % 36]);
      value /= 36;
    }
  }
  ++draws_;
  return id;
}

std::string SequenceIdSource::next() {
  if (pos_ >= ids_.size()) throw Error(Errc::id_collision, "id sequence exhausted");
  return ids_[pos_++];
}

namespace {

template <typename MakePath>
WorkspacePath allocate(IdSource& ids, const PathExists& exists, std::size_t attempts, MakePath make) {
  std::string last;
  for (std::size_t i = 0; i < std::max<std::size_t>(attempts, 1); ++i) {
    last = ids.next();
    if (!is_valid_id(last)) throw Error(Errc::validation, "id source produced invalid id \"" + last + "\"");
    auto path = make(last);
    if (!exists || !exists(path)) return path;
  }
  throw Error(Errc::id_collision, "no fresh id after " + std::to_string(attempts) + " attempts (last \"" + last + "\")");
}

} // namespace

UploadAllocation new_upload_name(IdSource& ids, const PathExists& exists,
                                 std::optional<std::string_view> org_hint, const NameConfig& config,
                                 std::string_view extension) {
  auto path = allocate(ids, exists, config.max_attempts, [&](const std::string& id) {
    return WorkspacePath{config.directory, id, std::string(extension)};
  });
  std::string org = org_hint ? sanitize_org(*org_hint) : path.stem;
  return {std::move(path), std::move(org)};
}

WorkspacePath chain_name(std::string_view operation, const WorkspacePath& prev, IdSource& ids,
                         const PathExists& exists, const OrgLookup& upload_org, const NameConfig& config) {
  if (!is_valid_slug(operation)) {
    throw Error(Errc::invalid_slug, "operation slug \"" + std::string(operation) + "\" must match [a-z0-9-]+");
  }
  const auto parsed = parse_name(prev);
  std::string prev_id;
  std::string org;
  if (const auto* upload = std::get_if<UploadName>(&parsed)) {
    prev_id = upload->id.str();
    std::optional<std::string> recorded;
    if (upload_org) recorded = upload_org(upload->id);
    org = recorded && is_valid_org(*recorded) ? *recorded : prev_id;
  } else {
    const auto& chained = std::get<ChainedName>(parsed);
    prev_id = chained.name.str();
    org = chained.org;
  }
  return allocate(ids, exists, config.max_attempts, [&](const std::string& id) {
    return WorkspacePath{config.directory, id + "_" + std::string(operation) + "_" + prev_id + "_" + org, "png"};
  });
}

std::string sanitize_org(std::string_view raw) {
  std::string mapped;
  mapped.reserve(raw.size());
  for (char c : raw) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    if (c == '_' || c == ' ' || c == '/' || c == '\\') c = '-';
    if (!is_slug_char(c)) continue;
    if (c == '-' && (mapped.empty() || mapped.back() == '-')) continue;
    mapped.push_back(c);
  }
  if (mapped.size() > k_max_org_length) mapped.resize(k_max_org_length);
  while (!mapped.empty() && mapped.back() == '-') mapped.pop_back();
  return mapped.empty() ? "img" : mapped;
}

} // namespace vchat
