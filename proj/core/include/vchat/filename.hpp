#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace vchat {

inline constexpr std::size_t k_default_id_length = 8;
inline constexpr std::size_t k_max_org_length = 16;

/// [a-z0-9]+
bool is_valid_id(std::string_view text) noexcept;
/// [a-z0-9-]+ : operation slugs use hyphens, never underscores.
bool is_valid_slug(std::string_view text) noexcept;
/// Org tokens share the slug alphabet.
bool is_valid_org(std::string_view text) noexcept;

/// Short base-36 identifier naming one workspace image.
class FileId {
public:
  /// Throws Error(malformed_name) unless `text` is nonempty [a-z0-9].
  static FileId parse(std::string_view text);

  const std::string& str() const noexcept { return value_; }

  friend auto operator<=>(const FileId&, const FileId&) = default;

private:
  explicit FileId(std::string value) : value_(std::move(value)) {}
  std::string value_;
};

/// A relative, workspace-scoped file name of the form `{directory}/{stem}.{extension}`.
struct WorkspacePath {
  std::string directory = "image";
  std::string stem;
  std::string extension = "png";

  /// Rejects absolute paths, backslashes, "." / ".." / empty segments and
  /// names without a directory, stem or extension.
  static WorkspacePath parse(std::string_view text);
  static std::optional<WorkspacePath> try_parse(std::string_view text) noexcept;

  std::string str() const;

  friend bool operator==(const WorkspacePath&, const WorkspacePath&) = default;
};

struct UploadName {
  FileId id;
  friend bool operator==(const UploadName&, const UploadName&) = default;
};

/// `{name}_{operation}_{prev}_{org}`
struct ChainedName {
  FileId name;
  std::string operation;
  FileId prev;
  std::string org;

  std::string stem() const;
  friend bool operator==(const ChainedName&, const ChainedName&) = default;
};

using ParsedName = std::variant<UploadName, ChainedName>;

/// Total over arbitrary input: malformed stems raise Error(malformed_name),
/// never anything else.
ParsedName parse_name(const WorkspacePath& path);
ParsedName parse_name(std::string_view path);

const FileId& leading_id(const ParsedName& name) noexcept;

/// Produces candidate file ids. Implementations need not guarantee
/// uniqueness; callers check the workspace.
class IdSource {
public:
  virtual ~IdSource() = default;
  virtual std::string next() = 0;
};

/// Seeded base-36 ids. The (seed, draws) pair fully determines the state.
class RandomIdSource final : public IdSource {
public:
  explicit RandomIdSource(std::uint64_t seed, std::size_t length = k_default_id_length,
                          std::uint64_t draws = 0);

  std::string next() override;

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t draws() const noexcept { return draws_; }
  std::size_t length() const noexcept { return length_; }

private:
  std::uint64_t seed_;
  std::size_t length_;
  std::uint64_t draws_ = 0;
  std::mt19937_64 engine_;
};

/// Yields a fixed list of ids in order; throws Error(id_collision) once exhausted.
class SequenceIdSource final : public IdSource {
public:
  explicit SequenceIdSource(std::vector<std::string> ids) : ids_(std::move(ids)) {}
  std::string next() override;

private:
  std::vector<std::string> ids_;
  std::size_t pos_ = 0;
};

struct NameConfig {
  std::string directory = "image";
  std::size_t max_attempts = 4;
};

using PathExists = std::function<bool(const WorkspacePath&)>;
/// Org token recorded for an upload, if any.
using OrgLookup = std::function<std::optional<std::string>(const FileId&)>;

struct UploadAllocation {
  WorkspacePath path;
  std::string org;
};

/// Allocates `image/{id}.{extension}` for an id not yet present. The org token is
/// the sanitized hint when given, otherwise the id itself.
UploadAllocation new_upload_name(IdSource& ids, const PathExists& exists,
                                 std::optional<std::string_view> org_hint = std::nullopt,
                                 const NameConfig& config = {},
                                 std::string_view extension = "png");

/// Allocates `image/{new}_{operation}_{prev}_{org}.png` for a file derived from
/// `prev`. Uploads contribute their recorded org (or their id); chained inputs
/// propagate theirs unchanged.
WorkspacePath chain_name(std::string_view operation, const WorkspacePath& prev, IdSource& ids,
                         const PathExists& exists = {}, const OrgLookup& upload_org = {},
                         const NameConfig& config = {});

/// Lowercases, maps `_`, space and path separators to `-`, drops anything outside
/// [a-z0-9-], collapses and trims hyphens, truncates to 16 characters. Falls
/// back to "img" when nothing survives.
std::string sanitize_org(std::string_view raw);

} // namespace vchat
