#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vchat {

enum class FieldRole { image_path, text };
enum class OutputKind { image_path, text };

std::string_view to_string(FieldRole role) noexcept;
std::string_view to_string(OutputKind kind) noexcept;

/// One declared visual tool: the name the model calls it by, the usage prompt
/// it reads, and the shape of its comma-separated input.
struct ToolSpec {
  std::string name;
  std::string usage_prompt;
  int input_arity = 1;
  std::vector<FieldRole> input_roles;
  OutputKind output_kind = OutputKind::image_path;
  /// Used by chain_name; empty for text-output tools.
  std::string operation_slug;
  std::string example_prompt;

  bool produces_image() const noexcept { return output_kind == OutputKind::image_path; }
};

/// Ordered, immutable tool catalog plus the subset enabled for a session.
class Registry {
public:
  /// Validates every spec; all tools start enabled.
  explicit Registry(std::vector<ToolSpec> specs);

  const std::vector<ToolSpec>& specs() const noexcept { return specs_; }
  std::size_t size() const noexcept { return specs_.size(); }

  /// Copy with only `names` enabled. Throws Error(validation) naming the
  /// first undeclared name.
  Registry with_enabled(std::span<const std::string> names) const;

  bool is_enabled(std::string_view name) const;
  std::vector<const ToolSpec*> enabled() const;
  std::vector<std::string> enabled_names() const;

  /// Exact, case-sensitive match on the declared name.
  const ToolSpec* find(std::string_view name) const noexcept;

  /// Trims surrounding whitespace, then matches exactly. Throws
  /// Error(unknown_tool) or Error(disabled_tool).
  const ToolSpec& lookup(std::string_view name) const;

private:
  std::vector<ToolSpec> specs_;
  std::set<std::string, std::less<>> enabled_;
};

/// The 22 built-in tools, parsed from the catalog data compiled into the library.
Registry builtin_catalog();
/// Parses the line-oriented catalog format (see core/data/catalog.txt).
Registry parse_catalog(std::string_view text);
Registry load_catalog(const std::filesystem::path& path);
std::string_view builtin_catalog_text();

/// `{name}: {usage}`. Usage prompts that already open with their own label
/// (anything not starting with "useful") are emitted as written.
std::string render_tool_block(const ToolSpec& spec);

/// Blocks of the enabled tools in declaration order, one per line. An empty
/// selection renders a single warning line.
std::string render_tools_section(const Registry& registry);

inline constexpr std::string_view k_no_tools_warning =
    "WARNING: no tools are enabled; answer from the conversation only.";

/// File stem used for a tool's golden render, e.g. "07_edge-detection-on-image".
std::string tool_file_stem(std::size_t index, const ToolSpec& spec);

/// Splits on the first `arity - 1` commas and trims each field, so the last
/// field may itself contain commas. Throws Error(arity_mismatch).
std::vector<std::string> split_tool_input(std::string_view raw, int arity);

} // namespace vchat
