#include "vchat/registry.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "embedded.hpp"
#include "vchat/error.hpp"
#include "vchat/filename.hpp"
#include "vchat/kv_format.hpp"

namespace vchat {

std::string_view to_string(FieldRole role) noexcept {
  return role == FieldRole::image_path ? "image-path" : "text";
}

std::string_view to_string(OutputKind kind) noexcept {
  return kind == OutputKind::image_path ? "image-path" : "text";
}

namespace {

void validate(const ToolSpec& spec) {
  auto fail = [&](const std::string& why) {
    throw Error(Errc::validation, "tool \"" + spec.name + "\": " + why);
  };
  if (trim(spec.name).empty() || trim(spec.name) != spec.name) fail("name must be nonempty and trimmed");
  if (spec.usage_prompt.empty()) fail("usage prompt is empty");
  if (spec.input_arity < 1 || spec.input_arity > 3) fail("arity must be 1, 2 or 3");
  if (static_cast<int>(spec.input_roles.size()) != spec.input_arity) fail("input roles do not match arity");
  if (spec.produces_image() && !is_valid_slug(spec.operation_slug)) fail("image tools need a [a-z0-9-] slug");
  if (!spec.produces_image() && !spec.operation_slug.empty()) fail("text tools take no slug");
}

FieldRole parse_role(const std::string& text, const std::string& tool) {
  if (text == "image-path") return FieldRole::image_path;
  if (text == "text") return FieldRole::text;
  throw Error(Errc::config, "tool \"" + tool + "\": unknown input role \"" + text + "\"");
}

} // namespace

Registry::Registry(std::vector<ToolSpec> specs) : specs_(std::move(specs)) {
  std::set<std::string, std::less<>> slugs;
  for (const auto& spec : specs_) {
    validate(spec);
    if (enabled_.contains(spec.name)) throw Error(Errc::validation, "duplicate tool name \"" + spec.name + "\"");
    enabled_.insert(spec.name);
    if (!spec.operation_slug.empty() && !slugs.insert(spec.operation_slug).second) {
      throw Error(Errc::validation, "duplicate operation slug \"" + spec.operation_slug + "\"");
    }
  }
}

Registry Registry::with_enabled(std::span<const std::string> names) const {
  Registry copy = *this;
  copy.enabled_.clear();
  for (const auto& raw : names) {
    const auto name = trim(raw);
    if (find(name) == nullptr) throw Error(Errc::validation, "unknown tool \"" + name + "\" in enabled list");
    copy.enabled_.insert(name);
  }
  return copy;
}

bool Registry::is_enabled(std::string_view name) const { return enabled_.contains(name); }

std::vector<const ToolSpec*> Registry::enabled() const {
  std::vector<const ToolSpec*> out;
  for (const auto& spec : specs_) {
    if (enabled_.contains(spec.name)) out.push_back(&spec);
  }
  return out;
}

std::vector<std::string> Registry::enabled_names() const {
  std::vector<std::string> out;
  for (const auto* spec : enabled()) out.push_back(spec->name);
  return out;
}

const ToolSpec* Registry::find(std::string_view name) const noexcept {
  for (const auto& spec : specs_) {
    if (spec.name == name) return &spec;
  }
  return nullptr;
}

const ToolSpec& Registry::lookup(std::string_view name) const {
  const auto trimmed = trim(name);
  const auto* spec = find(trimmed);
  if (spec == nullptr) throw Error(Errc::unknown_tool, "\"" + trimmed + "\" is not a declared tool");
  if (!is_enabled(trimmed)) throw Error(Errc::disabled_tool, "\"" + trimmed + "\" is not enabled in this session");
  return *spec;
}

Registry parse_catalog(std::string_view text) {
  std::vector<ToolSpec> specs;
  for (const auto& record : parse_kv_records(text, ':')) {
    ToolSpec spec;
    spec.name = record.get("name").value_or("");
    auto need = [&](std::string_view key) {
      auto value = record.get(key);
      if (!value) {
        throw Error(Errc::config, "catalog record at line " + std::to_string(record.first_line) + " lacks \"" +
                                      std::string(key) + "\"");
      }
      return *value;
    };
    need("name");
    spec.usage_prompt = need("usage");
    const auto arity = need("arity");
    try {
      spec.input_arity = std::stoi(arity);
    } catch (const std::exception&) {
      throw Error(Errc::config, "tool \"" + spec.name + "\": bad arity \"" + arity + "\"");
    }
    std::stringstream roles(need("inputs"));
    for (std::string role; std::getline(roles, role, ',');) spec.input_roles.push_back(parse_role(trim(role), spec.name));
    const auto output = need("output");
    if (output == "image-path") {
      spec.output_kind = OutputKind::image_path;
    } else if (output == "text") {
      spec.output_kind = OutputKind::text;
    } else {
      throw Error(Errc::config, "tool \"" + spec.name + "\": unknown output kind \"" + output + "\"");
    }
    spec.operation_slug = record.get("slug").value_or("");
    spec.example_prompt = record.get("example").value_or("");
    specs.push_back(std::move(spec));
  }
  return Registry(std::move(specs));
}

Registry load_catalog(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot read catalog " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_catalog(buffer.str());
}

std::string_view builtin_catalog_text() { return detail::embedded_file("catalog.txt"); }

Registry builtin_catalog() { return parse_catalog(builtin_catalog_text()); }

std::string render_tool_block(const ToolSpec& spec) {
  std::string block = spec.usage_prompt.starts_with("useful") ? spec.name + ": " + spec.usage_prompt
                                                               : spec.usage_prompt;
  if (!spec.example_prompt.empty()) block += " Example: " + spec.example_prompt;
  return block;
}

std::string render_tools_section(const Registry& registry) {
  const auto tools = registry.enabled();
  if (tools.empty()) return std::string(k_no_tools_warning);
  std::string out;
  for (const auto* spec : tools) {
    if (!out.empty()) out += '\n';
    out += render_tool_block(*spec);
  }
  return out;
}

std::string tool_file_stem(std::size_t index, const ToolSpec& spec) {
  std::string stem = (index + 1 < 10 ? "0" : "") + std::to_string(index + 1) + "_";
  for (char c : spec.name) {
    stem.push_back(c == ' ' ? '-' : static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return stem;
}

std::vector<std::string> split_tool_input(std::string_view raw, int arity) {
  if (arity < 1) throw Error(Errc::validation, "arity must be positive");
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (int i = 0; i < arity - 1; ++i) {
    const auto comma = raw.find(',', start);
    if (comma == std::string_view::npos) {
      throw Error(Errc::arity_mismatch, "expected " + std::to_string(arity) + " comma separated fields, got " +
                                            std::to_string(i + 1) + " in \"" + std::string(raw) + "\"");
    }
    fields.push_back(trim(raw.substr(start, comma - start)));
    start = comma + 1;
  }
  fields.push_back(trim(raw.substr(start)));
  return fields;
}

} // namespace vchat
