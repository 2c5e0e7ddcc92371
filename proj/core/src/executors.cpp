#include "vchat/executors.hpp"

#include "vchat/error.hpp"

namespace vchat {

void check_fields(const ToolSpec& spec, std::span<const std::string> fields, const Workspace& workspace) {
  if (static_cast<int>(fields.size()) != spec.input_arity) {
    throw Error(Errc::arity_mismatch, "\"" + spec.name + "\" takes " + std::to_string(spec.input_arity) +
                                          " fields, got " + std::to_string(fields.size()));
  }
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (spec.input_roles[i] != FieldRole::image_path) continue;
    const auto path = WorkspacePath::try_parse(fields[i]);
    if (!path || !workspace.exists(*path)) {
      throw Error(Errc::missing_file, "\"" + fields[i] + "\" is not an image in the workspace");
    }
  }
}

std::string_view placeholder_png() noexcept {
  static constexpr unsigned char k_png[] = {
      0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a, 0x00, 0x00, 0x00, 0x0d, 0x49, 0x48, 0x44, 0x52,
      0x00, 0x00, 0x00, 0x01, 0x00, 0x00, 0x00, 0x01, 0x08, 0x06, 0x00, 0x00, 0x00, 0x1f, 0x15, 0xc4,
      0x89, 0x00, 0x00, 0x00, 0x0b, 0x49, 0x44, 0x41, 0x54, 0x78, 0xda, 0x63, 0x60, 0x00, 0x02, 0x00,
      0x00, 0x05, 0x00, 0x01, 0xe9, 0xfa, 0xdc, 0xd8, 0x00, 0x00, 0x00, 0x00, 0x49, 0x45, 0x4e, 0x44,
      0xae, 0x42, 0x60, 0x82};
  return {reinterpret_cast<const char*>(k_png), sizeof(k_png)};
}

WorkspacePath mock_image_transform(Workspace& workspace, const WorkspacePath& input, std::string_view slug,
                                   std::string_view annotation) {
  const auto parent = workspace.read_sidecar(input);
  const auto output = workspace.allocate_chained(slug, input);
  workspace.write_bytes(output, placeholder_png());

  ImageSidecar sidecar;
  sidecar.caption = "(" + std::string(slug) + " of " + parent.caption + ")";
  if (!annotation.empty()) sidecar.caption = std::string(annotation) + " " + sidecar.caption;
  sidecar.applied_operations = parent.applied_operations;
  sidecar.applied_operations.emplace_back(slug);
  sidecar.source = ImageSource::derived;
  sidecar.org = std::get<ChainedName>(parse_name(output)).org;
  workspace.write_sidecar(output, sidecar);
  return output;
}

namespace {

std::string annotation_for(const ToolSpec& spec, std::span<const std::string> fields) {
  if (spec.operation_slug == "remove-sth") return "remove " + fields[1];
  if (spec.operation_slug == "replace-sth") return "replace " + fields[1] + " with " + fields[2];
  return fields.size() > 1 ? fields[1] : std::string();
}

} // namespace

ToolOutput MockExecutor::execute(const ToolSpec& spec, std::span<const std::string> fields, Workspace& workspace) {
  check_fields(spec, fields, workspace);

  const bool has_image_input = spec.input_roles.front() == FieldRole::image_path;
  if (!spec.produces_image()) {
    if (!has_image_input) return TextOut{fields.front()};
    const auto caption = workspace.read_sidecar(*WorkspacePath::try_parse(fields.front())).caption;
    if (spec.input_arity == 1) return TextOut{caption};
    return TextOut{"Based on the image: " + caption};
  }

  if (!has_image_input) {
    const auto output = workspace.allocate_root();
    workspace.write_bytes(output, placeholder_png());
    workspace.write_sidecar(output, ImageSidecar{fields.front(), {}, ImageSource::generated, output.stem});
    return ImageOut{output};
  }
  const auto input = *WorkspacePath::try_parse(fields.front());
  return ImageOut{mock_image_transform(workspace, input, spec.operation_slug, annotation_for(spec, fields))};
}

ExecutorRouter::ExecutorRouter(std::shared_ptr<ToolExecutor> fallback) : fallback_(std::move(fallback)) {
  if (!fallback_) throw Error(Errc::validation, "executor router needs a fallback");
}

void ExecutorRouter::route(std::string tool_name, std::shared_ptr<ToolExecutor> executor) {
  routes_[std::move(tool_name)] = std::move(executor);
}

ToolOutput ExecutorRouter::execute(const ToolSpec& spec, std::span<const std::string> fields, Workspace& workspace) {
  const auto it = routes_.find(spec.name);
  return (it != routes_.end() ? *it->second : *fallback_).execute(spec, fields, workspace);
}

} // namespace vchat
