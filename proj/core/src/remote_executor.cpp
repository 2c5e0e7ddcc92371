#include "vchat/remote_executor.hpp"

#include <nlohmann/json.hpp>

#include "http_util.hpp"
#include "vchat/digest.hpp"

namespace vchat {

ToolOutput remote_execute(const RemoteToolConfig& config, const ToolSpec& spec, std::span<const std::string> fields,
                          Workspace& workspace) {
  check_fields(spec, fields, workspace);

  std::optional<WorkspacePath> input;
  nlohmann::ordered_json request;
  request["tool"] = spec.name;
  request["fields"] = std::vector<std::string>(fields.begin(), fields.end());
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (spec.input_roles[i] != FieldRole::image_path) continue;
    input = WorkspacePath::parse(fields[i]);
    const auto bytes = workspace.read_bytes(*input);
    if (bytes.size() > config.max_payload_bytes) {
      throw Error(Errc::payload_too_large, input->str() + " exceeds the remote payload cap");
    }
    request["image"] = base64_encode(bytes);
    break;
  }

  const auto url = detail::split_url(config.endpoint);
  auto client = detail::make_client(url.origin, config.timeout_seconds);
  const auto body = request.dump();
  if (body.size() > config.max_payload_bytes) throw Error(Errc::payload_too_large, "request exceeds the payload cap");

  const auto result = client->Post(url.path.empty() ? "/" : url.path, body, "application/json");
  if (!result) throw Error(Errc::transport, "tool server unreachable: " + httplib::to_string(result.error()));
  if (result->body.size() > config.max_payload_bytes) {
    throw Error(Errc::payload_too_large, "tool server response exceeds the payload cap");
  }
  if (result->status != 200) {
    std::string detail;
    try {
      detail = nlohmann::json::parse(result->body).value("error", std::string());
    } catch (const nlohmann::json::exception&) {
    }
    throw Error(Errc::executor_failure, "tool server returned HTTP " + std::to_string(result->status) +
                                            (detail.empty() ? "" : ": " + detail));
  }

  nlohmann::json reply;
  try {
    reply = nlohmann::json::parse(result->body);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::malformed_response, std::string("tool server sent invalid JSON: ") + e.what());
  }
  if (!reply.is_object()) throw Error(Errc::malformed_response, "tool server reply is not an object");
  if (reply.contains("error") && reply["error"].is_string()) {
    throw Error(Errc::executor_failure, reply["error"].get<std::string>());
  }
  if (reply.contains("image") && reply["image"].is_string()) {
    if (!spec.produces_image()) throw Error(Errc::malformed_response, "\"" + spec.name + "\" must answer with text");
    const auto bytes = base64_decode(reply["image"].get<std::string>());
    if (bytes.empty()) throw Error(Errc::malformed_response, "tool server returned an empty image");

    ImageSidecar sidecar;
    WorkspacePath output;
    const auto annotation = fields.size() > 1 ? fields[1] : std::string();
    if (input) {
      const auto parent = workspace.read_sidecar(*input);
      output = workspace.allocate_chained(spec.operation_slug, *input);
      sidecar.caption = (annotation.empty() ? "" : annotation + " ") + "(" + spec.operation_slug + " of " +
                        parent.caption + ")";
      sidecar.applied_operations = parent.applied_operations;
      sidecar.applied_operations.push_back(spec.operation_slug);
      sidecar.source = ImageSource::derived;
      sidecar.org = std::get<ChainedName>(parse_name(output)).org;
    } else {
      output = workspace.allocate_root();
      sidecar = ImageSidecar{fields.front(), {}, ImageSource::generated, output.stem};
    }
    workspace.write_bytes(output, bytes);
    workspace.write_sidecar(output, sidecar);
    return ImageOut{output};
  }
  if (reply.contains("text") && reply["text"].is_string()) return TextOut{reply["text"].get<std::string>()};
  throw Error(Errc::malformed_response, "tool server reply has neither text nor image");
}

} // namespace vchat
