#pragma once

#include <cstddef>
#include <string>

#include "vchat/executors.hpp"

namespace vchat {

inline constexpr std::size_t k_default_max_payload_bytes = 16u * 1024u * 1024u;

struct RemoteToolConfig {
  /// Full URL the request is POSTed to.
  std::string endpoint;
  std::size_t max_payload_bytes = k_default_max_payload_bytes;
  int timeout_seconds = 120;
};

/// Wire protocol:
///   request  {tool, fields:[...], image?: base64 of the first image-path field}
///   response {text?: string, image?: base64, error?: string}
/// A returned image is stored under a chained name (or a root name for tools
/// without an image input). Throws Error(transport), Error(executor_failure),
/// Error(malformed_response) or Error(payload_too_large).
ToolOutput remote_execute(const RemoteToolConfig& config, const ToolSpec& spec, std::span<const std::string> fields,
                          Workspace& workspace);

class RemoteExecutor final : public ToolExecutor {
public:
  explicit RemoteExecutor(RemoteToolConfig config) : config_(std::move(config)) {}

  ToolOutput execute(const ToolSpec& spec, std::span<const std::string> fields, Workspace& workspace) override {
    return remote_execute(config_, spec, fields, workspace);
  }

private:
  RemoteToolConfig config_;
};

} // namespace vchat
