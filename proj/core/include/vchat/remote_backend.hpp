#pragma once

#include <string>

#include "vchat/backend.hpp"

namespace vchat {

inline constexpr const char* k_api_key_env = "VCHAT_API_KEY";

struct RemoteBackendConfig {
  /// Scheme, host and optional port, plus an optional path prefix.
  std::string base_url = "https://api.openai.com";
  std::string endpoint = "/v1/completions";
  std::string model = "text-davinci-003";
  /// Empty: read from VCHAT_API_KEY.
  std::string api_key;
  int timeout_seconds = 60;
};

/// Completion-style JSON over HTTP: posts {model, prompt, stop, max_tokens,
/// temperature} and reads choices[0].text. Safe for concurrent calls.
class RemoteBackend final : public CompletionBackend {
public:
  explicit RemoteBackend(RemoteBackendConfig config);

  /// Throws Error(transport) for connection failures, non-200 statuses and
  /// unreadable bodies.
  std::string complete(const CompletionRequest& request) override;

private:
  RemoteBackendConfig config_;
};

} // namespace vchat
