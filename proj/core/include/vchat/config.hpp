#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vchat/backend.hpp"
#include "vchat/engine.hpp"
#include "vchat/executors.hpp"
#include "vchat/prompt.hpp"
#include "vchat/registry.hpp"

namespace vchat {

/// Application settings read from a line-oriented `key = value` file.
///
///   history.max_tokens, history.estimator
///   prompts.dir, tools.catalog, tools.enabled (comma list)
///   backend.kind (remote | scripted | recording), backend.url, backend.model, backend.transcript
///   engine.max_steps, engine.format_retries, engine.max_output_tokens
///   executor.kind (mock | remote), executor.url, executor.max_payload_bytes
///   workspace.dir, server.host, server.port, session.seed, session.id_length
struct AppConfig {
  TokenBudget budget;
  std::optional<std::filesystem::path> prompts_dir;
  std::optional<std::filesystem::path> tools_catalog;
  std::vector<std::string> tools_enabled;

  std::string backend_kind = "remote";
  std::string backend_url = "https://api.openai.com";
  std::string backend_model = "text-davinci-003";
  std::optional<std::filesystem::path> backend_transcript;

  EngineConfig engine;

  std::string executor_kind = "mock";
  std::string executor_url;
  std::size_t executor_max_payload_bytes = 16u * 1024u * 1024u;

  std::filesystem::path workspace_dir = "vchat-sessions";
  std::string server_host = "127.0.0.1";
  int server_port = 8080;
  std::optional<std::uint64_t> session_seed;
  std::size_t session_id_length = 8;

  /// Applies one key. Throws Error(config) for unknown keys or bad values.
  void set(std::string_view key, std::string_view value);
  void validate() const;
};

AppConfig parse_config(std::string_view text);
AppConfig load_config(const std::filesystem::path& path);

std::vector<std::string> split_list(std::string_view text);

/// Prompt files and tool catalog shared read-only by every session.
struct Resources {
  PrinciplePromptSet principles;
  Registry catalog;
};

Resources load_resources(const AppConfig& config);

/// A fresh backend for backend.kind. For "recording" this is the remote
/// backend; sessions created with a recorder wrap it themselves.
std::shared_ptr<CompletionBackend> make_backend(const AppConfig& config);

std::shared_ptr<ToolExecutor> make_executor(const AppConfig& config);

} // namespace vchat
